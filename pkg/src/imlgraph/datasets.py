"""Deterministic benchmark graphs with planted hierarchical communities.

Each preset fixes exact node and edge counts and a two-level community
plan: communities split the nodes near-evenly, optional sub-communities
split each community again, and the edge budget is divided between
within-sub, cross-sub (same community), and cross-community strata. Every
sub gets a spanning tree and the strata are wired into one connected
component before the remaining budget is sampled, so the generated graph
is always connected and the counts land exactly.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import UnknownIdError
from .graph import Graph, graph_from_edges


@dataclass(frozen=True)
class PlantedSpec:
    name: str
    n_nodes: int
    n_edges: int
    n_communities: int
    sub_lo: int
    sub_hi: int
    intra_sub_frac: float
    cross_sub_frac: float
    seed: int


PRESETS = {
    "easy": PlantedSpec("easy", 115, 613, 12, 1, 1, 0.78, 0.0, 1101),
    "medium": PlantedSpec("medium", 297, 2148, 13, 2, 3, 0.55, 0.23, 2202),
    "hard": PlantedSpec("hard", 1133, 5451, 25, 2, 3, 0.55, 0.20, 3303),
    "stress": PlantedSpec("stress", 2646, 10455, 25, 3, 4, 0.50, 0.20, 4404),
}


def _near_even_split(total: int, parts: int) -> list[int]:
    base, extra = divmod(total, parts)
    return [base + (1 if i < extra else 0) for i in range(parts)]


def planted_graph(spec: PlantedSpec) -> tuple[Graph, np.ndarray]:
    """Generate one preset; returns the graph and the planted community of
    each node (useful as an oracle for detection quality)."""
    rng = np.random.default_rng(spec.seed)
    n, m, k = spec.n_nodes, spec.n_edges, spec.n_communities

    comm_sizes = _near_even_split(n, k)
    sub_counts = rng.integers(spec.sub_lo, spec.sub_hi + 1, size=k)
    community: list[list[int]] = []
    subs: list[list[int]] = []  # all subs, flat
    sub_of_comm: list[list[int]] = []  # sub indices per community
    assign = np.zeros(n, dtype=np.int64)
    cursor = 0
    for ci, size in enumerate(comm_sizes):
        members = list(range(cursor, cursor + size))
        assign[members] = ci
        cursor += size
        community.append(members)
        offsets = np.cumsum([0] + _near_even_split(size, int(sub_counts[ci])))
        own = []
        for si in range(len(offsets) - 1):
            own.append(len(subs))
            subs.append(members[offsets[si] : offsets[si + 1]])
        sub_of_comm.append(own)

    b_intra = round(spec.intra_sub_frac * m)
    b_cross = round(spec.cross_sub_frac * m)
    b_inter = m - b_intra - b_cross

    used: set[tuple[int, int]] = set()
    edges: list[tuple[int, int]] = []

    def add(u: int, v: int) -> None:
        key = (u, v) if u < v else (v, u)
        used.add(key)
        edges.append(key)

    # connectivity skeleton: spanning tree per sub, chain across subs, tree
    # across communities; skeleton edges count against their stratum budget
    n_intra = n_cross = n_inter = 0
    for sub in subs:
        for i in range(1, len(sub)):
            add(sub[i], sub[int(rng.integers(0, i))])
            n_intra += 1
    for own in sub_of_comm:
        for si in range(1, len(own)):
            a = subs[own[si - 1]]
            b = subs[own[si]]
            add(a[int(rng.integers(0, len(a)))], b[int(rng.integers(0, len(b)))])
            n_cross += 1
    for ci in range(1, k):
        cj = int(rng.integers(0, ci))
        a, b = community[ci], community[cj]
        add(a[int(rng.integers(0, len(a)))], b[int(rng.integers(0, len(b)))])
        n_inter += 1

    def fill_from_pool(pool: list[tuple[int, int]], need: int, label: str) -> None:
        pool = [p for p in pool if p not in used]
        if need > len(pool):
            raise ValueError(
                f"{spec.name}: {label} budget {need} exceeds {len(pool)} available pairs"
            )
        if need <= 0:
            return
        pick = rng.choice(len(pool), size=need, replace=False)
        for idx in np.sort(pick):
            add(*pool[int(idx)])

    intra_pool = [
        (sub[i], sub[j])
        for sub in subs
        for i in range(len(sub))
        for j in range(i + 1, len(sub))
    ]
    fill_from_pool(intra_pool, b_intra - n_intra, "intra-sub")

    if b_cross:
        cross_pool = [
            (u, v)
            for own in sub_of_comm
            for ai in range(len(own))
            for bi in range(ai + 1, len(own))
            for u in subs[own[ai]]
            for v in subs[own[bi]]
        ]
        cross_pool = [(min(u, v), max(u, v)) for u, v in cross_pool]
        fill_from_pool(cross_pool, b_cross - n_cross, "cross-sub")

    need = b_inter - n_inter
    while need > 0:
        u = int(rng.integers(0, n))
        v = int(rng.integers(0, n))
        if u == v or assign[u] == assign[v]:
            continue
        key = (u, v) if u < v else (v, u)
        if key in used:
            continue
        add(*key)
        need -= 1

    assert len(edges) == m, f"{spec.name}: generated {len(edges)} edges, wanted {m}"
    return graph_from_edges(n, edges), assign


def preset_graph(name: str) -> Graph:
    """One of the named benchmark graphs (easy, medium, hard, stress)."""
    if name not in PRESETS:
        raise UnknownIdError(f"unknown preset {name!r}; choose from {sorted(PRESETS)}")
    return planted_graph(PRESETS[name])[0]
