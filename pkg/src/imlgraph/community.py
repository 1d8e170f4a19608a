"""Community detection by greedy modularity optimization.

Two-phase multilevel scheme: a local-move pass reassigns single nodes to the
neighboring community with the best modularity gain, then the partition is
collapsed into an aggregate graph and the pass repeats one level up. The node
visit order is shuffled from a seeded generator, so results are reproducible
per seed. Ties between equally good communities go to the lowest community
index.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import EmptyGraphError
from .graph import CommunityTree, Graph, HierarchicalGraph, build_hierarchy


@dataclass(frozen=True)
class LouvainConfig:
    resolution: float = 1.0
    seed: int = 0
    max_levels: int = 10
    min_modularity_gain: float = 1e-7


@dataclass(frozen=True)
class Partition:
    """A flat assignment of nodes to dense community indices 0..k-1."""

    assign: np.ndarray
    community_count: int

    @classmethod
    def from_assignments(cls, assign) -> "Partition":
        assign = np.asarray(assign, dtype=np.int64)
        uniq, dense = np.unique(assign, return_inverse=True)
        return cls(dense.astype(np.int64), len(uniq))

    @classmethod
    def singletons(cls, n: int) -> "Partition":
        return cls(np.arange(n, dtype=np.int64), n)


def modularity(g: Graph, p: Partition, resolution: float = 1.0) -> float:
    """Q = sum_c [ e_c/m - resolution * (d_c / 2m)^2 ].

    ``e_c`` is the weight of edges with both ends in c (self-loops once),
    ``d_c`` the summed weighted degree (self-loops twice), ``m`` the total
    edge weight. Raises EmptyGraphError when the graph has no edge weight.
    """
    m = g.total_weight()
    if m <= 0:
        raise EmptyGraphError("modularity is undefined on a graph with no edges")
    if len(p.assign) != g.n_nodes:
        raise ValueError("partition does not cover the graph")
    k = p.community_count
    cu = p.assign[g.edges[:, 0]]
    cv = p.assign[g.edges[:, 1]]
    e_c = np.zeros(k, dtype=np.float64)
    np.add.at(e_c, cu[cu == cv], g.weights[cu == cv])
    d_c = np.zeros(k, dtype=np.float64)
    np.add.at(d_c, p.assign, g.degrees())
    return float(e_c.sum() / m - resolution * np.sum((d_c / (2.0 * m)) ** 2))


class _LevelGraph:
    """CSR adjacency for one aggregation level (undirected, weighted)."""

    __slots__ = ("n", "indptr", "indices", "weights", "self_w", "degree", "m")

    def __init__(self, n, indptr, indices, weights, self_w):
        self.n = n
        self.indptr = indptr
        self.indices = indices
        self.weights = weights
        self.self_w = self_w
        self.degree = np.zeros(n, dtype=np.float64)
        np.add.at(self.degree, indices, weights)
        # adjacency rows exclude loops; a loop adds 2w to its node's degree
        self.degree += 2.0 * self_w
        self.m = float(weights.sum()) / 2.0 + float(self_w.sum())

    @classmethod
    def from_graph(cls, g: Graph) -> "_LevelGraph":
        loops = g.edges[:, 0] == g.edges[:, 1]
        plain = g.edges[~loops]
        plain_w = g.weights[~loops]
        self_w = np.zeros(g.n_nodes, dtype=np.float64)
        np.add.at(self_w, g.edges[loops, 0], g.weights[loops])
        return cls._from_pairs(g.n_nodes, plain, plain_w, self_w)

    @classmethod
    def _from_pairs(cls, n, pairs, w, self_w) -> "_LevelGraph":
        src = np.concatenate([pairs[:, 0], pairs[:, 1]])
        dst = np.concatenate([pairs[:, 1], pairs[:, 0]])
        ww = np.concatenate([w, w])
        order = np.argsort(src, kind="stable")
        src, dst, ww = src[order], dst[order], ww[order]
        indptr = np.zeros(n + 1, dtype=np.int64)
        np.add.at(indptr, src + 1, 1)
        np.cumsum(indptr, out=indptr)
        return cls(n, indptr, dst, ww, self_w)


def _one_level(lg: _LevelGraph, resolution: float, min_gain: float, rng) -> tuple[np.ndarray, bool]:
    """Local-move phase. Returns (dense assignment, whether anything moved)."""
    n = lg.n
    comm = np.arange(n, dtype=np.int64)
    tot = lg.degree.copy()
    two_m = 2.0 * lg.m
    order = rng.permutation(n)
    improved = False
    while True:
        moves = 0
        for u in order:
            cu = int(comm[u])
            ku = lg.degree[u]
            links: dict[int, float] = {}
            for idx in range(lg.indptr[u], lg.indptr[u + 1]):
                v = lg.indices[idx]
                links[int(comm[v])] = links.get(int(comm[v]), 0.0) + lg.weights[idx]
            tot[cu] -= ku
            # gain of joining c, relative to standing alone: k_{u,c}/m - r*ku*tot_c/(2m^2)
            stay = links.get(cu, 0.0) / lg.m - resolution * ku * tot[cu] / (two_m * lg.m)
            best_c, best_gain = cu, stay
            for c in sorted(links):
                if c == cu:
                    continue
                gain = links[c] / lg.m - resolution * ku * tot[c] / (two_m * lg.m)
                if gain > best_gain:
                    best_c, best_gain = c, gain
            if best_c != cu and best_gain - stay > min_gain:
                comm[u] = best_c
                tot[best_c] += ku
                moves += 1
            else:
                tot[cu] += ku
        if moves == 0:
            break
        improved = True
    uniq, dense = np.unique(comm, return_inverse=True)
    return dense.astype(np.int64), improved


def _aggregate(lg: _LevelGraph, assign: np.ndarray, k: int) -> _LevelGraph:
    """Collapse communities into nodes; intra weight becomes a self-loop."""
    new_self = np.zeros(k, dtype=np.float64)
    np.add.at(new_self, assign, lg.self_w)
    pair_w: dict[tuple[int, int], float] = {}
    for u in range(lg.n):
        cu = int(assign[u])
        for idx in range(lg.indptr[u], lg.indptr[u + 1]):
            v = int(lg.indices[idx])
            if v < u:
                continue  # each undirected adjacency visited once
            cv = int(assign[v])
            w = lg.weights[idx]
            if cu == cv:
                new_self[cu] += w
            else:
                key = (cu, cv) if cu <= cv else (cv, cu)
                pair_w[key] = pair_w.get(key, 0.0) + w
    if pair_w:
        pairs = np.array(sorted(pair_w), dtype=np.int64)
        w = np.array([pair_w[tuple(p)] for p in pairs.tolist()], dtype=np.float64)
    else:
        pairs = np.zeros((0, 2), dtype=np.int64)
        w = np.zeros(0, dtype=np.float64)
    return _LevelGraph._from_pairs(k, pairs, w, new_self)


def louvain_levels(g: Graph, cfg: LouvainConfig = LouvainConfig()) -> list[np.ndarray]:
    """Run the multilevel pass; returns one assignment array per level.

    ``levels[0]`` maps nodes to level-1 communities, ``levels[i]`` maps
    level-i communities one level up. Levels that achieve no aggregation
    are dropped.
    """
    if g.n_nodes == 0:
        raise EmptyGraphError("cannot detect communities in an empty graph")
    if g.total_weight() <= 0:
        return [np.arange(g.n_nodes, dtype=np.int64)]
    rng = np.random.default_rng(cfg.seed)
    lg = _LevelGraph.from_graph(g)
    levels: list[np.ndarray] = []
    while len(levels) < cfg.max_levels:
        assign, _ = _one_level(lg, cfg.resolution, cfg.min_modularity_gain, rng)
        k = int(assign.max()) + 1
        if k == lg.n:
            if not levels:
                levels.append(assign)
            break
        levels.append(assign)
        if k == 1:
            break
        lg = _aggregate(lg, assign, k)
    return levels


def tree_from_levels(n_nodes: int, levels: list[np.ndarray]) -> CommunityTree:
    """Assemble the rooted hierarchy from per-level assignments.

    Level-1 communities hold the graph nodes; the coarsest level sits just
    under a synthetic root, except when it is a single community, which then
    becomes the root itself.
    """
    counts = [int(a.max()) + 1 for a in levels]
    offsets = np.concatenate([[0], np.cumsum(counts)])
    children: dict[int, tuple[int, ...]] = {}
    members: dict[int, tuple[int, ...]] = {}
    parent: dict[int, int] = {}

    mem_acc: dict[int, list[int]] = {}
    for node, c in enumerate(levels[0]):
        mem_acc.setdefault(int(offsets[0]) + int(c), []).append(node)
    members = {c: tuple(v) for c, v in mem_acc.items()}

    for li in range(1, len(levels)):
        kid_acc: dict[int, list[int]] = {}
        for sub, c in enumerate(levels[li]):
            kid_acc.setdefault(int(offsets[li]) + int(c), []).append(int(offsets[li - 1]) + sub)
        for c, kids in kid_acc.items():
            children[c] = tuple(kids)
            for k in kids:
                parent[k] = c

    top_ids = [int(offsets[len(levels) - 1]) + i for i in range(counts[-1])]
    if len(top_ids) == 1:
        root = top_ids[0]
        depth = len(levels)
    else:
        root = int(offsets[-1])
        children[root] = tuple(top_ids)
        for c in top_ids:
            parent[c] = root
        depth = len(levels) + 1

    node_comm = levels[0].astype(np.int64) + int(offsets[0])
    return CommunityTree(root, children, members, parent, node_comm, depth)


def louvain(g: Graph, cfg: LouvainConfig = LouvainConfig()) -> CommunityTree:
    """Detect a community hierarchy. Deterministic for a given seed."""
    return tree_from_levels(g.n_nodes, louvain_levels(g, cfg))


def detect_communities(g: Graph, cfg: LouvainConfig = LouvainConfig()) -> HierarchicalGraph:
    """Louvain plus color assignment: the standard entry into the pipeline."""
    return build_hierarchy(g, louvain(g, cfg))


def leaf_partition(tree: CommunityTree, n_nodes: int) -> Partition:
    """The finest-level partition induced by the tree's leaf communities."""
    return Partition.from_assignments(tree.node_community[:n_nodes])


def top_partition(tree: CommunityTree, n_nodes: int) -> Partition:
    """The coarsest partition: nodes grouped by top-level community."""
    assign = np.array([tree.top_community_of(n) for n in range(n_nodes)])
    return Partition.from_assignments(assign)
