"""Shipping gate: one test per release criterion, each printing a one-line
summary with the measured numbers when it passes.

Run with ``pytest tests/test_acceptance.py -v -s``.

Small-graph enumeration note: the certificate sweep covers every connected
graph on 2..7 nodes (isomorphism-free atlas) plus a seeded random sample
of sixty connected 8-node graphs; full labeled enumeration at n=8 is out
of computational reach.
"""

import time
from itertools import combinations

import networkx as nx
import numpy as np
import pytest

from imlgraph.bundling import bundle_edge, chord_deviation, spherical_anchors
from imlgraph.community import (
    LouvainConfig,
    Partition,
    detect_communities,
    leaf_partition,
    louvain,
    modularity,
)
from imlgraph.datasets import preset_graph
from imlgraph.errors import EngineError
from imlgraph.force import ForceConfig, LayoutGraph, layout_converged
from imlgraph.graph import graph_from_edges
from imlgraph.protocol import decode_frame, encode_frame
from imlgraph.scene import COMMAND_KINDS, Command, SceneEngine, apply_command, check_invariants, initial_state
from imlgraph.server import ServerConfig, Session
from imlgraph.spherical import SphericalConfig, spherical_layout
from imlgraph.telemetry import CSV_HEADER

from test_community import local_move_certificate, modularity_bruteforce
from test_protocol import frames_identical, random_frame


def top_partition(tree, n_nodes: int) -> np.ndarray:
    assign = np.array([tree.top_community_of(i) for i in range(n_nodes)])
    return np.unique(assign, return_inverse=True)[1]


def test_community_count_on_medium_network(medium_graph):
    """11..16 top-level communities over 10 seeds with 13 attained,
    modularity >= 0.35, all inside 5 seconds."""
    g = medium_graph
    assert g.n_nodes == 297 and g.n_edges == 2148
    t0 = time.perf_counter()
    counts = []
    worst_q = 1.0
    for seed in range(10):
        tree = louvain(g, LouvainConfig(resolution=1.0, seed=seed))
        tops = len(tree.top_level())
        counts.append(tops)
        assign = top_partition(tree, g.n_nodes)
        q = modularity(g, Partition.from_assignments(assign))
        worst_q = min(worst_q, q)
    elapsed = time.perf_counter() - t0
    assert all(11 <= c <= 16 for c in counts), counts
    assert 13 in counts, counts
    assert worst_q >= 0.35
    assert elapsed < 5.0
    print(f"\n[PASS] community count: 10 seeds -> {sorted(set(counts))} tops "
          f"(13 attained), min Q={worst_q:.4f}, {elapsed:.2f}s")


def connected_eight_node_samples(count: int, seed: int = 99):
    rng = np.random.default_rng(seed)
    out = []
    while len(out) < count:
        edges = [(u, v) for u, v in combinations(range(8), 2) if rng.random() < 0.35]
        gnx = nx.Graph(edges)
        gnx.add_nodes_from(range(8))
        if nx.is_connected(gnx):
            out.append(graph_from_edges(8, edges))
    return out


def test_detection_optimality_on_enumerated_small_graphs():
    """Every connected graph on 2..7 nodes plus sampled 8-node graphs:
    the result admits no improving single-node move, and modularity()
    agrees with the brute-force double sum to 1e-9."""
    graphs = []
    for gnx in nx.graph_atlas_g()[1:]:
        if len(gnx) >= 2 and nx.is_connected(gnx):
            graphs.append(graph_from_edges(len(gnx), list(gnx.edges())))
    n_atlas = len(graphs)
    graphs.extend(connected_eight_node_samples(60))

    cfg = LouvainConfig(seed=3)
    worst = 0.0
    for g in graphs:
        tree = louvain(g, cfg)
        assert local_move_certificate(g, tree, cfg.min_modularity_gain)
        ours = modularity(g, leaf_partition(tree, g.n_nodes))
        oracle = modularity_bruteforce(g, np.array(tree.node_community[: g.n_nodes]))
        worst = max(worst, abs(ours - oracle))
    assert worst <= 1e-9
    print(f"\n[PASS] detection optimality: {n_atlas} enumerated graphs (n<=7) "
          f"+ 60 sampled n=8, max oracle gap {worst:.2e}")


def test_spherical_layout_invariants():
    """Easy/medium/hard: every node exactly on the view sphere, inside the
    178x178 degree cap, inside its community cell (5% margin); cell areas
    proportional to community sizes within 1e-6."""
    cfg = SphericalConfig()
    eye = np.asarray(cfg.eye)
    half_cap = np.radians(cfg.fov_horizontal / 2.0)
    right, up, fwd = np.array([1.0, 0, 0]), np.array([0, 1.0, 0]), np.array([0, 0, 1.0])
    for name in ("easy", "medium", "hard"):
        g = preset_graph(name)
        h = detect_communities(g, LouvainConfig(seed=7))
        layout = spherical_layout(h, cfg)

        d = np.linalg.norm(layout.positions - eye, axis=1)
        assert np.max(np.abs(d - cfg.sphere_radius)) <= 1e-6 * cfg.sphere_radius

        dirs = (layout.positions - eye) / cfg.sphere_radius
        el = np.arcsin(np.clip(dirs @ up, -1.0, 1.0))
        az = np.arctan2(dirs @ right, dirs @ fwd)
        assert np.max(np.abs(az)) <= half_cap + 1e-9
        assert np.max(np.abs(el)) <= half_cap + 1e-9

        sizes = {c: len(h.tree.leaves_under(c)) for c in layout.cells}
        total = sum(sizes.values())
        for c, cell in layout.cells.items():
            share = cell.w * cell.h  # cells tile the unit square
            want = sizes[c] / total
            assert abs(share - want) <= 1e-6 * want
            slack = 0.05 * max(cell.w, cell.h)
            for node in h.tree.leaves_under(c):
                x, y = layout.unit_positions[node]
                assert cell.x - slack <= x <= cell.x + cell.w + slack
                assert cell.y - slack <= y <= cell.y + cell.h + slack
    print("\n[PASS] spherical invariants: easy/medium/hard on-sphere (1e-6), "
          "inside 178deg cap, cells hold nodes (5%), areas match sizes (1e-6)")


def test_bundling_schedule(medium_hierarchy):
    """Rendered betas are exactly 0.0 / 0.7 / 0.9 by mode; straight edges
    deviate < 1e-9 from their chords; mean deviation nondecreasing in beta
    over 1000 random edges."""
    eng = SceneEngine(medium_hierarchy)
    f = eng.frame(0.0)
    assert np.all(eng.edge_betas == 0.0)
    worst = max(chord_deviation(p) for p in f.edge_points)
    assert worst < 1e-9

    eng.apply(Command("expandNetwork"))
    eng.settle()
    assert np.all(eng.edge_betas == 0.7)

    c = sorted(medium_hierarchy.tree.top_level())[0]
    eng.apply(Command("expandCommunity", c))
    eng.apply(Command("projectCommunity", c))
    eng.settle()
    curved = ~eng.edge_straight_flags
    assert np.all(eng.edge_betas[curved] == 0.9)

    h = medium_hierarchy
    anchors = spherical_anchors(h, eng.spherical.positions, eng.spherical_cfg)
    rng = np.random.default_rng(17)
    edges = rng.choice(h.graph.n_edges, size=1000, replace=False)
    betas = [0.0, 0.2, 0.4, 0.7, 0.9, 1.0]
    means = []
    for beta in betas:
        devs = [
            chord_deviation(bundle_edge(h, eng.spherical.positions, anchors, int(e), beta))
            for e in edges
        ]
        means.append(float(np.mean(devs)))
    assert all(b >= a - 1e-12 for a, b in zip(means, means[1:])), means
    assert means[0] < 1e-9
    print(f"\n[PASS] bundling schedule: betas 0.0/0.7/0.9 exact, straight dev "
          f"{worst:.1e}, mean deviation {means[0]:.1e} -> {means[-1]:.3f} over beta")


def test_state_machine_random_sequences(medium_hierarchy):
    """10,000 random command sequences (length <= 50): invariants hold after
    every step and rejected commands leave the state bitwise identical."""
    h = medium_hierarchy
    tops = sorted(initial_state(h).community_mode)
    rng = np.random.default_rng(23)
    target_pool = tops + [0, 5, h.graph.n_nodes - 1, -1, 10**6, h.tree.root, None]
    applied = rejected = 0
    for _ in range(10_000):
        state = initial_state(h)
        for _ in range(int(rng.integers(1, 51))):
            kind = COMMAND_KINDS[rng.integers(len(COMMAND_KINDS))]
            cmd = Command(kind, target_pool[rng.integers(len(target_pool))])
            before = state
            try:
                state = apply_command(state, cmd, h)
                applied += 1
            except EngineError:
                assert state == before
                rejected += 1
            bad = check_invariants(state)
            assert bad == [], (cmd, bad)
    assert applied > 10_000 and rejected > 10_000

    eng = SceneEngine(h)
    eng.apply(Command("expandNetwork"))
    before = eng.settle().node_pos.copy()
    c = tops[2]
    eng.apply(Command("expandCommunity", c))
    eng.settle()
    eng.apply(Command("resetCommunity", c))
    after = eng.settle().node_pos
    gap = float(np.max(np.linalg.norm(after - before, axis=1)))
    assert gap < 1e-6
    print(f"\n[PASS] state machine: 10000 sequences ({applied} applied, "
          f"{rejected} rejected clean), expand->reset gap {gap:.1e}")


def test_force_layout_analytic_cases():
    """K4 regular tetrahedron within 5%, K2 spacing within 1% of
    2*sqrt(kRepulsion), 2D mode emits exact zero third components."""
    cfg = ForceConfig(k_gravity=0.0, seed=5, convergence_tol=1e-7, max_iterations=4000)

    k4 = LayoutGraph.from_graph(graph_from_edges(4, [(a, b) for a, b in combinations(range(4), 2)]))
    pos = layout_converged(k4, cfg)
    dists = [np.linalg.norm(pos[a] - pos[b]) for a, b in combinations(range(4), 2)]
    spread = (max(dists) - min(dists)) / np.mean(dists)
    assert spread < 0.05

    k2 = LayoutGraph.from_graph(graph_from_edges(2, [(0, 1)]))
    pos2 = layout_converged(k2, cfg)
    d = float(np.linalg.norm(pos2[0] - pos2[1]))
    want = 2.0 * np.sqrt(cfg.k_repulsion)
    assert abs(d - want) / want < 0.01

    flat = layout_converged(k4, ForceConfig(dims=2, seed=5))
    assert np.all(flat[:, 2] == 0.0)
    print(f"\n[PASS] force analytics: K4 spread {spread * 100:.2f}%, "
          f"K2 {d:.4f} vs {want:.4f}, 2D z exactly zero")


def test_pipeline_performance_at_scale():
    """Stress graph (2646 nodes, 10455 edges): detection + both layouts +
    fully bundled frame < 10s; expanding one community < 33ms."""
    g = preset_graph("stress")
    assert g.n_nodes == 2646 and g.n_edges == 10455
    t0 = time.perf_counter()
    h = detect_communities(g, LouvainConfig(seed=7))
    eng = SceneEngine(h)
    eng.frame(0.0)
    eng.apply(Command("expandNetwork"))
    eng.frame(eng.cfg.transition_duration)  # full 24-sample bundling pass
    pipeline = time.perf_counter() - t0
    assert pipeline < 10.0

    top = sorted(h.tree.top_level())[0]
    t0 = time.perf_counter()
    eng.apply(Command("expandCommunity", top))
    eng.frame(1.0 / 30.0)
    expand = time.perf_counter() - t0
    assert expand < 0.033
    print(f"\n[PASS] performance: stress pipeline {pipeline:.2f}s (< 10s), "
          f"expand-one-community {expand * 1000:.1f}ms (< 33ms)")


def test_telemetry_schema():
    """Scripted session (3 expands, 1 project, 2 overview visits) emits the
    study-data CSV with the exact header and exact counters."""
    session = Session(ServerConfig())
    session.command({"type": "loadGraph", "name": "medium"})
    tops = sorted(session.engine.h.tree.top_level())
    script = [
        {"type": "expandNetwork"},
        {"type": "expandCommunity", "target": tops[0]},
        {"type": "expandCommunity", "target": tops[1]},
        {"type": "projectCommunity", "target": tops[0]},
        {"type": "loadGraph", "name": "medium"},
        {"type": "expandNetwork"},
        {"type": "expandCommunity", "target": tops[2]},
    ]
    for doc in script:
        session.command(doc)
    lines = session.log.to_csv().strip().splitlines()
    assert lines[0] == (
        "condition,graphID,taskID,startTime,endTime,duration,"
        "correctAnswerProvided,numberOfInteractions,numberOfExpansions,"
        "numberOfProjections,numberOfOverviews,numberOfSphericalViews,accuracy"
    )
    assert lines[0] == CSV_HEADER
    rec = dict(zip(lines[0].split(","), lines[1].split(",")))
    assert rec["numberOfExpansions"] == "3"
    assert rec["numberOfProjections"] == "1"
    assert rec["numberOfOverviews"] == "2"
    assert rec["numberOfSphericalViews"] == "2"
    assert rec["numberOfInteractions"] == "8"
    print("\n[PASS] telemetry: exact header, counters 3/1/2/2 over 8 interactions")


def test_binary_protocol_round_trip():
    """1000 random frames survive encode/decode with every byte intact."""
    rng = np.random.default_rng(4096)
    for i in range(1000):
        frame = random_frame(rng)
        blob = encode_frame(frame)
        back = decode_frame(blob)
        assert frames_identical(back, frame), f"frame {i} mismatched"
        assert encode_frame(back) == blob
    print("\n[PASS] protocol: 1000 binary round trips bit-exact")
