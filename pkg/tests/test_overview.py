"""Overview miniature tests.

The verifier below does not trust any packing math: it walks every parent
and checks child spheres pairwise for overlap and against the parent's
containment bound directly. The containment bound is
|child - parent| + r_child <= R_parent * (1 + 1/packing_constant), the
exact extent of the tangent lone-child case.
"""

import itertools
import json

import numpy as np
import pytest

from imlgraph.graph import CommunityTree, build_hierarchy, graph_from_edges
from imlgraph.overview import (
    HemispherePlacement,
    OverviewConfig,
    OverviewLayout,
    overview_layout,
)


def hierarchy_from_doc(n_nodes, edges, doc):
    g = graph_from_edges(n_nodes, edges)
    tree = CommunityTree.from_json(json.dumps(doc))
    return build_hierarchy(g, tree)


def children_of(h, layout: OverviewLayout, c: int) -> list[HemispherePlacement]:
    tree = h.tree
    if c in tree.members:
        return [layout.nodes[m] for m in tree.members[c]]
    return [layout.communities[k] for k in tree.children[c]]


def assert_packed(h, layout: OverviewLayout, cfg: OverviewConfig):
    bound = 1.0 + 1.0 / cfg.packing_constant
    for c, parent in layout.communities.items():
        kids = children_of(h, layout, c)
        for a, b in itertools.combinations(kids, 2):
            gap = np.linalg.norm(a.center - b.center) - (a.radius + b.radius)
            assert gap > -1e-9 * parent.radius, f"overlap under community {c}"
        for k in kids:
            reach = np.linalg.norm(k.center - parent.center) + k.radius
            assert reach <= parent.radius * bound + 1e-9


class TestPacking:
    def test_medium_hierarchy_packs_cleanly(self, medium_hierarchy):
        cfg = OverviewConfig()
        layout = overview_layout(medium_hierarchy, cfg)
        assert_packed(medium_hierarchy, layout, cfg)

    def test_easy_hierarchy_packs_cleanly(self, easy_hierarchy):
        cfg = OverviewConfig()
        layout = overview_layout(easy_hierarchy, cfg)
        assert_packed(easy_hierarchy, layout, cfg)

    def test_children_sit_on_parent_surface(self, medium_hierarchy):
        layout = overview_layout(medium_hierarchy, OverviewConfig())
        for c, parent in layout.communities.items():
            for k in children_of(medium_hierarchy, layout, c):
                d = np.linalg.norm(k.center - parent.center)
                assert d == pytest.approx(parent.radius, rel=1e-6)

    def test_radius_rule_bottom_up(self, easy_hierarchy):
        cfg = OverviewConfig()
        layout = overview_layout(easy_hierarchy, cfg)
        tree = easy_hierarchy.tree
        for c, pl in layout.communities.items():
            kids = children_of(easy_hierarchy, layout, c)
            want = cfg.packing_constant * np.sqrt(sum(k.radius**2 for k in kids))
            assert pl.radius == pytest.approx(want, rel=1e-9), f"community {c}"

    def test_wide_flat_fanout(self):
        # one community with 40 leaf nodes forces several rings
        doc = {"id": 0, "members": list(range(40))}
        h = hierarchy_from_doc(40, [], doc)
        cfg = OverviewConfig()
        layout = overview_layout(h, cfg)
        assert_packed(h, layout, cfg)
        assert len(layout.nodes) == 40


class TestPlacementGeometry:
    def test_lone_child_sits_on_pole(self):
        doc = {"id": 1, "children": [{"id": 0, "members": [0]}]}
        h = hierarchy_from_doc(1, [], doc)
        layout = overview_layout(h, OverviewConfig())
        parent = layout.communities[1]
        child = layout.communities[0]
        offset = child.center - parent.center
        d = np.linalg.norm(offset)
        assert d == pytest.approx(parent.radius, rel=1e-9)
        # pole direction is the parent's placement axis
        axis = -parent.orientation
        assert np.dot(offset / d, axis) == pytest.approx(1.0, abs=1e-9)

    def test_two_equal_children_axis_symmetric(self):
        """Equal children share a ring: same polar angle, opposite azimuth,
        equal distance from the parent center."""
        doc = {"id": 2, "children": [
            {"id": 0, "members": [0]},
            {"id": 1, "members": [1]},
        ]}
        h = hierarchy_from_doc(2, [], doc)
        layout = overview_layout(h, OverviewConfig())
        a, b = layout.communities[0], layout.communities[1]
        parent = layout.communities[2]
        oa, ob = a.center - parent.center, b.center - parent.center
        assert np.linalg.norm(oa) == pytest.approx(np.linalg.norm(ob), rel=1e-12)
        axis = -parent.orientation
        # mirrored through the pole axis: reflecting b's azimuthal part onto a
        pa = oa - np.dot(oa, axis) * axis
        pb = ob - np.dot(ob, axis) * axis
        assert np.allclose(pa, -pb, atol=1e-12)
        assert np.dot(oa, axis) == pytest.approx(np.dot(ob, axis), rel=1e-12)
        # exactly tangent, never overlapping
        gap = np.linalg.norm(a.center - b.center) - (a.radius + b.radius)
        assert gap > -1e-12

    def test_larger_subtrees_claim_the_pole(self):
        doc = {"id": 3, "children": [
            {"id": 0, "members": [0]},
            {"id": 1, "members": [1, 2, 3, 4, 5]},
            {"id": 2, "members": [6, 7]},
        ]}
        h = hierarchy_from_doc(8, [], doc)
        layout = overview_layout(h, OverviewConfig())
        parent = layout.communities[3]
        axis = -parent.orientation
        def polar(c):
            off = layout.communities[c].center - parent.center
            return np.arccos(np.clip(np.dot(off / np.linalg.norm(off), axis), -1, 1))
        assert polar(1) <= polar(2) <= polar(0) + 1e-12


class TestScaling:
    def test_miniature_fits_configured_radius(self, medium_hierarchy):
        cfg = OverviewConfig(miniature_radius=0.35, center=(0.0, 1.4, 1.0))
        layout = overview_layout(medium_hierarchy, cfg)
        center = np.array(cfg.center)
        d = np.linalg.norm(layout.positions - center, axis=1)
        assert d.max() == pytest.approx(0.35, rel=1e-9)
        assert np.all(np.isfinite(layout.positions))
        assert layout.positions.shape == (medium_hierarchy.n_nodes, 3)

    def test_rescaling_preserves_shape(self, easy_hierarchy):
        small = overview_layout(easy_hierarchy, OverviewConfig(miniature_radius=0.35))
        big = overview_layout(easy_hierarchy, OverviewConfig(miniature_radius=0.70))
        c = np.array([0.0, 1.4, 1.0])
        assert np.allclose((big.positions - c) / 2.0, small.positions - c, atol=1e-12)

    def test_single_node_graph(self):
        doc = {"id": 0, "members": [0]}
        h = hierarchy_from_doc(1, [], doc)
        cfg = OverviewConfig()
        layout = overview_layout(h, cfg)
        d = np.linalg.norm(layout.positions[0] - np.array(cfg.center))
        assert d <= cfg.miniature_radius + 1e-12

    def test_determinism(self, medium_hierarchy):
        a = overview_layout(medium_hierarchy)
        b = overview_layout(medium_hierarchy)
        assert np.array_equal(a.positions, b.positions)
