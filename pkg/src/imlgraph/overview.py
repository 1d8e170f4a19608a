"""Nested-sphere overview miniature.

Every community is a sphere; its children (sub-communities or leaf nodes)
sit on its surface, packed into polar rings ordered by subtree size. Parent
radii follow r = packingConstant * sqrt(sum of child r^2), evaluated bottom
up, and the finished tree is scaled uniformly so the whole miniature fits a
fixed radius at a fixed point in front of the viewer.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .graph import HierarchicalGraph

_TANGENT_SLACK = 1e-12


@dataclass(frozen=True)
class OverviewConfig:
    miniature_radius: float = 0.35
    center: tuple[float, float, float] = (0.0, 1.4, 1.0)
    leaf_radius: float = 1.0
    packing_constant: float = 1.15


@dataclass
class HemispherePlacement:
    """One tree entity on its parent sphere: where, how big, which way."""

    center: np.ndarray
    radius: float
    orientation: np.ndarray  # unit vector pointing back toward the parent center


@dataclass
class OverviewLayout:
    positions: np.ndarray  # (n, 3) leaf node positions
    communities: dict[int, HemispherePlacement]
    nodes: dict[int, HemispherePlacement]
    scale: float = 1.0


def _basis(axis: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """A deterministic orthonormal pair perpendicular to ``axis``."""
    ref = np.array([1.0, 0.0, 0.0]) if abs(axis[0]) < 0.9 else np.array([0.0, 1.0, 0.0])
    e1 = np.cross(axis, ref)
    e1 /= np.linalg.norm(e1)
    return e1, np.cross(axis, e1)


def _pair_phi(theta: float, alpha_a: float, alpha_b: float) -> float:
    """Minimum azimuth separation so two caps at polar angle theta clear
    each other: spherical distance >= alpha_a + alpha_b."""
    s2 = np.sin(theta) ** 2
    if s2 < 1e-15:
        return np.pi
    c = (np.cos(alpha_a + alpha_b) - np.cos(theta) ** 2) / s2
    return float(np.arccos(np.clip(c, -1.0, 1.0)))


def _pack_rings(alphas: list[float]) -> list[tuple[float, list[int]]]:
    """Group cap half-angles (sorted desc) into rings of (theta, indices).

    A ring admits a new member while even spacing 2*pi/m still clears the
    ring's widest pair; tangency is allowed. Rings stack outward from the
    pole, each pushed below the previous ring's far edge.
    """
    out: list[tuple[float, list[int]]] = []
    i = 0
    theta_edge = 0.0
    while i < len(alphas):
        if len(alphas) - i == 1 and not out:
            return [(0.0, [i])]  # lone child sits on the pole
        theta = theta_edge + alphas[i]
        ring = [i]
        j = i + 1
        while j < len(alphas):
            m = len(ring) + 1
            need = _pair_phi(theta, alphas[ring[0]], alphas[ring[1]] if len(ring) > 1 else alphas[j])
            if 2.0 * np.pi / m >= need - _TANGENT_SLACK:
                ring.append(j)
                j += 1
            else:
                break
        out.append((theta, ring))
        theta_edge = theta + alphas[ring[0]]
        i = j
    return out


class _TreeIndex:
    """Precomputed subtree radii and child lists for the packing pass."""

    def __init__(self, h: HierarchicalGraph, cfg: OverviewConfig):
        tree = h.tree
        self.leaf_count: dict[tuple[str, int], int] = {}
        self.radius: dict[tuple[str, int], float] = {}
        order = self._postorder(tree)
        for kind, ident in order:
            if kind == "node":
                self.leaf_count[(kind, ident)] = 1
                self.radius[(kind, ident)] = cfg.leaf_radius
            else:
                kids = self._children(tree, ident)
                self.leaf_count[("community", ident)] = sum(
                    self.leaf_count[k] for k in kids
                )
                sq = sum(self.radius[k] ** 2 for k in kids)
                self.radius[("community", ident)] = cfg.packing_constant * float(np.sqrt(sq))

    @staticmethod
    def _children(tree, c: int) -> list[tuple[str, int]]:
        if c in tree.members:
            return [("node", m) for m in tree.members[c]]
        return [("community", k) for k in tree.children[c]]

    def _postorder(self, tree) -> list[tuple[str, int]]:
        out: list[tuple[str, int]] = []
        stack: list[tuple[str, int, bool]] = [("community", tree.root, False)]
        while stack:
            kind, ident, done = stack.pop()
            if kind == "node" or done:
                out.append((kind, ident))
                continue
            stack.append((kind, ident, True))
            for k in self._children(tree, ident):
                stack.append((k[0], k[1], False))
        return out

    def sort_key(self, entity: tuple[str, int]):
        kind, ident = entity
        return (-self.leaf_count[entity], kind == "node", ident)


def overview_layout(h: HierarchicalGraph, cfg: OverviewConfig = OverviewConfig()) -> OverviewLayout:
    """Place every community sphere and leaf node of the hierarchy."""
    tree = h.tree
    n = h.graph.n_nodes
    center = np.asarray(cfg.center, dtype=np.float64)

    idx = _TreeIndex(h, cfg)
    communities: dict[int, HemispherePlacement] = {}
    nodes: dict[int, HemispherePlacement] = {}

    def place(entity: tuple[str, int], at: np.ndarray, axis: np.ndarray) -> None:
        kind, ident = entity
        pl = HemispherePlacement(at.copy(), idx.radius[entity], -axis)
        if kind == "node":
            nodes[ident] = pl
            return
        communities[ident] = pl
        kids = sorted(_TreeIndex._children(tree, ident), key=idx.sort_key)
        R = idx.radius[entity]
        alphas = [float(np.arcsin(min(1.0, idx.radius[k] / R))) for k in kids]
        e1, e2 = _basis(axis)
        for theta, ring in _pack_rings(alphas):
            for slot, ki in enumerate(ring):
                phi = 2.0 * np.pi * slot / len(ring)
                d = (
                    np.cos(theta) * axis
                    + np.sin(theta) * (np.cos(phi) * e1 + np.sin(phi) * e2)
                )
                place(kids[ki], at + R * d, d)

    root_axis = np.array([0.0, 1.0, 0.0])
    place(("community", tree.root), np.zeros(3), root_axis)

    # uniform scale so the farthest leaf node lands on the miniature boundary
    dists = np.array([np.linalg.norm(nodes[i].center) for i in range(n)])
    far = float(dists.max())
    scale = cfg.miniature_radius / far if far > 0 else 1.0
    for pl in list(communities.values()) + list(nodes.values()):
        pl.center = pl.center * scale + center
        pl.radius *= scale

    positions = np.stack([nodes[i].center for i in range(n)])
    return OverviewLayout(positions, communities, nodes, scale)
