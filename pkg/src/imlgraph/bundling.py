"""Hierarchical edge bundling with mode-dependent strength.

Edge control paths climb the community tree from one endpoint to the other
through per-community anchor points (the root's anchor is skipped when it
is the meeting point). A straightening parameter beta in [0, 1] blends the
control polygon between the straight chord (0) and the full hierarchical
detour (1), and the blended polygon is sampled as a clamped uniform cubic
B-spline that interpolates both endpoints exactly.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import UnknownEdgeError
from .graph import HierarchicalGraph
from .spherical import SphericalConfig

BETA_OVERVIEW = 0.0
BETA_SPHERICAL = 0.7
BETA_PROJECTED = 0.9
RADIAL_DIP = 0.3


@dataclass(frozen=True)
class BundlePolicy:
    beta_overview: float = BETA_OVERVIEW
    beta_spherical: float = BETA_SPHERICAL
    beta_projected: float = BETA_PROJECTED
    radial_dip: float = RADIAL_DIP
    samples: int = 24


def straighten(points: np.ndarray, beta: float) -> np.ndarray:
    """Blend a control polygon toward its straight chord.

    P'_i = beta * P_i + (1 - beta) * (P_0 + i/(N-1) * (P_{N-1} - P_0)); the
    endpoints are fixed points of the blend.
    """
    pts = np.asarray(points, dtype=np.float64)
    k = len(pts)
    if k < 2:
        raise ValueError("straighten needs at least two control points")
    t = np.linspace(0.0, 1.0, k)[:, None]
    chord = pts[0] + t * (pts[-1] - pts[0])
    out = pts.astype(np.float64, copy=True)
    out[1:-1] = beta * pts[1:-1] + (1.0 - beta) * chord[1:-1]
    return out


# uniform cubic B-spline span basis: point(u) = [1 u u^2 u^3] @ _B @ ctrl[i:i+4]
_B = np.array(
    [[1, 4, 1, 0], [-3, 0, 3, 0], [3, -6, 3, 0], [-1, 3, -3, 1]],
    dtype=np.float64,
) / 6.0

_MATRIX_CACHE: dict[tuple[int, int], np.ndarray] = {}


def _basis_matrix(n_path: int, samples: int) -> np.ndarray:
    """(samples+1, n_path+4) sampling matrix for a path of n_path points.

    The matrix already accounts for tripling the first and last control
    points, which is what clamps a uniform cubic B-spline to its endpoints.
    """
    key = (n_path, samples)
    cached = _MATRIX_CACHE.get(key)
    if cached is not None:
        return cached
    n_ctrl = n_path + 4
    spans = n_ctrl - 3
    ts = np.linspace(0.0, float(spans), samples + 1)
    idx = np.minimum(ts.astype(np.int64), spans - 1)
    u = ts - idx
    powers = np.stack([np.ones_like(u), u, u * u, u**3], axis=1)
    weights = powers @ _B
    mat = np.zeros((samples + 1, n_ctrl))
    for s in range(samples + 1):
        mat[s, idx[s] : idx[s] + 4] = weights[s]
    _MATRIX_CACHE[key] = mat
    return mat


def _pad_ends(pts: np.ndarray) -> np.ndarray:
    return np.concatenate([pts[:1], pts[:1], pts, pts[-1:], pts[-1:]], axis=0)


def sample_spline(points: np.ndarray, samples: int = 24) -> np.ndarray:
    """Evaluate the bundling spline along a control path.

    A uniform cubic B-spline over the path with endpoints at multiplicity
    three; returns samples+1 points whose first and last entries equal the
    path endpoints exactly.
    """
    pts = np.asarray(points, dtype=np.float64)
    if len(pts) < 2:
        raise ValueError("sample_spline needs at least two control points")
    out = _basis_matrix(len(pts), samples) @ _pad_ends(pts)
    out[0] = pts[0]
    out[-1] = pts[-1]
    return out


def sample_spline_batch(ctrl: np.ndarray, samples: int = 24) -> np.ndarray:
    """Sample many same-length control paths at once: (E, K, 3) -> (E, samples+1, 3)."""
    ctrl = np.asarray(ctrl, dtype=np.float64)
    padded = np.concatenate(
        [ctrl[:, :1], ctrl[:, :1], ctrl, ctrl[:, -1:], ctrl[:, -1:]], axis=1
    )
    basis = _basis_matrix(ctrl.shape[1], samples)
    out = np.einsum("sk,ekd->esd", basis, padded)
    out[:, 0] = ctrl[:, 0]
    out[:, -1] = ctrl[:, -1]
    return out


def spherical_adapt(
    direction: np.ndarray,
    depth: int,
    max_depth: int,
    cfg: SphericalConfig,
    dip: float = RADIAL_DIP,
) -> np.ndarray:
    """Anchor radius for on-sphere communities: deeper anchors sit nearer
    the surface; the root-adjacent ones dip inward by up to ``dip`` * R.
    Hierarchies one level deep get no dip at all.
    """
    d = np.asarray(direction, dtype=np.float64)
    d = d / np.linalg.norm(d)
    if max_depth <= 1:
        radius = cfg.sphere_radius
    else:
        radius = cfg.sphere_radius * (1.0 - dip * (1.0 - depth / max_depth))
    return np.asarray(cfg.eye, dtype=np.float64) + radius * d


def community_anchor_chain(h: HierarchicalGraph, u: int, v: int) -> list[int]:
    """Communities traversed from u's leaf community to v's, via the lowest
    common ancestor. The LCA itself is excluded when it is the root; an
    intra-community edge contributes the single shared leaf community.
    """
    tree = h.tree
    cu = tree.node_chain(u)
    cv = tree.node_chain(v)
    if cu[0] == cv[0]:
        return [cu[0]]
    set_v = {c: i for i, c in enumerate(cv)}
    for i, c in enumerate(cu):
        if c in set_v:
            lca, iu, iv = c, i, set_v[c]
            break
    up = cu[:iu]
    down = list(reversed(cv[:iv]))
    middle = [] if lca == tree.root else [lca]
    return up + middle + down


def control_path(
    h: HierarchicalGraph,
    positions: np.ndarray,
    anchors: dict[int, np.ndarray],
    edge_index: int,
) -> np.ndarray:
    """Full control polygon for one edge: endpoint, anchors, endpoint."""
    g = h.graph
    if not 0 <= edge_index < g.n_edges:
        raise UnknownEdgeError(f"edge index {edge_index} out of range")
    u, v = int(g.edges[edge_index, 0]), int(g.edges[edge_index, 1])
    chain = community_anchor_chain(h, u, v)
    rows = [positions[u]] + [anchors[c] for c in chain] + [positions[v]]
    return np.asarray(rows, dtype=np.float64)


def centroid_anchors(h: HierarchicalGraph, positions: np.ndarray) -> dict[int, np.ndarray]:
    """Plain member-centroid anchor for every community."""
    tree = h.tree
    out: dict[int, np.ndarray] = {}
    for c in tree.communities():
        leaves = tree.leaves_under(c)
        out[c] = positions[leaves].mean(axis=0)
    return out


def spherical_anchors(
    h: HierarchicalGraph,
    positions: np.ndarray,
    cfg: SphericalConfig,
    dip: float = RADIAL_DIP,
) -> dict[int, np.ndarray]:
    """Centroid anchors radially adjusted for on-sphere communities."""
    tree = h.tree
    eye = np.asarray(cfg.eye, dtype=np.float64)
    max_depth = max(tree.depth - 1, 1)
    out: dict[int, np.ndarray] = {}
    for c in tree.communities():
        centroid = positions[tree.leaves_under(c)].mean(axis=0)
        depth = tree.level_of(c) if c != tree.root else 0
        if c in tree.members:
            depth = max_depth  # leaf communities pin to the surface
        out[c] = spherical_adapt(centroid - eye, depth, max_depth, cfg, dip)
    return out


def bundle_edge(
    h: HierarchicalGraph,
    positions: np.ndarray,
    anchors: dict[int, np.ndarray],
    edge_index: int,
    beta: float,
    samples: int = 24,
) -> np.ndarray:
    """Sampled polyline for one bundled edge."""
    ctrl = straighten(control_path(h, positions, anchors, edge_index), beta)
    return sample_spline(ctrl, samples)


def chord_deviation(polyline: np.ndarray) -> float:
    """Max distance of a polyline from its endpoint chord; 0 means straight."""
    p = np.asarray(polyline, dtype=np.float64)
    a, b = p[0], p[-1]
    ab = b - a
    L2 = float(ab @ ab)
    if L2 < 1e-30:
        return float(np.max(np.linalg.norm(p - a, axis=1)))
    t = np.clip((p - a) @ ab / L2, 0.0, 1.0)
    closest = a + t[:, None] * ab
    return float(np.max(np.linalg.norm(p - closest, axis=1)))
