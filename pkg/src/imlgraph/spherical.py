"""Treemap-on-a-sphere layout.

Top-level communities claim rectangles of the unit square via squarified
treemapping, areas proportional to member counts. Deeper levels nest
treemaps inside their parent cell; leaf communities run a bounded 2D force
layout inside their (margin-shrunk) cell. Unit-square coordinates then map
onto a surrounding sphere through an equirectangular projection spanning
just under a full sphere of field of view.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import EmptyGraphError
from .force import Bounds, ForceConfig, LayoutGraph, layout_converged, scaled_config
from .graph import HierarchicalGraph


@dataclass(frozen=True)
class Rect:
    x: float
    y: float
    w: float
    h: float

    @property
    def area(self) -> float:
        return self.w * self.h

    def shrink(self, frac: float) -> "Rect":
        """Inset by ``frac`` of each dimension on every side."""
        dx, dy = self.w * frac, self.h * frac
        return Rect(self.x + dx, self.y + dy, self.w - 2 * dx, self.h - 2 * dy)

    def contains(self, x: float, y: float, slack: float = 0.0) -> bool:
        return (
            self.x - slack <= x <= self.x + self.w + slack
            and self.y - slack <= y <= self.y + self.h + slack
        )


@dataclass(frozen=True)
class SphericalConfig:
    sphere_radius: float = 10.0
    fov_horizontal: float = 178.0  # degrees
    fov_vertical: float = 178.0
    cell_margin: float = 0.05
    eye: tuple[float, float, float] = (0.0, 1.6, 0.0)
    forward: tuple[float, float, float] = (0.0, 0.0, 1.0)


def _worst_aspect(areas: list[float], side: float) -> float:
    """Worst cell aspect ratio if ``areas`` share one row along ``side``."""
    total = sum(areas)
    if total <= 0 or side <= 0:
        return np.inf
    thick = total / side
    worst = 1.0
    for a in areas:
        length = a / thick
        worst = max(worst, max(thick / length, length / thick))
    return worst


def treemap(weights: dict[int, float], region: Rect = Rect(0.0, 0.0, 1.0, 1.0)) -> dict[int, Rect]:
    """Squarified treemap: cells tile ``region``, areas proportional to weight.

    Items are processed in descending weight order (ties by id). Rows are
    laid along the shorter side of the remaining region; each row closes
    when adding the next item would worsen its worst aspect ratio. The last
    cell of every row absorbs the remaining length so the tiling is exact.
    """
    items = sorted(weights.items(), key=lambda kv: (-kv[1], kv[0]))
    if not items:
        raise EmptyGraphError("treemap needs at least one weighted item")
    total = sum(w for _, w in items)
    if total <= 0:
        raise EmptyGraphError("treemap weights must sum to a positive value")

    out: dict[int, Rect] = {}
    rect = region
    scale = rect.area / total
    areas = [(k, w * scale) for k, w in items]

    def lay_row(row: list[tuple[int, float]], rect: Rect, is_last: bool) -> Rect:
        row_area = sum(a for _, a in row)
        if rect.w >= rect.h:  # row is a vertical strip on the left
            thick = rect.w if is_last else row_area / rect.h
            y = rect.y
            for i, (k, a) in enumerate(row):
                length = rect.y + rect.h - y if i == len(row) - 1 else a / thick
                out[k] = Rect(rect.x, y, thick, length)
                y += length
            return Rect(rect.x + thick, rect.y, rect.w - thick, rect.h)
        thick = rect.h if is_last else row_area / rect.w
        x = rect.x
        for i, (k, a) in enumerate(row):
            length = rect.x + rect.w - x if i == len(row) - 1 else a / thick
            out[k] = Rect(x, rect.y, length, thick)
            x += length
        return Rect(rect.x, rect.y + thick, rect.w, rect.h - thick)

    row: list[tuple[int, float]] = []
    i = 0
    while i < len(areas):
        side = min(rect.w, rect.h)
        cand = [a for _, a in row] + [areas[i][1]]
        if not row or _worst_aspect(cand, side) <= _worst_aspect([a for _, a in row], side):
            row.append(areas[i])
            i += 1
        else:
            rect = lay_row(row, rect, is_last=False)
            row = []
    lay_row(row, rect, is_last=True)
    return out


def _camera_basis(cfg: SphericalConfig) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    fwd = np.asarray(cfg.forward, dtype=np.float64)
    fwd = fwd / np.linalg.norm(fwd)
    world_up = np.array([0.0, 1.0, 0.0])
    if abs(float(fwd @ world_up)) > 0.999:
        world_up = np.array([0.0, 0.0, 1.0])
    right = np.cross(world_up, fwd)
    right /= np.linalg.norm(right)
    up = np.cross(fwd, right)
    return right, up, fwd


def sphere_map(unit_xy: np.ndarray, cfg: SphericalConfig = SphericalConfig()) -> np.ndarray:
    """Equirectangular mapping of unit-square points onto the view sphere.

    (0.5, 0.5) maps straight ahead; x sweeps azimuth over fovHorizontal,
    y sweeps elevation over fovVertical. Every output point is exactly
    sphereRadius from the eye.
    """
    pts = np.atleast_2d(np.asarray(unit_xy, dtype=np.float64))
    az = (pts[:, 0] - 0.5) * np.radians(cfg.fov_horizontal)
    el = (pts[:, 1] - 0.5) * np.radians(cfg.fov_vertical)
    right, up, fwd = _camera_basis(cfg)
    dir3 = (
        np.outer(np.sin(az) * np.cos(el), right)
        + np.outer(np.sin(el), up)
        + np.outer(np.cos(az) * np.cos(el), fwd)
    )
    dir3 /= np.linalg.norm(dir3, axis=1, keepdims=True)
    out = np.asarray(cfg.eye, dtype=np.float64) + cfg.sphere_radius * dir3
    return out if np.asarray(unit_xy).ndim == 2 else out[0]


@dataclass
class SphericalLayout:
    positions: np.ndarray  # (n, 3) on-sphere node positions
    unit_positions: np.ndarray  # (n, 2) pre-projection coordinates
    cells: dict[int, Rect]  # top-level community cells
    all_cells: dict[int, Rect] = field(default_factory=dict)  # every community


def spherical_layout(
    h: HierarchicalGraph,
    cfg: SphericalConfig = SphericalConfig(),
    force_cfg: ForceConfig = ForceConfig(),
) -> SphericalLayout:
    """Lay the whole graph onto the surrounding sphere."""
    tree = h.tree
    n = h.graph.n_nodes
    unit = np.zeros((n, 2), dtype=np.float64)
    all_cells: dict[int, Rect] = {}

    def fill(c: int, cell: Rect) -> None:
        all_cells[c] = cell
        inner = cell.shrink(cfg.cell_margin)
        kids = tree.children.get(c, ())
        if kids:
            sizes = {k: float(len(tree.leaves_under(k))) for k in kids}
            for k, sub in treemap(sizes, inner).items():
                fill(k, sub)
            return
        nodes = list(tree.members[c])
        lg = LayoutGraph.induced(h.graph, nodes)
        center = (inner.x + inner.w / 2.0, inner.y + inner.h / 2.0)
        bounds = Bounds(
            lo=np.array([inner.x, inner.y, 0.0]),
            hi=np.array([inner.x + inner.w, inner.y + inner.h, 0.0]),
        )
        sub_cfg = scaled_config(
            force_cfg,
            n_nodes=len(nodes),
            mean_mass=float(lg.masses().mean()),
            region_size=float(min(inner.w, inner.h)),
            dims=2,
            center=center,
            bounds=bounds,
            seed=force_cfg.seed + c + 1,
            tol_scale=2e-3,
        )
        pos = layout_converged(lg, sub_cfg)
        unit[nodes] = pos[:, :2]

    tops = tree.top_level()
    weights = {c: float(len(tree.leaves_under(c))) for c in tops}
    cells = treemap(weights)
    for c, cell in cells.items():
        fill(c, cell)

    return SphericalLayout(sphere_map(unit, cfg), unit, cells, all_cells)
