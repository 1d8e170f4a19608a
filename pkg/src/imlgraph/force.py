"""Degree-weighted force-directed layout in 2 or 3 dimensions.

Forces follow the ForceAtlas2 family: linear attraction along edges
(``d * w``), degree-scaled repulsion (``kRepulsion * (deg_u + 1)(deg_v + 1)
/ d``), and a constant-magnitude pull of every node toward the region
center. Integration uses the adaptive global speed of the reference
implementation: per-node "swinging" (force direction flips) slows the
system down, coherent "traction" speeds it up.

All arithmetic runs in region-center-relative coordinates, which keeps the
layout translation-equivariant to rounding error.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import NumericalDivergenceError, UnknownIdError
from .graph import Graph

_EPS = 1e-12


@dataclass(frozen=True)
class Bounds:
    """An axis-aligned box. Layouts clamp into it with a 5% inner margin."""

    lo: np.ndarray
    hi: np.ndarray

    @classmethod
    def cube(cls, center, half: float) -> "Bounds":
        c = np.asarray(center, dtype=np.float64)
        return cls(c - half, c + half)

    @property
    def center(self) -> np.ndarray:
        return (self.lo + self.hi) / 2.0

    @property
    def extent(self) -> np.ndarray:
        return self.hi - self.lo


@dataclass(frozen=True)
class ForceConfig:
    k_repulsion: float = 10.0
    k_gravity: float = 1.0
    dims: int = 3
    max_iterations: int = 500
    convergence_tol: float = 1e-3
    seed: int = 0
    center: tuple[float, float, float] = (0.0, 0.0, 0.0)
    bounds: Bounds | None = None


@dataclass
class LayoutGraph:
    """The minimal edge view the force engine consumes (no self-loops)."""

    n: int
    edges: np.ndarray
    weights: np.ndarray

    @classmethod
    def from_graph(cls, g: Graph) -> "LayoutGraph":
        keep = g.edges[:, 0] != g.edges[:, 1]
        return cls(g.n_nodes, g.edges[keep].copy(), g.weights[keep].copy())

    @classmethod
    def induced(cls, g: Graph, nodes: list[int]) -> "LayoutGraph":
        for n in nodes:
            g.check_node(n)
        local = {n: i for i, n in enumerate(nodes)}
        rows, w = [], []
        for i, (u, v) in enumerate(g.edges.tolist()):
            if u in local and v in local and u != v:
                rows.append((local[u], local[v]))
                w.append(g.weights[i])
        edges = np.array(rows, dtype=np.int64).reshape(-1, 2)
        return cls(len(nodes), edges, np.array(w, dtype=np.float64))

    def masses(self) -> np.ndarray:
        """deg + 1 per node (unweighted neighbor count)."""
        m = np.ones(self.n, dtype=np.float64)
        if len(self.edges):
            np.add.at(m, self.edges[:, 0], 1.0)
            np.add.at(m, self.edges[:, 1], 1.0)
        return m


@dataclass
class LayoutState:
    """Positions plus the integrator's adaptive-speed memory."""

    pos: np.ndarray
    frame: int = 0
    speed: float = 1.0
    speed_efficiency: float = 1.0
    prev_force: np.ndarray | None = None
    last_displacement: float = field(default=np.inf)


def pairwise_forces(
    pos: np.ndarray, lg: LayoutGraph, mass: np.ndarray, cfg: ForceConfig
) -> np.ndarray:
    """Net attraction + repulsion per node (no gravity). Sums to ~zero."""
    n = lg.n
    d = cfg.dims
    p = pos[:, :d]
    force = np.zeros((n, d), dtype=np.float64)
    if n > 1:
        diff = p[:, None, :] - p[None, :, :]
        dist = np.sqrt(np.sum(diff * diff, axis=2))
        np.fill_diagonal(dist, np.inf)
        dist = np.maximum(dist, _EPS)
        mag = cfg.k_repulsion * (mass[:, None] * mass[None, :]) / dist
        force += np.sum(diff * (mag / dist)[:, :, None], axis=1)
    if len(lg.edges):
        eu, ev = lg.edges[:, 0], lg.edges[:, 1]
        pull = (p[ev] - p[eu]) * lg.weights[:, None]
        np.add.at(force, eu, pull)
        np.add.at(force, ev, -pull)
    return force


def gravity_forces(pos: np.ndarray, mass: np.ndarray, cfg: ForceConfig) -> np.ndarray:
    """Constant-magnitude pull toward the region center."""
    d = cfg.dims
    center = np.asarray(cfg.center, dtype=np.float64)[:d]
    to_c = center - pos[:, :d]
    dist = np.maximum(np.linalg.norm(to_c, axis=1, keepdims=True), _EPS)
    return cfg.k_gravity * mass[:, None] * to_c / dist


def force_tick(state: LayoutState, lg: LayoutGraph, cfg: ForceConfig,
               mass: np.ndarray | None = None) -> LayoutState:
    """Advance one integration step in place; returns the same state."""
    d = cfg.dims
    if mass is None:
        mass = lg.masses()
    center = np.asarray(cfg.center, dtype=np.float64)[:d]
    rel = state.pos[:, :d] - center

    force = pairwise_forces(rel, lg, mass, cfg)
    to_c = -rel
    dist_c = np.maximum(np.linalg.norm(to_c, axis=1, keepdims=True), _EPS)
    force += cfg.k_gravity * mass[:, None] * to_c / dist_c

    prev = state.prev_force if state.prev_force is not None else np.zeros_like(force)
    swinging = np.linalg.norm(force - prev, axis=1)
    traction = np.linalg.norm(force + prev, axis=1) / 2.0
    total_swing = float(np.sum(mass * swinging))
    total_tract = float(np.sum(mass * traction))

    if total_swing > _EPS and total_tract > _EPS:
        est_jitter = 0.05 * np.sqrt(lg.n)
        jitter = max(np.sqrt(est_jitter), min(est_jitter * total_tract / lg.n**2, 10.0))
        eff = state.speed_efficiency
        if total_swing / total_tract > 2.0:
            if eff > 0.05:
                eff *= 0.5
            jitter = max(jitter, 1.0)
        target = jitter * eff * total_tract / total_swing
        if total_swing > jitter * total_tract:
            if eff > 0.05:
                eff *= 0.7
        elif state.speed < 1000.0:
            eff *= 1.3
        state.speed_efficiency = eff
        state.speed += min(target - state.speed, 0.5 * state.speed)

    factor = state.speed / (1.0 + np.sqrt(state.speed * swinging))
    new_rel = rel + force * factor[:, None]

    if cfg.bounds is not None:
        lo = cfg.bounds.lo[:d] - center
        hi = cfg.bounds.hi[:d] - center
        margin = 0.05 * (hi - lo)
        new_rel = np.clip(new_rel, lo + margin, hi - margin)

    if not np.all(np.isfinite(new_rel)):
        raise NumericalDivergenceError(
            f"layout diverged at frame {state.frame} (non-finite coordinates)"
        )

    state.last_displacement = float(np.mean(np.linalg.norm(new_rel - rel, axis=1)))
    state.pos[:, :d] = new_rel + center
    if d == 2:
        state.pos[:, 2] = 0.0
    state.prev_force = force
    state.frame += 1
    return state


def initial_positions(lg: LayoutGraph, cfg: ForceConfig, spread: float | None = None) -> np.ndarray:
    """Seeded jitter around the region center, distinct per node."""
    rng = np.random.default_rng(cfg.seed)
    if spread is None:
        if cfg.bounds is not None:
            spread = 0.4 * float(np.max(cfg.bounds.extent[: cfg.dims]))
        else:
            spread = max(1.0, np.sqrt(lg.n))
    pos = np.zeros((lg.n, 3), dtype=np.float64)
    pos[:, : cfg.dims] = (rng.random((lg.n, cfg.dims)) - 0.5) * spread
    pos += np.asarray(cfg.center, dtype=np.float64)
    return pos


def _separate_coincident(pos: np.ndarray, dims: int, seed: int) -> None:
    rng = np.random.default_rng(seed ^ 0x5EED)
    for _ in range(16):
        _, idx, counts = np.unique(
            pos[:, :dims].round(12), axis=0, return_index=True, return_counts=True
        )
        if not np.any(counts > 1):
            return
        dup = np.ones(len(pos), dtype=bool)
        dup[idx] = False
        pos[dup, :dims] += (rng.random((int(dup.sum()), dims)) - 0.5) * 1e-6


def layout_converged(
    lg: LayoutGraph,
    cfg: ForceConfig = ForceConfig(),
    init: np.ndarray | None = None,
) -> np.ndarray:
    """Iterate until the trailing mean displacement drops below tolerance.

    Convergence looks at the mean displacement over the last
    ``max(3, ceil(0.1 * t))`` ticks, so a longer simulation demands a longer
    quiet stretch. Returns an (n, 3) array; the z column is exactly zero for
    2D layouts.
    """
    center = np.asarray(cfg.center, dtype=np.float64)
    if lg.n == 0:
        return np.zeros((0, 3), dtype=np.float64)
    if lg.n == 1:
        pos = np.zeros((1, 3), dtype=np.float64)
        pos[0, : len(center)] = center
        return pos
    pos = init.astype(np.float64).copy() if init is not None else initial_positions(lg, cfg)
    if pos.shape != (lg.n, 3):
        raise UnknownIdError(f"initial positions shape {pos.shape} does not match n={lg.n}")
    if cfg.dims == 2:
        pos[:, 2] = 0.0
    _separate_coincident(pos, cfg.dims, cfg.seed)

    state = LayoutState(pos=pos)
    mass = lg.masses()
    if len(lg.edges) == 0:
        force_tick(state, lg, cfg, mass)
        return state.pos

    history: list[float] = []
    for t in range(1, cfg.max_iterations + 1):
        force_tick(state, lg, cfg, mass)
        history.append(state.last_displacement)
        window = max(3, int(np.ceil(0.1 * t)))
        if t >= window and float(np.mean(history[-window:])) < cfg.convergence_tol:
            break
    return state.pos


def scaled_config(
    base: ForceConfig,
    n_nodes: int,
    mean_mass: float,
    region_size: float,
    dims: int,
    center,
    bounds: Bounds | None,
    seed: int,
    tol_scale: float = 1e-4,
) -> ForceConfig:
    """Rescale force constants to a region's natural node spacing.

    The user-facing constants assume free space in unit scale; inside a
    treemap cell or an anchor sphere the equilibrium pair distance
    ``sqrt(kRepulsion) * mass`` must shrink to roughly the cell's nearest
    neighbor spacing or every node pins to the walls.
    """
    spacing = 0.6 * region_size / max(np.sqrt(max(n_nodes, 1)), 1.0)
    k_rep = base.k_repulsion / 10.0 * (spacing / max(mean_mass, 1.0)) ** 2
    k_grav = base.k_gravity * spacing / max(mean_mass, 1.0)
    c = np.zeros(3, dtype=np.float64)
    c[: len(np.asarray(center))] = np.asarray(center, dtype=np.float64)
    return ForceConfig(
        k_repulsion=k_rep,
        k_gravity=k_grav,
        dims=dims,
        max_iterations=base.max_iterations,
        convergence_tol=min(base.convergence_tol, tol_scale * region_size),
        seed=seed,
        center=(float(c[0]), float(c[1]), float(c[2])),
        bounds=bounds,
    )
