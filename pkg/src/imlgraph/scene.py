"""Multi-layout scene: state machine, placements, styling, frame production.

A scene owns one hierarchical graph plus its precomputed overview and
spherical layouts. Commands drive a small state machine (network mode,
per-community mode, highlight sets); geometry follows through animated
transitions, per-frame force ticks for floating communities, and
mode-dependent edge bundling.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field, replace

import numpy as np

from .bundling import (
    BundlePolicy,
    community_anchor_chain,
    sample_spline_batch,
    spherical_adapt,
)
from .errors import InvalidStateError, UnknownIdError
from .force import Bounds, ForceConfig, LayoutGraph, LayoutState, force_tick, layout_converged, scaled_config
from .frame import LayoutFrame, Ring
from .graph import HierarchicalGraph
from .overview import OverviewConfig, overview_layout
from .spherical import SphericalConfig, SphericalLayout, sphere_map, spherical_layout

log = logging.getLogger(__name__)

NETWORK_OVERVIEW = "overview"
NETWORK_EXPANDED = "expanded"
ON_SPHERE = "onSphere"
FLOATING = "floating"
PROJECTED = "projected"

KIND_EXPAND_NETWORK = "expandNetwork"
KIND_EXPAND_COMMUNITY = "expandCommunity"
KIND_PROJECT_COMMUNITY = "projectCommunity"
KIND_RESET_COMMUNITY = "resetCommunity"
KIND_HIGHLIGHT_NODE = "highlightNode"
KIND_HIGHLIGHT_COMMUNITY = "highlightCommunity"
KIND_CLEAR_HIGHLIGHT = "clearHighlight"

COMMAND_KINDS = (
    KIND_EXPAND_NETWORK,
    KIND_EXPAND_COMMUNITY,
    KIND_PROJECT_COMMUNITY,
    KIND_RESET_COMMUNITY,
    KIND_HIGHLIGHT_NODE,
    KIND_HIGHLIGHT_COMMUNITY,
    KIND_CLEAR_HIGHLIGHT,
)

_RED = (255, 36, 36, 255)
_WHITE = (255, 255, 255, 255)


@dataclass(frozen=True)
class Command:
    kind: str
    target: int | None = None


@dataclass(frozen=True)
class SceneState:
    """The complete logical state of one scene session."""

    network_mode: str
    community_mode: dict[int, str]
    floating_order: tuple[int, ...]
    highlight_nodes: frozenset[int]
    highlight_communities: frozenset[int]
    clock: float = 0.0

    def projected_community(self) -> int | None:
        for c, m in self.community_mode.items():
            if m == PROJECTED:
                return c
        return None

    def expanded(self) -> tuple[int, ...]:
        return tuple(
            c for c in self.floating_order if self.community_mode.get(c) != ON_SPHERE
        )


def initial_state(h: HierarchicalGraph) -> SceneState:
    return SceneState(
        network_mode=NETWORK_OVERVIEW,
        community_mode={c: ON_SPHERE for c in h.tree.top_level()},
        floating_order=(),
        highlight_nodes=frozenset(),
        highlight_communities=frozenset(),
    )


def check_invariants(state: SceneState) -> list[str]:
    """SceneState safety conditions; empty list when all hold."""
    bad = []
    modes = state.community_mode
    if state.network_mode == NETWORK_OVERVIEW:
        off_sphere = [c for c, m in modes.items() if m != ON_SPHERE]
        if off_sphere:
            bad.append(f"communities {off_sphere} off-sphere while in overview")
    projected = [c for c, m in modes.items() if m == PROJECTED]
    if len(projected) > 1:
        bad.append(f"multiple projected communities {projected}")
    for c in state.floating_order:
        if modes.get(c) == ON_SPHERE:
            bad.append(f"community {c} in floating order but on sphere")
    for c, m in modes.items():
        if m != ON_SPHERE and c not in state.floating_order:
            bad.append(f"community {c} expanded but missing from floating order")
    return bad


def apply_command(state: SceneState, cmd: Command, h: HierarchicalGraph) -> SceneState:
    """Pure state transition. Raises and leaves ``state`` untouched when the
    command is illegal; geometry is the caller's concern."""
    tree = h.tree
    modes = state.community_mode

    def want_top_community(c) -> int:
        if not isinstance(c, int):
            raise UnknownIdError(f"command target {c!r} is not an id")
        tree.check_community(c)
        if c not in modes:
            raise InvalidStateError(f"community {c} is not top-level")
        return c

    if cmd.kind == KIND_EXPAND_NETWORK:
        if state.network_mode != NETWORK_OVERVIEW:
            raise InvalidStateError("network already expanded")
        return replace(state, network_mode=NETWORK_EXPANDED)

    if cmd.kind == KIND_EXPAND_COMMUNITY:
        c = want_top_community(cmd.target)
        if state.network_mode != NETWORK_EXPANDED:
            raise InvalidStateError("cannot expand a community from the overview")
        if modes[c] != ON_SPHERE:
            raise InvalidStateError(f"community {c} is already expanded")
        new_modes = dict(modes)
        new_modes[c] = FLOATING
        return replace(
            state, community_mode=new_modes, floating_order=state.floating_order + (c,)
        )

    if cmd.kind == KIND_PROJECT_COMMUNITY:
        c = want_top_community(cmd.target)
        if modes[c] != FLOATING:
            raise InvalidStateError(f"community {c} is not floating")
        new_modes = dict(modes)
        old = state.projected_community()
        if old is not None:
            new_modes[old] = FLOATING
        new_modes[c] = PROJECTED
        return replace(state, community_mode=new_modes)

    if cmd.kind == KIND_RESET_COMMUNITY:
        c = want_top_community(cmd.target)
        if modes[c] == ON_SPHERE:
            raise InvalidStateError(f"community {c} is not expanded")
        new_modes = dict(modes)
        new_modes[c] = ON_SPHERE
        order = tuple(k for k in state.floating_order if k != c)
        return replace(state, community_mode=new_modes, floating_order=order)

    if cmd.kind == KIND_HIGHLIGHT_NODE:
        n = cmd.target
        if not isinstance(n, int) or not 0 <= n < h.graph.n_nodes:
            raise UnknownIdError(f"unknown node id {n!r}")
        return replace(state, highlight_nodes=state.highlight_nodes | {n})

    if cmd.kind == KIND_HIGHLIGHT_COMMUNITY:
        c = cmd.target
        if not isinstance(c, int):
            raise UnknownIdError(f"command target {c!r} is not an id")
        tree.check_community(c)
        return replace(state, highlight_communities=state.highlight_communities | {c})

    if cmd.kind == KIND_CLEAR_HIGHLIGHT:
        return replace(
            state, highlight_nodes=frozenset(), highlight_communities=frozenset()
        )

    raise InvalidStateError(f"unknown command kind {cmd.kind!r}")


# ---------------------------------------------------------------------------
# Placement


@dataclass(frozen=True)
class SceneConfig:
    transition_duration: float = 1.5
    floating_distance: float = 1.6
    floating_radius: float = 0.8
    arc_degrees: float = 40.0
    projected_radius: float = 3.0
    floor_height: float = 0.02
    node_radius: float = 0.06
    edge_width: float = 1.0
    edge_width_emphasis: float = 2.5
    opacity_normal: float = 0.3
    opacity_subdued: float = 0.05
    opacity_emphasis: float = 0.9


@dataclass(frozen=True)
class AnchorRegion:
    kind: str  # "patch" | "sphere" | "disc"
    center: np.ndarray
    radius: float


def _arc_direction(cfg: SceneConfig, spherical_cfg: SphericalConfig, theta: float) -> np.ndarray:
    fwd = np.asarray(spherical_cfg.forward, dtype=np.float64)
    fwd = fwd / np.linalg.norm(fwd)
    up = np.array([0.0, 1.0, 0.0])
    right = np.cross(up, fwd)
    right /= np.linalg.norm(right)
    return np.cos(theta) * fwd + np.sin(theta) * right


def _floating_slots(
    state: SceneState, cfg: SceneConfig, spherical_cfg: SphericalConfig
) -> dict[int, tuple[np.ndarray, float]]:
    """Anchor center and radius for every currently floating community,
    splayed over the horizontal arc in expansion order."""
    floating = [c for c in state.floating_order if state.community_mode.get(c) == FLOATING]
    k = len(floating)
    if k == 0:
        return {}
    eye = np.asarray(spherical_cfg.eye, dtype=np.float64)
    arc = np.radians(cfg.arc_degrees)
    if k == 1:
        thetas = [0.0]
    else:
        thetas = [-arc + 2.0 * arc * i / (k - 1) for i in range(k)]
    radius = cfg.floating_radius
    if k >= 2:
        gap = 2.0 * arc / (k - 1)
        chord = 2.0 * cfg.floating_distance * np.sin(gap / 2.0)
        radius = min(radius, 0.45 * chord)
    out = {}
    for c, theta in zip(floating, thetas):
        d = _arc_direction(cfg, spherical_cfg, theta)
        out[c] = (eye + cfg.floating_distance * d, radius)
    return out


def placement(
    state: SceneState,
    c: int,
    cfg: SceneConfig,
    spherical_cfg: SphericalConfig,
    spherical: SphericalLayout | None = None,
) -> AnchorRegion:
    """Target anchor region for a top-level community in its current mode."""
    if c not in state.community_mode:
        raise UnknownIdError(f"community {c} is not top-level")
    mode = state.community_mode[c]
    eye = np.asarray(spherical_cfg.eye, dtype=np.float64)
    if mode == FLOATING:
        center, radius = _floating_slots(state, cfg, spherical_cfg)[c]
        return AnchorRegion("sphere", center, radius)
    if mode == PROJECTED:
        center = np.array([eye[0], 0.0, eye[2]])
        return AnchorRegion("disc", center, cfg.projected_radius)
    if spherical is not None and c in spherical.cells:
        cell = spherical.cells[c]
        center = sphere_map(
            np.array([[cell.x + cell.w / 2.0, cell.y + cell.h / 2.0]]), spherical_cfg
        )[0]
        corners = sphere_map(
            np.array(
                [
                    [cell.x, cell.y],
                    [cell.x + cell.w, cell.y],
                    [cell.x, cell.y + cell.h],
                    [cell.x + cell.w, cell.y + cell.h],
                ]
            ),
            spherical_cfg,
        )
        radius = float(np.max(np.linalg.norm(corners - center, axis=1)))
        return AnchorRegion("patch", center, radius)
    return AnchorRegion("patch", eye + spherical_cfg.sphere_radius * np.array([0.0, 0.0, 1.0]), 1.0)


def smoothstep(x: float) -> float:
    x = min(1.0, max(0.0, x))
    return x * x * (3.0 - 2.0 * x)


# ---------------------------------------------------------------------------
# Style resolution (scalar form; the engine mirrors this vectorized)


@dataclass(frozen=True)
class StyleRule:
    rgba: tuple[int, int, int, int]
    opacity: float
    line_style: str  # "spline" | "straight"
    highlight_ring: bool = False


def node_style(state: SceneState, h: HierarchicalGraph, n: int, cfg: SceneConfig) -> StyleRule:
    top = h.tree.top_community_of(n)
    if n in state.highlight_nodes:
        return StyleRule(_RED, 1.0, "straight", True)
    return StyleRule(h.color_of[top], 1.0, "straight", False)


def edge_style(
    state: SceneState, h: HierarchicalGraph, edge_index: int, cfg: SceneConfig
) -> StyleRule:
    g, tree = h.graph, h.tree
    u, v = int(g.edges[edge_index, 0]), int(g.edges[edge_index, 1])
    if u in state.highlight_nodes or v in state.highlight_nodes:
        return StyleRule(_RED, 1.0, "spline", False)
    tu, tv = tree.top_community_of(u), tree.top_community_of(v)
    exp_u = state.community_mode.get(tu) != ON_SPHERE
    exp_v = state.community_mode.get(tv) != ON_SPHERE
    any_expanded = any(m != ON_SPHERE for m in state.community_mode.values())
    if exp_u and exp_v and tu == tv:
        return StyleRule(_WHITE, 1.0, "straight", False)
    if exp_u and exp_v:
        return StyleRule(h.color_of[tu], cfg.opacity_emphasis, "straight", False)
    if exp_u or exp_v:
        color = h.color_of[tu if exp_u else tv]
        return StyleRule(color, cfg.opacity_emphasis, "spline", False)
    if any_expanded:
        return StyleRule(h.color_of[tu], cfg.opacity_subdued, "spline", False)
    return StyleRule(h.color_of[tu], cfg.opacity_normal, "spline", False)


# ---------------------------------------------------------------------------
# Engine


@dataclass(eq=False)
class _Transition:
    nodes: np.ndarray
    from_pos: np.ndarray
    t0: float
    duration: float


@dataclass
class _LocalLayout:
    """Per-community force layout in anchor-relative coordinates."""

    nodes: np.ndarray
    lg: LayoutGraph
    state: LayoutState
    cfg: ForceConfig
    mass: np.ndarray
    radius: float
    converged: bool = False
    history: list[float] = field(default_factory=list)
    disc_positions: np.ndarray | None = None
    saved_float: np.ndarray | None = None


class SceneEngine:
    """Owns SceneState plus all geometry caches and produces LayoutFrames."""

    def __init__(
        self,
        h: HierarchicalGraph,
        cfg: SceneConfig = SceneConfig(),
        spherical_cfg: SphericalConfig = SphericalConfig(),
        overview_cfg: OverviewConfig = OverviewConfig(),
        force_cfg: ForceConfig = ForceConfig(),
        policy: BundlePolicy = BundlePolicy(),
    ):
        self.h = h
        self.cfg = cfg
        self.spherical_cfg = spherical_cfg
        self.policy = policy
        self.force_cfg = force_cfg
        self.overview = overview_layout(h, overview_cfg)
        self.spherical = spherical_layout(h, spherical_cfg, force_cfg)
        self.state = initial_state(h)
        self.positions = self.overview.positions.copy()
        self.transitions: list[_Transition] = []
        self.local: dict[int, _LocalLayout] = {}

        g, tree = h.graph, h.tree
        n = g.n_nodes
        self.top_of = np.array([tree.top_community_of(i) for i in range(n)], dtype=np.int64)
        keep = g.edges[:, 0] != g.edges[:, 1]
        self.edge_index = np.nonzero(keep)[0]
        self.eu = g.edges[keep, 0]
        self.ev = g.edges[keep, 1]
        self.edge_chains = [
            community_anchor_chain(h, int(u), int(v)) for u, v in zip(self.eu, self.ev)
        ]
        self.edge_chain_sets = [frozenset(ch) for ch in self.edge_chains]
        self.comm_leaves = {c: np.array(tree.leaves_under(c)) for c in tree.communities()}
        self.node_color = np.array(
            [h.color_of[int(self.top_of[i])] for i in range(n)], dtype=np.uint8
        )
        self._overview_radii = np.array(
            [self.overview.nodes[i].radius for i in range(n)], dtype=np.float64
        )

        self._anchors: dict[int, np.ndarray] = {}
        self._anchors_stale = True
        self._polylines: list[np.ndarray | None] = [None] * len(self.edge_index)
        self._edge_beta = np.zeros(len(self.edge_index))
        self._edge_straight = np.zeros(len(self.edge_index), dtype=bool)
        self._resample_all = True
        self._frame_id = 0
        self._cache: LayoutFrame | None = None
        self._dirty = True

    # -- command handling ---------------------------------------------------

    def apply(self, cmd: Command) -> SceneState:
        """Validate and apply one command, scheduling its geometry."""
        old_state = self.state
        new_state = apply_command(old_state, cmd, self.h)
        self.state = new_state
        self._dirty = True
        tree = self.h.tree

        if cmd.kind == KIND_EXPAND_NETWORK:
            self._start_transition(np.arange(self.h.n_nodes))
        elif cmd.kind == KIND_EXPAND_COMMUNITY:
            c = int(cmd.target)  # type: ignore[arg-type]
            slots = _floating_slots(new_state, self.cfg, self.spherical_cfg)
            self._create_local(c, slots[c][1])
            moved = self._resize_floating(slots, exclude=c)
            self._start_transition(self.comm_leaves[c])
            for d in moved:
                self._start_transition(self.comm_leaves[d])
        elif cmd.kind == KIND_PROJECT_COMMUNITY:
            c = int(cmd.target)  # type: ignore[arg-type]
            demoted = old_state.projected_community()
            self._project_local(c)
            self._start_transition(self.comm_leaves[c])
            slots = _floating_slots(new_state, self.cfg, self.spherical_cfg)
            if demoted is not None:
                self._demote_local(demoted, slots[demoted][1])
                self._start_transition(self.comm_leaves[demoted])
            for d in self._resize_floating(slots, exclude=c):
                self._start_transition(self.comm_leaves[d])
        elif cmd.kind == KIND_RESET_COMMUNITY:
            c = int(cmd.target)  # type: ignore[arg-type]
            self.local.pop(c, None)
            self._start_transition(self.comm_leaves[c])
            slots = _floating_slots(new_state, self.cfg, self.spherical_cfg)
            for d in self._resize_floating(slots, exclude=c):
                self._start_transition(self.comm_leaves[d])
        self._anchors_stale = True
        return new_state

    def _start_transition(self, nodes: np.ndarray) -> None:
        nodes = np.asarray(nodes, dtype=np.int64)
        for tr in self.transitions:
            keep = ~np.isin(tr.nodes, nodes)
            tr.nodes = tr.nodes[keep]
            tr.from_pos = tr.from_pos[keep]
        self.transitions = [tr for tr in self.transitions if len(tr.nodes)]
        self.transitions.append(
            _Transition(
                nodes=nodes,
                from_pos=self.positions[nodes].copy(),
                t0=self.state.clock,
                duration=self.cfg.transition_duration,
            )
        )

    def _local_force_cfg(self, c: int, radius: float, dims: int, lg: LayoutGraph) -> ForceConfig:
        half = radius * 0.8
        return scaled_config(
            self.force_cfg,
            n_nodes=lg.n,
            mean_mass=float(lg.masses().mean()),
            region_size=2.0 * half,
            dims=dims,
            center=(0.0, 0.0, 0.0),
            bounds=Bounds.cube((0.0, 0.0, 0.0), half),
            seed=self.force_cfg.seed + 1000 + c,
        )

    def _create_local(self, c: int, radius: float) -> None:
        nodes = self.comm_leaves[c]
        lg = LayoutGraph.induced(self.h.graph, nodes.tolist())
        offsets = self.positions[nodes] - self.positions[nodes].mean(axis=0)
        peak = float(np.max(np.linalg.norm(offsets, axis=1))) if len(nodes) > 1 else 0.0
        if peak > 0:
            offsets *= 0.55 * radius / peak
        cfg = self._local_force_cfg(c, radius, 3, lg)
        self.local[c] = _LocalLayout(
            nodes=nodes,
            lg=lg,
            state=LayoutState(pos=offsets.copy()),
            cfg=cfg,
            mass=lg.masses(),
            radius=radius,
        )

    def _resize_floating(self, slots: dict[int, tuple[np.ndarray, float]], exclude: int) -> list[int]:
        """Rescale local layouts whose anchor radius changed; returns them."""
        changed = []
        for c, (center, radius) in slots.items():
            if c == exclude:
                continue
            loc = self.local.get(c)
            if loc is None or loc.disc_positions is not None:
                continue
            if abs(radius - loc.radius) > 1e-12:
                loc.state.pos *= radius / loc.radius
                loc.radius = radius
                loc.cfg = self._local_force_cfg(c, radius, 3, loc.lg)
                loc.converged = False
                loc.history.clear()
                changed.append(c)
            else:
                changed.append(c)  # anchor center moved along the arc
        return changed

    def _project_local(self, c: int) -> None:
        loc = self.local[c]
        loc.saved_float = loc.state.pos.copy()
        eye = np.asarray(self.spherical_cfg.eye, dtype=np.float64)
        half = self.cfg.projected_radius * 0.7
        lg = loc.lg
        init = np.zeros((lg.n, 3))
        init[:, 0] = loc.state.pos[:, 0]
        init[:, 1] = loc.state.pos[:, 2]
        peak = float(np.max(np.linalg.norm(init[:, :2], axis=1))) if lg.n > 1 else 0.0
        if peak > 0:
            init[:, :2] *= 0.6 * half / peak
        cfg2 = scaled_config(
            self.force_cfg,
            n_nodes=lg.n,
            mean_mass=float(loc.mass.mean()),
            region_size=2.0 * half,
            dims=2,
            center=(0.0, 0.0, 0.0),
            bounds=Bounds.cube((0.0, 0.0, 0.0), half),
            seed=self.force_cfg.seed + 2000 + c,
        )
        flat = layout_converged(lg, cfg2, init=init)
        world = np.empty((lg.n, 3))
        world[:, 0] = eye[0] + flat[:, 0]
        world[:, 1] = self.cfg.floor_height
        world[:, 2] = eye[2] + flat[:, 1]
        loc.disc_positions = world
        loc.converged = True

    def _demote_local(self, c: int, radius: float) -> None:
        loc = self.local[c]
        loc.disc_positions = None
        if loc.saved_float is not None:
            loc.state = LayoutState(pos=loc.saved_float.copy())
            loc.saved_float = None
        loc.state.pos *= radius / loc.radius if loc.radius > 0 else 1.0
        loc.radius = radius
        loc.cfg = self._local_force_cfg(c, radius, 3, loc.lg)
        loc.converged = False
        loc.history.clear()

    # -- frame production ---------------------------------------------------

    def _base_positions(self) -> np.ndarray:
        """Where every node belongs right now, ignoring active transitions."""
        if self.state.network_mode == NETWORK_OVERVIEW:
            return self.overview.positions.copy()
        base = self.spherical.positions.copy()
        slots = _floating_slots(self.state, self.cfg, self.spherical_cfg)
        for c, mode in self.state.community_mode.items():
            if mode == ON_SPHERE:
                continue
            loc = self.local.get(c)
            if loc is None:
                continue
            if mode == PROJECTED and loc.disc_positions is not None:
                base[loc.nodes] = loc.disc_positions
            elif mode == FLOATING and c in slots:
                base[loc.nodes] = slots[c][0] + loc.state.pos
        return base

    def _advance_locals(self) -> bool:
        ticked = False
        for c, mode in self.state.community_mode.items():
            if mode != FLOATING:
                continue
            loc = self.local.get(c)
            if loc is None or loc.converged or loc.lg.n < 2:
                continue
            force_tick(loc.state, loc.lg, loc.cfg, loc.mass)
            loc.history.append(loc.state.last_displacement)
            t = len(loc.history)
            window = max(3, int(np.ceil(0.1 * t)))
            if len(loc.lg.edges) == 0 or (
                t >= window
                and float(np.mean(loc.history[-window:])) < loc.cfg.convergence_tol
            ):
                loc.converged = True
            ticked = True
        return ticked

    def _update_anchors(self, moved_nodes: np.ndarray) -> set[int]:
        """Recompute anchors for communities whose members moved."""
        tree = self.h.tree
        candidates: set[int] = set()
        if self._anchors_stale or not self._anchors:
            candidates = set(tree.communities())
        else:
            for c, leaves in self.comm_leaves.items():
                if moved_nodes[leaves].any():
                    candidates.add(c)
        if not candidates:
            return candidates
        eye = np.asarray(self.spherical_cfg.eye, dtype=np.float64)
        max_depth = max(tree.depth - 1, 1)
        on_sphere_tops = {
            c for c, m in self.state.community_mode.items() if m == ON_SPHERE
        }
        overview_mode = self.state.network_mode == NETWORK_OVERVIEW
        stale: set[int] = set()
        for c in candidates:
            leaves = self.comm_leaves[c]
            centroid = self.positions[leaves].mean(axis=0)
            top = c if c in self.state.community_mode else None
            if top is None and c != tree.root:
                walk = c
                while walk != tree.root and walk not in self.state.community_mode:
                    walk = tree.parent[walk]
                top = walk if walk in self.state.community_mode else None
            anchored_on_sphere = (
                not overview_mode and top is not None and top in on_sphere_tops
            )
            if anchored_on_sphere:
                depth = max_depth if c in tree.members else tree.level_of(c)
                anchor = spherical_adapt(
                    centroid - eye, depth, max_depth, self.spherical_cfg, self.policy.radial_dip
                )
            else:
                anchor = centroid
            prev = self._anchors.get(c)
            if prev is None or np.any(prev != anchor):
                self._anchors[c] = anchor
                stale.add(c)
        self._anchors_stale = False
        return stale

    def _edge_targets(self) -> tuple[np.ndarray, np.ndarray]:
        """Per-edge (beta, straight flag) for the current state."""
        m = len(self.edge_index)
        state = self.state
        if state.network_mode == NETWORK_OVERVIEW:
            return np.zeros(m), np.ones(m, dtype=bool)
        expanded_tops = {c for c, mode in state.community_mode.items() if mode != ON_SPHERE}
        beta = np.full(
            m,
            self.policy.beta_projected
            if state.projected_community() is not None
            else self.policy.beta_spherical,
        )
        tu = self.top_of[self.eu]
        tv = self.top_of[self.ev]
        exp_u = np.isin(tu, list(expanded_tops)) if expanded_tops else np.zeros(m, dtype=bool)
        exp_v = np.isin(tv, list(expanded_tops)) if expanded_tops else np.zeros(m, dtype=bool)
        straight = (exp_u & exp_v)  # intra-expanded and expanded-to-expanded
        beta[straight] = 0.0
        return beta, straight

    def _resample(self, dirty: np.ndarray, beta: np.ndarray, straight: np.ndarray) -> None:
        """Rebuild polylines for dirty edges, batched by control-path length."""
        pos = self.positions
        idx = np.nonzero(dirty)[0]
        if len(idx) == 0:
            return
        straight_idx = idx[straight[idx]]
        for i in straight_idx.tolist():
            self._polylines[i] = np.stack([pos[self.eu[i]], pos[self.ev[i]]])
        curved = idx[~straight[idx]]
        by_len: dict[int, list[int]] = {}
        for i in curved.tolist():
            by_len.setdefault(len(self.edge_chains[i]), []).append(i)
        for chain_len, rows in by_len.items():
            k = chain_len + 2
            ctrl = np.empty((len(rows), k, 3))
            for j, i in enumerate(rows):
                ctrl[j, 0] = pos[self.eu[i]]
                for a, c in enumerate(self.edge_chains[i]):
                    ctrl[j, a + 1] = self._anchors[c]
                ctrl[j, -1] = pos[self.ev[i]]
            b = float(beta[rows[0]])
            if b != 1.0:
                t = np.linspace(0.0, 1.0, k)[None, 1:-1, None]
                chord = ctrl[:, :1] + t * (ctrl[:, -1:] - ctrl[:, :1])
                ctrl[:, 1:-1] = b * ctrl[:, 1:-1] + (1.0 - b) * chord
            sampled = sample_spline_batch(ctrl, self.policy.samples)
            for j, i in enumerate(rows):
                self._polylines[i] = sampled[j]

    def _styles(self) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
        """Vectorized node/edge styling for the current state."""
        cfg = self.cfg
        state = self.state
        n = self.h.n_nodes
        m = len(self.edge_index)

        node_rgba = self.node_color.copy()
        node_radius = np.full(n, cfg.node_radius)
        if state.network_mode == NETWORK_OVERVIEW:
            node_radius[:] = self._overview_radii

        expanded_tops = {c for c, mode in state.community_mode.items() if mode != ON_SPHERE}
        tu = self.top_of[self.eu]
        tv = self.top_of[self.ev]
        exp_u = np.isin(tu, list(expanded_tops)) if expanded_tops else np.zeros(m, dtype=bool)
        exp_v = np.isin(tv, list(expanded_tops)) if expanded_tops else np.zeros(m, dtype=bool)
        same = tu == tv

        edge_rgba = self.node_color[self.eu].copy()
        opacity = np.full(m, cfg.opacity_normal if not expanded_tops else cfg.opacity_subdued)
        width = np.full(m, cfg.edge_width)

        one_end = exp_u ^ exp_v
        edge_rgba[one_end & exp_v] = self.node_color[self.ev[one_end & exp_v]]
        opacity[one_end] = cfg.opacity_emphasis
        width[one_end] = cfg.edge_width_emphasis

        both_diff = exp_u & exp_v & ~same
        opacity[both_diff] = cfg.opacity_emphasis
        width[both_diff] = cfg.edge_width_emphasis

        intra = exp_u & exp_v & same
        edge_rgba[intra] = _WHITE
        opacity[intra] = 1.0
        width[intra] = cfg.edge_width_emphasis

        if state.highlight_nodes:
            hl = np.array(sorted(state.highlight_nodes), dtype=np.int64)
            node_rgba[hl] = _RED
            node_radius[hl] *= 1.6
            incident = np.isin(self.eu, hl) | np.isin(self.ev, hl)
            edge_rgba[incident] = _RED
            opacity[incident] = 1.0
            width[incident] = cfg.edge_width_emphasis

        alpha = np.clip(opacity * 255.0, 0.0, 255.0).astype(np.uint8)
        edge_rgba[:, 3] = alpha
        return node_rgba, node_radius, edge_rgba, opacity, width

    def _rings(self) -> list[Ring]:
        out = []
        for c in sorted(self.state.highlight_communities):
            leaves = self.comm_leaves.get(c)
            if leaves is None or len(leaves) == 0:
                continue
            center = self.positions[leaves].mean(axis=0)
            radius = float(np.max(np.linalg.norm(self.positions[leaves] - center, axis=1)))
            out.append(Ring(c, center, radius + 3.0 * self.cfg.node_radius, _RED))
        return out

    def frame(self, dt: float = 0.0) -> LayoutFrame:
        """Advance time by dt and render. Pure repaint when nothing changed."""
        ticking = any(
            not loc.converged
            and self.state.community_mode.get(c) == FLOATING
            and loc.lg.n >= 2
            for c, loc in self.local.items()
        )
        if (
            dt == 0.0
            and not self.transitions
            and not ticking
            and not self._dirty
            and self._cache is not None
        ):
            return self._cache

        self.state = replace(self.state, clock=self.state.clock + dt)
        self._advance_locals()

        base = self._base_positions()
        new_pos = base
        done: list[_Transition] = []
        for tr in self.transitions:
            s = smoothstep((self.state.clock - tr.t0) / tr.duration if tr.duration > 0 else 1.0)
            if s >= 1.0:
                done.append(tr)
                continue
            live = np.any(tr.from_pos != base[tr.nodes], axis=1)
            idx = tr.nodes[live]
            new_pos[idx] = (1.0 - s) * tr.from_pos[live] + s * base[idx]
        self.transitions = [tr for tr in self.transitions if tr not in done]

        moved = np.any(new_pos != self.positions, axis=1)
        self.positions = new_pos

        stale_anchors = self._update_anchors(moved)
        beta, straight = self._edge_targets()
        style_changed = (beta != self._edge_beta) | (straight != self._edge_straight)
        dirty = style_changed | self._resample_all | moved[self.eu] | moved[self.ev]
        if stale_anchors:
            chain_hit = np.fromiter(
                (not s.isdisjoint(stale_anchors) for s in self.edge_chain_sets),
                dtype=bool,
                count=len(self.edge_chain_sets),
            )
            dirty |= chain_hit & ~straight
        self._resample(dirty, beta, straight)
        self._edge_beta = beta
        self._edge_straight = straight
        self._resample_all = False

        node_rgba, node_radius, edge_rgba, _, width = self._styles()
        self._frame_id += 1
        frame = LayoutFrame(
            frame_id=self._frame_id,
            node_ids=np.arange(self.h.n_nodes, dtype=np.int64),
            node_pos=self.positions.copy(),
            node_radius=node_radius,
            node_rgba=node_rgba,
            edge_ids=self.edge_index.astype(np.int64),
            edge_points=[p for p in self._polylines],  # type: ignore[misc]
            edge_rgba=edge_rgba,
            edge_width=width,
            rings=self._rings(),
        )
        self._cache = frame
        self._dirty = False
        return frame

    def settle(self, step: float = 1.0 / 30.0, max_steps: int = 600) -> LayoutFrame:
        """Run frames until transitions finish and local layouts converge."""
        frame = self.frame(0.0)
        for _ in range(max_steps):
            ticking = any(
                not loc.converged and self.state.community_mode.get(c) == FLOATING
                for c, loc in self.local.items()
            )
            if not self.transitions and not ticking:
                break
            frame = self.frame(step)
        return frame

    @property
    def edge_betas(self) -> np.ndarray:
        return self._edge_beta.copy()

    @property
    def edge_straight_flags(self) -> np.ndarray:
        return self._edge_straight.copy()
