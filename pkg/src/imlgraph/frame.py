"""Renderable frame: the geometry and styling snapshot sent to viewers."""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .errors import FormatError


@dataclass
class Ring:
    """A highlight circle around a community."""

    community: int
    center: np.ndarray
    radius: float
    rgba: tuple[int, int, int, int]


@dataclass
class LayoutFrame:
    """Everything a renderer needs for one frame.

    Node and edge styling is baked in: per-node position/radius/color,
    per-edge polyline/color/width. ``edge_points[i]`` is a (k_i, 3) array.
    """

    frame_id: int
    node_ids: np.ndarray
    node_pos: np.ndarray
    node_radius: np.ndarray
    node_rgba: np.ndarray
    edge_ids: np.ndarray
    edge_points: list[np.ndarray]
    edge_rgba: np.ndarray
    edge_width: np.ndarray
    rings: list[Ring] = field(default_factory=list)

    @property
    def n_nodes(self) -> int:
        return len(self.node_ids)

    @property
    def n_edges(self) -> int:
        return len(self.edge_ids)


def empty_frame(frame_id: int = 0) -> LayoutFrame:
    return LayoutFrame(
        frame_id=frame_id,
        node_ids=np.zeros(0, dtype=np.int64),
        node_pos=np.zeros((0, 3), dtype=np.float64),
        node_radius=np.zeros(0, dtype=np.float64),
        node_rgba=np.zeros((0, 4), dtype=np.uint8),
        edge_ids=np.zeros(0, dtype=np.int64),
        edge_points=[],
        edge_rgba=np.zeros((0, 4), dtype=np.uint8),
        edge_width=np.zeros(0, dtype=np.float64),
    )


def validate_frame(frame: LayoutFrame, n_nodes: int | None = None) -> list[str]:
    """Audit a frame; returns violation strings (empty when clean)."""
    bad: list[str] = []
    if frame.frame_id < 0:
        bad.append(f"negative frame id {frame.frame_id}")
    if not np.all(np.isfinite(frame.node_pos)):
        bad.append("non-finite node coordinates")
    if len(frame.node_pos) != frame.n_nodes or len(frame.node_radius) != frame.n_nodes:
        bad.append("node array lengths disagree")
    if n_nodes is not None:
        for nid in frame.node_ids.tolist():
            if not 0 <= nid < n_nodes:
                bad.append(f"frame references unknown node {nid}")
    if len(frame.edge_points) != frame.n_edges:
        bad.append("edge array lengths disagree")
    for i, pts in enumerate(frame.edge_points):
        if len(pts) < 2:
            bad.append(f"edge {int(frame.edge_ids[i])} polyline has {len(pts)} points")
        elif not np.all(np.isfinite(pts)):
            bad.append(f"edge {int(frame.edge_ids[i])} has non-finite points")
    for ring in frame.rings:
        if not np.all(np.isfinite(ring.center)) or not np.isfinite(ring.radius):
            bad.append(f"ring for community {ring.community} has non-finite geometry")
    return bad


def frame_to_json(frame: LayoutFrame) -> str:
    """Canonical JSON form (numbers as-is, arrays row major)."""
    doc = {
        "frameId": int(frame.frame_id),
        "nodes": [
            {
                "id": int(frame.node_ids[i]),
                "pos": [float(x) for x in frame.node_pos[i]],
                "radius": float(frame.node_radius[i]),
                "rgba": [int(c) for c in frame.node_rgba[i]],
            }
            for i in range(frame.n_nodes)
        ],
        "edges": [
            {
                "id": int(frame.edge_ids[i]),
                "points": [[float(x) for x in p] for p in frame.edge_points[i]],
                "rgba": [int(c) for c in frame.edge_rgba[i]],
                "width": float(frame.edge_width[i]),
            }
            for i in range(frame.n_edges)
        ],
        "rings": [
            {
                "community": int(r.community),
                "center": [float(x) for x in r.center],
                "radius": float(r.radius),
                "rgba": [int(c) for c in r.rgba],
            }
            for r in frame.rings
        ],
    }
    return json.dumps(doc, separators=(",", ":"))


def frame_from_json(text: str) -> LayoutFrame:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise FormatError(f"invalid frame JSON: {exc.msg}") from None
    try:
        nodes = doc["nodes"]
        edges = doc["edges"]
        frame = LayoutFrame(
            frame_id=int(doc["frameId"]),
            node_ids=np.array([n["id"] for n in nodes], dtype=np.int64),
            node_pos=np.array([n["pos"] for n in nodes], dtype=np.float64).reshape(-1, 3),
            node_radius=np.array([n["radius"] for n in nodes], dtype=np.float64),
            node_rgba=np.array([n["rgba"] for n in nodes], dtype=np.uint8).reshape(-1, 4),
            edge_ids=np.array([e["id"] for e in edges], dtype=np.int64),
            edge_points=[np.array(e["points"], dtype=np.float64).reshape(-1, 3) for e in edges],
            edge_rgba=np.array([e["rgba"] for e in edges], dtype=np.uint8).reshape(-1, 4),
            edge_width=np.array([e["width"] for e in edges], dtype=np.float64),
            rings=[
                Ring(
                    community=int(r["community"]),
                    center=np.array(r["center"], dtype=np.float64),
                    radius=float(r["radius"]),
                    rgba=tuple(int(c) for c in r["rgba"]),
                )
                for r in doc.get("rings", [])
            ],
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise FormatError(f"frame JSON missing or malformed field: {exc}") from None
    return frame
