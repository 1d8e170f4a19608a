"""Wire formats: binary frame encoding and JSON command/event messages.

Frames travel as a compact little-endian binary layout (magic ``IMLG``);
commands and events are single JSON objects. Binary decode of an encoded
frame reproduces it exactly as long as the input coordinates are
f32-representable.
"""

from __future__ import annotations

import json
import struct
from typing import Any

import numpy as np

from .errors import FormatError
from .frame import LayoutFrame, Ring, frame_from_json, frame_to_json

MAGIC = b"IMLG"
VERSION = 1

_HEADER = struct.Struct("<4sHQ")
_U32 = struct.Struct("<I")
_EDGE_HEAD = struct.Struct("<IH4Bf")
_RING = struct.Struct("<I3ff4B")

_NODE_DTYPE = np.dtype(
    [("id", "<u4"), ("pos", "<f4", (3,)), ("radius", "<f4"), ("rgba", "u1", (4,))]
)

COMMAND_TYPES = (
    "loadGraph",
    "expandNetwork",
    "expandCommunity",
    "projectCommunity",
    "resetCommunity",
    "highlightNode",
    "highlightCommunity",
    "clearHighlight",
    "setConfig",
)
_TARGETED = {"expandCommunity", "projectCommunity", "resetCommunity",
             "highlightNode", "highlightCommunity"}

EVENT_TYPES = ("ack", "graph", "error", "state", "telemetry")


def encode_frame(frame: LayoutFrame, fmt: str = "binary") -> bytes:
    if fmt == "json":
        return frame_to_json(frame).encode("utf-8")
    if fmt != "binary":
        raise FormatError(f"unknown frame format {fmt!r}")
    parts = [_HEADER.pack(MAGIC, VERSION, frame.frame_id)]

    nodes = np.empty(frame.n_nodes, dtype=_NODE_DTYPE)
    nodes["id"] = frame.node_ids
    nodes["pos"] = frame.node_pos
    nodes["radius"] = frame.node_radius
    nodes["rgba"] = frame.node_rgba
    parts.append(_U32.pack(frame.n_nodes))
    parts.append(nodes.tobytes())

    parts.append(_U32.pack(frame.n_edges))
    for i in range(frame.n_edges):
        pts = np.ascontiguousarray(frame.edge_points[i], dtype="<f4")
        if len(pts) > 0xFFFF:
            raise FormatError(f"edge {int(frame.edge_ids[i])} polyline too long ({len(pts)})")
        r, g, b, a = (int(c) for c in frame.edge_rgba[i])
        parts.append(
            _EDGE_HEAD.pack(int(frame.edge_ids[i]), len(pts), r, g, b, a,
                            float(frame.edge_width[i]))
        )
        parts.append(pts.tobytes())

    parts.append(_U32.pack(len(frame.rings)))
    for ring in frame.rings:
        cx, cy, cz = (float(x) for x in ring.center)
        parts.append(
            _RING.pack(int(ring.community), cx, cy, cz, float(ring.radius), *ring.rgba)
        )
    return b"".join(parts)


class _Cursor:
    __slots__ = ("data", "off")

    def __init__(self, data: bytes):
        self.data = data
        self.off = 0

    def take(self, fmt: struct.Struct) -> tuple:
        end = self.off + fmt.size
        if end > len(self.data):
            raise FormatError(f"truncated frame at byte {self.off}")
        out = fmt.unpack_from(self.data, self.off)
        self.off = end
        return out

    def take_raw(self, size: int) -> bytes:
        end = self.off + size
        if end > len(self.data):
            raise FormatError(f"truncated frame at byte {self.off}")
        out = self.data[self.off : end]
        self.off = end
        return out


def decode_frame(data: bytes) -> LayoutFrame:
    """Decode a binary or JSON frame payload (sniffed by magic)."""
    if not data[:4] == MAGIC:
        try:
            return frame_from_json(data.decode("utf-8"))
        except UnicodeDecodeError:
            raise FormatError("payload is neither an IMLG binary frame nor JSON") from None
    cur = _Cursor(data)
    _, version, frame_id = cur.take(_HEADER)
    if version != VERSION:
        raise FormatError(f"unsupported frame version {version}")

    (n_nodes,) = cur.take(_U32)
    nodes = np.frombuffer(cur.take_raw(n_nodes * _NODE_DTYPE.itemsize), dtype=_NODE_DTYPE)

    (n_edges,) = cur.take(_U32)
    edge_ids = np.zeros(n_edges, dtype=np.int64)
    edge_points: list[np.ndarray] = []
    edge_rgba = np.zeros((n_edges, 4), dtype=np.uint8)
    edge_width = np.zeros(n_edges, dtype=np.float64)
    for i in range(n_edges):
        eid, n_pts, r, g, b, a, width = cur.take(_EDGE_HEAD)
        edge_ids[i] = eid
        edge_rgba[i] = (r, g, b, a)
        edge_width[i] = np.float32(width)
        raw = cur.take_raw(n_pts * 12)
        edge_points.append(
            np.frombuffer(raw, dtype="<f4").astype(np.float64).reshape(-1, 3)
        )

    (n_rings,) = cur.take(_U32)
    rings = []
    for _ in range(n_rings):
        cid, cx, cy, cz, radius, r, g, b, a = cur.take(_RING)
        rings.append(
            Ring(
                community=int(cid),
                center=np.array([np.float32(c) for c in (cx, cy, cz)], dtype=np.float64),
                radius=float(np.float32(radius)),
                rgba=(r, g, b, a),
            )
        )
    if cur.off != len(data):
        raise FormatError(f"{len(data) - cur.off} trailing bytes after frame")

    return LayoutFrame(
        frame_id=frame_id,
        node_ids=nodes["id"].astype(np.int64),
        node_pos=nodes["pos"].astype(np.float64).reshape(-1, 3),
        node_radius=nodes["radius"].astype(np.float64),
        node_rgba=nodes["rgba"].reshape(-1, 4).copy(),
        edge_ids=edge_ids,
        edge_points=edge_points,
        edge_rgba=edge_rgba,
        edge_width=edge_width,
        rings=rings,
    )


# ---------------------------------------------------------------------------
# JSON command / event messages


def encode_command(cmd: dict[str, Any]) -> str:
    if cmd.get("type") not in COMMAND_TYPES:
        raise FormatError(f"unknown command type {cmd.get('type')!r}")
    return json.dumps(cmd, separators=(",", ":"))


def decode_command(text: str) -> dict[str, Any]:
    """Parse and validate one wire command."""
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise FormatError(f"invalid command JSON: {exc.msg}") from None
    if not isinstance(doc, dict):
        raise FormatError("command must be a JSON object")
    ctype = doc.get("type")
    if ctype not in COMMAND_TYPES:
        raise FormatError(f"unknown command type {ctype!r}")
    if ctype in _TARGETED:
        if not isinstance(doc.get("target"), int):
            raise FormatError(f"{ctype} requires an integer 'target'")
    if ctype == "loadGraph" and not isinstance(doc.get("name"), str):
        raise FormatError("loadGraph requires a string 'name'")
    if ctype == "setConfig" and not isinstance(doc.get("config"), dict):
        raise FormatError("setConfig requires an object 'config'")
    return doc


def encode_event(event: dict[str, Any]) -> str:
    if event.get("type") not in EVENT_TYPES:
        raise FormatError(f"unknown event type {event.get('type')!r}")
    return json.dumps(event, separators=(",", ":"))


def decode_event(text: str) -> dict[str, Any]:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise FormatError(f"invalid event JSON: {exc.msg}") from None
    if not isinstance(doc, dict) or doc.get("type") not in EVENT_TYPES:
        raise FormatError(f"unknown event type {doc.get('type') if isinstance(doc, dict) else doc!r}")
    return doc
