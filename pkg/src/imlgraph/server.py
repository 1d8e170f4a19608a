"""WebSocket session service: JSON commands in, frames and events out.

Every connection owns an isolated session (scene engine plus telemetry
row). Frames stream on a fixed cadence with latest-wins skipping, plus an
immediate frame after every accepted command so interactions are visible
without waiting for the next tick.
"""

from __future__ import annotations

import asyncio
import json
import logging
import time
from dataclasses import dataclass, replace
from pathlib import Path

from websockets.asyncio.server import serve as ws_serve

from .community import LouvainConfig, detect_communities
from .datasets import PRESETS, preset_graph
from .errors import EngineError, FormatError, InvalidStateError, UnknownIdError
from .force import ForceConfig
from .graph import load_graph
from .protocol import decode_command, encode_event, encode_frame
from .scene import (
    COMMAND_KINDS,
    NETWORK_EXPANDED,
    Command,
    SceneConfig,
    SceneEngine,
    initial_state,
)
from .telemetry import SessionLog, log_interaction

log = logging.getLogger(__name__)

_SUFFIXES = ("", ".json", ".graphml", ".xml", ".edges", ".txt", ".el")


@dataclass(frozen=True)
class ServerConfig:
    host: str = "127.0.0.1"
    port: int = 8765
    graph_dir: Path | None = None
    frame_rate: float = 30.0
    frame_format: str = "binary"
    seed: int = 0
    telemetry_dir: Path | None = None


class Session:
    """One client's state: engine, telemetry, per-session config."""

    _counter = 0

    def __init__(self, cfg: ServerConfig):
        Session._counter += 1
        self.id = Session._counter
        self.cfg = cfg
        self.engine: SceneEngine | None = None
        self.log = SessionLog()
        self.frame_rate = cfg.frame_rate
        self.frame_format = cfg.frame_format
        self.seed = cfg.seed
        self.base_mode = False

    # -- graph loading ------------------------------------------------------

    def _resolve(self, name: str):
        if name.startswith("preset:"):
            return preset_graph(name.removeprefix("preset:"))
        if self.cfg.graph_dir is not None:
            if Path(name).name != name:
                raise UnknownIdError(f"graph name {name!r} must be a bare file name")
            for suffix in _SUFFIXES:
                path = self.cfg.graph_dir / (name + suffix)
                if path.is_file():
                    return load_graph(path)
        if name in PRESETS:
            return preset_graph(name)
        raise UnknownIdError(f"no graph named {name!r}")

    def load(self, name: str) -> dict:
        g = self._resolve(name)
        h = detect_communities(g, LouvainConfig(seed=self.seed))
        self.engine = SceneEngine(h, force_cfg=ForceConfig(seed=self.seed))
        if self.base_mode:
            self.engine.state = replace(
                initial_state(h), network_mode=NETWORK_EXPANDED
            )
            self.engine.positions = self.engine.spherical.positions.copy()
            self.engine._dirty = True
            self.engine._anchors_stale = True
        self.log.graph_id = name
        log_interaction(self.log, "loadGraph")
        tops = sorted(h.tree.top_level())
        return {
            "type": "graph",
            "name": name,
            "nodes": g.n_nodes,
            "edges": g.n_edges,
            "communities": len(tops),
            "depth": h.tree.depth,
            # enough structure for clients to pick and target communities
            "topCommunities": tops,
            "membership": [int(h.tree.top_community_of(i)) for i in range(g.n_nodes)],
            "colors": {str(c): list(h.color_of[c]) for c in tops},
        }

    # -- commands -----------------------------------------------------------

    def _set_config(self, config: dict) -> dict:
        applied = {}
        for key, value in config.items():
            if key == "taskId":
                self.log.task_id = str(value)
            elif key == "condition":
                self.log.condition = str(value)
            elif key == "accuracy":
                self.log.accuracy = float(value)
            elif key == "correctAnswerProvided":
                self.log.correct_answer_provided = bool(value)
            elif key == "frameRate":
                self.frame_rate = max(1.0, float(value))
            elif key == "frameFormat":
                if value not in ("binary", "json"):
                    raise FormatError(f"unknown frame format {value!r}")
                self.frame_format = value
            elif key == "seed":
                self.seed = int(value)
            elif key == "baseMode":
                self.base_mode = bool(value)
            elif key == "flushTelemetry":
                applied["telemetry"] = self.log.to_csv()
                continue
            elif key in ("floatingDistance", "projectedRadius", "transitionDuration"):
                if self.engine is not None:
                    field = {
                        "floatingDistance": "floating_distance",
                        "projectedRadius": "projected_radius",
                        "transitionDuration": "transition_duration",
                    }[key]
                    self.engine.cfg = replace(self.engine.cfg, **{field: float(value)})
            else:
                raise FormatError(f"unknown config key {key!r}")
            applied[key] = value
        return applied

    def command(self, doc: dict) -> dict:
        """Apply one decoded command; returns the response event."""
        rid = doc.get("requestId")
        ctype = doc["type"]
        if ctype == "loadGraph":
            out = self.load(doc["name"])
            out["requestId"] = rid
            return out
        if ctype == "setConfig":
            applied = self._set_config(doc["config"])
            out = {"type": "ack", "command": ctype, "requestId": rid}
            if "telemetry" in applied:
                out = {"type": "telemetry", "csv": applied.pop("telemetry"), "requestId": rid}
            log_interaction(self.log, ctype)
            return out
        if self.engine is None:
            raise InvalidStateError("no graph loaded")
        if self.base_mode and ctype in (
            "expandNetwork",
            "expandCommunity",
            "projectCommunity",
            "resetCommunity",
        ):
            raise InvalidStateError(f"{ctype} is disabled in base mode")
        if ctype not in COMMAND_KINDS:
            raise FormatError(f"unknown command type {ctype!r}")
        self.engine.apply(Command(kind=ctype, target=doc.get("target")))
        log_interaction(self.log, ctype)
        return {"type": "ack", "command": ctype, "requestId": rid}

    def flush_telemetry(self) -> None:
        self.log.end_time = time.time()
        if self.cfg.telemetry_dir is None:
            return
        self.cfg.telemetry_dir.mkdir(parents=True, exist_ok=True)
        path = self.cfg.telemetry_dir / f"session_{self.id}_{int(self.log.start_time)}.csv"
        path.write_text(self.log.to_csv())


async def _stream_frames(ws, session: Session, send_lock: asyncio.Lock) -> None:
    last = time.monotonic()
    while True:
        period = 1.0 / session.frame_rate
        await asyncio.sleep(period)
        if session.engine is None:
            continue
        if send_lock.locked():
            continue  # latest wins: drop this tick, the next gets fresher state
        now = time.monotonic()
        frame = session.engine.frame(dt=now - last)
        last = now
        payload = encode_frame(frame, session.frame_format)
        async with send_lock:
            await ws.send(payload)


async def _handle_session(ws, cfg: ServerConfig) -> None:
    session = Session(cfg)
    send_lock = asyncio.Lock()
    streamer = asyncio.create_task(_stream_frames(ws, session, send_lock))
    log.info("session %d connected", session.id)
    try:
        async for raw in ws:
            if isinstance(raw, bytes):
                event = {"type": "error", "requestId": None, "message": "binary commands not supported"}
                async with send_lock:
                    await ws.send(encode_event(event))
                continue
            rid = None
            try:
                try:
                    rid = json.loads(raw).get("requestId")
                except (json.JSONDecodeError, AttributeError):
                    pass
                doc = decode_command(raw)
                response = session.command(doc)
            except (EngineError, KeyError, ValueError) as exc:
                response = {
                    "type": "error",
                    "requestId": rid,
                    "message": f"{type(exc).__name__}: {exc}",
                }
            async with send_lock:
                await ws.send(encode_event(response))
                if response["type"] != "error" and session.engine is not None:
                    frame = session.engine.frame(0.0)
                    await ws.send(encode_frame(frame, session.frame_format))
    finally:
        streamer.cancel()
        session.flush_telemetry()
        log.info("session %d closed", session.id)


async def start_server(cfg: ServerConfig):
    """Bind and start serving; returns the Server (caller closes it)."""
    try:
        server = await ws_serve(
            lambda ws: _handle_session(ws, cfg),
            cfg.host,
            cfg.port,
            max_size=None,
        )
    except OSError as exc:
        from .errors import BindError

        raise BindError(f"cannot bind {cfg.host}:{cfg.port}: {exc}") from None
    return server


def bound_port(server) -> int:
    return server.sockets[0].getsockname()[1]


async def _serve_forever(cfg: ServerConfig) -> None:
    server = await start_server(cfg)
    port = bound_port(server)
    log.info("listening on ws://%s:%d", cfg.host, port)
    print(f"listening on ws://{cfg.host}:{port}", flush=True)
    async with server:
        await server.serve_forever()


def serve(cfg: ServerConfig) -> None:
    """Blocking entry point used by the CLI."""
    asyncio.run(_serve_forever(cfg))
