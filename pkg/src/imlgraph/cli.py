"""Command-line entry points: generate graphs, compute layouts, benchmark,
serve, and run the scripted demo session."""

from __future__ import annotations

import argparse
import csv
import json
import logging
import sys
import time
from dataclasses import replace
from pathlib import Path

import numpy as np

from . import __version__
from .bundling import BundlePolicy
from .community import LouvainConfig, detect_communities, louvain, leaf_partition, modularity
from .datasets import PRESETS, preset_graph
from .errors import EngineError
from .force import ForceConfig
from .frame import frame_to_json
from .graph import load_graph, save_graph
from .overview import OverviewConfig
from .scene import (
    KIND_EXPAND_COMMUNITY,
    KIND_EXPAND_NETWORK,
    KIND_HIGHLIGHT_NODE,
    KIND_PROJECT_COMMUNITY,
    Command,
    SceneConfig,
    SceneEngine,
)
from .server import ServerConfig, serve
from .spherical import SphericalConfig
from .telemetry import SessionLog, log_interaction

log = logging.getLogger("imlgraph")

_CONFIG_SECTIONS = {
    "force": ForceConfig,
    "spherical": SphericalConfig,
    "scene": SceneConfig,
    "overview": OverviewConfig,
    "louvain": LouvainConfig,
    "bundle": BundlePolicy,
}


def _load_config(path: str | None) -> dict:
    """Optional JSON config file: {"force": {...}, "scene": {...}, ...}."""
    if not path:
        return {}
    doc = json.loads(Path(path).read_text())
    out = {}
    for section, cls in _CONFIG_SECTIONS.items():
        overrides = doc.get(section, {})
        if not isinstance(overrides, dict):
            raise EngineError(f"config section {section!r} must be an object")
        out[section] = cls(**overrides)
    return out


def _configs(args) -> dict:
    cfgs = _load_config(getattr(args, "config", None))
    for section, cls in _CONFIG_SECTIONS.items():
        cfgs.setdefault(section, cls())
    seed = getattr(args, "seed", None)
    if seed is not None:
        cfgs["force"] = replace(cfgs["force"], seed=seed)
        cfgs["louvain"] = replace(cfgs["louvain"], seed=seed)
    return cfgs


def _read_graph(spec: str):
    """A path, or preset:<name> for the built-in benchmark graphs."""
    if spec.startswith("preset:"):
        return preset_graph(spec.removeprefix("preset:"))
    return load_graph(spec)


def _build_engine(graph_spec: str, cfgs: dict) -> SceneEngine:
    g = _read_graph(graph_spec)
    h = detect_communities(g, cfgs["louvain"])
    return SceneEngine(
        h,
        cfg=cfgs["scene"],
        spherical_cfg=cfgs["spherical"],
        overview_cfg=cfgs["overview"],
        force_cfg=cfgs["force"],
        policy=cfgs["bundle"],
    )


# ---------------------------------------------------------------------------
# gen


def cmd_gen(args) -> int:
    names = sorted(PRESETS) if args.preset == "all" else [args.preset]
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    for name in names:
        g = preset_graph(name)
        path = out_dir / f"{name}.json"
        save_graph(g, path)
        print(f"{path}  nodes={g.n_nodes} edges={g.n_edges}")
    return 0


# ---------------------------------------------------------------------------
# layout


def _drive_to_mode(engine: SceneEngine, mode: str) -> None:
    if mode == "overview":
        return
    engine.apply(Command(KIND_EXPAND_NETWORK))
    engine.settle()
    if mode == "spherical":
        return
    kind, _, target = mode.partition(":")
    c = int(target)
    engine.apply(Command(KIND_EXPAND_COMMUNITY, c))
    engine.settle()
    if kind == "projected":
        engine.apply(Command(KIND_PROJECT_COMMUNITY, c))
        engine.settle()


def cmd_layout(args) -> int:
    mode = args.mode
    base = mode.split(":", 1)[0]
    if base not in ("overview", "spherical", "floating", "projected"):
        raise EngineError(f"unknown mode {mode!r}")
    if base in ("floating", "projected") and ":" not in mode:
        raise EngineError(f"mode {base!r} needs a community id, e.g. {base}:3")
    cfgs = _configs(args)
    engine = _build_engine(args.graph, cfgs)
    _drive_to_mode(engine, mode)
    frame = engine.settle()
    out = Path(args.out)
    out.write_text(frame_to_json(frame))
    print(f"{out}  frame={frame.frame_id} nodes={frame.n_nodes} edges={frame.n_edges}")
    if args.png:
        from .report import save_frame_png

        save_frame_png(frame, args.png, title=mode)
        print(args.png)
    return 0


# ---------------------------------------------------------------------------
# bench


def cmd_bench(args) -> int:
    cfgs = _configs(args)
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    g = _read_graph(args.graph)

    stages: dict[str, list[float]] = {}

    def timed(name: str, fn):
        t0 = time.perf_counter()
        result = fn()
        stages.setdefault(name, []).append(time.perf_counter() - t0)
        return result

    report = {
        "graph": args.graph,
        "nodes": g.n_nodes,
        "edges": g.n_edges,
        "iterations": args.iterations,
        "seed": cfgs["louvain"].seed,
    }
    for _ in range(args.iterations):
        tree = timed("louvain", lambda: louvain(g, cfgs["louvain"]))
        h = detect_communities(g, cfgs["louvain"])
        engine = timed(
            "overview+spherical layout",
            lambda: SceneEngine(
                h,
                cfg=cfgs["scene"],
                spherical_cfg=cfgs["spherical"],
                overview_cfg=cfgs["overview"],
                force_cfg=cfgs["force"],
                policy=cfgs["bundle"],
            ),
        )
        timed("first frame (full bundling)", lambda: engine.frame(0.0))
        engine.apply(Command(KIND_EXPAND_NETWORK))
        engine.settle()
        top = sorted(h.tree.top_level())[0]

        def expand_and_frame():
            engine.apply(Command(KIND_EXPAND_COMMUNITY, top))
            return engine.frame(1.0 / 30.0)

        timed("expand one community + frame", expand_and_frame)
        report["communities"] = len(h.tree.top_level())
        report["modularity"] = modularity(g, leaf_partition(tree, g.n_nodes))

    summary = {
        name: {
            "mean_s": float(np.mean(vals)),
            "min_s": float(np.min(vals)),
            "max_s": float(np.max(vals)),
        }
        for name, vals in stages.items()
    }
    report["stages"] = summary

    json_path = out_dir / "bench.json"
    json_path.write_text(json.dumps(report, indent=2))
    csv_path = out_dir / "bench.csv"
    with csv_path.open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["stage", "mean_s", "min_s", "max_s"])
        for name, row in summary.items():
            writer.writerow([name, f"{row['mean_s']:.6f}", f"{row['min_s']:.6f}", f"{row['max_s']:.6f}"])
    from .report import save_timing_png

    png_path = save_timing_png(
        {name: row["mean_s"] for name, row in summary.items()},
        out_dir / "bench.png",
        f"{args.graph} ({g.n_nodes} nodes, {g.n_edges} edges)",
    )
    for p in (json_path, csv_path, png_path):
        print(p)
    return 0


# ---------------------------------------------------------------------------
# serve


def cmd_serve(args) -> int:
    cfg = ServerConfig(
        host=args.host,
        port=args.port,
        graph_dir=Path(args.graph_dir) if args.graph_dir else None,
        frame_rate=args.frame_rate,
        frame_format=args.frame_format,
        seed=args.seed or 0,
        telemetry_dir=Path(args.telemetry_dir) if args.telemetry_dir else None,
    )
    serve(cfg)
    return 0


# ---------------------------------------------------------------------------
# demo


def cmd_demo(args) -> int:
    cfgs = _configs(args)
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    engine = _build_engine(args.graph, cfgs)
    session = SessionLog(graph_id=args.graph, task_id="demo")
    log_interaction(session, "loadGraph")

    tops = sorted(engine.h.tree.top_level())
    picked = tops[0]
    sample_node = int(engine.comm_leaves[picked][0])
    script = [
        ("overview", None),
        ("expandNetwork", None),
        ("expandCommunity", picked),
        ("projectCommunity", picked),
        ("highlightNode", sample_node),
    ]
    from .report import save_frame_png

    for i, (step, target) in enumerate(script):
        if step != "overview":
            kind = {
                "expandNetwork": KIND_EXPAND_NETWORK,
                "expandCommunity": KIND_EXPAND_COMMUNITY,
                "projectCommunity": KIND_PROJECT_COMMUNITY,
                "highlightNode": KIND_HIGHLIGHT_NODE,
            }[step]
            engine.apply(Command(kind, target))
            log_interaction(session, step)
        frame = engine.settle()
        png = out_dir / f"step{i}_{step}.png"
        save_frame_png(frame, png, title=step)
        print(png)
    (out_dir / "final_frame.json").write_text(frame_to_json(frame))
    (out_dir / "telemetry.csv").write_text(session.to_csv())
    print(out_dir / "final_frame.json")
    print(out_dir / "telemetry.csv")
    return 0


# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="imlgraph",
        description="Multi-layout engine and streaming server for community-structured networks.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true", help="debug logging")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen", help="write a benchmark graph to disk")
    p.add_argument("--preset", default="medium", choices=sorted(PRESETS) + ["all"])
    p.add_argument("-o", "--out-dir", default="graphs")
    p.set_defaults(fn=cmd_gen)

    p = sub.add_parser("layout", help="compute one layout mode and export the frame")
    p.add_argument("graph", help="graph file or preset:<name>")
    p.add_argument("--mode", default="spherical",
                   help="overview | spherical | floating:<id> | projected:<id>")
    p.add_argument("-o", "--out", default="frame.json")
    p.add_argument("--png", help="also render a PNG preview")
    p.add_argument("--seed", type=int)
    p.add_argument("--config", help="JSON config overriding module defaults")
    p.set_defaults(fn=cmd_layout)

    p = sub.add_parser("bench", help="stage timings (JSON + CSV + PNG)")
    p.add_argument("graph", help="graph file or preset:<name>")
    p.add_argument("--iterations", type=int, default=1)
    p.add_argument("-o", "--out-dir", default="bench")
    p.add_argument("--seed", type=int)
    p.add_argument("--config")
    p.set_defaults(fn=cmd_bench)

    p = sub.add_parser("serve", help="run the websocket session server")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8765)
    p.add_argument("--graph-dir")
    p.add_argument("--frame-rate", type=float, default=30.0)
    p.add_argument("--frame-format", default="binary", choices=["binary", "json"])
    p.add_argument("--telemetry-dir")
    p.add_argument("--seed", type=int)
    p.set_defaults(fn=cmd_serve)

    p = sub.add_parser("demo", help="scripted session: figures + telemetry")
    p.add_argument("graph", nargs="?", default="preset:medium")
    p.add_argument("-o", "--out-dir", default="demo")
    p.add_argument("--seed", type=int)
    p.add_argument("--config")
    p.set_defaults(fn=cmd_demo)

    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.INFO,
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        return args.fn(args)
    except EngineError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except KeyboardInterrupt:
        return 130


if __name__ == "__main__":
    sys.exit(main())
