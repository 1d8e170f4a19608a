"""End-to-end CLI runs in temp directories. The demo and bench paths also
cover the PNG report writers."""

import json

import numpy as np
import pytest

from imlgraph.cli import main
from imlgraph.frame import frame_from_json

PNG_SIGNATURE = b"\x89PNG\r\n\x1a\n"


def is_png(path) -> bool:
    return path.read_bytes()[:8] == PNG_SIGNATURE


def test_gen_writes_preset(tmp_path, capsys):
    rc = main(["gen", "--preset", "easy", "-o", str(tmp_path)])
    assert rc == 0
    doc = json.loads((tmp_path / "easy.json").read_text())
    assert len(doc["nodes"]) == 115
    assert len(doc["edges"]) == 613
    assert "easy.json" in capsys.readouterr().out


def test_layout_overview_frame(tmp_path):
    out = tmp_path / "frame.json"
    rc = main(["layout", "preset:easy", "--mode", "overview", "-o", str(out), "--seed", "7"])
    assert rc == 0
    frame = frame_from_json(out.read_text())
    assert frame.n_nodes == 115
    # overview miniature: everything inside the 0.35m ball at (0, 1.4, 1.0)
    d = np.linalg.norm(frame.node_pos - np.array([0.0, 1.4, 1.0]), axis=1)
    assert np.max(d) <= 0.35 * 1.0000001


def test_layout_spherical_with_png(tmp_path):
    out = tmp_path / "frame.json"
    png = tmp_path / "frame.png"
    rc = main([
        "layout", "preset:easy", "--mode", "spherical",
        "-o", str(out), "--png", str(png), "--seed", "7",
    ])
    assert rc == 0
    frame = frame_from_json(out.read_text())
    d = np.linalg.norm(frame.node_pos - np.array([0.0, 1.6, 0.0]), axis=1)
    assert np.allclose(d, 10.0, atol=1e-6)
    assert is_png(png)


def test_layout_projected_mode(tmp_path, easy_hierarchy):
    c = sorted(easy_hierarchy.tree.top_level())[0]
    out = tmp_path / "frame.json"
    rc = main([
        "layout", "preset:easy", "--mode", f"projected:{c}",
        "-o", str(out), "--seed", "7",
    ])
    assert rc == 0
    frame = frame_from_json(out.read_text())
    floor = np.abs(frame.node_pos[:, 1] - 0.02) < 1e-6
    assert floor.any()


def test_layout_rejects_bad_mode(tmp_path, capsys):
    rc = main(["layout", "preset:easy", "--mode", "sideways", "-o", str(tmp_path / "f.json")])
    assert rc == 1
    assert "unknown mode" in capsys.readouterr().err
    rc = main(["layout", "preset:easy", "--mode", "floating", "-o", str(tmp_path / "f.json")])
    assert rc == 1


def test_bench_outputs(tmp_path):
    rc = main(["bench", "preset:easy", "-o", str(tmp_path), "--seed", "7"])
    assert rc == 0
    doc = json.loads((tmp_path / "bench.json").read_text())
    assert doc["nodes"] == 115
    assert doc["communities"] >= 2
    assert 0.0 < doc["modularity"] <= 1.0
    stages = doc["stages"]
    for key in ("louvain", "overview+spherical layout",
                "first frame (full bundling)", "expand one community + frame"):
        assert key in stages
        assert stages[key]["mean_s"] > 0.0
    csv_text = (tmp_path / "bench.csv").read_text()
    assert csv_text.startswith("stage,mean_s,min_s,max_s")
    assert is_png(tmp_path / "bench.png")


def test_demo_figures_and_telemetry(tmp_path):
    rc = main(["demo", "preset:easy", "-o", str(tmp_path), "--seed", "7"])
    assert rc == 0
    pngs = sorted(tmp_path.glob("step*.png"))
    assert [p.name.split("_", 1)[1] for p in pngs] == [
        "overview.png",
        "expandNetwork.png",
        "expandCommunity.png",
        "projectCommunity.png",
        "highlightNode.png",
    ]
    assert all(is_png(p) for p in pngs)
    frame = frame_from_json((tmp_path / "final_frame.json").read_text())
    assert frame.n_nodes == 115
    telemetry = (tmp_path / "telemetry.csv").read_text().strip().splitlines()
    rec = dict(zip(telemetry[0].split(","), telemetry[1].split(",")))
    assert rec["numberOfExpansions"] == "1"
    assert rec["numberOfProjections"] == "1"
    assert rec["numberOfSphericalViews"] == "1"
    assert rec["numberOfOverviews"] == "1"
    assert rec["numberOfInteractions"] == "5"


def test_config_file_overrides(tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"scene": {"transition_duration": 0.1}}))
    out = tmp_path / "frame.json"
    rc = main([
        "layout", "preset:easy", "--mode", "spherical",
        "-o", str(out), "--seed", "7", "--config", str(cfg),
    ])
    assert rc == 0


def test_bad_config_section(tmp_path, capsys):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"scene": [1, 2]}))
    rc = main([
        "layout", "preset:easy", "-o", str(tmp_path / "f.json"), "--config", str(cfg),
    ])
    assert rc == 1
    assert "must be an object" in capsys.readouterr().err


def test_missing_graph_file(tmp_path, capsys):
    rc = main(["layout", str(tmp_path / "nope.json"), "-o", str(tmp_path / "f.json")])
    assert rc == 1


def test_gen_all(tmp_path):
    rc = main(["gen", "--preset", "all", "-o", str(tmp_path)])
    assert rc == 0
    assert {p.name for p in tmp_path.glob("*.json")} == {
        "easy.json", "medium.json", "hard.json", "stress.json",
    }


def test_version(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["--version"])
    assert exc.value.code == 0
    assert "imlgraph" in capsys.readouterr().out
