import numpy as np

from imlgraph.frame import Ring, empty_frame
from imlgraph.report import save_frame_png, save_timing_png

PNG_SIGNATURE = b"\x89PNG\r\n\x1a\n"


def test_empty_frame_renders(tmp_path):
    out = save_frame_png(empty_frame(), tmp_path / "empty.png")
    assert out.read_bytes()[:8] == PNG_SIGNATURE


def test_frame_with_ring_renders(tmp_path):
    f = empty_frame(1)
    f.node_ids = np.arange(3, dtype=np.int64)
    f.node_pos = np.eye(3)
    f.node_radius = np.full(3, 0.05)
    f.node_rgba = np.tile(np.array([10, 200, 90, 255], dtype=np.uint8), (3, 1))
    f.edge_ids = np.array([0], dtype=np.int64)
    f.edge_points = [np.array([[0.0, 0.0, 0.0], [0.5, 0.5, 0.0], [1.0, 0.0, 0.0]])]
    f.edge_rgba = np.array([[255, 255, 255, 128]], dtype=np.uint8)
    f.edge_width = np.array([1.0])
    f.rings = [Ring(4, np.zeros(3), 1.5, (255, 36, 36, 255))]
    out = save_frame_png(f, tmp_path / "ring.png", title="ring")
    assert out.read_bytes()[:8] == PNG_SIGNATURE


def test_timing_chart(tmp_path):
    out = save_timing_png({"stage a": 0.5, "stage b": 0.0421}, tmp_path / "t.png", "demo")
    assert out.read_bytes()[:8] == PNG_SIGNATURE
