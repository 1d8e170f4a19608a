"""Figure rendering for CLI reports (headless matplotlib)."""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402  (backend must be set first)
import numpy as np  # noqa: E402
from mpl_toolkits.mplot3d.art3d import Line3DCollection  # noqa: E402

from .frame import LayoutFrame  # noqa: E402


def save_frame_png(frame: LayoutFrame, path: str | Path, title: str | None = None,
                   elev: float = 12.0, azim: float = -75.0) -> Path:
    """Render one frame as a 3D scatter-plus-polylines figure."""
    fig = plt.figure(figsize=(9, 9), facecolor="black")
    ax = fig.add_subplot(projection="3d", facecolor="black")
    ax.set_axis_off()

    if frame.n_edges:
        segments = []
        colors = []
        for i in range(frame.n_edges):
            pts = frame.edge_points[i]
            segments.extend(np.stack([pts[:-1], pts[1:]], axis=1))
            rgba = frame.edge_rgba[i] / 255.0
            colors.extend([tuple(rgba)] * (len(pts) - 1))
        ax.add_collection3d(Line3DCollection(segments, colors=colors, linewidths=0.6))

    if frame.n_nodes:
        sizes = 2000.0 * frame.node_radius
        ax.scatter(
            frame.node_pos[:, 0],
            frame.node_pos[:, 2],
            frame.node_pos[:, 1],
            s=sizes,
            c=frame.node_rgba / 255.0,
            depthshade=False,
        )

    for ring in frame.rings:
        t = np.linspace(0.0, 2.0 * np.pi, 64)
        cx, cy, cz = ring.center
        ax.plot(
            cx + ring.radius * np.cos(t),
            cz + ring.radius * np.sin(t),
            np.full_like(t, cy),
            color=np.asarray(ring.rgba) / 255.0,
            linewidth=1.2,
        )

    if frame.n_nodes:
        span = frame.node_pos.max(axis=0) - frame.node_pos.min(axis=0)
        mid = (frame.node_pos.max(axis=0) + frame.node_pos.min(axis=0)) / 2.0
        half = max(float(span.max()) / 2.0, 1e-6)
        ax.set_xlim(mid[0] - half, mid[0] + half)
        ax.set_ylim(mid[2] - half, mid[2] + half)
        ax.set_zlim(mid[1] - half, mid[1] + half)
    ax.view_init(elev=elev, azim=azim)
    if title:
        ax.set_title(title, color="white")
    path = Path(path)
    fig.savefig(path, dpi=110, facecolor="black", bbox_inches="tight")
    plt.close(fig)
    return path


def save_timing_png(stages: dict[str, float], path: str | Path, title: str) -> Path:
    """Horizontal bar chart of stage timings in milliseconds."""
    names = list(stages)
    values = [stages[k] * 1000.0 for k in names]
    fig, ax = plt.subplots(figsize=(8, 0.6 * len(names) + 1.5))
    ax.barh(names, values, color="#4878a8")
    ax.set_xlabel("milliseconds")
    ax.set_title(title)
    ax.invert_yaxis()
    for i, v in enumerate(values):
        ax.text(v, i, f" {v:.1f}", va="center", fontsize=9)
    fig.tight_layout()
    path = Path(path)
    fig.savefig(path, dpi=110)
    plt.close(fig)
    return path
