"""Deterministic figure output: line plots and structure projections as
binary PPM (P6) images rendered through the Agg backend."""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

ELEMENT_COLORS = {
    "H": "#d9d9d9",
    "C": "#4d4d4d",
    "N": "#2e6fdb",
    "O": "#d62728",
    "S": "#d9c938",
    "P": "#e08020",
    "FE": "#b0582a",
    "ZN": "#7a7ab8",
}
DEFAULT_COLOR = "#7f3fbf"


def figure_to_ppm(fig, path: str | Path) -> Path:
    """Rasterize a matplotlib figure and write raw P6 bytes (no metadata,
    so identical figures produce identical files)."""
    fig.canvas.draw()
    rgba = np.asarray(fig.canvas.buffer_rgba())
    rgb = rgba[:, :, :3]
    h, w, _ = rgb.shape
    out = Path(path)
    with out.open("wb") as fh:
        fh.write(f"P6\n{w} {h}\n255\n".encode())
        fh.write(rgb.tobytes())
    plt.close(fig)
    return out


def plot_line_series(
    series: list[tuple[str, np.ndarray, np.ndarray]],
    title: str,
    xlabel: str,
    ylabel: str,
    path: str | Path,
    width: int = 800,
    height: int = 600,
) -> Path:
    fig, ax = plt.subplots(figsize=(width / 100, height / 100), dpi=100)
    for label, x, y in series:
        ax.plot(x, y, label=label, linewidth=1.2)
    ax.set_title(title)
    ax.set_xlabel(xlabel)
    ax.set_ylabel(ylabel)
    if series:
        ax.legend(loc="best", fontsize=8)
    fig.tight_layout()
    return figure_to_ppm(fig, path)


def render_structure_projection(
    coords: np.ndarray,
    elements: list[str],
    path: str | Path,
    width: int = 640,
    height: int = 480,
) -> Path:
    """Orthographic projection onto the two largest principal axes of the
    coordinate cloud; atoms drawn as element-colored discs."""
    centered = coords - coords.mean(axis=0)
    if len(coords) > 1:
        cov = centered.T @ centered
        _, vecs = np.linalg.eigh(cov)
        axes = vecs[:, ::-1][:, :2]
        # Deterministic sign convention.
        for j in range(2):
            k = int(np.argmax(np.abs(axes[:, j])))
            if axes[k, j] < 0:
                axes[:, j] = -axes[:, j]
        xy = centered @ axes
    else:
        xy = np.zeros((len(coords), 2))
    colors = [ELEMENT_COLORS.get(e.upper(), DEFAULT_COLOR) for e in elements]
    fig, ax = plt.subplots(figsize=(width / 100, height / 100), dpi=100)
    ax.scatter(xy[:, 0], xy[:, 1], c=colors, s=40, edgecolors="none")
    ax.set_aspect("equal")
    ax.axis("off")
    fig.tight_layout()
    return figure_to_ppm(fig, path)
