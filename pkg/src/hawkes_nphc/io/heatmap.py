"""Plain-text heatmaps with unicode shade blocks."""

from typing import Optional

import numpy as np

SHADES = " ░▒▓█"


def render_heatmap(matrix, vmax: Optional[float] = None) -> str:
    """One character per entry; |value| / vmax picks the shade."""
    matrix = np.abs(np.atleast_2d(np.asarray(matrix, dtype=float)))
    scale = float(vmax) if vmax is not None else float(matrix.max(initial=0.0))
    if scale <= 0:
        levels = np.zeros(matrix.shape, dtype=int)
    else:
        levels = np.clip(np.rint(matrix / scale * (len(SHADES) - 1)), 0, len(SHADES) - 1)
        levels = levels.astype(int)
    return "\n".join("".join(SHADES[k] for k in row) for row in levels)


def side_by_side(truth, estimate, titles=("G", "G_hat"), gap: int = 4) -> str:
    """Truth and estimate on a shared scale, next to each other."""
    truth = np.atleast_2d(np.asarray(truth, dtype=float))
    estimate = np.atleast_2d(np.asarray(estimate, dtype=float))
    vmax = max(float(np.abs(truth).max(initial=0.0)), float(np.abs(estimate).max(initial=0.0)))
    left = render_heatmap(truth, vmax).split("\n")
    right = render_heatmap(estimate, vmax).split("\n")
    width = max(truth.shape[1], len(titles[0]))
    lines = [titles[0].ljust(width) + " " * gap + titles[1]]
    for a, b in zip(left, right):
        lines.append(a.ljust(width) + " " * gap + b)
    return "\n".join(lines)
