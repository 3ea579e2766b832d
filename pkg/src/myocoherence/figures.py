"""Deterministic SVG rendering of matrices, networks, and confusions.

Output is plain SVG text built from the input values alone — no
timestamps, no randomness — so a given matrix always produces the same
bytes.  Elements that tests (or downstream tooling) may want to inspect
carry stable ids: heatmap cells are ``cell-<row>-<col>``, network edges
``edge-<i>-<j>``, confusion annotations ``ann-<row>-<col>`` (all indices
1-based to match channel and gesture numbering).
"""

from __future__ import annotations

import math
from xml.sax.saxutils import escape

import numpy as np

from .datamodel import N_CHANNELS
from .errors import ShapeError
from .netfeat import CoherenceMatrix

# Anchor colors of the perceptually ordered map (dark violet -> yellow),
# interpolated linearly in RGB between anchors.
_HEAT_ANCHORS = (
    (0.00, (68, 1, 84)),
    (0.25, (59, 82, 139)),
    (0.50, (33, 145, 140)),
    (0.75, (94, 201, 98)),
    (1.00, (253, 231, 37)),
)


def heat_color(value: float) -> str:
    """Map a value in [0, 1] to a hex fill (clamped outside the range)."""
    v = min(1.0, max(0.0, float(value)))
    for (lo, lo_rgb), (hi, hi_rgb) in zip(_HEAT_ANCHORS, _HEAT_ANCHORS[1:]):
        if v <= hi:
            t = (v - lo) / (hi - lo)
            rgb = tuple(round(a + t * (b - a)) for a, b in zip(lo_rgb, hi_rgb))
            return "#{:02x}{:02x}{:02x}".format(*rgb)
    return "#{:02x}{:02x}{:02x}".format(*_HEAT_ANCHORS[-1][1])


def edge_color(value: float) -> str:
    """Blue (0) to red (1) for network edge strength."""
    v = min(1.0, max(0.0, float(value)))
    return "#{:02x}00{:02x}".format(round(255 * v), round(255 * (1 - v)))


def _svg(width: float, height: float, body: list[str]) -> str:
    head = (
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width:g}" height="{height:g}" '
        f'viewBox="0 0 {width:g} {height:g}">'
    )
    return "\n".join([head] + body + ["</svg>"]) + "\n"


def _color_bar(x: float, y: float, height: float, body: list[str]) -> None:
    steps = 64
    for s in range(steps):
        v = 1.0 - (s + 0.5) / steps  # top = 1, bottom = 0
        body.append(
            f'<rect x="{x:.2f}" y="{y + s * height / steps:.2f}" width="14" '
            f'height="{height / steps + 0.5:.2f}" fill="{heat_color(v)}"/>'
        )
    for tick, label in ((0.0, "1.0"), (0.5, "0.5"), (1.0, "0.0")):
        body.append(
            f'<text x="{x + 18:.2f}" y="{y + tick * height + 4:.2f}" '
            f'font-size="11" font-family="sans-serif">{label}</text>'
        )


def render_heatmap(matrix: CoherenceMatrix, title: str = "") -> str:
    """12x12 coherence heatmap with channel labels and a color bar."""
    cell = 28.0
    left, top = 40.0, 30.0
    grid = cell * N_CHANNELS
    body = []
    if title:
        body.append(
            f'<text x="{left + grid / 2:.2f}" y="18" font-size="13" '
            f'font-family="sans-serif" text-anchor="middle">{escape(title)}</text>'
        )
    for i in range(N_CHANNELS):
        for j in range(N_CHANNELS):
            body.append(
                f'<rect id="cell-{i + 1}-{j + 1}" x="{left + j * cell:.2f}" '
                f'y="{top + i * cell:.2f}" width="{cell:.2f}" height="{cell:.2f}" '
                f'fill="{heat_color(matrix.values[i, j])}"/>'
            )
    for k in range(N_CHANNELS):
        center = (k + 0.5) * cell
        body.append(
            f'<text x="{left + center:.2f}" y="{top + grid + 14:.2f}" font-size="10" '
            f'font-family="sans-serif" text-anchor="middle">{k + 1}</text>'
        )
        body.append(
            f'<text x="{left - 6:.2f}" y="{top + center + 3:.2f}" font-size="10" '
            f'font-family="sans-serif" text-anchor="end">{k + 1}</text>'
        )
    _color_bar(left + grid + 16, top, grid, body)
    return _svg(left + grid + 70, top + grid + 30, body)


def render_network(matrix: CoherenceMatrix, title: str = "") -> str:
    """12 nodes on a circle; one edge per channel pair, blue->red by MSC."""
    radius, center, node_r = 130.0, 170.0, 12.0
    body = []
    if title:
        body.append(
            f'<text x="{center:.2f}" y="20" font-size="13" '
            f'font-family="sans-serif" text-anchor="middle">{escape(title)}</text>'
        )

    def position(k: int) -> tuple[float, float]:
        angle = -math.pi / 2 + 2 * math.pi * k / N_CHANNELS
        return center + radius * math.cos(angle), center + radius * math.sin(angle)

    for i in range(N_CHANNELS):
        xi, yi = position(i)
        for j in range(i + 1, N_CHANNELS):
            xj, yj = position(j)
            v = matrix.values[i, j]
            body.append(
                f'<line id="edge-{i + 1}-{j + 1}" x1="{xi:.2f}" y1="{yi:.2f}" '
                f'x2="{xj:.2f}" y2="{yj:.2f}" stroke="{edge_color(v)}" '
                f'stroke-width="{0.6 + 2.4 * min(1.0, max(0.0, v)):.3f}"/>'
            )
    for k in range(N_CHANNELS):
        x, y = position(k)
        body.append(
            f'<circle id="node-{k + 1}" cx="{x:.2f}" cy="{y:.2f}" r="{node_r:g}" '
            f'fill="#f5f5f5" stroke="#333333"/>'
        )
        body.append(
            f'<text x="{x:.2f}" y="{y + 3.5:.2f}" font-size="10" '
            f'font-family="sans-serif" text-anchor="middle">{k + 1}</text>'
        )
    return _svg(2 * center, 2 * center, body)


def render_confusion(counts: np.ndarray, classes, title: str = "") -> str:
    """Annotated confusion grid (true class per row, predicted per column).

    Cells are shaded relative to the matrix maximum; every strictly
    positive count is annotated to one decimal place.
    """
    counts = np.asarray(counts, dtype=np.float64)
    classes = [int(c) for c in classes]
    k = len(classes)
    if k == 0 or counts.shape != (k, k):
        raise ShapeError(f"need a nonempty ({k}, {k}) matrix, got {counts.shape}")
    cell = 30.0
    left, top = 46.0, 34.0
    grid = cell * k
    peak = counts.max()
    body = []
    if title:
        body.append(
            f'<text x="{left + grid / 2:.2f}" y="18" font-size="13" '
            f'font-family="sans-serif" text-anchor="middle">{escape(title)}</text>'
        )
    for i in range(k):
        for j in range(k):
            value = counts[i, j]
            shade = value / peak if peak > 0 else 0.0
            body.append(
                f'<rect x="{left + j * cell:.2f}" y="{top + i * cell:.2f}" '
                f'width="{cell:.2f}" height="{cell:.2f}" fill="{heat_color(shade)}" '
                f'stroke="#ffffff" stroke-width="0.5"/>'
            )
            if value > 0:
                text_fill = "#000000" if shade > 0.6 else "#ffffff"
                body.append(
                    f'<text id="ann-{i + 1}-{j + 1}" x="{left + (j + 0.5) * cell:.2f}" '
                    f'y="{top + (i + 0.5) * cell + 3.5:.2f}" font-size="9" '
                    f'font-family="sans-serif" text-anchor="middle" '
                    f'fill="{text_fill}">{value:.1f}</text>'
                )
    for idx, c in enumerate(classes):
        center_pos = (idx + 0.5) * cell
        body.append(
            f'<text x="{left + center_pos:.2f}" y="{top + grid + 14:.2f}" font-size="9" '
            f'font-family="sans-serif" text-anchor="middle">{c}</text>'
        )
        body.append(
            f'<text x="{left - 6:.2f}" y="{top + center_pos + 3:.2f}" font-size="9" '
            f'font-family="sans-serif" text-anchor="end">{c}</text>'
        )
    body.append(
        f'<text x="{left + grid / 2:.2f}" y="{top + grid + 28:.2f}" font-size="10" '
        f'font-family="sans-serif" text-anchor="middle">predicted</text>'
    )
    return _svg(left + grid + 20, top + grid + 36, body)
