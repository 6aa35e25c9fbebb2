"""Minimal static SVG line charts for the run panels (no plotting dependency)."""

from __future__ import annotations

from pathlib import Path
from typing import Dict, Sequence, Tuple
from xml.sax.saxutils import escape

import numpy as np

WIDTH, HEIGHT = 900, 240
MARGIN = (60, 20, 20, 40)  # left, right, top, bottom
COLORS = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd")
MAX_POINTS = 2000


def _thin(x: np.ndarray, y: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    step = max(1, x.size // MAX_POINTS)
    return x[::step], y[::step]


def _fmt(v: float) -> str:
    return f"{v:.3g}"


def line_chart(t: np.ndarray, series: Dict[str, np.ndarray], title: str) -> str:
    left, right, top, bottom = MARGIN
    pw, ph = WIDTH - left - right, HEIGHT - top - bottom
    ys = np.concatenate([np.asarray(v, dtype=float) for v in series.values()])
    ys = ys[np.isfinite(ys)]
    lo, hi = (float(ys.min()), float(ys.max())) if ys.size else (0.0, 1.0)
    if hi - lo < 1e-12:
        lo, hi = lo - 0.5, hi + 0.5
    t0, t1 = float(t[0]), float(t[-1]) if t[-1] > t[0] else float(t[0]) + 1.0

    def sx(v):
        return left + (v - t0) / (t1 - t0) * pw

    def sy(v):
        return top + (hi - v) / (hi - lo) * ph

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" '
        f'font-family="sans-serif" font-size="11">',
        f'<rect x="{left}" y="{top}" width="{pw}" height="{ph}" fill="none" stroke="#444"/>',
        f'<text x="{left}" y="{top - 5}">{escape(title)}</text>',
    ]
    for frac in (0.0, 0.5, 1.0):
        yv = lo + frac * (hi - lo)
        tv = t0 + frac * (t1 - t0)
        parts.append(f'<text x="{left - 5}" y="{sy(yv) + 4:.1f}" text-anchor="end">{_fmt(yv)}</text>')
        parts.append(f'<text x="{sx(tv):.1f}" y="{HEIGHT - bottom + 15}" text-anchor="middle">{_fmt(tv)}</text>')
    parts.append(f'<text x="{left + pw / 2}" y="{HEIGHT - 5}" text-anchor="middle">t</text>')
    for (name, y), color in zip(series.items(), COLORS):
        xs, yv = _thin(np.asarray(t, dtype=float), np.asarray(y, dtype=float))
        pts = " ".join(f"{sx(a):.1f},{sy(b):.1f}" for a, b in zip(xs, yv) if np.isfinite(b))
        parts.append(f'<polyline fill="none" stroke="{color}" stroke-width="1" points="{pts}"/>')
    legend_x = left + pw - 10
    for i, (name, color) in enumerate(zip(series, COLORS)):
        parts.append(
            f'<text x="{legend_x}" y="{top + 14 + 13 * i}" text-anchor="end" fill="{color}">{escape(name)}</text>'
        )
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


PANELS: Sequence[Tuple[str, Tuple[str, ...]]] = (
    ("u", ("u",)),
    ("R", ("R",)),
    ("rho_phi", ("rho", "phi")),
    ("B", ("B",)),
)


def write_panels(samples: Dict[str, np.ndarray], out_dir, prefix: str = "panel_") -> list:
    """One SVG per panel row: ``u``, ``R``, ``rho`` with ``phi``, and ``B``."""
    out_dir = Path(out_dir)
    paths = []
    for name, cols in PANELS:
        svg = line_chart(samples["t"], {c: samples[c] for c in cols}, " / ".join(cols))
        path = out_dir / f"{prefix}{name}.svg"
        path.write_text(svg)
        paths.append(path)
    return paths
