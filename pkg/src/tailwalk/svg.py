"""Static SVG plots: fidelity curves and spectra. Plain text, no plotting library."""

from __future__ import annotations

from typing import Sequence

import numpy as np

WIDTH, HEIGHT = 640, 400
MARGIN = 50


def _fmt(v: float) -> str:
    return f"{v:.3f}"


def _frame(title: str) -> list[str]:
    return [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" '
        f'viewBox="0 0 {WIDTH} {HEIGHT}">',
        f'<rect x="0" y="0" width="{WIDTH}" height="{HEIGHT}" fill="white"/>',
        f'<text x="{WIDTH // 2}" y="24" text-anchor="middle" font-family="sans-serif" '
        f'font-size="14">{title}</text>',
        f'<line x1="{MARGIN}" y1="{HEIGHT - MARGIN}" x2="{WIDTH - MARGIN}" y2="{HEIGHT - MARGIN}" stroke="black"/>',
    ]


class _Axis:
    def __init__(self, lo: float, hi: float, start: float, stop: float):
        if hi <= lo:
            hi = lo + 1.0
        self.lo, self.hi, self.start, self.stop = lo, hi, start, stop

    def __call__(self, v: float) -> float:
        return self.start + (v - self.lo) / (self.hi - self.lo) * (self.stop - self.start)


def render_fidelity_svg(
    times: Sequence[float],
    values: Sequence[float],
    t_star: float | None = None,
    t_pred: float | None = None,
    title: str = "fidelity",
) -> str:
    """Line plot of fidelity against time, with optional peak and predicted-time markers."""
    times, values = np.asarray(times, dtype=float), np.asarray(values, dtype=float)
    if len(times) == 0:
        raise ValueError("empty curve")
    sx = _Axis(float(times[0]), float(times[-1]), MARGIN, WIDTH - MARGIN)
    sy = _Axis(0.0, max(1.0, float(values.max())), HEIGHT - MARGIN, MARGIN)
    out = _frame(title)
    out.append(f'<line x1="{MARGIN}" y1="{MARGIN}" x2="{MARGIN}" y2="{HEIGHT - MARGIN}" stroke="black"/>')
    pts = " ".join(f"{_fmt(sx(t))},{_fmt(sy(f))}" for t, f in zip(times, values))
    out.append(f'<polyline class="curve" fill="none" stroke="steelblue" stroke-width="1.5" points="{pts}"/>')
    if t_pred is not None:
        x = _fmt(sx(t_pred))
        out.append(
            f'<line class="predicted" data-t="{t_pred!r}" x1="{x}" y1="{MARGIN}" x2="{x}" '
            f'y2="{HEIGHT - MARGIN}" stroke="gray" stroke-dasharray="4 3"/>'
        )
    if t_star is not None:
        f_star = float(np.interp(t_star, times, values))
        out.append(
            f'<circle class="peak" data-t="{t_star!r}" cx="{_fmt(sx(t_star))}" cy="{_fmt(sy(f_star))}" '
            f'r="4" fill="crimson"/>'
        )
    out.append(
        f'<text x="{WIDTH // 2}" y="{HEIGHT - 12}" text-anchor="middle" font-family="sans-serif" '
        f'font-size="12">t in [{_fmt(times[0])}, {_fmt(times[-1])}]</text>'
    )
    out.append("</svg>")
    return "\n".join(out) + "\n"


def render_spectrum_svg(eigenvalues: Sequence[float], title: str = "spectrum") -> str:
    """Dot plot of eigenvalues on a line, with the continuous band [-2, 2] shaded."""
    vals = np.asarray(list(eigenvalues), dtype=float)
    lo = min(-3.0, float(vals.min()) - 1.0) if len(vals) else -3.0
    hi = max(3.0, float(vals.max()) + 1.0) if len(vals) else 3.0
    sx = _Axis(lo, hi, MARGIN, WIDTH - MARGIN)
    y = HEIGHT // 2
    out = _frame(title)
    out.append(
        f'<rect class="band" x="{_fmt(sx(-2.0))}" y="{y - 20}" width="{_fmt(sx(2.0) - sx(-2.0))}" '
        f'height="40" fill="lightgray"/>'
    )
    out.append(f'<line x1="{MARGIN}" y1="{y}" x2="{WIDTH - MARGIN}" y2="{y}" stroke="black"/>')
    for v in vals:
        out.append(f'<circle class="eigenvalue" data-value="{float(v)!r}" cx="{_fmt(sx(v))}" cy="{y}" r="4" fill="crimson"/>')
    out.append(
        f'<text x="{WIDTH // 2}" y="{HEIGHT - 12}" text-anchor="middle" font-family="sans-serif" '
        f'font-size="12">eigenvalue axis [{_fmt(lo)}, {_fmt(hi)}]</text>'
    )
    out.append("</svg>")
    return "\n".join(out) + "\n"
