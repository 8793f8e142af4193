"""CSV and SVG writers for run artifacts.

CSV files use the :mod:`csv` module (header row, RFC-4180 quoting, CRLF
line ends); floats are written with ``repr`` so they round-trip exactly.
SVG plots are plain text with fixed number formatting, so identical
inputs give byte-identical files.
"""

from __future__ import annotations

import csv
import math
import os
from pathlib import Path
from typing import Iterable, Sequence
from xml.sax.saxutils import escape

import numpy as np

from .errors import ValidationError

__all__ = ["write_csv", "read_csv", "emit_plot", "render_svg"]

WIDTH, HEIGHT = 640, 400
MARGIN_L, MARGIN_R, MARGIN_T, MARGIN_B = 70, 20, 30, 50
COLORS = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b")


def _cell(v):
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return str(v)


def write_csv(path, rows: Iterable[Sequence]) -> Path:
    """Write ``rows`` (first row is the header) to ``path``, creating parents."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        for row in rows:
            w.writerow([_cell(v) for v in row])
    return path


def read_csv(path) -> tuple[list[str], np.ndarray]:
    """Header and float matrix of a numeric CSV written by :func:`write_csv`."""
    with open(path, newline="", encoding="utf-8") as fh:
        rows = list(csv.reader(fh))
    return rows[0], np.array([[float(v) for v in r] for r in rows[1:]])


def _nice_ticks(lo: float, hi: float, n: int = 5) -> list[float]:
    if hi <= lo:
        return [lo]
    raw = (hi - lo) / n
    mag = 10 ** math.floor(math.log10(raw))
    step = min((s * mag for s in (1, 2, 2.5, 5, 10) if s * mag >= raw), default=10 * mag)
    start = math.ceil(lo / step - 1e-9) * step
    ticks = []
    v = start
    while v <= hi + 1e-9 * step:
        ticks.append(0.0 if abs(v) < 1e-12 * step else v)
        v += step
    return ticks


def _fmt(v: float) -> str:
    return f"{v:.2f}"


def _tick_label(v: float) -> str:
    return f"{v:.4g}"


def render_svg(series, title: str = "", xlabel: str = "", ylabel: str = "") -> str:
    """SVG 1.1 text for ``series``: a list of ``(label, xs, ys)``."""
    if not series:
        raise ValidationError(["plot needs at least one series"])
    clean = []
    for item in series:
        label, xs, ys = item
        xs = np.asarray(xs, dtype=float)
        ys = np.asarray(ys, dtype=float)
        if xs.shape != ys.shape or xs.ndim != 1:
            raise ValidationError([f"series {label!r}: x and y lengths differ"])
        if len(xs) == 0:
            raise ValidationError([f"series {label!r} is empty"])
        keep = np.isfinite(xs) & np.isfinite(ys)
        clean.append((str(label), xs[keep], ys[keep]))
    allx = np.concatenate([c[1] for c in clean])
    ally = np.concatenate([c[2] for c in clean])
    if len(allx) == 0:
        raise ValidationError(["plot has no finite points"])
    x0, x1 = float(allx.min()), float(allx.max())
    y0, y1 = float(ally.min()), float(ally.max())
    if x1 == x0:
        x0, x1 = x0 - 0.5, x1 + 0.5
    if y1 == y0:
        y0, y1 = y0 - 0.5, y1 + 0.5
    pw, ph = WIDTH - MARGIN_L - MARGIN_R, HEIGHT - MARGIN_T - MARGIN_B

    def px(v):
        return MARGIN_L + (v - x0) / (x1 - x0) * pw

    def py(v):
        return MARGIN_T + (1.0 - (v - y0) / (y1 - y0)) * ph

    out = [
        '<?xml version="1.0" encoding="UTF-8" standalone="no"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{WIDTH}" height="{HEIGHT}" '
        f'viewBox="0 0 {WIDTH} {HEIGHT}">',
        f'<rect x="0" y="0" width="{WIDTH}" height="{HEIGHT}" fill="white"/>',
        f'<text x="{WIDTH // 2}" y="18" text-anchor="middle" font-family="sans-serif" font-size="14">{escape(title)}</text>',
    ]
    bx, by = MARGIN_L, MARGIN_T + ph
    out.append(f'<line x1="{bx}" y1="{by}" x2="{bx + pw}" y2="{by}" stroke="black"/>')
    out.append(f'<line x1="{bx}" y1="{MARGIN_T}" x2="{bx}" y2="{by}" stroke="black"/>')
    for v in _nice_ticks(x0, x1):
        X = _fmt(px(v))
        out.append(f'<line x1="{X}" y1="{by}" x2="{X}" y2="{by + 5}" stroke="black"/>')
        out.append(f'<text x="{X}" y="{by + 18}" text-anchor="middle" font-family="sans-serif" font-size="11">{_tick_label(v)}</text>')
    for v in _nice_ticks(y0, y1):
        Y = _fmt(py(v))
        out.append(f'<line x1="{bx - 5}" y1="{Y}" x2="{bx}" y2="{Y}" stroke="black"/>')
        out.append(f'<text x="{bx - 8}" y="{Y}" text-anchor="end" dominant-baseline="middle" font-family="sans-serif" font-size="11">{_tick_label(v)}</text>')
    out.append(f'<text x="{bx + pw // 2}" y="{HEIGHT - 10}" text-anchor="middle" font-family="sans-serif" font-size="12">{escape(xlabel)}</text>')
    out.append(
        f'<text x="16" y="{MARGIN_T + ph // 2}" text-anchor="middle" font-family="sans-serif" font-size="12" '
        f'transform="rotate(-90 16 {MARGIN_T + ph // 2})">{escape(ylabel)}</text>'
    )
    for i, (label, xs, ys) in enumerate(clean):
        color = COLORS[i % len(COLORS)]
        pts = " ".join(f"{_fmt(px(a))},{_fmt(py(b))}" for a, b in zip(xs, ys))
        out.append(f'<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{pts}"/>')
        ly = MARGIN_T + 14 + 16 * i
        out.append(f'<line x1="{bx + pw - 110}" y1="{ly}" x2="{bx + pw - 90}" y2="{ly}" stroke="{color}" stroke-width="2"/>')
        out.append(f'<text x="{bx + pw - 85}" y="{ly + 4}" font-family="sans-serif" font-size="11">{escape(label)}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def emit_plot(series, path, title: str = "", xlabel: str = "", ylabel: str = "") -> Path:
    """Write :func:`render_svg` output to ``path``."""
    text = render_svg(series, title, xlabel, ylabel)
    path = Path(path)
    if path.parent and not path.parent.exists():
        path.parent.mkdir(parents=True, exist_ok=True)
    if path.exists() and not os.access(path, os.W_OK):
        raise PermissionError(f"cannot write {path}")
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)
    return path
