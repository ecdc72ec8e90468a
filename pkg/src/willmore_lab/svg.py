"""Tiny self-contained SVG writers for heatmaps and line/scatter plots.

Output is a pure function of the data, so reruns are byte-identical.
"""
import math

import numpy as np

W, H, PAD = 640, 420, 56


def _fmt(x):
    return f"{x:.6g}"


def _header(title):
    return [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" '
        f'viewBox="0 0 {W} {H}" font-family="sans-serif" font-size="11">',
        f'<rect width="{W}" height="{H}" fill="white"/>',
        f'<text x="{W / 2}" y="20" text-anchor="middle" font-size="13">{title}</text>',
    ]


def _axes(xlabel, ylabel, xr, yr):
    x0, x1, y0, y1 = PAD, W - PAD / 2, H - PAD, PAD / 1.5
    out = [
        f'<line x1="{x0}" y1="{y0}" x2="{x1}" y2="{y0}" stroke="black"/>',
        f'<line x1="{x0}" y1="{y0}" x2="{x0}" y2="{y1}" stroke="black"/>',
        f'<text x="{(x0 + x1) / 2}" y="{H - 16}" text-anchor="middle">{xlabel}</text>',
        f'<text x="14" y="{(y0 + y1) / 2}" text-anchor="middle" '
        f'transform="rotate(-90 14 {(y0 + y1) / 2})">{ylabel}</text>',
        f'<text x="{x0}" y="{y0 + 14}" text-anchor="middle">{_fmt(xr[0])}</text>',
        f'<text x="{x1}" y="{y0 + 14}" text-anchor="middle">{_fmt(xr[1])}</text>',
        f'<text x="{x0 - 4}" y="{y0}" text-anchor="end">{_fmt(yr[0])}</text>',
        f'<text x="{x0 - 4}" y="{y1 + 4}" text-anchor="end">{_fmt(yr[1])}</text>',
    ]
    return out, (x0, x1, y0, y1)


def _range(vals):
    vals = [v for v in vals if math.isfinite(v)]
    lo, hi = (min(vals), max(vals)) if vals else (0.0, 1.0)
    if hi == lo:
        lo, hi = lo - 0.5, hi + 0.5
    return lo, hi


COLORS = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf")


def line_plot(series, title="", xlabel="x", ylabel="y", logx=False, logy=False, markers=True):
    """``series``: list of (label, xs, ys). Non-finite or non-positive (on log axes) points are skipped."""
    tx = (lambda v: math.log10(v)) if logx else float
    ty = (lambda v: math.log10(v)) if logy else float

    def keep(x, y):
        return math.isfinite(x) and math.isfinite(y) and (not logx or x > 0) and (not logy or y > 0)

    pts = [[(tx(x), ty(y)) for x, y in zip(xs, ys) if keep(x, y)] for _, xs, ys in series]
    xr = _range([p[0] for s in pts for p in s])
    yr = _range([p[1] for s in pts for p in s])
    out = _header(title)
    ax, (x0, x1, y0, y1) = _axes(("log10 " if logx else "") + xlabel, ("log10 " if logy else "") + ylabel, xr, yr)
    out += ax
    sx = lambda x: x0 + (x - xr[0]) / (xr[1] - xr[0]) * (x1 - x0)
    sy = lambda y: y0 - (y - yr[0]) / (yr[1] - yr[0]) * (y0 - y1)
    for k, ((label, _, _), s) in enumerate(zip(series, pts)):
        col = COLORS[k % len(COLORS)]
        if len(s) > 1:
            path = " ".join(f"{_fmt(sx(x))},{_fmt(sy(y))}" for x, y in s)
            out.append(f'<polyline points="{path}" fill="none" stroke="{col}"/>')
        if markers:
            out += [f'<circle cx="{_fmt(sx(x))}" cy="{_fmt(sy(y))}" r="2.5" fill="{col}"/>' for x, y in s]
        out.append(f'<text x="{x1 - 4}" y="{y1 + 14 * (k + 1)}" text-anchor="end" fill="{col}">{label}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def heatmap(values, xs, ys, title="", xlabel="x", ylabel="y"):
    """values[i, j] drawn at (xs[j], ys[i]); NaN cells are grey."""
    values = np.asarray(values, dtype=float)
    finite = values[np.isfinite(values)]
    lo, hi = (float(finite.min()), float(finite.max())) if finite.size else (0.0, 1.0)
    if hi == lo:
        hi = lo + 1.0
    out = _header(title)
    ax, (x0, x1, y0, y1) = _axes(xlabel, ylabel, (xs[0], xs[-1]), (ys[0], ys[-1]))
    ny, nx = values.shape
    cw, ch = (x1 - x0) / nx, (y0 - y1) / ny
    for i in range(ny):
        for j in range(nx):
            v = values[i, j]
            if np.isfinite(v):
                s = (v - lo) / (hi - lo)
                col = f"rgb({int(255 * s)},{int(80 + 100 * (1 - abs(2 * s - 1)))},{int(255 * (1 - s))})"
            else:
                col = "#bbbbbb"
            out.append(f'<rect x="{_fmt(x0 + j * cw)}" y="{_fmt(y0 - (i + 1) * ch)}" '
                       f'width="{_fmt(cw + 0.2)}" height="{_fmt(ch + 0.2)}" fill="{col}"/>')
    out += ax
    out.append(f'<text x="{x1}" y="{y1 - 4}" text-anchor="end">range [{_fmt(lo)}, {_fmt(hi)}]</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"
