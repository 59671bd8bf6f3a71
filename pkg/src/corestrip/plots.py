"""Standalone SVG plots for traces and sweep results.

No external assets, no timestamps: byte-identical output for identical input.
Four kinds: per-round layer sizes, the light-mass curve L_t, the bins-only
zeta trajectory with a fitted linear guide, and a log-log scaling plot with
a fitted power law.
"""

from __future__ import annotations

import csv
import math
from pathlib import Path

import numpy as np

from .errors import SchemaError

__all__ = ["emit_plots", "render_svg"]

_W, _H = 800, 500
_ML, _MR, _MT, _MB = 70, 20, 30, 50
_COLORS = ["#1f6fb2", "#d1495b", "#3a7d44", "#8a5fbf"]

PLOT_KINDS = ("layers", "Lt", "zeta", "scaling")


def _ticks(lo: float, hi: float, count: int = 5) -> list:
    if not math.isfinite(lo) or not math.isfinite(hi) or hi <= lo:
        return [lo]
    step = (hi - lo) / (count - 1)
    return [lo + i * step for i in range(count)]


def _fmt(x: float) -> str:
    if x == 0:
        return "0"
    if abs(x) >= 1e4 or abs(x) < 1e-3:
        return f"{x:.2e}"
    return f"{x:.4g}"


def render_svg(series: list, xlabel: str, ylabel: str, title: str,
               logx: bool = False, logy: bool = False) -> str:
    """Render (name, xs, ys) series into one SVG document string."""
    pts = []
    for _, xs, ys in series:
        for x, y in zip(xs, ys):
            if math.isfinite(x) and math.isfinite(y) \
                    and (not logx or x > 0) and (not logy or y > 0):
                pts.append((math.log10(x) if logx else x,
                            math.log10(y) if logy else y))
    out = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{_W}" height="{_H}" '
           f'viewBox="0 0 {_W} {_H}">',
           f'<rect width="{_W}" height="{_H}" fill="white"/>',
           f'<text x="{_W / 2}" y="20" text-anchor="middle" font-size="15">{title}</text>']
    x0, x1 = _ML, _W - _MR
    y0, y1 = _H - _MB, _MT
    out.append(f'<line x1="{x0}" y1="{y0}" x2="{x1}" y2="{y0}" stroke="black"/>')
    out.append(f'<line x1="{x0}" y1="{y0}" x2="{x0}" y2="{y1}" stroke="black"/>')
    out.append(f'<text x="{(x0 + x1) / 2}" y="{_H - 12}" text-anchor="middle" '
               f'font-size="13">{xlabel}</text>')
    out.append(f'<text x="18" y="{(y0 + y1) / 2}" text-anchor="middle" font-size="13" '
               f'transform="rotate(-90 18 {(y0 + y1) / 2})">{ylabel}</text>')
    if pts:
        lo_x, hi_x = min(p[0] for p in pts), max(p[0] for p in pts)
        lo_y, hi_y = min(p[1] for p in pts), max(p[1] for p in pts)
        if hi_x == lo_x:
            hi_x = lo_x + 1.0
        if hi_y == lo_y:
            hi_y = lo_y + 1.0

        def sx(v):
            return x0 + (v - lo_x) / (hi_x - lo_x) * (x1 - x0)

        def sy(v):
            return y0 - (v - lo_y) / (hi_y - lo_y) * (y0 - y1)

        for tv in _ticks(lo_x, hi_x):
            px = sx(tv)
            label = _fmt(10 ** tv) if logx else _fmt(tv)
            out.append(f'<line x1="{px:.2f}" y1="{y0}" x2="{px:.2f}" y2="{y0 + 5}" '
                       f'stroke="black"/>')
            out.append(f'<text x="{px:.2f}" y="{y0 + 20}" text-anchor="middle" '
                       f'font-size="11">{label}</text>')
        for tv in _ticks(lo_y, hi_y):
            py = sy(tv)
            label = _fmt(10 ** tv) if logy else _fmt(tv)
            out.append(f'<line x1="{x0 - 5}" y1="{py:.2f}" x2="{x0}" y2="{py:.2f}" '
                       f'stroke="black"/>')
            out.append(f'<text x="{x0 - 8}" y="{py + 4:.2f}" text-anchor="end" '
                       f'font-size="11">{label}</text>')
        for si, (name, xs, ys) in enumerate(series):
            color = _COLORS[si % len(_COLORS)]
            coords = []
            for x, y in zip(xs, ys):
                if not (math.isfinite(x) and math.isfinite(y)):
                    continue
                if (logx and x <= 0) or (logy and y <= 0):
                    continue
                vx = math.log10(x) if logx else x
                vy = math.log10(y) if logy else y
                coords.append(f"{sx(vx):.2f},{sy(vy):.2f}")
            if coords:
                out.append(f'<polyline points="{" ".join(coords)}" fill="none" '
                           f'stroke="{color}" stroke-width="1.5"/>')
            out.append(f'<text x="{x1 - 150}" y="{y1 + 16 + 16 * si}" font-size="12" '
                       f'fill="{color}">{name}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def _read_csv_columns(path, required: tuple) -> dict:
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        names = reader.fieldnames or []
        missing = [c for c in required if c not in names]
        if missing:
            raise SchemaError(f"{path}: missing columns {missing} (found {names})")
        cols = {c: [] for c in names}
        for row in reader:
            for c in names:
                cols[c].append(row[c])
    return cols


def _floats(values: list) -> np.ndarray:
    out = []
    for v in values:
        try:
            out.append(float(v))
        except (TypeError, ValueError):
            out.append(float("nan"))
    return np.asarray(out)


def emit_plots(in_path, kind: str, out_path=None) -> str:
    """Build the SVG document for one plot kind; optionally write it."""
    if kind == "layers":
        cols = _read_csv_columns(in_path, ("i", "size"))
        svg = render_svg([("layer size", _floats(cols["i"]), _floats(cols["size"]))],
                         "round i", "|S_i|", "stripping layer sizes")
    elif kind == "Lt":
        cols = _read_csv_columns(in_path, ("t", "L"))
        svg = render_svg([("L_t", _floats(cols["t"]), _floats(cols["L"]))],
                         "step t", "light degree mass L", "sequential light mass")
    elif kind == "zeta":
        cols = _read_csv_columns(in_path, ("t", "zetahat"))
        t = _floats(cols["t"])
        z = _floats(cols["zetahat"])
        ok = np.isfinite(t) & np.isfinite(z)
        series = [("zeta_hat", t, z)]
        if int(ok.sum()) >= 2:
            slope, intercept = np.polyfit(t[ok], z[ok], 1)
            series.append(("linear guide", t[ok], intercept + slope * t[ok]))
        svg = render_svg(series, "step t", "heavy-side mean degree",
                         "bins-only process drift")
    elif kind == "scaling":
        cols = _read_csv_columns(in_path, ("xi", "s_rounds"))
        xi = _floats(cols["xi"])
        s = _floats(cols["s_rounds"])
        err = cols.get("error", [""] * len(xi))
        groups: dict = {}
        for x, y, e in zip(xi, s, err):
            if not e and np.isfinite(x) and np.isfinite(y) and x > 0 and y > 0:
                groups.setdefault(x, []).append(y)
        xs = np.asarray(sorted(groups))
        ys = np.asarray([np.mean(groups[x]) for x in xs])
        series = [("mean s", xs, ys)]
        if len(xs) >= 2:
            slope, intercept = np.polyfit(np.log(xs), np.log(ys), 1)
            series.append((f"fit slope {slope:.3f}", xs, np.exp(intercept) * xs ** slope))
        svg = render_svg(series, "xi", "stripping number s",
                         "stripping-number scaling", logx=True, logy=True)
    else:
        raise SchemaError(f"unknown plot kind {kind!r}; choose from {PLOT_KINDS}")
    if out_path is not None:
        Path(out_path).write_text(svg)
    return svg
