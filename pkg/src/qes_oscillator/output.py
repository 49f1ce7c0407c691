"""Deterministic CSV / JSON / SVG emission with atomic writes."""

from __future__ import annotations

import csv
import io
import json
import math
import os
import tempfile
from pathlib import Path

SIG_DIGITS = 12


def fmt(value) -> str:
    if isinstance(value, str):
        return value
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, int):
        return str(value)
    value = float(value)
    if math.isnan(value):
        return "nan"
    out = f"{value:.{SIG_DIGITS}g}"
    return "0" if out == "-0" else out


def _round(obj):
    """Round floats to the fixed precision so JSON output is reproducible."""
    if isinstance(obj, bool) or obj is None or isinstance(obj, (int, str)):
        return obj
    if isinstance(obj, float):
        if not math.isfinite(obj):
            return None
        return float(fmt(obj))
    if isinstance(obj, dict):
        return {str(k): _round(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_round(v) for v in obj]
    if hasattr(obj, "item"):  # numpy scalars
        return _round(obj.item())
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def csv_text(header, rows) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([fmt(v) for v in row])
    return buf.getvalue()


def json_text(obj) -> str:
    return json.dumps(_round(obj), indent=2) + "\n"


def write_atomic(path, text: str) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
    return path


def write_with_sidecar(path, text: str, metadata: dict) -> Path:
    path = write_atomic(path, text)
    write_atomic(path.with_name(path.name + ".meta.json"), json_text(metadata))
    return path


# -- SVG ----------------------------------------------------------------------

_PALETTE = ("#1f4e9c", "#c0392b", "#2e8b57", "#8e44ad", "#d35400", "#16a085", "#7f8c8d")


def render_svg(lines=(), points=(), hlines=(), *, title="", xlabel="", ylabel="",
               width=640, height=480, ylim=None) -> str:
    """Static polyline plot.

    ``lines``: iterable of (xs, ys, color or None); NaNs break a polyline.
    ``points``: iterable of (x, y, color or None). ``hlines``: (y, color or None).
    """
    lines = [(list(map(float, xs)), list(map(float, ys)), c) for xs, ys, c in lines]
    points = [(float(x), float(y), c) for x, y, c in points]
    xs_all = [x for xs, _, _ in lines for x in xs] + [p[0] for p in points]
    ys_all = [y for _, ys, _ in lines for y in ys if math.isfinite(y)] + [p[1] for p in points]
    ys_all += [float(y) for y, _ in hlines]
    if not xs_all:
        raise ValueError("nothing to plot")
    x0, x1 = min(xs_all), max(xs_all)
    y0, y1 = ylim if ylim else (min(ys_all), max(ys_all))
    if x1 == x0:
        x1 = x0 + 1
    if y1 == y0:
        y1 = y0 + 1
    ml, mr, mt, mb = 60, 20, 30, 45
    pw, ph = width - ml - mr, height - mt - mb

    def X(x):
        return ml + (x - x0) / (x1 - x0) * pw

    def Y(y):
        return mt + (y1 - y) / (y1 - y0) * ph

    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}">',
        f'<rect x="{ml}" y="{mt}" width="{pw}" height="{ph}" fill="white" stroke="black"/>',
        f'<clipPath id="plot"><rect x="{ml}" y="{mt}" width="{pw}" height="{ph}"/></clipPath>',
    ]
    for k in range(5):
        xv = x0 + (x1 - x0) * k / 4
        yv = y0 + (y1 - y0) * k / 4
        out.append(f'<text x="{X(xv):.2f}" y="{height - mb + 16}" font-size="11" '
                   f'text-anchor="middle">{fmt(round(xv, 4))}</text>')
        out.append(f'<text x="{ml - 6}" y="{Y(yv) + 4:.2f}" font-size="11" '
                   f'text-anchor="end">{fmt(round(yv, 4))}</text>')
    if title:
        out.append(f'<text x="{width / 2}" y="18" font-size="13" text-anchor="middle">{title}</text>')
    if xlabel:
        out.append(f'<text x="{ml + pw / 2}" y="{height - 8}" font-size="12" '
                   f'text-anchor="middle">{xlabel}</text>')
    if ylabel:
        out.append(f'<text x="14" y="{mt + ph / 2}" font-size="12" text-anchor="middle" '
                   f'transform="rotate(-90 14 {mt + ph / 2})">{ylabel}</text>')
    out.append('<g clip-path="url(#plot)" fill="none" stroke-width="1.5">')
    for k, (xs, ys, color) in enumerate(lines):
        color = color or _PALETTE[k % len(_PALETTE)]
        segment = []
        for x, y in list(zip(xs, ys)) + [(math.nan, math.nan)]:
            if math.isfinite(y):
                segment.append(f"{X(x):.2f},{Y(y):.2f}")
            elif segment:
                out.append(f'<polyline stroke="{color}" points="{" ".join(segment)}"/>')
                segment = []
    for y, color in hlines:
        out.append(f'<line x1="{ml}" x2="{ml + pw}" y1="{Y(float(y)):.2f}" y2="{Y(float(y)):.2f}" '
                   f'stroke="{color or "#2e8b57"}" stroke-dasharray="6,4"/>')
    out.append("</g>")
    for x, y, color in points:
        out.append(f'<circle cx="{X(x):.2f}" cy="{Y(y):.2f}" r="3" fill="{color or "#c0392b"}"/>')
    out.append("</svg>")
    return "\n".join(out) + "\n"
