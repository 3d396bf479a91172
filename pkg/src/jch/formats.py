"""CSV, JSON and SVG renderings of a :class:`~jch.sweep.GridResult`."""

from __future__ import annotations

import csv
import io
import json
import math
from itertools import product
from pathlib import Path

import numpy as np

from .errors import JCHError
from .sweep import GridResult

FORMATS = ("csv", "json", "svg")


class OutputError(JCHError, OSError):
    pass


def _num(x) -> str:
    x = float(x)
    if math.isnan(x):
        return "nan"
    return format(x, ".17g")


def _json_num(x):
    x = float(x)
    return None if not math.isfinite(x) else x


def to_csv(res: GridResult) -> bytes:
    """One row per grid point; floats at 17 significant digits, CRLF rows."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\r\n")
    names = [n for n, _ in res.axes]
    fields = list(res.fields)
    w.writerow(names + fields + ["converged", "flag"])
    for idx in product(*(range(len(v)) for _, v in res.axes)):
        cell = idx[: res.cell_ndim]
        row = [_num(res.axes[k][1][i]) for k, i in enumerate(idx)]
        for f in fields:
            v = res.fields[f][idx]
            row.append(str(int(v)) if np.issubdtype(res.fields[f].dtype, np.integer) else _num(v))
        row.append("1" if bool(res.converged[cell]) else "0")
        row.append(str(res.errors[cell]))
        w.writerow(row)
    return buf.getvalue().encode("utf-8")


def _nested(arr: np.ndarray, conv):
    def walk(x):
        return [walk(y) for y in x] if isinstance(x, list) else conv(x)

    return walk(np.asarray(arr).tolist())


def to_json(res: GridResult) -> bytes:
    obj = {
        "schema": res.schema,
        "params": {"name": res.name, "mode": res.mode, "cell_ndim": res.cell_ndim, **res.params},
        "axes": [{"name": n, "values": [_json_num(v) for v in vals]} for n, vals in res.axes],
        "values": {
            k: _nested(v, int if np.issubdtype(v.dtype, np.integer) else _json_num)
            for k, v in res.fields.items()
        },
        "flags": {
            "converged": _nested(np.asarray(res.converged), bool),
            "errors": _nested(np.asarray(res.errors, dtype=object), str),
        },
    }
    return dumps_json(obj)


def dumps_json(obj) -> bytes:
    """Canonical encoding: insertion key order, compact separators, newline."""
    return (json.dumps(obj, separators=(",", ":"), allow_nan=False) + "\n").encode("utf-8")


# --- SVG ------------------------------------------------------------------------

_VIRIDIS = [
    (0.267, 0.005, 0.329),
    (0.283, 0.141, 0.458),
    (0.254, 0.265, 0.530),
    (0.207, 0.372, 0.553),
    (0.164, 0.471, 0.558),
    (0.128, 0.567, 0.551),
    (0.135, 0.659, 0.518),
    (0.267, 0.749, 0.441),
    (0.478, 0.821, 0.318),
    (0.741, 0.873, 0.150),
    (0.993, 0.906, 0.144),
]

_PALETTE = ["#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f"]


def colormap(x: float) -> str:
    """Monotone (viridis-like) colour for ``x`` in ``[0, 1]``; NaN is grey."""
    if not math.isfinite(x):
        return "#bbbbbb"
    x = min(1.0, max(0.0, x)) * (len(_VIRIDIS) - 1)
    i = min(int(x), len(_VIRIDIS) - 2)
    f = x - i
    rgb = [a + (b - a) * f for a, b in zip(_VIRIDIS[i], _VIRIDIS[i + 1])]
    return "#" + "".join(f"{round(255 * c):02x}" for c in rgb)


def _fmt(x: float) -> str:
    return f"{x:.4g}"


def _heatmap_svg(res: GridResult, field: str) -> str:
    (n1, v1), (n2, v2) = res.axes[:2]
    z = np.asarray(res.fields[field], dtype=float)
    finite = z[np.isfinite(z)]
    lo, hi = (float(finite.min()), float(finite.max())) if finite.size else (0.0, 1.0)
    span = hi - lo if hi > lo else 1.0
    left, top, cw, ch = 70, 30, 8, 8
    width, height = left + cw * len(v2) + 120, top + ch * len(v1) + 60
    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{width}" height="{height}">',
        f'<title>{res.name}: {field}</title>',
        '<g id="cells">',
    ]
    for i, j in product(range(len(v1)), range(len(v2))):
        x = left + j * cw
        y = top + (len(v1) - 1 - i) * ch
        parts.append(
            f'<rect x="{x}" y="{y}" width="{cw}" height="{ch}" fill="{colormap((z[i, j] - lo) / span)}"/>'
        )
    parts.append("</g>")
    bottom = top + ch * len(v1)
    right = left + cw * len(v2)
    parts += [
        f'<text x="{(left + right) / 2}" y="{bottom + 35}" text-anchor="middle" font-size="12">{n2}</text>',
        f'<text x="{left}" y="{bottom + 15}" font-size="10">{_fmt(v2[0])}</text>',
        f'<text x="{right}" y="{bottom + 15}" text-anchor="end" font-size="10">{_fmt(v2[-1])}</text>',
        f'<text x="15" y="{(top + bottom) / 2}" font-size="12" '
        f'transform="rotate(-90 15 {(top + bottom) / 2})" text-anchor="middle">{n1}</text>',
        f'<text x="{left - 5}" y="{bottom}" text-anchor="end" font-size="10">{_fmt(v1[0])}</text>',
        f'<text x="{left - 5}" y="{top + 10}" text-anchor="end" font-size="10">{_fmt(v1[-1])}</text>',
        '<g id="colorbar">',
    ]
    for k in range(20):
        y = top + (19 - k) * (bottom - top) / 20
        parts.append(
            f'<rect x="{right + 20}" y="{y:.2f}" width="15" height="{(bottom - top) / 20:.2f}" '
            f'fill="{colormap(k / 19)}"/>'
        )
    parts += [
        "</g>",
        f'<text x="{right + 40}" y="{top + 10}" font-size="10">{_fmt(hi)}</text>',
        f'<text x="{right + 40}" y="{bottom}" font-size="10">{_fmt(lo)}</text>',
        f'<text x="{right + 20}" y="{top - 10}" font-size="12">{field}</text>',
        "</svg>",
    ]
    return "\n".join(parts) + "\n"


def _lines_svg(res: GridResult, field: str) -> str:
    t = np.asarray(res.axes[-1][1], dtype=float)
    z = np.asarray(res.fields[field], dtype=float)
    curves = z.reshape(-1, t.size)
    labels = [
        ", ".join(f"{res.axes[k][0]}={_fmt(res.axes[k][1][i])}" for k, i in enumerate(idx))
        for idx in product(*(range(len(v)) for _, v in res.axes[: res.cell_ndim]))
    ] or [field]
    finite = curves[np.isfinite(curves)]
    lo, hi = (float(finite.min()), float(finite.max())) if finite.size else (0.0, 1.0)
    if hi <= lo:
        hi = lo + 1.0
    left, top, pw, ph = 60, 20, 480, 300
    tmax = float(t[-1]) if t[-1] > t[0] else 1.0
    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{left + pw + 220}" height="{top + ph + 50}">',
        f'<title>{res.name}: {field}</title>',
        f'<rect x="{left}" y="{top}" width="{pw}" height="{ph}" fill="none" stroke="black"/>',
    ]
    for k, (curve, label) in enumerate(zip(curves, labels)):
        ok = np.isfinite(curve)
        xs = left + pw * (t[ok] - t[0]) / (tmax - t[0])
        ys = top + ph * (1.0 - (curve[ok] - lo) / (hi - lo))
        pts = " ".join(f"{x:.2f},{y:.2f}" for x, y in zip(xs, ys))
        color = _PALETTE[k % len(_PALETTE)]
        parts.append(f'<polyline fill="none" stroke="{color}" stroke-width="1" points="{pts}"/>')
        parts.append(
            f'<text x="{left + pw + 10}" y="{top + 12 + 14 * k}" font-size="10" fill="{color}">{label}</text>'
        )
    parts += [
        f'<text x="{left + pw / 2}" y="{top + ph + 35}" text-anchor="middle" font-size="12">t</text>',
        f'<text x="{left}" y="{top + ph + 15}" font-size="10">{_fmt(t[0])}</text>',
        f'<text x="{left + pw}" y="{top + ph + 15}" text-anchor="end" font-size="10">{_fmt(tmax)}</text>',
        f'<text x="{left - 5}" y="{top + 10}" text-anchor="end" font-size="10">{_fmt(hi)}</text>',
        f'<text x="{left - 5}" y="{top + ph}" text-anchor="end" font-size="10">{_fmt(lo)}</text>',
        f'<text x="15" y="{top + ph / 2}" font-size="12" transform="rotate(-90 15 {top + ph / 2})" '
        f'text-anchor="middle">{field}</text>',
        "</svg>",
    ]
    return "\n".join(parts) + "\n"


def to_svg(res: GridResult, field: str | None = None) -> bytes:
    """Heatmap for two cell axes without time; line plot otherwise."""
    field = field or next(iter(res.fields))
    if res.cell_ndim == 2 and len(res.axes) == 2:
        return _heatmap_svg(res, field).encode("utf-8")
    return _lines_svg(res, field).encode("utf-8")


def serialize_result(res: GridResult, format: str) -> bytes:
    if format == "csv":
        return to_csv(res)
    if format == "json":
        return to_json(res)
    if format == "svg":
        return to_svg(res)
    raise ValueError(f"unsupported format {format!r}; choose from {FORMATS}")


def write_result(res: GridResult, path: str | Path, format: str | None = None) -> Path:
    path = Path(path)
    fmt = format or path.suffix.lstrip(".").lower()
    data = serialize_result(res, fmt)
    try:
        path.write_bytes(data)
    except OSError as exc:
        raise OutputError(f"cannot write {path}: {exc.strerror or exc}") from exc
    return path
