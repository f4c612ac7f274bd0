"""Deterministic file output: CSV with 17-significant-digit floats, minimal
static SVG plots, and the key=value run-configuration format.

CSV is the data contract; SVG is convenience only.  Identical configurations
must produce byte-identical CSV, so all formatting goes through fmt().
"""

from __future__ import annotations

import math
import os
from fractions import Fraction

import numpy as np

__all__ = [
    "fmt",
    "write_csv",
    "read_config",
    "parse_time_grid",
    "parse_float_list",
    "parse_int_list",
    "parse_initial",
    "svg_scatter",
    "svg_lines",
]


def fmt(x) -> str:
    """Stable scalar formatting: floats at 17 significant digits."""
    if isinstance(x, (bool, np.bool_)):
        return "1" if x else "0"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        return f"{float(x):.17g}"
    if isinstance(x, complex):
        return f"{x.real:.17g}{x.imag:+.17g}j"
    return str(x)


def write_csv(path: str, header: list, rows) -> str:
    """UTF-8 comma-separated file with a header row."""
    os.makedirs(os.path.dirname(os.path.abspath(path)), exist_ok=True)
    try:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(",".join(header) + "\n")
            for row in rows:
                fh.write(",".join(fmt(x) for x in row) + "\n")
    except OSError as exc:
        raise OSError(f"cannot write CSV to {path}: {exc}") from exc
    return path


def read_config(path: str) -> dict:
    """key=value lines; blank lines and # comments ignored."""
    cfg = {}
    try:
        with open(path, "r", encoding="utf-8") as fh:
            for lineno, line in enumerate(fh, 1):
                line = line.strip()
                if not line or line.startswith("#"):
                    continue
                if "=" not in line:
                    raise ValueError(f"{path}:{lineno}: expected key=value, got {line!r}")
                key, val = line.split("=", 1)
                cfg[key.strip()] = val.strip()
    except OSError as exc:
        raise OSError(f"cannot read config {path}: {exc}") from exc
    return cfg


def _num(tok: str) -> float:
    """Float with simple fraction support, e.g. '1/6'; 'top' maps to +inf."""
    tok = tok.strip()
    if tok == "top":
        return math.inf
    if "/" in tok:
        return float(Fraction(tok))
    return float(tok)


def parse_float_list(spec: str) -> list[float]:
    return [_num(t) for t in spec.replace(",", " ").split()]


def parse_int_list(spec: str) -> list[int]:
    return [int(t) for t in spec.replace(",", " ").split()]


def parse_time_grid(spec: str) -> np.ndarray:
    """Grid spec lin:START:STOP:NUM or log:START:STOP:NUM (inclusive ends)."""
    parts = spec.split(":")
    if len(parts) != 4:
        raise ValueError(f"time grid must be kind:start:stop:num, got {spec!r}")
    kind, a, b, n = parts[0], _num(parts[1]), _num(parts[2]), int(parts[3])
    if n < 1:
        raise ValueError("time grid needs at least one point")
    if kind == "lin":
        return np.linspace(a, b, n)
    if kind == "log":
        if a <= 0 or b <= 0:
            raise ValueError("log grid requires positive endpoints")
        return np.logspace(math.log10(a), math.log10(b), n)
    raise ValueError(f"unknown grid kind {kind!r}")


def parse_initial(spec: str) -> tuple[str, dict]:
    """Initial-state selector: name[:key=value]* with fraction-friendly values.

    Names: hp-doublet (keys a, b), fock (key m), coherent (keys theta, phi).
    """
    parts = spec.split(":")
    name = parts[0].strip().lower()
    kwargs = {}
    for tok in parts[1:]:
        if "=" not in tok:
            raise ValueError(f"selector argument {tok!r} must be key=value")
        k, v = tok.split("=", 1)
        kwargs[k.strip()] = _num(v)
    if name == "hp-doublet":
        return name, {"a": kwargs.get("a", 0.0), "b": kwargs.get("b", 0.0)}
    if name == "fock":
        if "m" not in kwargs:
            raise ValueError("fock selector needs m=<value> (or m=top for m=j)")
        return name, {"m": kwargs["m"]}
    if name == "coherent":
        return name, {"theta": kwargs.get("theta", math.pi / 2), "phi": kwargs.get("phi", 0.0)}
    raise ValueError(f"unknown initial-state selector {name!r}")


_SVG_COLORS = ["#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b", "#e377c2"]


def _axes(xs, ys, width, height, pad):
    x0, x1 = float(np.min(xs)), float(np.max(xs))
    y0, y1 = float(np.min(ys)), float(np.max(ys))
    if x1 == x0:
        x1 = x0 + 1.0
    if y1 == y0:
        y1 = y0 + 1.0
    sx = lambda x: pad + (x - x0) / (x1 - x0) * (width - 2 * pad)
    sy = lambda y: height - pad - (y - y0) / (y1 - y0) * (height - 2 * pad)
    return sx, sy, (x0, x1, y0, y1)


def _svg_frame(width, height, pad, box, xlabel, ylabel, title):
    x0, x1, y0, y1 = box
    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}">',
        f'<rect width="{width}" height="{height}" fill="white"/>',
        f'<rect x="{pad}" y="{pad}" width="{width-2*pad}" height="{height-2*pad}" '
        'fill="none" stroke="#333" stroke-width="1"/>',
        f'<text x="{width/2:.1f}" y="{height-8:.1f}" text-anchor="middle" font-size="12">{xlabel}</text>',
        f'<text x="14" y="{height/2:.1f}" text-anchor="middle" font-size="12" '
        f'transform="rotate(-90 14 {height/2:.1f})">{ylabel}</text>',
        f'<text x="{width/2:.1f}" y="16" text-anchor="middle" font-size="13">{title}</text>',
        f'<text x="{pad}" y="{height-pad+14:.1f}" font-size="10">{x0:.4g}</text>',
        f'<text x="{width-pad:.1f}" y="{height-pad+14:.1f}" text-anchor="end" font-size="10">{x1:.4g}</text>',
        f'<text x="{pad-4}" y="{height-pad:.1f}" text-anchor="end" font-size="10">{y0:.4g}</text>',
        f'<text x="{pad-4}" y="{pad+4}" text-anchor="end" font-size="10">{y1:.4g}</text>',
    ]
    return parts


def svg_scatter(path, groups, xlabel="", ylabel="", title="", width=640, height=480):
    """Scatter plot; groups is a list of (label, xs, ys) drawn in color order."""
    pad = 48
    all_x = np.concatenate([np.asarray(g[1], float) for g in groups if len(g[1])])
    all_y = np.concatenate([np.asarray(g[2], float) for g in groups if len(g[2])])
    sx, sy, box = _axes(all_x, all_y, width, height, pad)
    parts = _svg_frame(width, height, pad, box, xlabel, ylabel, title)
    for gi, (label, xs, ys) in enumerate(groups):
        color = _SVG_COLORS[gi % len(_SVG_COLORS)]
        for x, y in zip(xs, ys):
            parts.append(f'<circle cx="{sx(x):.2f}" cy="{sy(y):.2f}" r="2.2" fill="{color}" fill-opacity="0.75"/>')
        parts.append(
            f'<text x="{width-pad-6}" y="{pad+14+14*gi}" text-anchor="end" font-size="11" '
            f'fill="{color}">{label}</text>'
        )
    parts.append("</svg>")
    os.makedirs(os.path.dirname(os.path.abspath(path)), exist_ok=True)
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(parts) + "\n")
    return path


def svg_lines(path, groups, xlabel="", ylabel="", title="", width=640, height=480):
    """Polyline plot; groups is a list of (label, xs, ys)."""
    pad = 48
    all_x = np.concatenate([np.asarray(g[1], float) for g in groups if len(g[1])])
    all_y = np.concatenate([np.asarray(g[2], float) for g in groups if len(g[2])])
    sx, sy, box = _axes(all_x, all_y, width, height, pad)
    parts = _svg_frame(width, height, pad, box, xlabel, ylabel, title)
    for gi, (label, xs, ys) in enumerate(groups):
        color = _SVG_COLORS[gi % len(_SVG_COLORS)]
        pts = " ".join(f"{sx(x):.2f},{sy(y):.2f}" for x, y in zip(xs, ys))
        parts.append(f'<polyline points="{pts}" fill="none" stroke="{color}" stroke-width="1.5"/>')
        parts.append(
            f'<text x="{width-pad-6}" y="{pad+14+14*gi}" text-anchor="end" font-size="11" '
            f'fill="{color}">{label}</text>'
        )
    parts.append("</svg>")
    os.makedirs(os.path.dirname(os.path.abspath(path)), exist_ok=True)
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(parts) + "\n")
    return path
