"""Trace persistence: CSV monitor series, JSON snapshots, SVG plots.

CSV uses '.' decimals and %.17g formatting so values round-trip exactly.
The SVG writer emits the markup directly; no plotting backend involved.
"""

import json
from types import SimpleNamespace

import numpy as np

__all__ = [
    "write_trace_csv",
    "read_trace_csv",
    "write_snapshots_json",
    "write_trace_svg",
]

_COLUMNS = ("S_sup", "S_inf", "gap", "u_min", "u_max", "dtu_norm")


def write_trace_csv(trace, path):
    """Write the monitor records; header is '<time>,S_sup,S_inf,gap,u_min,u_max,dtu_norm'."""
    cols = [trace.t, trace.s_sup, trace.s_inf, trace.gap,
            trace.u_min, trace.u_max, trace.dtu_norm]
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(trace.time_label + "," + ",".join(_COLUMNS) + "\n")
        for row in zip(*cols):
            fh.write(",".join("%.17g" % v for v in row) + "\n")


def read_trace_csv(path):
    """Read a monitor CSV back into arrays (attributes t, s_sup, ...)."""
    with open(path, "r", encoding="utf-8") as fh:
        header = fh.readline().strip().split(",")
        if len(header) != 7 or tuple(header[1:]) != _COLUMNS:
            raise ValueError(f"unexpected trace header: {header}")
        data = np.loadtxt(fh, delimiter=",", ndmin=2)
    if data.shape[1] != 7:
        raise ValueError(f"expected 7 columns, got {data.shape[1]}")
    return SimpleNamespace(
        time_label=header[0],
        t=data[:, 0],
        s_sup=data[:, 1],
        s_inf=data[:, 2],
        gap=data[:, 3],
        u_min=data[:, 4],
        u_max=data[:, 5],
        dtu_norm=data[:, 6],
    )


def write_snapshots_json(trace, path, convergence=None):
    """Write sparse full snapshots plus run metadata as JSON."""
    M = trace.manifold
    doc = {
        "time_label": trace.time_label,
        "variant": trace.variant,
        "manifold": None if M is None else {
            "m": M.m, "b": M.b, "scalY": M.scalY, "scalZ": M.scalZ,
        },
        "c1": None if np.isnan(trace.c1) else trace.c1,
        "c2": None if np.isnan(trace.c2) else trace.c2,
        "x": [float(v) for v in trace.grid.nodes] if trace.grid is not None else None,
        "times": [float(v) for v in trace.snap_t],
        "u": [[float(v) for v in row] for row in trace.snap_u],
        "convergence": convergence,
    }
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(doc, fh, indent=1)
        fh.write("\n")


def _polyline(xs, ys, x0, y0, w, h, xr, yr):
    pts = []
    for x, y in zip(xs, ys):
        px = x0 + (x - xr[0]) / (xr[1] - xr[0]) * w
        py = y0 + h - (y - yr[0]) / (yr[1] - yr[0]) * h
        pts.append(f"{px:.2f},{py:.2f}")
    return " ".join(pts)


def write_trace_svg(trace, path):
    """Two-panel plot: log10 gap versus time, and first/last factor profiles."""
    parts = [
        '<svg xmlns="http://www.w3.org/2000/svg" width="880" height="420" '
        'viewBox="0 0 880 420" font-family="sans-serif" font-size="12">',
        '<rect width="880" height="420" fill="white"/>',
    ]

    # left panel: gap decay
    mask = trace.gap > 0
    x0, y0, w, h = 60.0, 30.0, 340.0, 330.0
    parts.append(f'<rect x="{x0}" y="{y0}" width="{w}" height="{h}" '
                 'fill="none" stroke="black"/>')
    if mask.sum() >= 2:
        ts = trace.t[mask]
        lg = np.log10(trace.gap[mask])
        xr = (float(ts.min()), float(max(ts.max(), ts.min() + 1e-12)))
        yr = (float(lg.min()), float(max(lg.max(), lg.min() + 1e-12)))
        parts.append(f'<polyline fill="none" stroke="crimson" stroke-width="1.5" '
                     f'points="{_polyline(ts, lg, x0, y0, w, h, xr, yr)}"/>')
        parts.append(f'<text x="{x0}" y="{y0 - 10}">log10 gap vs '
                     f'{trace.time_label} (range {yr[0]:.1f} .. {yr[1]:.1f})</text>')
        parts.append(f'<text x="{x0}" y="{y0 + h + 20}">{trace.time_label} in '
                     f'[{xr[0]:.3g}, {xr[1]:.3g}]</text>')
    else:
        parts.append(f'<text x="{x0}" y="{y0 + h / 2}">gap identically zero</text>')

    # right panel: factor profiles
    x0 = 480.0
    parts.append(f'<rect x="{x0}" y="{y0}" width="{w}" height="{h}" '
                 'fill="none" stroke="black"/>')
    if trace.grid is not None and len(trace.snap_u) > 0:
        xs = trace.grid.nodes
        first = trace.snap_u[0]
        last = trace.snap_u[-1]
        ymin = float(min(first.min(), last.min()))
        ymax = float(max(first.max(), last.max()))
        if ymax - ymin < 1e-12:
            ymin, ymax = ymin - 1.0, ymax + 1.0
        xr = (float(xs.min()), float(xs.max()))
        yr = (ymin, ymax)
        parts.append(f'<polyline fill="none" stroke="steelblue" stroke-width="1.5" '
                     f'points="{_polyline(xs, first, x0, y0, w, h, xr, yr)}"/>')
        parts.append(f'<polyline fill="none" stroke="darkorange" stroke-width="1.5" '
                     f'points="{_polyline(xs, last, x0, y0, w, h, xr, yr)}"/>')
        parts.append(f'<text x="{x0}" y="{y0 - 10}">u(x): initial (blue), '
                     f'final (orange), range {ymin:.4g} .. {ymax:.4g}</text>')
        parts.append(f'<text x="{x0}" y="{y0 + h + 20}">x in [{xr[0]:.3g}, {xr[1]:.3g}]</text>')
    parts.append("</svg>")
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(parts) + "\n")
