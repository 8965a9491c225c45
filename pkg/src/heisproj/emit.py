"""Deterministic CSV / JSON / SVG output for experiment reports.

Floats are written with ``repr`` so they round-trip exactly, keys are
sorted, and nothing depends on the clock or the host.  SVG plots are drawn
by hand from polylines: log-log covering plots for sweeps and slabs, and
bound-curve overlays (conjectured curves dashed) for ``bounds`` reports.
"""
from __future__ import annotations

import csv
import io
import json
import math
import os

__all__ = ["CSV_SCHEMA_VERSION", "COLUMNS", "report_csv", "report_json", "report_svg", "emit"]

CSV_SCHEMA_VERSION = 1

COLUMNS = {
    "sweep": ["plane", "side", "metric", "slope", "stderr"],
    "kernel": ["pair", "s", "d_E", "ratio", "ratio_doubled"],
    "transversality": ["pair", "delta", "d_E", "measure", "intervals", "ratio"],
    "grushin": ["path", "roundtrip_error", "length_grushin", "length_heis", "length_error"],
    "slicing": ["slab", "points", "slope", "stderr"],
    "bounds": ["curve", "s", "value", "conjecture"],
}


def _cell(x):
    if x is None:
        return ""
    if isinstance(x, bool):
        return "true" if x else "false"
    if isinstance(x, float):
        return repr(x)
    if isinstance(x, (list, tuple)):
        return ";".join(_cell(v) for v in x)
    return str(x)


def report_csv(report: dict) -> str:
    cols = COLUMNS[report["experiment"]]
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(cols)
    for row in report.get("rows", []):
        w.writerow([_cell(row.get(c)) for c in cols])
    return buf.getvalue()


def report_json(report: dict) -> str:
    return json.dumps({**report, "csv_schema": CSV_SCHEMA_VERSION}, sort_keys=True, indent=1) + "\n"


# ------------------------------------------------------------------ SVG

W, H, PAD = 640, 420, 56
PALETTE = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#17becf", "#7f7f7f"]


def _fmt(x: float) -> str:
    return f"{x:.2f}"


def _svg(series, xlabel, ylabel, title, logx=False, logy=False) -> str:
    """``series``: list of ``(label, xs, ys, dashed)``."""
    tx = (lambda v: math.log10(v)) if logx else (lambda v: v)
    ty = (lambda v: math.log10(v)) if logy else (lambda v: v)
    pts = [(tx(x), ty(y)) for _, xs, ys, _ in series for x, y in zip(xs, ys)]
    out = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}">',
           '<rect width="100%" height="100%" fill="white"/>',
           f'<text x="{W / 2}" y="20" text-anchor="middle" font-size="14">{title}</text>']
    if pts:
        x0, x1 = min(p[0] for p in pts), max(p[0] for p in pts)
        y0, y1 = min(p[1] for p in pts), max(p[1] for p in pts)
        x1 = x1 if x1 > x0 else x0 + 1
        y1 = y1 if y1 > y0 else y0 + 1
        sx = lambda v: PAD + (v - x0) / (x1 - x0) * (W - 2 * PAD)  # noqa: E731
        sy = lambda v: H - PAD - (v - y0) / (y1 - y0) * (H - 2 * PAD)  # noqa: E731
        out.append(f'<line x1="{PAD}" y1="{H - PAD}" x2="{W - PAD}" y2="{H - PAD}" stroke="black"/>')
        out.append(f'<line x1="{PAD}" y1="{PAD}" x2="{PAD}" y2="{H - PAD}" stroke="black"/>')
        for k in range(5):
            fx = x0 + k * (x1 - x0) / 4
            fy = y0 + k * (y1 - y0) / 4
            out.append(f'<text x="{_fmt(sx(fx))}" y="{H - PAD + 16}" text-anchor="middle" font-size="10">'
                       f'{"1e" if logx else ""}{fx:.2f}</text>')
            out.append(f'<text x="{PAD - 6}" y="{_fmt(sy(fy) + 3)}" text-anchor="end" font-size="10">'
                       f'{"1e" if logy else ""}{fy:.2f}</text>')
        for i, (label, xs, ys, dashed) in enumerate(series):
            col = PALETTE[i % len(PALETTE)]
            poly = " ".join(f"{_fmt(sx(tx(x)))},{_fmt(sy(ty(y)))}" for x, y in zip(xs, ys))
            dash = ' stroke-dasharray="6,4"' if dashed else ""
            out.append(f'<polyline fill="none" stroke="{col}" stroke-width="1.5"{dash} points="{poly}"/>')
            out.append(f'<text x="{W - PAD + 4}" y="{PAD + 12 * i}" font-size="9" fill="{col}">{label}</text>')
    out.append(f'<text x="{W / 2}" y="{H - 12}" text-anchor="middle" font-size="12">{xlabel}</text>')
    out.append(f'<text x="14" y="{H / 2}" font-size="12" transform="rotate(-90 14 {H / 2})" '
               f'text-anchor="middle">{ylabel}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def report_svg(report: dict) -> str:
    exp = report["experiment"]
    rows = report.get("rows", [])
    if exp == "bounds":
        series = {}
        for r in rows:
            series.setdefault((r["curve"], r["conjecture"]), ([], []))
            series[(r["curve"], r["conjecture"])][0].append(r["s"])
            series[(r["curve"], r["conjecture"])][1].append(r["value"])
        ser = [(f"{k[0]}{' (conjecture)' if k[1] else ''}", xs, ys, k[1]) for k, (xs, ys) in series.items()]
        return _svg(ser, "dimension of A", "lower bound", "projection lower bounds")
    if exp in ("sweep", "slicing"):
        ser = []
        for r in rows:
            if r.get("scales") and r.get("counts"):
                name = (f"{r['side']}/{r['metric']} plane {r['plane']}" if exp == "sweep"
                        else f"slab {r['slab']}")
                ser.append((name, r["scales"], r["counts"], False))
        return _svg(ser, "scale r", "net count N(r)", f"{exp}: covering numbers", logx=True, logy=True)
    if exp == "kernel":
        ser = []
        for s in sorted({r["s"] for r in rows}):
            sel = [r for r in rows if r["s"] == s]
            ser.append((f"s={s:.3g}", [r["d_E"] for r in sel], [r["ratio"] for r in sel], False))
        ser = [(lab, *zip(*sorted(zip(xs, ys))), d) for lab, xs, ys, d in ser]
        return _svg(ser, "d_E(p, q)", "plane average / d^-s", "kernel inequality")
    if exp == "transversality":
        ser = []
        for delta in sorted({r["delta"] for r in rows}):
            sel = sorted((r["pair"], r["ratio"]) for r in rows if r["delta"] == delta)
            ser.append((f"delta={delta:g}", [p for p, _ in sel], [k for _, k in sel], False))
        return _svg(ser, "pair", "measure * d_E / delta", "angular sub-level sets")
    ser = [("length error", [r["path"] for r in rows], [r["length_error"] for r in rows], False)]
    return _svg(ser, "path", "|length_H - length_G|", "Grushin lift lengths")


def emit(report: dict, out_dir: str, name: str, formats=("csv", "json", "svg")) -> list:
    """Write the report in each format; returns the written paths."""
    os.makedirs(out_dir, exist_ok=True)
    writers = {"csv": report_csv, "json": report_json, "svg": report_svg}
    paths = []
    for fmt in formats:
        if fmt not in writers:
            raise ValueError(f"unknown format {fmt!r}")
        path = os.path.join(out_dir, f"{name}.{fmt}")
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(writers[fmt](report))
        paths.append(path)
    return paths
