"""Delimited output and figures for sweep results.

rows.csv / aggregates.csv carry every real field through repr() so that a
read-back reproduces the values exactly.  figure.svg is written by a small
deterministic renderer (fixed canvas, fixed formatting, one polyline per
group) so reruns are byte-identical; a matplotlib rendering of the same
chart is written alongside as figure.png for interactive use.
"""

from __future__ import annotations

import csv
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt

ROWS_HEADER = ["group", "n", "trial", "seed", "aligned_error", "iterations"]
AGGREGATES_HEADER = ["group", "n", "mean_error", "std_error", "failed_trials"]

_SERIES_COLORS = {
    "cyclic": "#1f77b4",
    "dihedral": "#d62728",
}
_FALLBACK_COLORS = ("#2ca02c", "#9467bd", "#ff7f0e", "#8c564b")

_W, _H = 800.0, 500.0
_ML, _MR, _MT, _MB = 70.0, 150.0, 40.0, 55.0


def write_rows_csv(rows, path) -> None:
    _write_csv(path, ROWS_HEADER, (
        [r.group, r.n, r.trial, r.seed, repr(float(r.aligned_error)), r.iterations]
        for r in rows
    ))


def write_aggregates_csv(aggregates, path) -> None:
    _write_csv(path, AGGREGATES_HEADER, (
        [a.group, a.n, repr(float(a.mean_error)), repr(float(a.std_error)), a.failed_trials]
        for a in aggregates
    ))


def _write_csv(path, header, rows) -> None:
    try:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(header)
            for row in rows:
                w.writerow(row)
    except OSError as exc:
        raise OSError(f"failed writing {path}: {exc}") from exc


def read_rows_csv(path):
    from .experiments import SweepRow

    return [
        SweepRow(group=r["group"], n=int(r["n"]), trial=int(r["trial"]), seed=int(r["seed"]),
                 aligned_error=float(r["aligned_error"]), iterations=int(r["iterations"]))
        for r in _read_csv(path, ROWS_HEADER)
    ]


def read_aggregates_csv(path):
    from .experiments import SweepAggregate

    return [
        SweepAggregate(group=r["group"], n=int(r["n"]), mean_error=float(r["mean_error"]),
                       std_error=float(r["std_error"]), failed_trials=int(r["failed_trials"]))
        for r in _read_csv(path, AGGREGATES_HEADER)
    ]


def _read_csv(path, expected_header):
    path = Path(path)
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise ValueError(f"{path}: empty file, expected header {','.join(expected_header)}")
        if header != expected_header:
            raise ValueError(f"{path}: expected header {','.join(expected_header)}, got {','.join(header)}")
        return [dict(zip(expected_header, row)) for row in reader]


def emit_csv(result, out_dir) -> None:
    """Write rows.csv and aggregates.csv for a sweep result."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    write_rows_csv(result.rows, out / "rows.csv")
    write_aggregates_csv(result.aggregates, out / "aggregates.csv")


def emit_svg(result, path) -> None:
    """Deterministic SVG line chart of mean error vs length, one polyline per group."""
    render_aggregates_svg(result.aggregates, path)


def render_aggregates_svg(aggregates, path) -> None:
    series = _aggregate_series(aggregates)
    svg = render_line_chart(series, xlabel="signal length n", ylabel="mean aligned error",
                            title="Recovery error vs signal length")
    Path(path).write_text(svg)


def emit_png(result, path) -> None:
    """Matplotlib rendering of the same aggregate chart."""
    render_aggregates_png(result.aggregates, path)


def render_aggregates_png(aggregates, path) -> None:
    series = _aggregate_series(aggregates)
    fig, ax = plt.subplots(figsize=(8, 5))
    for name in sorted(series):
        xs, ys = zip(*series[name])
        ax.plot(xs, ys, marker="o", markersize=3, label=name,
                color=_SERIES_COLORS.get(name))
    ax.set_xlabel("signal length n")
    ax.set_ylabel("mean aligned error")
    ax.set_title("Recovery error vs signal length")
    ax.legend()
    ax.grid(alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def _aggregate_series(aggregates) -> dict[str, list[tuple[float, float]]]:
    if not aggregates:
        raise ValueError("cannot render a figure from empty aggregates")
    series: dict[str, list[tuple[float, float]]] = {}
    for a in aggregates:
        series.setdefault(a.group, []).append((float(a.n), float(a.mean_error)))
    for pts in series.values():
        pts.sort()
    return series


def _fmt(v: float) -> str:
    return f"{v:.2f}"


def _tick_label(v: float) -> str:
    return f"{v:.4g}"


def render_line_chart(series: dict[str, list[tuple[float, float]]],
                      xlabel: str, ylabel: str, title: str,
                      log_x: bool = False, log_y: bool = False) -> str:
    """Standalone SVG line chart; pure string assembly, byte-deterministic."""
    import math

    if not series or all(not pts for pts in series.values()):
        raise ValueError("cannot render a figure from empty series")
    names = sorted(series)
    tx = (lambda v: math.log10(v)) if log_x else (lambda v: v)
    ty = (lambda v: math.log10(v)) if log_y else (lambda v: v)
    xs = [tx(x) for pts in series.values() for x, _ in pts]
    ys = [ty(y) for pts in series.values() for _, y in pts]
    x0, x1 = min(xs), max(xs)
    y0, y1 = min(ys), max(ys)
    # 5% padding of the data span on the y axis
    pad = 0.05 * (y1 - y0) if y1 > y0 else max(0.05 * abs(y1), 1e-12)
    y0, y1 = y0 - pad, y1 + pad
    if x1 == x0:
        x0, x1 = x0 - 0.5, x1 + 0.5

    pw = _W - _ML - _MR
    ph = _H - _MT - _MB

    def px(v):
        return _ML + (tx(v) - x0) / (x1 - x0) * pw

    def py(v):
        return _MT + ph - (ty(v) - y0) / (y1 - y0) * ph

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" viewBox="0 0 {_fmt(_W)} {_fmt(_H)}" '
        f'font-family="Helvetica, Arial, sans-serif" font-size="12">',
        f'<rect x="0" y="0" width="{_fmt(_W)}" height="{_fmt(_H)}" fill="white"/>',
        f'<text x="{_fmt(_ML + pw / 2)}" y="24" text-anchor="middle" font-size="15">{title}</text>',
    ]
    # axes
    ax_y = _MT + ph
    parts.append(f'<line x1="{_fmt(_ML)}" y1="{_fmt(ax_y)}" x2="{_fmt(_ML + pw)}" y2="{_fmt(ax_y)}" '
                 f'stroke="black" stroke-width="1"/>')
    parts.append(f'<line x1="{_fmt(_ML)}" y1="{_fmt(_MT)}" x2="{_fmt(_ML)}" y2="{_fmt(ax_y)}" '
                 f'stroke="black" stroke-width="1"/>')
    # ticks: 5 evenly spaced in the transformed coordinates
    for i in range(5):
        fx = x0 + (x1 - x0) * i / 4
        gx = _ML + pw * i / 4
        label = _tick_label(10**fx if log_x else fx)
        parts.append(f'<line x1="{_fmt(gx)}" y1="{_fmt(ax_y)}" x2="{_fmt(gx)}" y2="{_fmt(ax_y + 5)}" '
                     f'stroke="black" stroke-width="1"/>')
        parts.append(f'<text x="{_fmt(gx)}" y="{_fmt(ax_y + 18)}" text-anchor="middle">{label}</text>')
        fy = y0 + (y1 - y0) * i / 4
        gy = _MT + ph - ph * i / 4
        ylab = _tick_label(10**fy if log_y else fy)
        parts.append(f'<line x1="{_fmt(_ML - 5)}" y1="{_fmt(gy)}" x2="{_fmt(_ML)}" y2="{_fmt(gy)}" '
                     f'stroke="black" stroke-width="1"/>')
        parts.append(f'<text x="{_fmt(_ML - 8)}" y="{_fmt(gy + 4)}" text-anchor="end">{ylab}</text>')
    parts.append(f'<text x="{_fmt(_ML + pw / 2)}" y="{_fmt(_H - 12)}" text-anchor="middle">{xlabel}</text>')
    parts.append(f'<text x="18" y="{_fmt(_MT + ph / 2)}" text-anchor="middle" '
                 f'transform="rotate(-90 18 {_fmt(_MT + ph / 2)})">{ylabel}</text>')
    # one polyline per series plus a legend entry
    for idx, name in enumerate(names):
        color = _SERIES_COLORS.get(name, _FALLBACK_COLORS[idx % len(_FALLBACK_COLORS)])
        pts = " ".join(f"{_fmt(px(x))},{_fmt(py(y))}" for x, y in series[name])
        parts.append(f'<polyline points="{pts}" fill="none" stroke="{color}" stroke-width="1.5"/>')
        ly = _MT + 14 + 20 * idx
        lx = _ML + pw + 14
        parts.append(f'<line x1="{_fmt(lx)}" y1="{_fmt(ly)}" x2="{_fmt(lx + 22)}" y2="{_fmt(ly)}" '
                     f'stroke="{color}" stroke-width="1.5"/>')
        parts.append(f'<text x="{_fmt(lx + 28)}" y="{_fmt(ly + 4)}">{name}</text>')
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


def render_scaling_figures(scaling_rows, svg_path, png_path) -> None:
    """Log-log chart of third-moment estimator std vs sigma."""
    pts = sorted((float(s), float(v)) for s, v in scaling_rows)
    series = {"third-moment std": pts}
    svg = render_line_chart(series, xlabel="noise sigma", ylabel="estimator std",
                            title="Third-moment estimator noise scaling",
                            log_x=True, log_y=True)
    Path(svg_path).write_text(svg)
    fig, ax = plt.subplots(figsize=(8, 5))
    xs, ys = zip(*pts)
    ax.loglog(xs, ys, marker="o")
    ax.set_xlabel("noise sigma")
    ax.set_ylabel("estimator std")
    ax.set_title("Third-moment estimator noise scaling")
    ax.grid(alpha=0.3, which="both")
    fig.tight_layout()
    fig.savefig(png_path, dpi=120)
    plt.close(fig)
