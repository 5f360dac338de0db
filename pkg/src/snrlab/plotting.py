"""Deterministic SVG line charts of sweep results.

The chart format mirrors the simulation figures: scaled MSE on the y
axis (clamped to [0, y_max], default 1), inverse SNR on the x axis, one
solid polyline per estimator in the fixed color scheme ridge=red,
lasso=blue, enet=green, best-subset=purple (zero=gray), plus optional
dashed theory overlays.  Output is plain SVG 1.1 text with fixed number
formatting, so identical inputs produce byte-identical files that can
be golden-tested.
"""

from __future__ import annotations

from .harness import CsvSchemaError, read_csv

__all__ = ["emit_plot", "ESTIMATOR_COLORS", "CsvSchemaError"]

ESTIMATOR_COLORS = {
    "ridge": "red",
    "lasso": "blue",
    "enet": "green",
    "best-subset": "purple",
    "zero": "gray",
}
_COLOR_ORDER = ["ridge", "lasso", "enet", "best-subset", "zero"]

_OVERLAY_COLORS = {
    "FirstOrder": "black",
    "RidgeSecondOrder": "darkred",
    "EnetLower": "darkgreen",
    "EnetUpper": "seagreen",
    "ZeroEstimator": "dimgray",
}

_W, _H = 720, 480
_ML, _MR, _MT, _MB = 64, 168, 28, 52


def _fmt(v: float) -> str:
    return f"{v:.2f}"


def _series_order(names):
    known = [n for n in _COLOR_ORDER if n in names]
    rest = sorted(n for n in names if n not in _COLOR_ORDER)
    return known + rest


def emit_plot(csv_path, svg_path, options: dict | None = None) -> None:
    """Render one sweep CSV (written by ``write_csv``) to an SVG chart.

    ``options`` keys: ``y_max`` (clamp ceiling, default 1.0), ``title``,
    and ``overlays`` (an iterable of :class:`~snrlab.theory.RiskCurve`
    drawn as dashed lines).  Schema violations raise
    :class:`CsvSchemaError` with the offending line number.
    """
    options = dict(options or {})
    y_max = float(options.get("y_max", 1.0))
    if y_max <= 0:
        raise ValueError("y_max must be positive")
    title = str(options.get("title", ""))
    overlays = list(options.get("overlays", ()))

    rows = read_csv(csv_path)
    series: dict = {}
    for row in rows:
        series.setdefault(row["estimator"], []).append(
            (row["inv_snr"], row["mean_scaled_mse"]))
    for pts in series.values():
        pts.sort()

    xs = [x for pts in series.values() for x, _ in pts]
    xs += [x for c in overlays for x, _ in c.points]
    if not xs:
        x_lo, x_hi = 0.0, 1.0
    else:
        x_lo, x_hi = min(xs), max(xs)
        if x_hi == x_lo:
            x_lo, x_hi = x_lo - 0.5, x_hi + 0.5

    def sx(x):
        return _ML + (x - x_lo) / (x_hi - x_lo) * (_W - _ML - _MR)

    def sy(y):
        y = min(max(y, 0.0), y_max)
        return _H - _MB - y / y_max * (_H - _MT - _MB)

    out = []
    out.append('<?xml version="1.0" encoding="UTF-8"?>')
    out.append(f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" '
               f'width="{_W}" height="{_H}" viewBox="0 0 {_W} {_H}">')
    out.append(f'<rect x="0" y="0" width="{_W}" height="{_H}" fill="white"/>')
    if title:
        out.append(f'<text x="{_W // 2}" y="18" font-family="sans-serif" '
                   f'font-size="14" text-anchor="middle">{title}</text>')
    # axes
    x0, y0 = _ML, _H - _MB
    x1, y1 = _W - _MR, _MT
    out.append(f'<line x1="{x0}" y1="{y0}" x2="{x1}" y2="{y0}" stroke="black"/>')
    out.append(f'<line x1="{x0}" y1="{y0}" x2="{x0}" y2="{y1}" stroke="black"/>')
    for i in range(5):
        xv = x_lo + (x_hi - x_lo) * i / 4
        px = sx(xv)
        out.append(f'<line x1="{_fmt(px)}" y1="{y0}" x2="{_fmt(px)}" '
                   f'y2="{y0 + 5}" stroke="black"/>')
        out.append(f'<text x="{_fmt(px)}" y="{y0 + 20}" font-family="sans-serif" '
                   f'font-size="11" text-anchor="middle">{xv:.3g}</text>')
        yv = y_max * i / 4
        py = sy(yv)
        out.append(f'<line x1="{x0 - 5}" y1="{_fmt(py)}" x2="{x0}" '
                   f'y2="{_fmt(py)}" stroke="black"/>')
        out.append(f'<text x="{x0 - 9}" y="{_fmt(py + 4)}" font-family="sans-serif" '
                   f'font-size="11" text-anchor="end">{yv:.3g}</text>')
    out.append(f'<text x="{(x0 + x1) // 2}" y="{_H - 12}" font-family="sans-serif" '
               f'font-size="12" text-anchor="middle">1/SNR</text>')
    out.append(f'<text x="16" y="{(y0 + y1) // 2}" font-family="sans-serif" '
               f'font-size="12" text-anchor="middle" '
               f'transform="rotate(-90 16 {(y0 + y1) // 2})">scaled MSE</text>')

    legend = []
    for curve in overlays:
        color = _OVERLAY_COLORS.get(curve.formula_id, "black")
        pts = " ".join(f"{_fmt(sx(x))},{_fmt(sy(y))}" for x, y in sorted(curve.points))
        if pts:
            out.append(f'<polyline class="overlay" fill="none" stroke="{color}" '
                       f'stroke-width="1.2" stroke-dasharray="6,4" points="{pts}"/>')
            legend.append((curve.formula_id, color, True))
    for name in _series_order(series):
        color = ESTIMATOR_COLORS.get(name, "black")
        pts = " ".join(f"{_fmt(sx(x))},{_fmt(sy(y))}" for x, y in series[name])
        out.append(f'<polyline class="data" fill="none" stroke="{color}" '
                   f'stroke-width="2" points="{pts}"/>')
        for x, y in series[name]:
            out.append(f'<circle cx="{_fmt(sx(x))}" cy="{_fmt(sy(y))}" r="2.5" '
                       f'fill="{color}"/>')
        legend.append((name, color, False))

    ly = _MT + 10
    lx = _W - _MR + 12
    for label, color, dashed in legend:
        dash = ' stroke-dasharray="6,4"' if dashed else ""
        out.append(f'<line x1="{lx}" y1="{ly}" x2="{lx + 26}" y2="{ly}" '
                   f'stroke="{color}" stroke-width="2"{dash}/>')
        out.append(f'<text x="{lx + 32}" y="{ly + 4}" font-family="sans-serif" '
                   f'font-size="11">{label}</text>')
        ly += 18
    out.append("</svg>")

    data = ("\n".join(out) + "\n").encode("utf-8")
    try:
        with open(svg_path, "wb") as fh:
            fh.write(data)
    except OSError as exc:
        raise OSError(f"cannot write SVG to {svg_path}: {exc}") from exc
