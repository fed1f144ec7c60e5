"""Deterministic, self-contained SVG 1.1 renderings of slice grids, trend
fits, and indicator matrices.

Identical inputs produce byte-identical documents: all numbers go through
one fixed formatter and nothing is randomized or timestamped.
"""

from __future__ import annotations

import math
from datetime import date

from .indicators import IndicatorMatrix
from .welltrend import Z95, WellTrendFit

# piecewise-linear color ramp, low to high concentration
_RAMP = [
    (0.00, (13, 8, 135)),
    (0.25, (126, 3, 168)),
    (0.50, (204, 71, 120)),
    (0.75, (248, 149, 64)),
    (1.00, (240, 249, 33)),
]

_CLASS_COLORS = {
    "strong-up": "#b2182b",
    "up": "#ef8a62",
    "stable": "#ffffff",
    "down": "#67a9cf",
    "strong-down": "#2166ac",
    "non-detect": "#4477ff",
    "insufficient": "#bbbbbb",
    "above": "#d62728",
    "below": "#2ca02c",
}


def _f(v):
    """Fixed float formatting so output is reproducible byte-for-byte."""
    if v == int(v):
        return str(int(v))
    return f"{v:.6g}"


def ramp_color(frac):
    """RGB hex along the concentration ramp; frac clipped to [0, 1]."""
    frac = min(max(frac, 0.0), 1.0)
    for (f0, c0), (f1, c1) in zip(_RAMP[:-1], _RAMP[1:]):
        if frac <= f1:
            w = 0.0 if f1 == f0 else (frac - f0) / (f1 - f0)
            rgb = tuple(round(a + w * (b - a)) for a, b in zip(c0, c1))
            return "#{:02x}{:02x}{:02x}".format(*rgb)
    return "#{:02x}{:02x}{:02x}".format(*_RAMP[-1][1])


def _value_frac(v, vmin, vmax):
    # log scaling matches how concentrations are modelled
    if v <= 0 or vmax <= 0:
        return 0.0
    lo = math.log(vmin) if vmin > 0 else math.log(vmax) - 6.0
    hi = math.log(vmax)
    if hi <= lo:
        return 0.5
    return (math.log(v) - lo) / (hi - lo)


def _document(width, height, body):
    return (
        '<?xml version="1.0" encoding="UTF-8"?>\n'
        f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" '
        f'width="{_f(width)}" height="{_f(height)}" '
        f'viewBox="0 0 {_f(width)} {_f(height)}">\n'
        + body
        + "</svg>\n"
    )


def render_slice_svg(grid, vmin=None, vmax=None, width=760, height=600):
    """Spatial plot: color-filled lattice, well markers and labels (red
    font for detects/NAPL, black for non-detects), flow arrows, overlays,
    and a color key."""
    legend_w = 90
    pad = 50
    plot_w = width - 2 * pad - legend_w
    plot_h = height - 2 * pad

    xs, ys = grid.xs, grid.ys
    x0, x1 = float(xs[0]), float(xs[-1])
    y0, y1 = float(ys[0]), float(ys[-1])
    # preserve aspect ratio 1 in site coordinates
    span_x, span_y = max(x1 - x0, 1e-12), max(y1 - y0, 1e-12)
    scale = min(plot_w / span_x, plot_h / span_y)

    def sx(x):
        return pad + (x - x0) * scale

    def sy(y):
        return pad + plot_h - (y - y0) * scale  # y up

    finite = [
        float(grid.values[iy, ix])
        for iy in range(len(ys))
        for ix in range(len(xs))
        if not grid.mask[iy, ix] and math.isfinite(grid.values[iy, ix])
    ]
    if vmin is None:
        vmin = min(finite) if finite else 0.0
    if vmax is None:
        vmax = max(finite) if finite else 1.0

    parts = [f"<!-- slice {grid.solute} interval {grid.interval} -->\n"]
    parts.append(
        f'<text x="{_f(width / 2)}" y="24" text-anchor="middle" '
        f'font-family="sans-serif" font-size="15">{grid.solute} '
        f"({grid.units}) — {grid.label}</text>\n"
    )

    # filled lattice cells
    cw = scale * span_x / max(len(xs) - 1, 1)
    ch = scale * span_y / max(len(ys) - 1, 1)
    for iy in range(len(ys)):
        for ix in range(len(xs)):
            if grid.mask[iy, ix] or not math.isfinite(grid.values[iy, ix]):
                continue
            v = float(grid.values[iy, ix])
            color = ramp_color(_value_frac(v, vmin, vmax))
            cx, cy = sx(float(xs[ix])), sy(float(ys[iy]))
            parts.append(
                f'<rect class="cell" x="{_f(cx - cw / 2)}" y="{_f(cy - ch / 2)}" '
                f'width="{_f(cw)}" height="{_f(ch)}" fill="{color}"/>\n'
            )

    # overlay polylines (site features)
    for line in grid.overlays:
        pts = " ".join(f"{_f(sx(x))},{_f(sy(y))}" for x, y in line)
        parts.append(
            f'<polyline class="overlay" points="{pts}" fill="none" '
            f'stroke="#9ecfe8" stroke-width="2"/>\n'
        )

    # flow arrows, normalized to a fixed maximum pixel length per frame
    if grid.flow is not None and grid.flow.vectors:
        coords = {w["well_id"]: (w["x"], w["y"]) for w in grid.wells}
        rmax = max(v.R for v in grid.flow.vectors)
        for vec in grid.flow.vectors:
            if vec.well_id not in coords:
                continue
            wxp, wyp = coords[vec.well_id]
            length = 40.0 * (vec.R / rmax if rmax > 0 else 0.0)
            ang = math.radians(vec.theta)
            tipx = sx(wxp) + length * math.cos(ang)
            tipy = sy(wyp) - length * math.sin(ang)  # screen y is flipped
            parts.append(
                f'<line class="arrow" x1="{_f(sx(wxp))}" y1="{_f(sy(wyp))}" '
                f'x2="{_f(tipx)}" y2="{_f(tipy)}" stroke="#1f5fbf" stroke-width="2"/>\n'
            )
            left = ang + math.radians(150)
            right = ang - math.radians(150)
            hx1, hy1 = tipx + 7 * math.cos(left), tipy - 7 * math.sin(left)
            hx2, hy2 = tipx + 7 * math.cos(right), tipy - 7 * math.sin(right)
            parts.append(
                f'<polygon class="arrowhead" points="{_f(tipx)},{_f(tipy)} '
                f'{_f(hx1)},{_f(hy1)} {_f(hx2)},{_f(hy2)}" fill="#1f5fbf"/>\n'
            )

    # well markers and sample labels
    by_well = {}  # latest sample per well labels the marker
    for s in grid.samples:
        cur = by_well.get(s["well_id"])
        if cur is None or s["date"] > cur["date"]:
            by_well[s["well_id"]] = s
    napl_wells = {n["well_id"] for n in grid.napl}
    for w in grid.wells:
        cx, cy = sx(w["x"]), sy(w["y"])
        parts.append(
            f'<circle class="well" cx="{_f(cx)}" cy="{_f(cy)}" r="3" fill="#000000"/>\n'
        )
        parts.append(
            f'<text class="well-id" x="{_f(cx)}" y="{_f(cy + 14)}" text-anchor="middle" '
            f'font-family="sans-serif" font-size="9">{w["well_id"]}</text>\n'
        )
        s = by_well.get(w["well_id"])
        if s is not None:
            detect = (not s["censored"]) or w["well_id"] in napl_wells
            color = "#cc0000" if detect else "#000000"
            label = "NAPL" if w["well_id"] in napl_wells and s["synthetic"] else _f(s["value"])
            parts.append(
                f'<text class="sample" x="{_f(cx)}" y="{_f(cy - 6)}" text-anchor="middle" '
                f'font-family="sans-serif" font-size="9" fill="{color}">{label}</text>\n'
            )

    # color key
    key_x = width - pad - legend_w + 30
    key_h = plot_h * 0.8
    key_y = pad + (plot_h - key_h) / 2
    steps = 24
    for i in range(steps):
        frac = 1.0 - (i + 0.5) / steps
        parts.append(
            f'<rect class="key" x="{_f(key_x)}" y="{_f(key_y + i * key_h / steps)}" '
            f'width="16" height="{_f(key_h / steps + 0.5)}" '
            f'fill="{ramp_color(frac)}"/>\n'
        )
    parts.append(
        f'<text x="{_f(key_x + 22)}" y="{_f(key_y + 8)}" font-family="sans-serif" '
        f'font-size="10">{_f(vmax)}</text>\n'
    )
    parts.append(
        f'<text x="{_f(key_x + 22)}" y="{_f(key_y + key_h)}" font-family="sans-serif" '
        f'font-size="10">{_f(vmin)}</text>\n'
    )
    return _document(width, height, "".join(parts))


def render_trend_svg(fit, width=720, height=480):
    """Well trend plot: samples (solid detect / open non-detect circles),
    smoother curve, and the 95% band, on the concentration scale."""
    pad = 55
    plot_w, plot_h = width - 2 * pad, height - 2 * pad

    ts = [float(t) for t in fit.eval_times]
    mid = list(fit.fitted)
    lo = [m - Z95 * s for m, s in zip(fit.fitted, fit.se)]
    hi = [m + Z95 * s for m, s in zip(fit.fitted, fit.se)]
    if fit.scale == "log":
        mid, lo, hi = ([math.exp(v) for v in arr] for arr in (mid, lo, hi))
    obs_t = [float(t) for t in fit.sample_times]
    obs_v = [float(v) for v in fit.sample_values]

    t0, t1 = min(ts + obs_t), max(ts + obs_t)
    v_all = [v for v in (mid + lo + hi + obs_v) if math.isfinite(v)]
    v0, v1 = min(v_all), max(v_all)
    if v1 <= v0:
        v1 = v0 + 1.0

    def sx(t):
        return pad + (t - t0) / (t1 - t0) * plot_w

    def sy(v):
        return pad + plot_h - (v - v0) / (v1 - v0) * plot_h

    parts = [
        f'<text x="{_f(width / 2)}" y="24" text-anchor="middle" '
        f'font-family="sans-serif" font-size="15">{fit.well_id} — {fit.solute} '
        f"({fit.units})</text>\n"
    ]
    parts.append(
        f'<rect x="{_f(pad)}" y="{_f(pad)}" width="{_f(plot_w)}" height="{_f(plot_h)}" '
        f'fill="none" stroke="#444444"/>\n'
    )

    band = (
        " ".join(f"{_f(sx(t))},{_f(sy(v))}" for t, v in zip(ts, hi))
        + " "
        + " ".join(f"{_f(sx(t))},{_f(sy(v))}" for t, v in zip(reversed(ts), reversed(lo)))
    )
    parts.append(
        f'<polygon class="band" points="{band}" fill="#aac8e8" fill-opacity="0.45"/>\n'
    )
    curve = " ".join(f"{_f(sx(t))},{_f(sy(v))}" for t, v in zip(ts, mid))
    parts.append(
        f'<polyline class="smoother" points="{curve}" fill="none" '
        f'stroke="#1f5fbf" stroke-width="2"/>\n'
    )
    for t, v, c in zip(obs_t, obs_v, fit.sample_censored):
        if bool(c):
            parts.append(
                f'<circle class="obs censored" cx="{_f(sx(t))}" cy="{_f(sy(v))}" r="3.5" '
                f'fill="none" stroke="#e69500" stroke-width="1.5"/>\n'
            )
        else:
            parts.append(
                f'<circle class="obs detect" cx="{_f(sx(t))}" cy="{_f(sy(v))}" r="3.5" '
                f'fill="#000000"/>\n'
            )

    # axis annotations: date range and value range
    d0 = date.fromordinal(int(t0)).isoformat()
    d1 = date.fromordinal(int(t1)).isoformat()
    parts.append(
        f'<text x="{_f(pad)}" y="{_f(height - 18)}" font-family="sans-serif" '
        f'font-size="10">{d0}</text>\n'
    )
    parts.append(
        f'<text x="{_f(pad + plot_w)}" y="{_f(height - 18)}" text-anchor="end" '
        f'font-family="sans-serif" font-size="10">{d1}</text>\n'
    )
    parts.append(
        f'<text x="{_f(pad - 6)}" y="{_f(sy(v0))}" text-anchor="end" '
        f'font-family="sans-serif" font-size="10">{_f(v0)}</text>\n'
    )
    parts.append(
        f'<text x="{_f(pad - 6)}" y="{_f(sy(v1) + 8)}" text-anchor="end" '
        f'font-family="sans-serif" font-size="10">{_f(v1)}</text>\n'
    )
    return _document(width, height, "".join(parts))


def render_matrix_svg(matrix, cell=34, label_w=90, label_h=70):
    """Indicator matrix: wells as rows, solutes as columns, cells filled by
    class color."""
    width = label_w + cell * len(matrix.solutes) + 20
    height = label_h + cell * len(matrix.wells) + 20

    parts = [
        f'<text x="{_f(label_w)}" y="20" font-family="sans-serif" '
        f'font-size="13">{matrix.mode} — '
        f"{date.fromordinal(int(matrix.t)).isoformat()}</text>\n"
    ]
    for j, solute in enumerate(matrix.solutes):
        x = label_w + j * cell + cell / 2
        parts.append(
            f'<text x="{_f(x)}" y="{_f(label_h - 8)}" text-anchor="middle" '
            f'font-family="sans-serif" font-size="10">{solute}</text>\n'
        )
    for i, well in enumerate(matrix.wells):
        y = label_h + i * cell + cell / 2
        parts.append(
            f'<text x="{_f(label_w - 6)}" y="{_f(y + 4)}" text-anchor="end" '
            f'font-family="sans-serif" font-size="10">{well}</text>\n'
        )
        for j in range(len(matrix.solutes)):
            c = matrix.cells[i * len(matrix.solutes) + j]
            color = _CLASS_COLORS.get(c.klass, "#bbbbbb")
            parts.append(
                f'<rect class="cell {c.klass}" x="{_f(label_w + j * cell)}" '
                f'y="{_f(label_h + i * cell)}" width="{_f(cell)}" height="{_f(cell)}" '
                f'fill="{color}" stroke="#666666"/>\n'
            )
    return _document(width, height, "".join(parts))


def render_svg(artifact, **kwargs):
    """Dispatch on artifact type (SliceGrid, WellTrendFit, IndicatorMatrix)."""
    from .export import SliceGrid

    if isinstance(artifact, SliceGrid):
        return render_slice_svg(artifact, **kwargs)
    if isinstance(artifact, WellTrendFit):
        return render_trend_svg(artifact, **kwargs)
    if isinstance(artifact, IndicatorMatrix):
        return render_matrix_svg(artifact, **kwargs)
    raise TypeError(f"cannot render {type(artifact).__name__} as SVG")
