"""Consumer-facing artifacts: time-slice grids, animation frames, well
reports, latest-snapshot bundles, and static SVG renderings.

Everything here is a deterministic, numerics-free repackaging of module
outputs; grid values are exactly the smoother's predictions.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from datetime import date

import numpy as np
from scipy.spatial import ConvexHull, QhullError

from .dataset import RESERVED_GW, RESERVED_NAPL
from .errors import ExtrapolationError
from .indicators import (
    THRESHOLD_ABSOLUTE,
    THRESHOLD_STATISTICAL,
    TREND_MODE,
    indicator_matrix,
)

DEFAULT_GRID = 50


def convex_hull_vertices(points):
    """CCW hull vertex coordinates, or None when the hull is degenerate."""
    points = np.asarray(points, dtype=float)
    if len(points) < 3:
        return None
    try:
        hull = ConvexHull(points)
    except QhullError:
        return None
    return points[hull.vertices]


def points_in_hull(points, hull_vertices):
    """Inclusive point-in-convex-polygon test (vertices CCW)."""
    points = np.asarray(points, dtype=float)
    v = np.asarray(hull_vertices, dtype=float)
    scale = max(1.0, float(np.abs(v).max()))
    tol = 1e-12 * scale * scale
    inside = np.ones(len(points), dtype=bool)
    for i in range(len(v)):
        a, b = v[i], v[(i + 1) % len(v)]
        cross = (b[0] - a[0]) * (points[:, 1] - a[1]) - (b[1] - a[1]) * (points[:, 0] - a[0])
        inside &= cross >= -tol
    return inside


@dataclass
class SliceGrid:
    """Predicted concentrations over a spatial lattice at one time-slice."""

    interval: int
    label: str
    t: int  # day ordinal of the slice
    solute: str
    units: str
    xs: np.ndarray  # nx lattice coordinates
    ys: np.ndarray  # ny lattice coordinates
    values: np.ndarray  # (ny, nx), NaN where masked
    mask: np.ndarray  # (ny, nx) True where outside the well hull
    samples: list = field(default_factory=list)
    napl: list = field(default_factory=list)
    flow: object = None
    wells: list = field(default_factory=list)
    overlays: list = field(default_factory=list)

    def to_dict(self):
        ny, nx = self.values.shape
        return {
            "interval": self.interval,
            "label": self.label,
            "t": date.fromordinal(self.t).isoformat(),
            "solute": self.solute,
            "units": self.units,
            "nx": nx,
            "ny": ny,
            "xs": [float(x) for x in self.xs],
            "ys": [float(y) for y in self.ys],
            "values": [
                [None if self.mask[iy, ix] else float(self.values[iy, ix])
                 for ix in range(nx)]
                for iy in range(ny)
            ],
            "samples": self.samples,
            "napl": self.napl,
            "flow": self.flow.to_dict() if self.flow is not None else None,
            "wells": self.wells,
            "overlays": [[[float(x), float(y)] for x, y in line] for line in self.overlays],
        }


def _interval_samples(dataset, k, solute):
    out = []
    coords = {w.well_id: (w.x, w.y) for w in dataset.wells}
    for r in dataset.records_for(constituent=solute, interval=k):
        x, y = coords[r.well_id]
        out.append(
            {
                "well_id": r.well_id,
                "x": x,
                "y": y,
                "date": r.sample_date.isoformat(),
                "value": float(r.working),
                "censored": bool(r.censored),
                "synthetic": bool(r.synthetic),
            }
        )
    out.sort(key=lambda s: (s["well_id"], s["date"]))
    return out


def _interval_napl(dataset, k):
    out = []
    for r in dataset.records_for(constituent=RESERVED_NAPL, interval=k):
        out.append(
            {
                "well_id": r.well_id,
                "date": r.sample_date.isoformat(),
                "thickness": float(r.working),
                "units": r.units,
            }
        )
    out.sort(key=lambda s: (s["well_id"], s["date"]))
    return out


def slice_grid(analysis, k, solute, nx=DEFAULT_GRID, ny=DEFAULT_GRID, hull_mask=True):
    """Time-slice of the concentration smoother over the well bounding box.

    Lattice cells outside the convex hull of the wells are masked unless
    ``hull_mask`` is off.  Bundles the interval's samples, NAPL readings,
    and flow field alongside the predictions.
    """
    ds = analysis.dataset
    if not (0 <= k < len(ds.intervals)):
        raise ValueError(f"interval {k} out of range 0..{len(ds.intervals) - 1}")
    if nx < 2 or ny < 2:
        raise ValueError("nx and ny must be >= 2")
    model = analysis.model_for(solute)
    iv = ds.intervals[k]
    t = iv.midpoint_ordinal()
    if not model.basis_t.in_range(float(t)):
        raise ExtrapolationError(
            f"interval {k} midpoint {date.fromordinal(t)} outside the model's time range"
        )

    wx = np.array([w.x for w in ds.wells])
    wy = np.array([w.y for w in ds.wells])
    xs = np.linspace(wx.min(), wx.max(), nx)
    ys = np.linspace(wy.min(), wy.max(), ny)
    XX, YY = np.meshgrid(xs, ys)
    pts = np.column_stack([XX.ravel(), YY.ravel()])

    if hull_mask:
        hull = convex_hull_vertices(np.column_stack([wx, wy]))
        inside = points_in_hull(pts, hull) if hull is not None else np.ones(len(pts), bool)
    else:
        inside = np.ones(len(pts), dtype=bool)

    values = np.full(len(pts), np.nan)
    if inside.any():
        coords3 = np.column_stack(
            [pts[inside][:, 0], pts[inside][:, 1], np.full(inside.sum(), float(t))]
        )
        values[inside] = model.predict(coords3)

    flow = analysis.flow_fields[k] if k < len(analysis.flow_fields) else None
    return SliceGrid(
        interval=k,
        label=iv.label,
        t=t,
        solute=solute,
        units=model.units,
        xs=xs,
        ys=ys,
        values=values.reshape(ny, nx),
        mask=~inside.reshape(ny, nx),
        samples=_interval_samples(ds, k, solute),
        napl=_interval_napl(ds, k),
        flow=flow,
        wells=[{"well_id": w.well_id, "x": w.x, "y": w.y} for w in ds.wells],
        overlays=ds.overlays,
    )


@dataclass
class FrameSequence:
    """Ordered slice grids, one per interval, sharing one color scale."""

    solute: str
    frames: list
    vmin: float
    vmax: float

    def to_dict(self):
        return {
            "solute": self.solute,
            "color_scale": {"min": self.vmin, "max": self.vmax},
            "frames": [f.to_dict() for f in self.frames],
        }


def frame_sequence(analysis, solute, nx=DEFAULT_GRID, ny=DEFAULT_GRID, hull_mask=True):
    """One frame per monitoring interval with a global color scale."""
    frames = [
        slice_grid(analysis, k, solute, nx=nx, ny=ny, hull_mask=hull_mask)
        for k in range(len(analysis.dataset.intervals))
    ]
    finite = np.concatenate(
        [f.values[~f.mask & np.isfinite(f.values)].ravel() for f in frames]
    )
    vmin = float(finite.min()) if finite.size else 0.0
    vmax = float(finite.max()) if finite.size else 1.0
    return FrameSequence(solute=solute, frames=frames, vmin=vmin, vmax=vmax)


def well_report(analysis, include_gw=True):
    """Per-well bundles of observed series and smoother curves, one entry
    per well, optionally with the groundwater-elevation overlay."""
    ds = analysis.dataset
    report = []
    for well_id in sorted(ds.well_ids):
        entry = {"well_id": well_id, "solutes": {}, "gw": None, "gw_missing": False}
        for solute in ds.solutes:
            recs = sorted(ds.records_for(constituent=solute, well_id=well_id),
                          key=lambda r: r.sample_date)
            if not recs:
                continue
            series = {
                "times": [r.sample_date.isoformat() for r in recs],
                "values": [float(r.working) for r in recs],
                "censored": [bool(r.censored) for r in recs],
                "units": ds.units_for(solute),
            }
            fit = analysis.trend_fit(well_id, solute)
            if fit is not None:
                series["trend"] = {
                    "times": [date.fromordinal(int(t)).isoformat() for t in fit.eval_times],
                    "fitted": [float(v) for v in fit.fitted],
                    "se": [float(v) for v in fit.se],
                    "scale": fit.scale,
                }
            entry["solutes"][solute] = series
        if include_gw:
            gw = sorted(ds.records_for(constituent=RESERVED_GW, well_id=well_id),
                        key=lambda r: r.sample_date)
            if gw:
                entry["gw"] = {
                    "times": [r.sample_date.isoformat() for r in gw],
                    "values": [float(r.working) for r in gw],
                    "units": gw[0].units,
                }
            else:
                entry["gw_missing"] = True
        report.append(entry)
    return report


def latest_snapshot(analysis, thresholds=None, nx=DEFAULT_GRID, ny=DEFAULT_GRID):
    """Final-interval grids per solute plus the three indicator-matrix
    variants at that interval."""
    k = len(analysis.dataset.intervals) - 1
    grids = {}
    for solute in analysis.solutes:
        if analysis.models.get(solute) is None:
            grids[solute] = None
            continue
        grids[solute] = slice_grid(analysis, k, solute, nx=nx, ny=ny)
    matrices = {
        TREND_MODE: indicator_matrix(analysis, k, TREND_MODE),
        THRESHOLD_ABSOLUTE: indicator_matrix(analysis, k, THRESHOLD_ABSOLUTE,
                                             thresholds=thresholds),
        THRESHOLD_STATISTICAL: indicator_matrix(analysis, k, THRESHOLD_STATISTICAL,
                                                thresholds=thresholds),
    }
    return {
        "interval": k,
        "label": analysis.dataset.intervals[k].label,
        "grids": {s: (g.to_dict() if g is not None else None) for s, g in grids.items()},
        "matrices": {m: mat.to_dict() for m, mat in matrices.items()},
    }
