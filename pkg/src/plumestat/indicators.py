"""Trend and threshold indicator matrix for a time-slice.

Each (well, solute) cell is classified either by the annualized
instantaneous gradient of the well trend smoother (trend mode) or by
comparing the current concentration against a threshold (absolute mode:
latest observed value in the slice interval; statistical mode: upper 95%
band of the smoother, green only when the whole band sits below).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .welltrend import DAYS_PER_YEAR, Z95

TREND_MODE = "trend"
THRESHOLD_ABSOLUTE = "threshold-absolute"
THRESHOLD_STATISTICAL = "threshold-statistical"
MODES = (TREND_MODE, THRESHOLD_ABSOLUTE, THRESHOLD_STATISTICAL)

TREND_CLASSES = ("strong-up", "up", "stable", "down", "strong-down",
                 "non-detect", "insufficient")
THRESHOLD_CLASSES = ("above", "below", "insufficient")

#: default |slope| cutoffs in log-units per year: (stable/up, up/strong-up)
DEFAULT_CUTOFFS = (0.1, 0.5)


@dataclass(frozen=True)
class IndicatorCell:
    well_id: str
    solute: str
    mode: str
    klass: str
    slope: float = None  # annualized log-slope (trend mode)
    value: float = None  # concentration compared (threshold modes)
    note: str = ""

    def to_dict(self):
        d = {"well_id": self.well_id, "solute": self.solute, "mode": self.mode,
             "class": self.klass}
        if self.slope is not None:
            d["slope"] = self.slope
        if self.value is not None:
            d["value"] = self.value
        if self.note:
            d["note"] = self.note
        return d


def _slope_class(slope, cutoffs):
    lo, hi = cutoffs
    if abs(slope) < lo:
        return "stable"
    if abs(slope) < hi:
        return "up" if slope > 0 else "down"
    return "strong-up" if slope > 0 else "strong-down"


def trend_class(fit, t, well_id, solute, interval_samples, cutoffs=DEFAULT_CUTOFFS):
    """Classify the trend at time t.

    ``interval_samples`` are the (well, solute) records inside the slice
    interval; when present and all censored the cell is non-detect.  A
    missing fit, or t outside its range, yields the insufficient class.
    """
    if interval_samples and all(r.censored for r in interval_samples):
        return IndicatorCell(well_id, solute, TREND_MODE, "non-detect")
    if fit is None:
        return IndicatorCell(well_id, solute, TREND_MODE, "insufficient",
                             note="no trend fit")
    try:
        _, _, deriv = fit.at(t)
    except ValueError:
        return IndicatorCell(well_id, solute, TREND_MODE, "insufficient",
                             note="time-slice outside fitted range")
    slope = deriv * DAYS_PER_YEAR
    if not math.isfinite(slope):
        return IndicatorCell(well_id, solute, TREND_MODE, "insufficient",
                             note="non-finite gradient")
    return IndicatorCell(well_id, solute, TREND_MODE, _slope_class(slope, cutoffs),
                         slope=slope)


def threshold_class(fit, t, well_id, solute, interval_samples, threshold, mode):
    """Classify against a concentration threshold.

    Absolute mode compares the latest observed working value in the slice
    interval; statistical mode compares the upper 95% band of the smoother
    at t and is green (below) only when the band top is strictly under the
    threshold.
    """
    if threshold is None:
        return IndicatorCell(well_id, solute, mode, "insufficient",
                             note="no threshold configured for this solute")
    if threshold <= 0:
        raise ValueError(f"threshold must be positive, got {threshold}")

    if mode == THRESHOLD_ABSOLUTE:
        if not interval_samples:
            return IndicatorCell(well_id, solute, mode, "insufficient",
                                 note="no sample in the slice interval")
        latest = max(interval_samples, key=lambda r: r.sample_date)
        klass = "above" if latest.working > threshold else "below"
        return IndicatorCell(well_id, solute, mode, klass, value=latest.working)

    if mode == THRESHOLD_STATISTICAL:
        if fit is None:
            return IndicatorCell(well_id, solute, mode, "insufficient",
                                 note="no trend fit")
        try:
            level, se, _ = fit.at(t)
        except ValueError:
            return IndicatorCell(well_id, solute, mode, "insufficient",
                                 note="time-slice outside fitted range")
        upper = level + Z95 * se
        if fit.scale == "log":
            upper = math.exp(upper)
        klass = "below" if upper < threshold else "above"
        return IndicatorCell(well_id, solute, mode, klass, value=upper)

    raise ValueError(f"unknown threshold mode {mode!r}")


def indicator_matrix(analysis, k, mode=TREND_MODE, thresholds=None, cutoffs=None):
    """Complete well x solute indicator matrix for interval ``k``.

    Wells are ordered by id, solutes in dataset order; one cell per pair.
    ``thresholds`` maps solute name to a positive concentration (threshold
    modes only).
    """
    if mode not in MODES:
        raise ValueError(f"mode must be one of {MODES}, got {mode!r}")
    ds = analysis.dataset
    if not (0 <= k < len(ds.intervals)):
        raise ValueError(f"interval {k} out of range 0..{len(ds.intervals) - 1}")
    t = ds.intervals[k].midpoint_ordinal()
    thresholds = thresholds or {}
    cutoffs = cutoffs or analysis.options.trend_cutoffs

    wells = sorted(ds.well_ids)
    solutes = ds.solutes
    cells = []
    for well_id in wells:
        for solute in solutes:
            fit = analysis.trend_fits.get((well_id, solute))
            samples = ds.records_for(constituent=solute, well_id=well_id, interval=k)
            if mode == TREND_MODE:
                cells.append(trend_class(fit, t, well_id, solute, samples, cutoffs))
            else:
                cells.append(
                    threshold_class(fit, t, well_id, solute, samples,
                                    thresholds.get(solute), mode)
                )
    return IndicatorMatrix(k=k, t=t, mode=mode, wells=wells, solutes=solutes, cells=cells)


@dataclass
class IndicatorMatrix:
    k: int
    t: int
    mode: str
    wells: list
    solutes: list
    cells: list

    def cell(self, well_id, solute):
        i = self.wells.index(well_id) * len(self.solutes) + self.solutes.index(solute)
        return self.cells[i]

    def to_dict(self):
        from datetime import date

        return {
            "interval": self.k,
            "t": date.fromordinal(int(self.t)).isoformat(),
            "mode": self.mode,
            "rows": list(self.wells),
            "cols": list(self.solutes),
            "cells": [c.to_dict() for c in self.cells],
        }
