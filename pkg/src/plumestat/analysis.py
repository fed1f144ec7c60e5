"""Analysis orchestration: fit every per-well trend, the per-interval flow
fields, and one spatiotemporal model per solute, from a validated dataset.

A finished Analysis is immutable and safe to query concurrently; it can be
saved to / reloaded from a directory without refitting.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from datetime import date
from pathlib import Path

import numpy as np

from . import flow as flowmod
from . import stsmoother
from .dataset import (
    Dataset,
    Diagnostic,
    SubstitutionPolicy,
    load_dataset_dir,
    save_dataset_dir,
)
from .errors import InsufficientDataError, PlumestatError
from .welltrend import MannKendallResult, WellTrendFit, fit_well_trend, make_eval_grid


@dataclass
class AnalysisOptions:
    nd_fraction: float = 0.5
    napl_substitute: bool = False
    granularity: str = "quarter"
    aquifer: str = None
    m_x: int = 6
    m_y: int = 6
    m_t: int = None  # default max(6, intervals // 2)
    degree: int = 3
    d: int = 2
    lam: float = None  # None selects by GCV
    lambda_grid: list = None
    trend_cutoffs: tuple = (0.1, 0.5)
    scale: str = "log"

    def policy(self):
        return SubstitutionPolicy(
            nd_fraction=self.nd_fraction, napl_substitute=self.napl_substitute
        )

    def to_dict(self):
        return {
            "nd_fraction": self.nd_fraction,
            "napl_substitute": self.napl_substitute,
            "granularity": self.granularity,
            "aquifer": self.aquifer,
            "m_x": self.m_x,
            "m_y": self.m_y,
            "m_t": self.m_t,
            "degree": self.degree,
            "d": self.d,
            "lambda": self.lam,
            "lambda_grid": list(self.lambda_grid) if self.lambda_grid is not None else None,
            "trend_cutoffs": list(self.trend_cutoffs),
            "scale": self.scale,
        }

    @classmethod
    def from_dict(cls, d):
        d = dict(d)
        lam = d.pop("lambda", None)
        cutoffs = d.pop("trend_cutoffs", None)
        opts = cls(**{k: v for k, v in d.items() if k in cls.__dataclass_fields__})
        opts.lam = lam
        if cutoffs is not None:
            opts.trend_cutoffs = tuple(cutoffs)
        return opts


@dataclass
class Analysis:
    dataset: Dataset
    options: AnalysisOptions
    trend_fits: dict  # (well_id, solute) -> WellTrendFit
    triangulation: object
    flow_fields: list
    models: dict  # solute -> STModel or None
    diagnostics: list = field(default_factory=list)

    @property
    def solutes(self):
        return self.dataset.solutes

    def model_for(self, solute):
        model = self.models.get(solute)
        if model is None:
            raise PlumestatError(f"no spatiotemporal model for solute {solute!r}")
        return model

    def trend_fit(self, well_id, solute):
        return self.trend_fits.get((well_id, solute))


def zero_floors(dataset):
    """Half the smallest positive working value, per solute; used to floor
    zeros before logging."""
    floors = {}
    for solute in dataset.solutes:
        positive = [r.working for r in dataset.records_for(constituent=solute)
                    if r.working > 0]
        if positive:
            floors[solute] = 0.5 * min(positive)
    return floors


def _trend_eval_grid(dataset, times):
    """101-point grid over the series range plus the midpoints of intervals
    overlapping the observed span."""
    t0, t1 = float(np.min(times)), float(np.max(times))
    mids = []
    for iv in dataset.intervals:
        if iv.end.toordinal() > t0 and iv.start.toordinal() <= t1:
            mids.append(iv.midpoint_ordinal())
    return make_eval_grid(t0, t1, midpoints=mids)


def fit_trends(dataset, options, diagnostics):
    """Local-linear trend fit per (well, solute); series below three
    distinct dates are recorded as missing, not errors."""
    floors = zero_floors(dataset)
    fits = {}
    for well_id in dataset.well_ids:
        for solute in dataset.solutes:
            recs = dataset.records_for(constituent=solute, well_id=well_id)
            if not recs:
                continue
            times = [float(r.sample_date.toordinal()) for r in recs]
            values = [r.working for r in recs]
            censored = [r.censored for r in recs]
            try:
                fits[(well_id, solute)] = fit_well_trend(
                    well_id,
                    solute,
                    times,
                    values,
                    censored,
                    eval_times=_trend_eval_grid(dataset, times),
                    scale=options.scale,
                    units=dataset.units_for(solute),
                    zero_floor=floors.get(solute),
                )
            except InsufficientDataError as exc:
                diagnostics.append(
                    Diagnostic("warning", "TREND_SKIPPED", str(exc))
                )
    return fits


def st_observations(dataset, solute, floors):
    """(x, y, t, log response) arrays for one solute's working records."""
    coords = {w.well_id: (w.x, w.y) for w in dataset.wells}
    xs, ys, ts, resp = [], [], [], []
    floor = floors.get(solute)
    for r in dataset.records_for(constituent=solute):
        x, y = coords[r.well_id]
        v = r.working
        if v <= 0:
            if floor is None:
                raise InsufficientDataError(
                    f"solute {solute!r} has no positive working values"
                )
            v = floor
        xs.append(x)
        ys.append(y)
        ts.append(float(r.sample_date.toordinal()))
        resp.append(np.log(v))
    return np.array(xs), np.array(ys), np.array(ts), np.array(resp)


def fit_st_models(dataset, options, diagnostics):
    """One spatiotemporal smoother per solute.

    Spatial bases span the full well field and the time basis spans the
    interval cover, so every slice-grid point and interval midpoint is in
    range.  Per-solute failures are diagnosed and leave a None entry.
    """
    floors = zero_floors(dataset)
    m_t = options.m_t or max(6, len(dataset.intervals) // 2)

    wx = [w.x for w in dataset.wells]
    wy = [w.y for w in dataset.wells]
    t_span = [
        float(dataset.intervals[0].start.toordinal()),
        float(dataset.intervals[-1].end.toordinal()),
    ]

    models = {}
    for solute in dataset.solutes:
        try:
            xs, ys, ts, resp = st_observations(dataset, solute, floors)
            bases = (
                stsmoother.build_basis(np.concatenate([xs, wx]), options.m_x, options.degree),
                stsmoother.build_basis(np.concatenate([ys, wy]), options.m_y, options.degree),
                stsmoother.build_basis(np.array(t_span), m_t, options.degree),
            )
            design = stsmoother.build_design(xs, ys, ts, resp, bases=bases)
            penalty = stsmoother.build_penalty(
                bases[0].m1, bases[1].m1, bases[2].m1, options.d
            )
            if options.lam is not None:
                model = stsmoother.fit(design, penalty, options.lam,
                                       solute=solute, units=dataset.units_for(solute))
            else:
                model = stsmoother.fit_auto(design, penalty, options.lambda_grid,
                                            solute=solute, units=dataset.units_for(solute))
            models[solute] = model
        except (PlumestatError, ValueError) as exc:
            diagnostics.append(
                Diagnostic("warning", "MODEL_SKIPPED", f"{solute}: {exc}")
            )
            models[solute] = None
    return models


def run_analysis(dataset, options=None):
    """Fit everything; returns a queryable Analysis."""
    options = options or AnalysisOptions()
    diagnostics = list(dataset.diagnostics)
    trend_fits = fit_trends(dataset, options, diagnostics)
    tri, flow_fields = flowmod.all_flow_fields(dataset, diagnostics=diagnostics)
    models = fit_st_models(dataset, options, diagnostics)
    return Analysis(
        dataset=dataset,
        options=options,
        trend_fits=trend_fits,
        triangulation=tri,
        flow_fields=flow_fields,
        models=models,
        diagnostics=diagnostics,
    )


# ---------------------------------------------------------------------------
# Persistence


def _trend_fit_from_dict(d):
    eval_times = np.array([date.fromisoformat(s).toordinal() for s in d["eval_times"]],
                          dtype=float)
    samples = d["samples"]
    return WellTrendFit(
        well_id=d["well_id"],
        solute=d["solute"],
        scale=d["scale"],
        eval_times=eval_times,
        fitted=np.asarray(d["fitted"], dtype=float),
        se=np.asarray(d["se"], dtype=float),
        derivative=np.asarray(d["derivative"], dtype=float),
        h=d["h"],
        n=d["n"],
        sigma2=d["sigma2"],
        mk=MannKendallResult(**d["mk"]),
        sample_times=np.array([date.fromisoformat(s).toordinal() for s in samples["times"]],
                              dtype=float),
        sample_values=np.asarray(samples["values"], dtype=float),
        sample_censored=np.asarray(samples["censored"], dtype=bool),
        units=d.get("units", ""),
        notes=list(d.get("notes", [])),
    )


def save_analysis(analysis, path):
    """Write an analysis directory: canonical dataset, options, trend fits,
    models, flow fields, diagnostics."""
    path = Path(path)
    path.mkdir(parents=True, exist_ok=True)
    save_dataset_dir(analysis.dataset, path / "dataset")
    (path / "options.json").write_text(
        json.dumps(analysis.options.to_dict(), indent=1), encoding="utf-8"
    )
    trends = [fit.to_dict() for fit in analysis.trend_fits.values()]
    (path / "trends.json").write_text(json.dumps(trends), encoding="utf-8")
    models = {s: (m.to_dict() if m is not None else None)
              for s, m in analysis.models.items()}
    (path / "models.json").write_text(json.dumps(models), encoding="utf-8")
    (path / "flow.json").write_text(
        json.dumps([f.to_dict() for f in analysis.flow_fields]), encoding="utf-8"
    )
    (path / "diagnostics.json").write_text(
        json.dumps([d.to_dict() for d in analysis.diagnostics]), encoding="utf-8"
    )


def load_analysis(path):
    """Reload a saved analysis without refitting."""
    path = Path(path)
    options = AnalysisOptions.from_dict(
        json.loads((path / "options.json").read_text(encoding="utf-8"))
    )
    dataset = load_dataset_dir(
        path / "dataset",
        policy=options.policy(),
        granularity=options.granularity,
        aquifer=options.aquifer,
        strict=False,
    )
    trend_fits = {}
    for d in json.loads((path / "trends.json").read_text(encoding="utf-8")):
        fit = _trend_fit_from_dict(d)
        trend_fits[(fit.well_id, fit.solute)] = fit
    models = {}
    for solute, d in json.loads((path / "models.json").read_text(encoding="utf-8")).items():
        models[solute] = stsmoother.STModel.from_dict(d) if d is not None else None
    flow_fields = []
    for d in json.loads((path / "flow.json").read_text(encoding="utf-8")):
        ff = flowmod.FlowField(interval=d["interval"])
        ff.vectors = [
            flowmod.FlowVector(
                well_id=v["well_id"],
                interval=d["interval"],
                a=v["a"], b=v["b"], c=v["c"],
                theta=v["theta_degrees"], R=v["R"],
            )
            for v in d["vectors"]
        ]
        ff.skipped = [(s["well_id"], s["reason"]) for s in d["skipped"]]
        flow_fields.append(ff)
    diagnostics = [
        Diagnostic(severity=d["severity"], code=d["code"], message=d["message"],
                   row=d.get("row"))
        for d in json.loads((path / "diagnostics.json").read_text(encoding="utf-8"))
    ]
    try:
        tri = flowmod.delaunay(dataset.wells)
    except PlumestatError:
        tri = None
    return Analysis(
        dataset=dataset,
        options=options,
        trend_fits=trend_fits,
        triangulation=tri,
        flow_fields=flow_fields,
        models=models,
        diagnostics=diagnostics,
    )
