"""HTTP API over the analysis engine.

Datasets are uploaded once and stored content-addressed on disk; analyses
are fitted asynchronously on a worker pool and then served from memory as
immutable artifacts, so every query endpoint is a cheap evaluation.
What-if parameters (thresholds, trend cutoffs, grid resolution) are query
parameters and never trigger a refit.
"""

from __future__ import annotations

import hashlib
import json
import threading
import uuid
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

from fastapi import FastAPI, File, Request, UploadFile
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse
from fastapi.staticfiles import StaticFiles
from pydantic import BaseModel, field_validator

from . import export, svgrender
from .analysis import AnalysisOptions, load_analysis, run_analysis, save_analysis
from .dataset import load_dataset
from .errors import ExtrapolationError, ParseError, PlumestatError, ValidationFailed
from .indicators import MODES, indicator_matrix


class ApiError(Exception):
    def __init__(self, status, code, message, extra=None):
        super().__init__(message)
        self.status = status
        self.code = code
        self.message = message
        self.extra = extra or {}


class AnalysisRequest(BaseModel):
    nd_fraction: float = 0.5
    napl_substitute: bool = False
    granularity: str = "quarter"
    aquifer: str | None = None
    m_x: int = 6
    m_y: int = 6
    m_t: int | None = None
    degree: int = 3
    d: int = 2
    lam: float | None = None
    lambda_grid: list[float] | None = None
    trend_cutoffs: tuple[float, float] = (0.1, 0.5)
    scale: str = "log"

    @field_validator("nd_fraction")
    @classmethod
    def _nd_fraction(cls, v):
        if v not in (0.5, 1.0):
            raise ValueError("nd_fraction must be 0.5 or 1.0")
        return v

    @field_validator("granularity")
    @classmethod
    def _granularity(cls, v):
        if v not in ("month", "quarter", "year"):
            raise ValueError("granularity must be month, quarter, or year")
        return v

    @field_validator("scale")
    @classmethod
    def _scale(cls, v):
        if v not in ("log", "linear"):
            raise ValueError("scale must be log or linear")
        return v

    def to_options(self):
        return AnalysisOptions(
            nd_fraction=self.nd_fraction,
            napl_substitute=self.napl_substitute,
            granularity=self.granularity,
            aquifer=self.aquifer,
            m_x=self.m_x,
            m_y=self.m_y,
            m_t=self.m_t,
            degree=self.degree,
            d=self.d,
            lam=self.lam,
            lambda_grid=self.lambda_grid,
            trend_cutoffs=tuple(self.trend_cutoffs),
            scale=self.scale,
        )


class JobRecord:
    """Mutable job state; transitions only forward (queued -> running ->
    done | failed)."""

    def __init__(self, job_id, dataset_id, options):
        self.id = job_id
        self.dataset_id = dataset_id
        self.options = options
        self.status = "queued"
        self.error = None
        self.analysis = None

    def summary(self):
        body = {
            "id": self.id,
            "dataset_id": self.dataset_id,
            "status": self.status,
        }
        if self.error:
            body["error"] = self.error
        if self.analysis is not None:
            ds = self.analysis.dataset
            body["solutes"] = ds.solutes
            body["wells"] = sorted(ds.well_ids)
            body["intervals"] = [
                {"index": k, "label": iv.label, "start": iv.start.isoformat(),
                 "end": iv.end.isoformat()}
                for k, iv in enumerate(ds.intervals)
            ]
            body["diagnostics"] = [d.to_dict() for d in self.analysis.diagnostics]
            body["models"] = {
                s: (m is not None) for s, m in self.analysis.models.items()
            }
        return body


class Registry:
    """Thread-safe dataset and job registry backed by a data directory."""

    def __init__(self, data_dir, workers=2):
        self.data_dir = Path(data_dir)
        (self.data_dir / "datasets").mkdir(parents=True, exist_ok=True)
        (self.data_dir / "analyses").mkdir(parents=True, exist_ok=True)
        self.jobs = {}
        self.lock = threading.Lock()
        self.pool = ThreadPoolExecutor(max_workers=workers)

    # -- datasets ----------------------------------------------------------
    def store_dataset(self, monitoring, wells, overlays):
        digest = hashlib.sha256()
        for blob in (monitoring, wells, overlays or b""):
            digest.update(hashlib.sha256(blob).digest())
        dataset_id = digest.hexdigest()[:16]
        ddir = self.data_dir / "datasets" / dataset_id
        ddir.mkdir(parents=True, exist_ok=True)
        (ddir / "monitoring.csv").write_bytes(monitoring)
        (ddir / "wells.csv").write_bytes(wells)
        if overlays:
            (ddir / "overlays.json").write_bytes(overlays)
        return dataset_id

    def dataset_dir(self, dataset_id):
        ddir = self.data_dir / "datasets" / dataset_id
        if not (ddir / "monitoring.csv").exists():
            raise ApiError(404, "DATASET_NOT_FOUND", f"no dataset {dataset_id}")
        return ddir

    def load_dataset(self, dataset_id, options):
        ddir = self.dataset_dir(dataset_id)
        overlays_path = ddir / "overlays.json"
        return load_dataset(
            (ddir / "monitoring.csv").read_text(encoding="utf-8"),
            (ddir / "wells.csv").read_text(encoding="utf-8"),
            overlays_path.read_text(encoding="utf-8") if overlays_path.exists() else None,
            policy=options.policy(),
            granularity=options.granularity,
            aquifer=options.aquifer,
        )

    # -- jobs --------------------------------------------------------------
    def submit(self, dataset_id, options):
        self.dataset_dir(dataset_id)  # 404 before queueing
        job_id = uuid.uuid4().hex[:16]
        record = JobRecord(job_id, dataset_id, options)
        with self.lock:
            self.jobs[job_id] = record
        self.pool.submit(self._run, record)
        return record

    def _run(self, record):
        with self.lock:
            record.status = "running"
        try:
            dataset = self.load_dataset(record.dataset_id, record.options)
            analysis = run_analysis(dataset, record.options)
            save_analysis(analysis, self.data_dir / "analyses" / record.id)
            with self.lock:
                record.analysis = analysis
                record.status = "done"
        except Exception as exc:  # failures are reported, not raised
            with self.lock:
                record.error = f"{type(exc).__name__}: {exc}"
                record.status = "failed"

    def job(self, job_id):
        with self.lock:
            record = self.jobs.get(job_id)
        if record is None:
            record = self._revive(job_id)
        if record is None:
            raise ApiError(404, "ANALYSIS_NOT_FOUND", f"no analysis {job_id}")
        return record

    def _revive(self, job_id):
        """Reload a persisted analysis after a restart."""
        adir = self.data_dir / "analyses" / job_id
        if not (adir / "options.json").exists():
            return None
        try:
            analysis = load_analysis(adir)
        except Exception:
            return None
        record = JobRecord(job_id, "?", analysis.options)
        record.analysis = analysis
        record.status = "done"
        with self.lock:
            self.jobs.setdefault(job_id, record)
            return self.jobs[job_id]

    def ready(self, job_id):
        record = self.job(job_id)
        if record.status in ("queued", "running"):
            raise ApiError(409, "ANALYSIS_PENDING",
                           f"analysis {job_id} is {record.status}")
        if record.status == "failed":
            raise ApiError(409, "ANALYSIS_FAILED", record.error or "analysis failed")
        return record.analysis


def _parse_thresholds(raw):
    if raw is None or raw == "":
        return {}
    try:
        data = json.loads(raw)
    except json.JSONDecodeError:
        raise ApiError(422, "INVALID_OPTIONS",
                       'thresholds must be a JSON object, e.g. {"Benzene": 5.0}') from None
    if not isinstance(data, dict):
        raise ApiError(422, "INVALID_OPTIONS", "thresholds must be a JSON object")
    out = {}
    for key, value in data.items():
        try:
            out[key] = float(value)
        except (TypeError, ValueError):
            raise ApiError(422, "INVALID_OPTIONS",
                           f"threshold for {key!r} is not numeric") from None
        if out[key] <= 0:
            raise ApiError(422, "INVALID_OPTIONS", f"threshold for {key!r} must be > 0")
    return out


def _parse_cutoffs(raw):
    if raw is None or raw == "":
        return None
    parts = raw.split(",")
    try:
        lo, hi = (float(p) for p in parts)
    except ValueError:
        raise ApiError(422, "INVALID_OPTIONS",
                       "cutoffs must be 'lo,hi' in log-units/year") from None
    if not (0 < lo < hi):
        raise ApiError(422, "INVALID_OPTIONS", "cutoffs must satisfy 0 < lo < hi")
    return (lo, hi)


def create_app(data_dir, workers=2, max_upload_bytes=64 * 2**20, ui_dir=None):
    app = FastAPI(title="plumestat", version="0.1.0")
    app.add_middleware(
        CORSMiddleware,
        allow_origins=["*"],
        allow_methods=["*"],
        allow_headers=["*"],
    )
    registry = Registry(data_dir, workers=workers)
    app.state.registry = registry

    async def _read_limited(upload):
        if upload is None:
            return None
        blob = await upload.read()
        if len(blob) > max_upload_bytes:
            raise ApiError(413, "UPLOAD_TOO_LARGE",
                           f"{upload.filename} exceeds {max_upload_bytes} bytes")
        return blob

    @app.exception_handler(ApiError)
    async def _api_error(request: Request, exc: ApiError):
        body = {"error": {"code": exc.code, "message": exc.message, **exc.extra}}
        return JSONResponse(status_code=exc.status, content=body)

    @app.post("/datasets", status_code=201)
    async def upload_dataset(
        monitoring: UploadFile = File(...),
        wells: UploadFile = File(...),
        overlays: UploadFile | None = File(None),
    ):
        mon = await _read_limited(monitoring)
        wel = await _read_limited(wells)
        ovl = await _read_limited(overlays)
        try:
            dataset = load_dataset(
                mon.decode("utf-8"),
                wel.decode("utf-8"),
                ovl.decode("utf-8") if ovl else None,
            )
        except ValidationFailed as exc:
            raise ApiError(
                422, "VALIDATION_FAILED", "dataset failed validation",
                extra={"diagnostics": [d.to_dict() for d in exc.diagnostics]},
            ) from None
        except (ParseError, UnicodeDecodeError) as exc:
            raise ApiError(422, "PARSE_ERROR", str(exc)) from None
        dataset_id = registry.store_dataset(mon, wel, ovl)
        return {
            "dataset_id": dataset_id,
            "wells": len(dataset.wells),
            "records": len(dataset.records),
            "solutes": dataset.solutes,
            "diagnostics": [d.to_dict() for d in dataset.diagnostics],
        }

    @app.post("/datasets/{dataset_id}/analyses", status_code=202)
    def start_analysis(dataset_id: str, request: AnalysisRequest):
        record = registry.submit(dataset_id, request.to_options())
        return {"analysis_id": record.id, "status": record.status}

    @app.get("/analyses/{analysis_id}")
    def analysis_status(analysis_id: str):
        return registry.job(analysis_id).summary()

    @app.get("/analyses/{analysis_id}/wells/{well_id}/trend")
    def well_trend(analysis_id: str, well_id: str, solute: str):
        analysis = registry.ready(analysis_id)
        if well_id not in analysis.dataset.well_ids:
            raise ApiError(404, "WELL_NOT_FOUND", f"no well {well_id}")
        if solute not in analysis.dataset.solutes:
            raise ApiError(404, "SOLUTE_NOT_FOUND", f"no solute {solute}")
        fit = analysis.trend_fit(well_id, solute)
        if fit is None:
            raise ApiError(404, "TREND_NOT_AVAILABLE",
                           f"no trend fit for {well_id}/{solute} (insufficient data)")
        return fit.to_dict()

    @app.get("/analyses/{analysis_id}/slices/{k}")
    def get_slice(analysis_id: str, k: int, solute: str, nx: int = 50, ny: int = 50,
                  mask: bool = True):
        analysis = registry.ready(analysis_id)
        _check_solute(analysis, solute)
        _check_interval(analysis, k)
        if nx < 2 or ny < 2 or nx * ny > 1_000_000:
            raise ApiError(422, "INVALID_OPTIONS", "nx/ny must be >= 2 and modest")
        try:
            grid = export.slice_grid(analysis, k, solute, nx=nx, ny=ny, hull_mask=mask)
        except ExtrapolationError as exc:
            raise ApiError(422, "EXTRAPOLATION", str(exc)) from None
        return grid.to_dict()

    @app.get("/analyses/{analysis_id}/flow/{k}")
    def get_flow(analysis_id: str, k: int):
        analysis = registry.ready(analysis_id)
        _check_interval(analysis, k)
        return analysis.flow_fields[k].to_dict()

    @app.get("/analyses/{analysis_id}/indicators")
    def get_indicators(analysis_id: str, k: int, mode: str = "trend",
                       thresholds: str | None = None,
                       cutoffs: str | None = None):
        analysis = registry.ready(analysis_id)
        _check_interval(analysis, k)
        if mode not in MODES:
            raise ApiError(422, "INVALID_OPTIONS", f"mode must be one of {MODES}")
        ts = _parse_thresholds(thresholds)
        co = _parse_cutoffs(cutoffs)
        return indicator_matrix(analysis, k, mode=mode, thresholds=ts,
                                cutoffs=co).to_dict()

    @app.get("/analyses/{analysis_id}/wells/{well_id}/gw")
    def well_gw(analysis_id: str, well_id: str):
        analysis = registry.ready(analysis_id)
        if well_id not in analysis.dataset.well_ids:
            raise ApiError(404, "WELL_NOT_FOUND", f"no well {well_id}")
        recs = sorted(
            analysis.dataset.records_for(constituent="GW", well_id=well_id),
            key=lambda r: r.sample_date,
        )
        return {
            "well_id": well_id,
            "times": [r.sample_date.isoformat() for r in recs],
            "values": [float(r.working) for r in recs],
            "units": recs[0].units if recs else "",
        }

    @app.get("/analyses/{analysis_id}/frames")
    def get_frames(analysis_id: str, solute: str, nx: int = 50, ny: int = 50,
                   page: int = 0, page_size: int = 12):
        analysis = registry.ready(analysis_id)
        _check_solute(analysis, solute)
        if page < 0 or page_size < 1:
            raise ApiError(422, "INVALID_OPTIONS", "bad pagination")
        seq = export.frame_sequence(analysis, solute, nx=nx, ny=ny)
        total = len(seq.frames)
        start, stop = page * page_size, (page + 1) * page_size
        return {
            "solute": seq.solute,
            "color_scale": {"min": seq.vmin, "max": seq.vmax},
            "total_frames": total,
            "page": page,
            "page_size": page_size,
            "frames": [f.to_dict() for f in seq.frames[start:stop]],
        }

    @app.get("/analyses/{analysis_id}/snapshot")
    def get_snapshot(analysis_id: str, thresholds: str | None = None,
                     nx: int = 50, ny: int = 50):
        analysis = registry.ready(analysis_id)
        ts = _parse_thresholds(thresholds)
        return export.latest_snapshot(analysis, thresholds=ts, nx=nx, ny=ny)

    @app.get("/analyses/{analysis_id}/slices/{k}/svg")
    def get_slice_svg(analysis_id: str, k: int, solute: str, nx: int = 50, ny: int = 50):
        from fastapi import Response

        analysis = registry.ready(analysis_id)
        _check_solute(analysis, solute)
        _check_interval(analysis, k)
        grid = export.slice_grid(analysis, k, solute, nx=nx, ny=ny)
        return Response(content=svgrender.render_slice_svg(grid),
                        media_type="image/svg+xml")

    def _check_solute(analysis, solute):
        if solute not in analysis.dataset.solutes:
            raise ApiError(404, "SOLUTE_NOT_FOUND", f"no solute {solute}")
        if analysis.models.get(solute) is None:
            raise ApiError(404, "MODEL_NOT_AVAILABLE",
                           f"no spatiotemporal model for {solute}")

    def _check_interval(analysis, k):
        n = len(analysis.dataset.intervals)
        if not (0 <= k < n):
            raise ApiError(404, "INTERVAL_OUT_OF_RANGE",
                           f"interval {k} outside 0..{n - 1}")

    if ui_dir is not None:
        app.mount("/", StaticFiles(directory=ui_dir, html=True), name="ui")

    return app


def serve(data_dir, host="127.0.0.1", port=8450, workers=2, max_upload_mb=64,
          ui_dir=None):
    import uvicorn

    app = create_app(data_dir, workers=workers,
                     max_upload_bytes=max_upload_mb * 2**20, ui_dir=ui_dir)
    uvicorn.run(app, host=host, port=port, log_level="info")
