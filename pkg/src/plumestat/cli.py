"""Command-line front door: validate data, run analyses, export artifacts,
and launch the HTTP service.

Exit codes: 0 success, 2 validation errors, 3 fitting errors, 4 I/O or
usage errors.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

from . import export, svgrender
from .analysis import AnalysisOptions, load_analysis, run_analysis, save_analysis
from .dataset import load_dataset_dir, parse_monitoring_csv, parse_wells_csv, validate
from .errors import ParseError, PlumestatError, ValidationFailed

EXIT_VALIDATION = 2
EXIT_FIT = 3
EXIT_IO = 4


def _fail(code, message):
    print(message, file=sys.stderr)
    raise SystemExit(code)


def cmd_validate(args):
    path = Path(args.data_dir)
    try:
        monitoring = (path / "monitoring.csv").read_text(encoding="utf-8")
        wells = (path / "wells.csv").read_text(encoding="utf-8")
    except OSError as exc:
        _fail(EXIT_IO, f"cannot read input: {exc}")
    try:
        records = parse_monitoring_csv(monitoring)
        well_rows = parse_wells_csv(wells)
    except ParseError as exc:
        _fail(EXIT_VALIDATION, f"parse error: {exc}")
    diagnostics, _ = validate(records, well_rows)
    for d in diagnostics:
        print(f"{d.severity.upper():7s} {d.code}: {d.message}")
    errors = sum(1 for d in diagnostics if d.severity == "error")
    warnings_ = sum(1 for d in diagnostics if d.severity == "warning")
    print(f"{len(records)} records, {len(well_rows)} wells; "
          f"{errors} error(s), {warnings_} warning(s)")
    if errors:
        raise SystemExit(EXIT_VALIDATION)


def _options_from_args(args):
    m_x = m_y = 6
    m_t = None
    if args.basis:
        try:
            m_x, m_y, m_t = (int(v) for v in args.basis.split(","))
        except ValueError:
            _fail(EXIT_IO, "--basis expects mx,my,mt (three integers)")
    lam = None
    if args.lam not in (None, "auto"):
        try:
            lam = float(args.lam)
        except ValueError:
            _fail(EXIT_IO, f"--lambda expects 'auto' or a number, got {args.lam!r}")
    return AnalysisOptions(
        nd_fraction=args.nd_fraction,
        napl_substitute=args.napl_substitute,
        granularity=args.granularity,
        aquifer=args.aquifer,
        m_x=m_x,
        m_y=m_y,
        m_t=m_t,
        lam=lam,
    )


def cmd_analyze(args):
    options = _options_from_args(args)
    try:
        dataset = load_dataset_dir(
            args.data_dir,
            policy=options.policy(),
            granularity=options.granularity,
            aquifer=options.aquifer,
        )
    except OSError as exc:
        _fail(EXIT_IO, f"cannot read input: {exc}")
    except ValidationFailed as exc:
        for d in exc.diagnostics:
            print(f"{d.severity.upper():7s} {d.code}: {d.message}", file=sys.stderr)
        _fail(EXIT_VALIDATION, "dataset failed validation")
    except ParseError as exc:
        _fail(EXIT_VALIDATION, f"parse error: {exc}")

    try:
        analysis = run_analysis(dataset, options)
    except PlumestatError as exc:
        _fail(EXIT_FIT, f"analysis failed: {exc}")
    save_analysis(analysis, args.out)
    fitted = sorted(s for s, m in analysis.models.items() if m is not None)
    skipped = sorted(s for s, m in analysis.models.items() if m is None)
    print(f"analysis written to {args.out}")
    print(f"solute models: {', '.join(fitted) if fitted else '(none)'}")
    if skipped:
        print(f"skipped: {', '.join(skipped)} (see diagnostics.json)")
    for d in analysis.diagnostics:
        if d.severity == "warning":
            print(f"WARNING {d.code}: {d.message}")


def _load_analysis(path):
    try:
        return load_analysis(path)
    except OSError as exc:
        _fail(EXIT_IO, f"cannot load analysis from {path}: {exc}")
    except (KeyError, json.JSONDecodeError) as exc:
        _fail(EXIT_IO, f"analysis directory {path} is damaged: {exc}")


def _check_interval(analysis, k):
    n = len(analysis.dataset.intervals)
    if not (0 <= k < n):
        _fail(EXIT_IO, f"interval {k} out of range; valid range is 0..{n - 1}")


def _check_solute(analysis, solute):
    if solute not in analysis.dataset.solutes:
        _fail(EXIT_IO, f"unknown solute {solute!r}; have {', '.join(analysis.dataset.solutes)}")
    if analysis.models.get(solute) is None:
        _fail(EXIT_FIT, f"no spatiotemporal model for {solute!r} (skipped during analyze)")


def _write(path, text):
    Path(path).parent.mkdir(parents=True, exist_ok=True)
    Path(path).write_text(text, encoding="utf-8")
    print(f"wrote {path}")


def cmd_slice(args):
    analysis = _load_analysis(args.analysis_dir)
    _check_solute(analysis, args.solute)
    _check_interval(analysis, args.interval)
    try:
        grid = export.slice_grid(analysis, args.interval, args.solute,
                                 nx=args.nx, ny=args.ny)
    except PlumestatError as exc:
        _fail(EXIT_FIT, f"slice failed: {exc}")
    out = Path(args.out or f"slice_{args.solute}_{args.interval}.json")
    _write(out, json.dumps(grid.to_dict()))
    if args.svg:
        _write(out.with_suffix(".svg"), svgrender.render_slice_svg(grid))


def cmd_frames(args):
    analysis = _load_analysis(args.analysis_dir)
    _check_solute(analysis, args.solute)
    try:
        seq = export.frame_sequence(analysis, args.solute, nx=args.nx, ny=args.ny)
    except PlumestatError as exc:
        _fail(EXIT_FIT, f"frame sequence failed: {exc}")
    out = Path(args.out or f"frames_{args.solute}.json")
    _write(out, json.dumps(seq.to_dict()))
    if args.svg:
        vmin, vmax = seq.vmin, seq.vmax
        for frame in seq.frames:
            _write(out.parent / f"{out.stem}_{frame.interval:03d}.svg",
                   svgrender.render_slice_svg(frame, vmin=vmin, vmax=vmax))


def cmd_snapshot(args):
    analysis = _load_analysis(args.analysis_dir)
    thresholds = {}
    if args.thresholds:
        try:
            thresholds = json.loads(Path(args.thresholds).read_text(encoding="utf-8"))
        except OSError as exc:
            _fail(EXIT_IO, f"cannot read thresholds: {exc}")
        except json.JSONDecodeError as exc:
            _fail(EXIT_IO, f"thresholds file is not valid JSON: {exc}")
    try:
        bundle = export.latest_snapshot(analysis, thresholds=thresholds,
                                        nx=args.nx, ny=args.ny)
    except PlumestatError as exc:
        _fail(EXIT_FIT, f"snapshot failed: {exc}")
    _write(Path(args.out or "snapshot.json"), json.dumps(bundle))


def cmd_serve(args):
    from .service import serve

    host, _, port = args.listen.rpartition(":")
    try:
        port = int(port)
    except ValueError:
        _fail(EXIT_IO, f"--listen expects host:port, got {args.listen!r}")
    serve(args.data, host=host or "127.0.0.1", port=port, workers=args.workers,
          max_upload_mb=args.max_upload_mb, ui_dir=args.ui)


def build_parser():
    parser = argparse.ArgumentParser(
        prog="plumestat",
        description="groundwater monitoring trend and plume analysis",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", help="check input files for common errors")
    p.add_argument("data_dir", help="directory with monitoring.csv and wells.csv")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("analyze", help="fit trends, flow, and the concentration model")
    p.add_argument("data_dir")
    p.add_argument("--out", required=True, help="output analysis directory")
    p.add_argument("--granularity", default="quarter",
                   choices=["month", "quarter", "year"])
    p.add_argument("--nd-fraction", type=float, default=0.5, choices=[0.5, 1.0])
    p.add_argument("--napl-substitute", action="store_true")
    p.add_argument("--lambda", dest="lam", default="auto",
                   help="'auto' (GCV) or a fixed penalty value")
    p.add_argument("--basis", default=None, help="mx,my,mt basis sizes")
    p.add_argument("--aquifer", default=None)
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("slice", help="export one time-slice concentration grid")
    p.add_argument("analysis_dir")
    p.add_argument("--solute", required=True)
    p.add_argument("--interval", type=int, required=True)
    p.add_argument("--nx", type=int, default=50)
    p.add_argument("--ny", type=int, default=50)
    p.add_argument("--svg", action="store_true")
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_slice)

    p = sub.add_parser("frames", help="export the full animation frame sequence")
    p.add_argument("analysis_dir")
    p.add_argument("--solute", required=True)
    p.add_argument("--nx", type=int, default=50)
    p.add_argument("--ny", type=int, default=50)
    p.add_argument("--svg", action="store_true")
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_frames)

    p = sub.add_parser("snapshot", help="latest-interval grids and indicator matrices")
    p.add_argument("analysis_dir")
    p.add_argument("--thresholds", default=None, help="JSON file of solute thresholds")
    p.add_argument("--nx", type=int, default=50)
    p.add_argument("--ny", type=int, default=50)
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_snapshot)

    p = sub.add_parser("serve", help="run the HTTP API")
    p.add_argument("--data", default=os.environ.get("PLUMESTAT_DATA"),
                   required="PLUMESTAT_DATA" not in os.environ,
                   help="service data directory (env PLUMESTAT_DATA)")
    p.add_argument("--listen", default=os.environ.get("PLUMESTAT_LISTEN",
                                                      "127.0.0.1:8450"))
    p.add_argument("--workers", type=int,
                   default=int(os.environ.get("PLUMESTAT_WORKERS", "2")))
    p.add_argument("--max-upload-mb", type=int,
                   default=int(os.environ.get("PLUMESTAT_MAX_UPLOAD_MB", "64")))
    p.add_argument("--ui", default=os.environ.get("PLUMESTAT_UI"),
                   help="directory with the built browser UI to serve at /")
    p.set_defaults(func=cmd_serve)

    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    args.func(args)


if __name__ == "__main__":
    main()
