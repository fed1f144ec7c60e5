import json
import time

import numpy as np
import pytest
from shapely.geometry import Point, Polygon

from plumestat import export
from plumestat.errors import PlumestatError
from plumestat.indicators import indicator_matrix
from plumestat import svgrender


class TestSliceGrid:
    def test_values_match_predict_bitwise(self, basic_analysis):
        grid = export.slice_grid(basic_analysis, 5, "Benzene", nx=20, ny=20)
        model = basic_analysis.models["Benzene"]
        XX, YY = np.meshgrid(grid.xs, grid.ys)
        keep = ~grid.mask.ravel()
        pts = np.column_stack(
            [XX.ravel()[keep], YY.ravel()[keep], np.full(keep.sum(), float(grid.t))]
        )
        assert (grid.values.ravel()[keep] == model.predict(pts)).all()

    def test_mask_matches_shapely_hull(self, basic_analysis):
        grid = export.slice_grid(basic_analysis, 5, "Benzene", nx=25, ny=25)
        wells = [(w.x, w.y) for w in basic_analysis.dataset.wells]
        hull = Polygon(wells).convex_hull
        XX, YY = np.meshgrid(grid.xs, grid.ys)
        for x, y, masked in zip(XX.ravel(), YY.ravel(), grid.mask.ravel()):
            inside = hull.buffer(1e-9).contains(Point(x, y))
            assert masked == (not inside)

    def test_unmasked_values_positive(self, basic_analysis):
        grid = export.slice_grid(basic_analysis, 3, "Toluene")
        assert (grid.values[~grid.mask] > 0).all()

    def test_mask_off(self, basic_analysis):
        grid = export.slice_grid(basic_analysis, 3, "Toluene", hull_mask=False)
        assert not grid.mask.any()

    def test_runtime_under_a_second(self, basic_analysis):
        start = time.perf_counter()
        export.slice_grid(basic_analysis, 5, "Benzene", nx=50, ny=50)
        assert time.perf_counter() - start < 1.0

    def test_samples_are_working_values(self, basic_analysis):
        grid = export.slice_grid(basic_analysis, 5, "Benzene", nx=5, ny=5)
        ds = basic_analysis.dataset
        recs = {(r.well_id, r.sample_date.isoformat()): r
                for r in ds.records_for(constituent="Benzene", interval=5)}
        assert grid.samples
        for s in grid.samples:
            rec = recs[(s["well_id"], s["date"])]
            assert s["value"] == rec.working
            assert s["censored"] == rec.censored

    def test_bad_interval(self, basic_analysis):
        with pytest.raises(ValueError):
            export.slice_grid(basic_analysis, 999, "Benzene")

    def test_unknown_solute(self, basic_analysis):
        with pytest.raises(PlumestatError):
            export.slice_grid(basic_analysis, 0, "Chocolate")


class TestFrameSequence:
    def test_one_frame_per_interval(self, basic_analysis):
        seq = export.frame_sequence(basic_analysis, "Benzene", nx=12, ny=12)
        assert len(seq.frames) == len(basic_analysis.dataset.intervals)

    def test_color_scale_attained(self, basic_analysis):
        seq = export.frame_sequence(basic_analysis, "Benzene", nx=12, ny=12)
        values = np.concatenate(
            [f.values[~f.mask] for f in seq.frames]
        )
        assert seq.vmin == values.min()
        assert seq.vmax == values.max()

    def test_frames_equal_direct_slices(self, basic_analysis):
        seq = export.frame_sequence(basic_analysis, "Benzene", nx=10, ny=10)
        for k, frame in enumerate(seq.frames):
            direct = export.slice_grid(basic_analysis, k, "Benzene", nx=10, ny=10)
            same = (frame.values == direct.values) | (
                np.isnan(frame.values) & np.isnan(direct.values)
            )
            assert same.all()


class TestWellReport:
    def test_every_well_present(self, basic_analysis):
        report = export.well_report(basic_analysis)
        assert [e["well_id"] for e in report] == sorted(basic_analysis.dataset.well_ids)

    def test_series_passthrough(self, basic_analysis):
        report = export.well_report(basic_analysis)
        ds = basic_analysis.dataset
        entry = next(e for e in report if e["well_id"] == "MW-01")
        series = entry["solutes"]["Benzene"]
        recs = sorted(ds.records_for(constituent="Benzene", well_id="MW-01"),
                      key=lambda r: r.sample_date)
        assert series["values"] == [r.working for r in recs]

    def test_gw_overlay_flag(self, basic_analysis):
        report = export.well_report(basic_analysis)
        for e in report:
            assert (e["gw"] is None) == e["gw_missing"]

    def test_without_gw_overlay(self, basic_analysis):
        report = export.well_report(basic_analysis, include_gw=False)
        assert all(e["gw"] is None and not e["gw_missing"] for e in report)


class TestLatestSnapshot:
    def test_contents(self, basic_analysis):
        thresholds = {s: 1.0 for s in basic_analysis.solutes}
        snap = export.latest_snapshot(basic_analysis, thresholds, nx=15, ny=15)
        assert snap["interval"] == len(basic_analysis.dataset.intervals) - 1
        assert sorted(snap["grids"]) == sorted(basic_analysis.solutes)
        assert sorted(snap["matrices"]) == sorted(
            ["trend", "threshold-absolute", "threshold-statistical"]
        )

    def test_matrices_equal_direct_calls(self, basic_analysis):
        thresholds = {s: 1.0 for s in basic_analysis.solutes}
        snap = export.latest_snapshot(basic_analysis, thresholds, nx=5, ny=5)
        k = snap["interval"]
        direct = indicator_matrix(basic_analysis, k, "threshold-absolute",
                                  thresholds=thresholds)
        assert snap["matrices"]["threshold-absolute"] == direct.to_dict()

    def test_size_under_5mb(self, basic_analysis):
        snap = export.latest_snapshot(basic_analysis, {}, nx=50, ny=50)
        assert len(json.dumps(snap).encode()) < 5_000_000


class TestSvg:
    def test_byte_identical(self, basic_analysis):
        grid = export.slice_grid(basic_analysis, 5, "Benzene", nx=15, ny=15)
        assert svgrender.render_slice_svg(grid) == svgrender.render_slice_svg(grid)
        fit = basic_analysis.trend_fit("MW-01", "Benzene")
        assert svgrender.render_trend_svg(fit) == svgrender.render_trend_svg(fit)
        matrix = indicator_matrix(basic_analysis, 5)
        assert svgrender.render_matrix_svg(matrix) == svgrender.render_matrix_svg(matrix)

    def test_no_arrows_for_empty_flow(self, basic_analysis):
        grid = export.slice_grid(basic_analysis, 5, "Benzene", nx=8, ny=8)
        grid.flow = None
        svg = svgrender.render_slice_svg(grid)
        assert 'class="arrow"' not in svg

    def test_spatial_structure(self, basic_analysis):
        grid = export.slice_grid(basic_analysis, 5, "Benzene", nx=8, ny=8)
        svg = svgrender.render_slice_svg(grid)
        ds = basic_analysis.dataset
        assert svg.count('class="well"') == len(ds.wells)
        assert svg.count('class="well-id"') == len(ds.wells)
        assert svg.count('class="arrow"') == len(grid.flow.vectors)
        assert svg.count('class="overlay"') == len(ds.overlays)
        assert svg.count('class="cell"') == int((~grid.mask).sum())
        for w in ds.wells:
            assert f">{w.well_id}</text>" in svg

    def test_detect_red_nondetect_black(self, basic_analysis):
        grid = export.slice_grid(basic_analysis, 5, "MTBE", nx=8, ny=8)
        svg = svgrender.render_slice_svg(grid)
        latest = {}
        for s in grid.samples:
            cur = latest.get(s["well_id"])
            if cur is None or s["date"] > cur["date"]:
                latest[s["well_id"]] = s
        reds = svg.count('fill="#cc0000"')
        blacks = svg.count('class="sample"') - reds
        want_red = sum(1 for s in latest.values() if not s["censored"])
        assert reds == want_red
        assert blacks == len(latest) - want_red

    def test_matrix_cell_colors_follow_classes(self, basic_analysis):
        matrix = indicator_matrix(basic_analysis, 5)
        svg = svgrender.render_matrix_svg(matrix)
        for cell in matrix.cells:
            assert f'class="cell {cell.klass}"' in svg

    def test_trend_svg_marks_censoring(self, basic_analysis):
        fit = basic_analysis.trend_fit("MW-03", "Toluene")  # all censored
        svg = svgrender.render_trend_svg(fit)
        assert svg.count("censored") == int(fit.n)

    def test_dispatch(self, basic_analysis):
        grid = export.slice_grid(basic_analysis, 2, "Benzene", nx=5, ny=5)
        assert svgrender.render_svg(grid).startswith("<?xml")
        with pytest.raises(TypeError):
            svgrender.render_svg({"not": "an artifact"})
