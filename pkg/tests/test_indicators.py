import math
from datetime import date

import numpy as np
import pytest

from plumestat import indicators as ind
from plumestat import welltrend as wt
from plumestat.dataset import MonitoringRecord


def sample(day, value, censored=False, well="W", solute="S"):
    return MonitoringRecord(
        well_id=well,
        sample_date=date.fromordinal(int(day)),
        constituent=solute,
        value=value,
        censored=censored,
        units="mg/l",
    )


def make_fit(times, log_values, h=None):
    return wt.fit_well_trend(
        "W", "S", times, np.exp(np.asarray(log_values)), [False] * len(times), h=h
    )


T0 = date(2019, 1, 1).toordinal()


class TestTrendClass:
    def test_constant_is_stable(self):
        times = T0 + np.arange(0, 720, 60, dtype=float)
        fit = make_fit(times, np.zeros(len(times)))
        cell = ind.trend_class(fit, float(times[4]), "W", "S", [sample(times[0], 1.0)])
        assert cell.klass == "stable"
        assert cell.slope == pytest.approx(0.0, abs=1e-9)

    def test_exponential_growth_strong_up(self):
        # log concentration rising exactly 1 per year
        times = T0 + np.arange(0, 1460, 45, dtype=float)
        logv = (times - times[0]) / wt.DAYS_PER_YEAR
        fit = make_fit(times, logv)
        t = float(times[len(times) // 2])
        cell = ind.trend_class(fit, t, "W", "S", [sample(t, 2.0)])
        assert cell.klass == "strong-up"
        assert cell.slope == pytest.approx(1.0, rel=1e-6)

    def test_no_fit_is_insufficient(self):
        cell = ind.trend_class(None, 1000.0, "W", "S", [sample(T0, 1.0)])
        assert cell.klass == "insufficient"

    def test_all_censored_interval_is_non_detect(self):
        times = T0 + np.arange(0, 720, 60, dtype=float)
        fit = make_fit(times, np.zeros(len(times)))
        samples = [sample(times[2], 0.01, censored=True),
                   sample(times[2] + 10, 0.01, censored=True)]
        cell = ind.trend_class(fit, float(times[2]), "W", "S", samples)
        assert cell.klass == "non-detect"

    def test_outside_range_insufficient(self):
        times = T0 + np.arange(0, 720, 60, dtype=float)
        fit = make_fit(times, np.zeros(len(times)))
        cell = ind.trend_class(fit, float(times[-1]) + 5000.0, "W", "S", [])
        assert cell.klass == "insufficient"

    def test_cutoffs_configurable(self):
        times = T0 + np.arange(0, 1460, 45, dtype=float)
        logv = 0.3 * (times - times[0]) / wt.DAYS_PER_YEAR
        fit = make_fit(times, logv)
        t = float(times[len(times) // 2])
        assert ind.trend_class(fit, t, "W", "S", [sample(t, 1)]).klass == "up"
        loose = ind.trend_class(fit, t, "W", "S", [sample(t, 1)], cutoffs=(0.5, 1.0))
        assert loose.klass == "stable"

    def test_time_reversal_antisymmetry(self):
        rng = np.random.default_rng(44)
        times = T0 + np.sort(rng.uniform(0, 1400, 24))
        logv = 0.8 * (times - times[0]) / wt.DAYS_PER_YEAR + rng.normal(0, 0.05, 24)
        h = 200.0
        fit_fwd = make_fit(times, logv, h=h)
        mirrored = times[0] + times[-1] - times[::-1]
        fit_rev = wt.fit_well_trend(
            "W", "S", mirrored, np.exp(logv[::-1]), [False] * 24, h=h
        )
        swap = {"up": "down", "strong-up": "strong-down", "stable": "stable",
                "down": "up", "strong-down": "strong-up"}
        for t in np.linspace(times[2], times[-3], 7):
            c_fwd = ind.trend_class(fit_fwd, float(t), "W", "S", [sample(t, 1)])
            t_mirror = times[0] + times[-1] - float(t)
            c_rev = ind.trend_class(fit_rev, t_mirror, "W", "S", [sample(t_mirror, 1)])
            assert c_rev.klass == swap[c_fwd.klass]


class TestThresholdClass:
    def fit_at(self, level_log, se_scale=0.0):
        times = T0 + np.arange(0, 720, 60, dtype=float)
        rng = np.random.default_rng(1)
        logv = np.full(len(times), level_log) + rng.normal(0, se_scale, len(times))
        return make_fit(times, logv)

    def test_absolute_below(self):
        samples = [sample(T0 + 5, 4.0)]
        cell = ind.threshold_class(None, T0 + 5.0, "W", "S", samples, 5.0,
                                   ind.THRESHOLD_ABSOLUTE)
        assert cell.klass == "below"
        assert cell.value == 4.0

    def test_absolute_above_latest_sample_wins(self):
        samples = [sample(T0 + 5, 4.0), sample(T0 + 25, 7.5)]
        cell = ind.threshold_class(None, T0 + 30.0, "W", "S", samples, 5.0,
                                   ind.THRESHOLD_ABSOLUTE)
        assert cell.klass == "above"
        assert cell.value == 7.5

    def test_absolute_no_sample_insufficient(self):
        cell = ind.threshold_class(None, T0, "W", "S", [], 5.0,
                                   ind.THRESHOLD_ABSOLUTE)
        assert cell.klass == "insufficient"

    def test_statistical_band_straddles(self):
        fit = self.fit_at(math.log(4.0), se_scale=0.4)
        t = float(fit.eval_times[len(fit.eval_times) // 2])
        _, upper = fit.band(t)
        cell = ind.threshold_class(fit, t, "W", "S", [], upper * 0.99,
                                   ind.THRESHOLD_STATISTICAL)
        assert cell.klass == "above"
        cell = ind.threshold_class(fit, t, "W", "S", [], upper * 1.01,
                                   ind.THRESHOLD_STATISTICAL)
        assert cell.klass == "below"

    def test_statistical_green_implies_point_below(self):
        rng = np.random.default_rng(21)
        for _ in range(25):
            fit = self.fit_at(math.log(rng.uniform(1, 8)), se_scale=0.3)
            t = float(fit.eval_times[10])
            threshold = rng.uniform(1, 12)
            cell = ind.threshold_class(fit, t, "W", "S", [], threshold,
                                       ind.THRESHOLD_STATISTICAL)
            if cell.klass == "below":
                level, _, _ = fit.at(t)
                assert math.exp(level) < threshold

    def test_missing_threshold(self):
        cell = ind.threshold_class(None, T0, "W", "S", [sample(T0, 1.0)], None,
                                   ind.THRESHOLD_ABSOLUTE)
        assert cell.klass == "insufficient"

    def test_monotone_in_threshold(self):
        fit = self.fit_at(math.log(3.0), se_scale=0.2)
        t = float(fit.eval_times[12])
        samples = [sample(t, 3.4)]
        order = {"above": 0, "below": 1, "insufficient": 1}
        for mode in (ind.THRESHOLD_ABSOLUTE, ind.THRESHOLD_STATISTICAL):
            classes = [
                ind.threshold_class(fit, t, "W", "S", samples, thr, mode).klass
                for thr in (0.5, 1.0, 2.0, 4.0, 8.0, 16.0)
            ]
            ranks = [order[c] for c in classes]
            assert ranks == sorted(ranks)  # never green -> red as threshold rises


class TestIndicatorMatrix:
    def test_completeness(self, basic_analysis):
        ds = basic_analysis.dataset
        for mode in ind.MODES:
            matrix = ind.indicator_matrix(
                basic_analysis, 5, mode=mode,
                thresholds={s: 1.0 for s in ds.solutes},
            )
            assert len(matrix.cells) == len(ds.wells) * len(ds.solutes)
            assert matrix.wells == sorted(ds.well_ids)
            assert matrix.solutes == ds.solutes

    def test_matches_cellwise_recomputation(self, basic_analysis):
        ds = basic_analysis.dataset
        k = len(ds.intervals) - 1
        t = ds.intervals[k].midpoint_ordinal()
        matrix = ind.indicator_matrix(basic_analysis, k)
        for well_id in matrix.wells:
            for solute in matrix.solutes:
                fit = basic_analysis.trend_fit(well_id, solute)
                samples = ds.records_for(constituent=solute, well_id=well_id,
                                         interval=k)
                direct = ind.trend_class(fit, t, well_id, solute, samples,
                                         basic_analysis.options.trend_cutoffs)
                assert matrix.cell(well_id, solute).klass == direct.klass

    def test_all_nd_pair_shows_non_detect(self, basic_analysis):
        # MW-03 Toluene is censored in every interval of the basic fixture
        ds = basic_analysis.dataset
        recs = ds.records_for(constituent="Toluene", well_id="MW-03")
        assert recs and all(r.censored for r in recs)
        matrix = ind.indicator_matrix(basic_analysis, 5)
        assert matrix.cell("MW-03", "Toluene").klass == "non-detect"

    def test_bad_interval(self, basic_analysis):
        with pytest.raises(ValueError):
            ind.indicator_matrix(basic_analysis, 99)

    def test_bad_mode(self, basic_analysis):
        with pytest.raises(ValueError):
            ind.indicator_matrix(basic_analysis, 0, mode="nope")

    def test_serialization(self, basic_analysis):
        matrix = ind.indicator_matrix(basic_analysis, 3)
        d = matrix.to_dict()
        assert d["rows"] == matrix.wells
        assert len(d["cells"]) == len(matrix.cells)
        assert all("class" in c for c in d["cells"])
