import re
from datetime import date

import pytest
from hypothesis import given
from hypothesis import strategies as st

from plumestat import (
    MonitoringRecord,
    ParseError,
    SubstitutionPolicy,
    ValidationFailed,
    apply_substitution,
    bin_intervals,
    load_dataset,
    parse_value,
    validate,
)
from plumestat.dataset import (
    WellLocation,
    load_dataset_dir,
    monitoring_to_csv,
    parse_monitoring_csv,
    parse_wells_csv,
    save_dataset_dir,
    wells_to_csv,
)

# independent oracle for the non-detect notation: regex applied directly
_ND_ORACLE = re.compile(r"^\s*[nN][dD]\s*<\s*(.+?)\s*$")


def rec(well="MW-1", day="2020-01-15", constituent="Benzene", value=1.0,
        censored=False, units="mg/l", **kw):
    return MonitoringRecord(
        well_id=well,
        sample_date=date.fromisoformat(day),
        constituent=constituent,
        value=value,
        censored=censored,
        units=units,
        **kw,
    )


class TestParseValue:
    def test_non_detect(self):
        assert parse_value("ND<10") == (10.0, True)

    def test_plain_numeric(self):
        assert parse_value("3.2") == (3.2, False)

    def test_case_and_whitespace(self):
        # oracle: hand-applied regex normalization
        for text in ["nd< 0.5", "Nd < 0.5", " ND  <0.5 "]:
            m = _ND_ORACLE.match(text)
            assert m and float(m.group(1)) == 0.5
            assert parse_value(text) == (0.5, True)

    @pytest.mark.parametrize("bad", ["", "abc", "ND<", "ND<abc", "1.2.3", "<5"])
    def test_malformed(self, bad):
        with pytest.raises(ParseError):
            parse_value(bad, row=7)

    def test_nonpositive_threshold(self):
        with pytest.raises(ParseError):
            parse_value("ND<0")
        with pytest.raises(ParseError):
            parse_value("ND<-3")

    def test_error_names_row(self):
        with pytest.raises(ParseError) as err:
            parse_value("oops", row=42)
        assert "42" in str(err.value)
        assert err.value.token == "oops"

    @given(st.floats(min_value=1e-6, max_value=1e6, allow_nan=False))
    def test_detect_roundtrip(self, v):
        parsed, censored = parse_value(repr(v))
        assert parsed == v and not censored

    @given(st.floats(min_value=1e-6, max_value=1e6, allow_nan=False))
    def test_nd_roundtrip(self, v):
        parsed, censored = parse_value(f"ND<{v!r}")
        assert parsed == v and censored


class TestSubstitution:
    def test_half_detection_limit(self):
        out, _ = apply_substitution([rec(value=10.0, censored=True)],
                                    SubstitutionPolicy(0.5))
        assert out[0].working == 5.0
        assert out[0].value == 10.0  # raw preserved

    def test_full_detection_limit(self):
        out, _ = apply_substitution([rec(value=10.0, censored=True)],
                                    SubstitutionPolicy(1.0))
        assert out[0].working == 10.0

    def test_detect_untouched(self):
        for policy in (SubstitutionPolicy(0.5), SubstitutionPolicy(1.0)):
            out, _ = apply_substitution([rec(value=3.2)], policy)
            assert out[0].working == 3.2

    def test_idempotent(self):
        records = [
            rec(value=10.0, censored=True),
            rec(day="2020-02-01", value=7.0),
            rec(day="2020-03-01", constituent="NAPL", value=0.2),
        ]
        policy = SubstitutionPolicy(0.5, napl_substitute=True)
        once, _ = apply_substitution(records, policy)
        twice, _ = apply_substitution(once, policy)
        assert [
            (r.well_id, r.sample_date, r.constituent, r.working, r.synthetic)
            for r in once
        ] == [
            (r.well_id, r.sample_date, r.constituent, r.working, r.synthetic)
            for r in twice
        ]

    def test_full_dominates_half(self):
        records = [
            rec(value=10.0, censored=True),
            rec(day="2020-02-01", value=3.0),
            rec(day="2020-03-01", value=0.4, censored=True),
        ]
        half, _ = apply_substitution(records, SubstitutionPolicy(0.5))
        full, _ = apply_substitution(records, SubstitutionPolicy(1.0))
        for h, f in zip(half, full):
            assert f.working >= h.working
            assert (f.working == h.working) == (not h.censored)

    def test_napl_backfills_site_max(self):
        records = [
            rec(well="MW-1", day="2020-01-01", value=8.0),
            rec(well="MW-2", day="2020-01-01", value=3.0),
            rec(well="MW-2", day="2020-04-01", constituent="NAPL", value=0.3, units="m"),
        ]
        out, diags = apply_substitution(records, SubstitutionPolicy(0.5, True))
        synth = [r for r in out if r.synthetic]
        assert len(synth) == 1
        assert synth[0].well_id == "MW-2"
        assert synth[0].constituent == "Benzene"
        assert synth[0].working == 8.0  # site max of detected values
        assert not diags

    def test_napl_present_solute_not_overwritten(self):
        # a measured value at the NAPL (well, date) stays as measured
        records = [
            rec(well="MW-1", day="2020-01-01", value=8.0),
            rec(well="MW-2", day="2020-04-01", value=2.0),
            rec(well="MW-2", day="2020-04-01", constituent="NAPL", value=0.3, units="m"),
        ]
        out, _ = apply_substitution(records, SubstitutionPolicy(0.5, True))
        assert not any(r.synthetic for r in out)
        kept = [r for r in out if r.well_id == "MW-2" and r.constituent == "Benzene"]
        assert kept[0].working == 2.0

    def test_napl_solute_without_detects_skipped(self):
        records = [
            rec(well="MW-1", day="2020-01-01", value=5.0, censored=True),
            rec(well="MW-2", day="2020-01-01", constituent="NAPL", value=0.3, units="m"),
        ]
        out, diags = apply_substitution(records, SubstitutionPolicy(0.5, True))
        assert not any(r.synthetic for r in out)
        assert any(d.code == "NAPL_NO_DETECTS" for d in diags)


class TestBinIntervals:
    def test_quarters_span(self):
        ivs = bin_intervals([date(2004, 3, 14), date(2004, 7, 2)], "quarter")
        assert [iv.label for iv in ivs] == ["2004Q1", "2004Q2", "2004Q3"]

    def test_single_date_month(self):
        ivs = bin_intervals([date(2004, 3, 14)], "month")
        assert len(ivs) == 1
        assert ivs[0].contains(date(2004, 3, 14))

    def test_year_boundary_straddle(self):
        ivs = bin_intervals([date(2003, 12, 31), date(2004, 1, 1)], "year")
        assert [iv.label for iv in ivs] == ["2003", "2004"]

    def test_empty_interior_bins_retained(self):
        ivs = bin_intervals([date(2020, 1, 10), date(2021, 1, 10)], "quarter")
        assert len(ivs) == 5  # 2020Q1..2021Q1 even with nothing in between

    def test_intervals_partition_records(self, basic_dataset):
        counts = [
            sum(1 for r in basic_dataset.records if iv.contains(r.sample_date))
            for iv in basic_dataset.intervals
        ]
        assert sum(counts) == len(basic_dataset.records)

    def test_intervals_disjoint_ordered(self, basic_dataset):
        ivs = basic_dataset.intervals
        for a, b in zip(ivs, ivs[1:]):
            assert a.end == b.start

    def test_bad_granularity(self):
        with pytest.raises(ValueError):
            bin_intervals([date(2020, 1, 1)], "decade")


class TestValidate:
    WELLS = [WellLocation("MW-1", 0.0, 0.0), WellLocation("MW-2", 10.0, 0.0)]

    def test_unknown_well_is_error(self):
        diags, _ = validate([rec(well="MW-99")], self.WELLS)
        assert any(d.code == "UNKNOWN_WELL" and d.severity == "error" for d in diags)

    def test_duplicate_last_wins(self):
        first = rec(value=1.0)
        second = rec(value=2.0)
        diags, clean = validate([first, second], self.WELLS)
        assert any(d.code == "DUPLICATE_ROW" and d.severity == "warning" for d in diags)
        assert len(clean) == 1 and clean[0].value == 2.0

    def test_mixed_units_error(self):
        diags, _ = validate(
            [rec(units="mg/l"), rec(day="2020-02-01", units="ug/l")], self.WELLS
        )
        assert any(d.code == "MIXED_UNITS" and d.severity == "error" for d in diags)

    def test_negative_value_error(self):
        diags, _ = validate([rec(value=-1.0)], self.WELLS)
        assert any(d.code == "NEGATIVE_VALUE" and d.severity == "error" for d in diags)

    def test_future_date_warning(self):
        diags, _ = validate(
            [rec(day="2020-06-01")], self.WELLS, today=date(2020, 1, 1)
        )
        assert any(d.code == "FUTURE_DATE" and d.severity == "warning" for d in diags)

    def test_orphan_well_warning(self):
        diags, _ = validate([rec(well="MW-1")], self.WELLS)
        assert any(d.code == "ORPHAN_WELL" and "MW-2" in d.message for d in diags)

    def test_errors_block_loading(self):
        monitoring = (
            "WellID,SampleDate,Constituent,Result,Units\n"
            "MW-99,2020-01-01,Benzene,1.0,mg/l\n"
        )
        wells = "WellID,X,Y\nMW-1,0,0\nMW-2,1,0\n"
        with pytest.raises(ValidationFailed):
            load_dataset(monitoring, wells)


class TestCsvRoundTrip:
    def test_dataset_roundtrip(self, basic_dataset, tmp_path):
        save_dataset_dir(basic_dataset, tmp_path)
        again = load_dataset_dir(
            tmp_path,
            policy=basic_dataset.policy,
            granularity=basic_dataset.granularity,
        )

        def key(r):
            return (r.well_id, r.sample_date, r.constituent, r.value,
                    r.censored, r.units, r.working, r.synthetic)

        assert [key(r) for r in basic_dataset.records] == [key(r) for r in again.records]
        assert basic_dataset.intervals == again.intervals
        assert [(w.well_id, w.x, w.y) for w in basic_dataset.wells] == [
            (w.well_id, w.x, w.y) for w in again.wells
        ]
        assert basic_dataset.overlays == again.overlays

    def test_censored_rows_roundtrip_nd_notation(self):
        records = [rec(value=0.125, censored=True)]
        text = monitoring_to_csv(records)
        assert "ND<0.125" in text
        again = parse_monitoring_csv(text)
        assert again[0].value == 0.125 and again[0].censored

    def test_wells_roundtrip(self):
        wells = [WellLocation("MW-1", 1.25, -3.5), WellLocation("MW-2", 0.1, 2.0)]
        again = parse_wells_csv(wells_to_csv(wells))
        assert [(w.well_id, w.x, w.y) for w in again] == [
            (w.well_id, w.x, w.y) for w in wells
        ]


class TestAquiferFilter:
    MONITORING = (
        "WellID,SampleDate,Constituent,Result,Units\n"
        "MW-1,2020-01-01,Benzene,1.0,mg/l\n"
        "MW-2,2020-01-01,Benzene,2.0,mg/l\n"
    )
    WELLS = "WellID,X,Y,Aquifer\nMW-1,0,0,shallow\nMW-2,1,0,deep\n"

    def test_filter_keeps_zone(self):
        ds = load_dataset(self.MONITORING, self.WELLS, aquifer="shallow", strict=False)
        assert ds.well_ids == ["MW-1"]
        assert all(r.well_id == "MW-1" for r in ds.records)

    def test_unknown_zone(self):
        with pytest.raises(ParseError):
            load_dataset(self.MONITORING, self.WELLS, aquifer="bedrock")


class TestReservedNames:
    def test_gw_cannot_be_censored(self):
        text = (
            "WellID,SampleDate,Constituent,Result,Units\n"
            "MW-1,2020-01-01,GW,ND<1,m\n"
        )
        with pytest.raises(ParseError):
            parse_monitoring_csv(text)

    def test_reserved_names_case_sensitive(self):
        r = rec(constituent="gw", value=1.0)
        assert r.is_solute  # only exact "GW" is reserved
