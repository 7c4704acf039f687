"""Coverage, dropout, wastage, demand, and municipal reporting."""
from __future__ import annotations

import dataclasses
import math
from datetime import date, timedelta
from fractions import Fraction

import pytest

from imzregistry.analytics import (
    ALL_ZONES,
    DateWindow,
    coverage_report,
    default_wastage_rates,
    demand_forecast,
    dropout_rate,
    load_wastage_file,
    municipal_report,
    report_to_json,
    wastage_rate,
)
from imzregistry.errors import DomainError, ErrorCode
from imzregistry.schedule import Vaccine
from imzregistry.uids import Sex

from helpers import make_child, make_event, make_registry

DOB = date(2020, 3, 1)
WINDOW = DateWindow(date(2020, 1, 1), date(2020, 12, 31))

RULE_DOSES = [
    (Vaccine.BCG, 1), (Vaccine.OPV, 1), (Vaccine.OPV, 2), (Vaccine.OPV, 3),
    (Vaccine.DPT, 1), (Vaccine.DPT, 2), (Vaccine.DPT, 3), (Vaccine.MEASLES, 1),
]


def uid_for(i: int) -> str:
    from helpers import make_uid
    return make_uid(str(10_000_000_000 + i))


def build_population(cfg, n_total: int, n_full: int, *, zone: str = "Z1", start: int = 0):
    """n_total children; the first n_full get every rule dose inside year one."""
    children = [
        make_child(uid_for(start + i), DOB, zone=zone) for i in range(n_total)
    ]
    reg = make_registry(cfg, None, children)
    for i in range(n_full):
        uid = children[i].uid
        for j, (v, d) in enumerate(RULE_DOSES):
            reg.record_vaccination(
                make_event(f"f{start + i}-{j}", uid, v, d, DOB + timedelta(days=10 + j))
            )
    return reg


class TestDateWindow:
    def test_contains_is_inclusive(self):
        assert WINDOW.contains(date(2020, 1, 1))
        assert WINDOW.contains(date(2020, 12, 31))
        assert not WINDOW.contains(date(2021, 1, 1))

    def test_backwards_window_rejected(self):
        with pytest.raises(DomainError) as err:
            DateWindow(date(2020, 2, 1), date(2020, 1, 1))
        assert err.value.code == ErrorCode.MALFORMED_PAYLOAD


class TestCoverage:
    def test_exact_fixture_rate(self, cfg):
        # 87 fully immunized out of 200 -> 0.435 exactly
        reg = build_population(cfg, 200, 87)
        report = coverage_report(reg, ALL_ZONES, WINDOW, cfg)
        assert report.n_children == 200
        assert report.n_fully_immunized == 87
        assert report.coverage_rate == 0.435
        assert report.per_vaccine_rates == {
            "BCG": 0.435, "DPT": 0.435, "MEASLES": 0.435, "OPV": 0.435,
        }

    def test_partial_child_counts_per_vaccine_not_overall(self, cfg):
        reg = build_population(cfg, 2, 1)
        # second child gets BCG only
        reg.record_vaccination(make_event("p-0", uid_for(1), Vaccine.BCG, 1, DOB))
        report = coverage_report(reg, ALL_ZONES, WINDOW, cfg)
        assert report.n_fully_immunized == 1
        assert report.per_vaccine_rates["BCG"] == 1.0
        assert report.per_vaccine_rates["MEASLES"] == 0.5

    def test_dose_after_cutoff_does_not_count(self, cfg):
        reg = build_population(cfg, 1, 0)
        for j, (v, d) in enumerate(RULE_DOSES):
            day = DOB + timedelta(days=400 if v is Vaccine.MEASLES else 10 + j)
            reg.record_vaccination(make_event(f"l-{j}", uid_for(0), v, d, day))
        report = coverage_report(reg, ALL_ZONES, WINDOW, cfg)
        assert report.n_fully_immunized == 0
        assert report.per_vaccine_rates["MEASLES"] == 0.0
        assert report.per_vaccine_rates["BCG"] == 1.0

    def test_zone_scope_filters(self, cfg):
        reg = build_population(cfg, 4, 4, zone="Z1")
        # a second zone with no doses at all
        for i in range(4):
            reg.register_child(make_child(uid_for(100 + i), DOB, zone="Z2"))
        assert coverage_report(reg, "Z1", WINDOW, cfg).coverage_rate == 1.0
        assert coverage_report(reg, "Z2", WINDOW, cfg).coverage_rate == 0.0
        assert coverage_report(reg, ALL_ZONES, WINDOW, cfg).coverage_rate == 0.5

    def test_dob_window_filters(self, cfg):
        reg = build_population(cfg, 3, 3)
        late_window = DateWindow(date(2021, 1, 1), date(2021, 12, 31))
        with pytest.raises(DomainError) as err:
            coverage_report(reg, ALL_ZONES, late_window, cfg)
        assert err.value.code == ErrorCode.EMPTY_COHORT

    def test_empty_registry_is_empty_cohort(self, cfg):
        reg = make_registry(cfg, None)
        with pytest.raises(DomainError) as err:
            coverage_report(reg, ALL_ZONES, WINDOW, cfg)
        assert err.value.code == ErrorCode.EMPTY_COHORT

    def test_csv_round_trip_shape(self, cfg):
        report = coverage_report(build_population(cfg, 4, 2), ALL_ZONES, WINDOW, cfg)
        lines = report.to_csv().strip().split("\n")
        assert lines[0] == "scope,cohort_start,cohort_end,n_children,n_fully_immunized,coverage_rate"
        assert lines[1] == "ALL,2020-01-01,2020-12-31,4,2,0.500000"


class TestDropout:
    def test_exact_fixture(self, cfg):
        # 1000 children start (BCG-1); 673 finish (MEASLES-1): (1000-673)/1000
        reg = build_population(cfg, 1000, 673)
        for i in range(673, 1000):
            reg.record_vaccination(
                make_event(f"s-{i}", uid_for(i), Vaccine.BCG, 1, DOB + timedelta(days=3))
            )
        rate = dropout_rate(reg, ALL_ZONES, WINDOW)
        assert rate == 0.327

    def test_default_endpoints_are_bcg_to_measles(self, cfg):
        reg = build_population(cfg, 10, 4)
        for i in range(4, 10):
            reg.record_vaccination(
                make_event(f"s-{i}", uid_for(i), Vaccine.BCG, 1, DOB)
            )
        assert dropout_rate(reg, ALL_ZONES, WINDOW) == 0.6

    def test_custom_endpoints(self, cfg):
        reg = build_population(cfg, 4, 2)
        rate = dropout_rate(
            reg, ALL_ZONES, WINDOW,
            from_dose=(Vaccine.DPT, 1), to_dose=(Vaccine.DPT, 3),
        )
        assert rate == 0.0  # every DPT-1 child also finished DPT-3

    def test_no_starters(self, cfg):
        reg = build_population(cfg, 5, 0)
        with pytest.raises(DomainError) as err:
            dropout_rate(reg, ALL_ZONES, WINDOW)
        assert err.value.code == ErrorCode.NO_STARTERS


class TestWastage:
    def test_exact_fixture(self):
        assert wastage_rate(100, 39) == 0.61

    def test_zero_waste(self):
        assert wastage_rate(50, 50) == 0.0

    def test_invalid_counts(self):
        for issued, administered in ((0, 0), (-1, 0), (10, -1), (10, 11)):
            with pytest.raises(DomainError) as err:
                wastage_rate(issued, administered)
            assert err.value.code == ErrorCode.INVALID_COUNTS


class TestDemand:
    def test_bcg_fixture(self, cfg):
        forecast = demand_forecast("Z1", 1000, cfg, {Vaccine.BCG: 0.61})
        assert forecast.per_vaccine["BCG"]["doses_required"] == 2565

    def test_dpt_fixture(self, cfg):
        forecast = demand_forecast("Z1", 500, cfg, {Vaccine.DPT: 0.27})
        assert forecast.per_vaccine["DPT"]["doses_required"] == 2055

    def test_zero_wastage_is_exact_arithmetic(self, cfg):
        rates = {v: 0.0 for v in Vaccine}
        forecast = demand_forecast("Z1", 777, cfg, rates)
        scheduled = {"BCG": 1, "OPV": 4, "DPT": 3, "HEPB": 3, "MEASLES": 1, "TT": 1}
        for name, n in scheduled.items():
            assert forecast.per_vaccine[name]["doses_required"] == 777 * n

    def test_scheduled_dose_counts_come_from_schedule(self, cfg):
        forecast = demand_forecast("Z1", 1, cfg, default_wastage_rates())
        got = {name: row["scheduled_doses"] for name, row in forecast.per_vaccine.items()}
        assert got == {"BCG": 1, "OPV": 4, "DPT": 3, "HEPB": 3, "MEASLES": 1, "TT": 1}

    def test_requirement_never_below_cohort_times_doses(self, cfg):
        for w in (0.0, 0.1, 0.33, 0.61, 0.9):
            forecast = demand_forecast("Z1", 321, cfg, {Vaccine.OPV: w})
            required = forecast.per_vaccine["OPV"]["doses_required"]
            assert required >= 321 * 4
            # exact integer ceiling of cohort*doses/(1-w), no float drift
            assert required == math.ceil(Fraction(321 * 4) / (1 - Fraction(str(w))))

    def test_invalid_rates(self, cfg):
        for w in (-0.1, 1.0, 1.5):
            with pytest.raises(DomainError) as err:
                demand_forecast("Z1", 100, cfg, {Vaccine.BCG: w})
            assert err.value.code == ErrorCode.INVALID_WASTAGE_RATE

    def test_negative_cohort(self, cfg):
        with pytest.raises(DomainError):
            demand_forecast("Z1", -5, cfg, default_wastage_rates())


class TestMunicipalReport:
    def test_rows_sorted_by_dob_then_uid(self, cfg):
        c_late = make_child(uid_for(0), DOB + timedelta(days=30))
        c_early_b = make_child(uid_for(2), DOB)
        c_early_a = make_child(uid_for(1), DOB)
        reg = make_registry(cfg, None, [c_late, c_early_b, c_early_a])
        report = municipal_report(reg, ALL_ZONES, WINDOW)
        uids = [row[0] for row in report.registrations]
        assert uids == sorted([c_early_a.uid, c_early_b.uid]) + [c_late.uid]

    def test_counts_by_sex(self, cfg):
        girl = dataclasses.replace(make_child(uid_for(0), DOB), sex=Sex.F)
        boys = [make_child(uid_for(i), DOB) for i in (1, 2)]
        reg = make_registry(cfg, None, [girl, *boys])
        report = municipal_report(reg, ALL_ZONES, WINDOW)
        assert report.counts_by_sex == {"F": 1, "M": 2}

    def test_period_and_zone_filter(self, cfg):
        inside = make_child(uid_for(0), DOB, zone="Z1")
        outside_zone = make_child(uid_for(1), DOB, zone="Z2")
        outside_period = make_child(uid_for(2), date(2021, 5, 1), zone="Z1")
        reg = make_registry(cfg, None, [inside, outside_zone, outside_period])
        report = municipal_report(reg, "Z1", WINDOW)
        assert [row[0] for row in report.registrations] == [inside.uid]
        payload_rows = report.to_payload()["registrations"]
        assert payload_rows[0]["uid"] == inside.uid

    def test_csv_header(self, cfg):
        reg = make_registry(cfg, None, [make_child(uid_for(0), DOB)])
        lines = municipal_report(reg, ALL_ZONES, WINDOW).to_csv().strip().split("\n")
        assert lines[0] == "uid,child_name,date_of_birth,sex,guardian_name"
        assert len(lines) == 2


class TestWastageFile:
    def test_packaged_defaults(self):
        rates = default_wastage_rates()
        assert rates == {
            Vaccine.BCG: 0.61, Vaccine.OPV: 0.47, Vaccine.MEASLES: 0.35,
            Vaccine.TT: 0.34, Vaccine.HEPB: 0.33, Vaccine.DPT: 0.27,
        }

    def test_load_file_with_header(self, tmp_path):
        path = tmp_path / "wastage.csv"
        path.write_text("vaccine,rate\nBCG,0.5\nOPV,0.25\n")
        assert load_wastage_file(str(path)) == {Vaccine.BCG: 0.5, Vaccine.OPV: 0.25}

    def test_unknown_vaccine_rejected(self, tmp_path):
        path = tmp_path / "wastage.csv"
        path.write_text("SMALLPOX,0.5\n")
        with pytest.raises(DomainError) as err:
            load_wastage_file(str(path))
        assert err.value.code == ErrorCode.PARSE_ERROR

    def test_out_of_range_rate_rejected(self, tmp_path):
        path = tmp_path / "wastage.csv"
        path.write_text("BCG,1.0\n")
        with pytest.raises(DomainError) as err:
            load_wastage_file(str(path))
        assert err.value.code == ErrorCode.INVALID_WASTAGE_RATE


class TestJsonExport:
    def test_sorted_keys_and_trailing_newline(self, cfg):
        report = coverage_report(build_population(cfg, 2, 1), ALL_ZONES, WINDOW, cfg)
        text = report_to_json(report)
        assert text.endswith("\n")
        assert text.index('"cohort"') < text.index('"coverage_rate"') < text.index('"n_children"')
