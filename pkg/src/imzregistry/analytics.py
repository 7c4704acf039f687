"""Zone and national statistics: coverage, dropout, wastage, demand, municipal rolls.

All functions here are pure reads over registry state — the same state always
produces byte-identical reports. Demand arithmetic is done in exact rational
arithmetic so ceilings are never corrupted by binary floating point.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass
from datetime import date
from fractions import Fraction

from .errors import DomainError, ErrorCode
from .registry import Registry
from .schedule import ScheduleConfig, Vaccine, is_fully_immunized

ALL_ZONES = "ALL"


@dataclass(frozen=True)
class DateWindow:
    """Inclusive date range [start, end]."""

    start: date
    end: date

    def __post_init__(self):
        if self.end < self.start:
            raise DomainError(ErrorCode.MALFORMED_PAYLOAD, "window end precedes start")

    def contains(self, d: date) -> bool:
        return self.start <= d <= self.end

    def to_payload(self) -> dict:
        return {"start": self.start.isoformat(), "end": self.end.isoformat()}


@dataclass(frozen=True)
class CoverageReport:
    scope: str
    cohort: DateWindow
    n_children: int
    n_fully_immunized: int
    coverage_rate: float
    per_vaccine_rates: dict[str, float]

    def to_payload(self) -> dict:
        return {
            "scope": self.scope,
            "cohort": self.cohort.to_payload(),
            "n_children": self.n_children,
            "n_fully_immunized": self.n_fully_immunized,
            "coverage_rate": self.coverage_rate,
            "per_vaccine_rates": dict(sorted(self.per_vaccine_rates.items())),
        }

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["scope", "cohort_start", "cohort_end", "n_children", "n_fully_immunized", "coverage_rate"])
        writer.writerow(
            [self.scope, self.cohort.start.isoformat(), self.cohort.end.isoformat(), self.n_children, self.n_fully_immunized, f"{self.coverage_rate:.6f}"]
        )
        writer.writerow([])
        writer.writerow(["vaccine", "rate"])
        for vaccine, rate in sorted(self.per_vaccine_rates.items()):
            writer.writerow([vaccine, f"{rate:.6f}"])
        return buf.getvalue()


@dataclass(frozen=True)
class ZoneDemandForecast:
    zone: str
    horizon: DateWindow | None
    expected_cohort: int
    per_vaccine: dict[str, dict]

    def to_payload(self) -> dict:
        return {
            "zone": self.zone,
            "horizon": self.horizon.to_payload() if self.horizon else None,
            "expected_cohort": self.expected_cohort,
            "per_vaccine": {k: dict(v) for k, v in sorted(self.per_vaccine.items())},
        }

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["vaccine", "scheduled_doses", "wastage_rate", "wastage_factor", "doses_required"])
        for vaccine, row in sorted(self.per_vaccine.items()):
            writer.writerow(
                [vaccine, row["scheduled_doses"], f"{row['wastage_rate']:.6f}", f"{row['wastage_factor']:.6f}", row["doses_required"]]
            )
        return buf.getvalue()


@dataclass(frozen=True)
class MunicipalReport:
    zone: str
    period: DateWindow
    registrations: tuple[tuple[str, str, date, str, str], ...]  # (uid, name, dob, sex, guardian_name)
    counts_by_sex: dict[str, int]

    def to_payload(self) -> dict:
        return {
            "zone": self.zone,
            "period": self.period.to_payload(),
            "registrations": [
                {"uid": uid, "child_name": name, "date_of_birth": dob.isoformat(), "sex": sex, "guardian_name": guardian}
                for uid, name, dob, sex, guardian in self.registrations
            ],
            "counts_by_sex": dict(sorted(self.counts_by_sex.items())),
        }

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["uid", "child_name", "date_of_birth", "sex", "guardian_name"])
        for uid, name, dob, sex, guardian in self.registrations:
            writer.writerow([uid, name, dob.isoformat(), sex, guardian])
        return buf.getvalue()


def _cohort_children(registry: Registry, scope: str, cohort: DateWindow):
    for uid in sorted(registry.children):
        child = registry.children[uid]
        if scope != ALL_ZONES and child.zone_id != scope:
            continue
        if cohort.contains(child.date_of_birth):
            yield child


def coverage_report(registry: Registry, scope: str, cohort: DateWindow, cfg: ScheduleConfig) -> CoverageReport:
    """Fraction of the birth cohort fully immunized, with per-vaccine breakdowns."""
    rule_by_vaccine: dict[Vaccine, set[int]] = {}
    for vaccine, dose_number in cfg.fully_immunized_doses:
        rule_by_vaccine.setdefault(vaccine, set()).add(dose_number)

    n_children = 0
    n_full = 0
    per_vaccine_hits = {vaccine: 0 for vaccine in rule_by_vaccine}
    for child in _cohort_children(registry, scope, cohort):
        n_children += 1
        history = registry.history_triples(child.uid)
        if is_fully_immunized(child.date_of_birth, history, cfg):
            n_full += 1
        held = {
            (vaccine, dose)
            for vaccine, dose, administered in history
            if (administered - child.date_of_birth).days <= cfg.cutoff_days
        }
        for vaccine, doses in rule_by_vaccine.items():
            if all((vaccine, d) in held for d in doses):
                per_vaccine_hits[vaccine] += 1
    if n_children == 0:
        raise DomainError(ErrorCode.EMPTY_COHORT, f"no children in scope {scope!r} born {cohort.start}..{cohort.end}")
    return CoverageReport(
        scope=scope,
        cohort=cohort,
        n_children=n_children,
        n_fully_immunized=n_full,
        coverage_rate=n_full / n_children,
        per_vaccine_rates={v.value: per_vaccine_hits[v] / n_children for v in rule_by_vaccine},
    )


def dropout_rate(
    registry: Registry,
    scope: str,
    cohort: DateWindow,
    from_dose: tuple[Vaccine, int] = (Vaccine.BCG, 1),
    to_dose: tuple[Vaccine, int] = (Vaccine.MEASLES, 1),
) -> float:
    """Fraction of children holding `from_dose` who never received `to_dose`."""
    n_from = 0
    n_both = 0
    for child in _cohort_children(registry, scope, cohort):
        held = {(vaccine, dose) for vaccine, dose, _ in registry.history_triples(child.uid)}
        if from_dose in held:
            n_from += 1
            if to_dose in held:
                n_both += 1
    if n_from == 0:
        raise DomainError(ErrorCode.NO_STARTERS, f"no children hold {from_dose[0].value}-{from_dose[1]}")
    return (n_from - n_both) / n_from


def wastage_rate(doses_issued: int, doses_administered: int) -> float:
    """(issued − administered) / issued."""
    if doses_issued <= 0 or doses_administered < 0 or doses_administered > doses_issued:
        raise DomainError(
            ErrorCode.INVALID_COUNTS,
            f"need issued ≥ administered ≥ 0 and issued > 0, got issued={doses_issued} administered={doses_administered}",
        )
    return (doses_issued - doses_administered) / doses_issued


def demand_forecast(
    zone: str,
    expected_cohort: int,
    cfg: ScheduleConfig,
    wastage_rates: dict[Vaccine, float],
    horizon: DateWindow | None = None,
) -> ZoneDemandForecast:
    """Doses to procure per vaccine: ceil(cohort × scheduled_doses / (1 − wastage))."""
    if expected_cohort < 0:
        raise DomainError(ErrorCode.MALFORMED_PAYLOAD, "expected_cohort must be ≥ 0")
    doses_per_vaccine = cfg.doses_per_vaccine()
    per_vaccine: dict[str, dict] = {}
    for vaccine in sorted(doses_per_vaccine, key=lambda v: v.value):
        scheduled = doses_per_vaccine[vaccine]
        w = wastage_rates.get(vaccine, 0.0)
        if not (0.0 <= w < 1.0):
            raise DomainError(ErrorCode.INVALID_WASTAGE_RATE, f"wastage rate for {vaccine.value} must be in [0,1), got {w}")
        # Exact rational arithmetic: Fraction(str(w)) preserves the decimal the
        # caller wrote (0.61 stays 61/100), keeping the ceiling boundary exact.
        w_frac = Fraction(str(w))
        required = math.ceil(Fraction(expected_cohort * scheduled, 1) / (1 - w_frac))
        per_vaccine[vaccine.value] = {
            "scheduled_doses": scheduled,
            "wastage_rate": w,
            "wastage_factor": float(1 / (1 - w_frac)),
            "doses_required": int(required),
        }
    return ZoneDemandForecast(zone=zone, horizon=horizon, expected_cohort=expected_cohort, per_vaccine=per_vaccine)


def municipal_report(registry: Registry, zone: str, period: DateWindow) -> MunicipalReport:
    """Registrations recorded in the period for a zone, for the municipal roll."""
    rows = []
    for uid, child in registry.children.items():
        if zone != ALL_ZONES and child.zone_id != zone:
            continue
        if period.contains(child.registered_at.date()):
            rows.append((child.uid, child.child_name, child.date_of_birth, child.sex.value, child.guardian_name))
    rows.sort(key=lambda r: (r[2], r[0]))
    counts: dict[str, int] = {}
    for row in rows:
        counts[row[3]] = counts.get(row[3], 0) + 1
    return MunicipalReport(zone=zone, period=period, registrations=tuple(rows), counts_by_sex=counts)


def load_wastage_file(path: str) -> dict[Vaccine, float]:
    """Read `vaccine,rate` CSV (no header required; one is tolerated)."""
    rates: dict[Vaccine, float] = {}
    with open(path, newline="", encoding="utf-8") as fh:
        for lineno, row in enumerate(csv.reader(fh), start=1):
            if not row or (lineno == 1 and row[0].strip().lower() == "vaccine"):
                continue
            if len(row) != 2:
                raise DomainError(ErrorCode.PARSE_ERROR, f"wastage file line {lineno}: expected 2 fields, got {len(row)}")
            name, raw = row[0].strip(), row[1].strip()
            try:
                vaccine = Vaccine(name)
                rate = float(raw)
            except ValueError:
                raise DomainError(ErrorCode.PARSE_ERROR, f"wastage file line {lineno}: bad vaccine or rate") from None
            if not (0.0 <= rate < 1.0):
                raise DomainError(ErrorCode.INVALID_WASTAGE_RATE, f"wastage file line {lineno}: rate {rate} outside [0,1)")
            rates[vaccine] = rate
    return rates


def default_wastage_rates() -> dict[Vaccine, float]:
    """Packaged national-survey default rates (see data/wastage_rates.csv)."""
    from importlib.resources import as_file, files

    resource = files("imzregistry.data").joinpath("wastage_rates.csv")
    with as_file(resource) as path:
        return load_wastage_file(str(path))


def report_to_json(report) -> str:
    return json.dumps(report.to_payload(), sort_keys=True, indent=2) + "\n"
