"""Dose sequencing: schedule loading, per-dose status, and next-due computation.

All operations are pure functions of their inputs. A schedule is a list of
(vaccine, dose, offset-from-birth, grace) entries plus the set of doses a
child must hold by a cutoff age to count as fully immunized. The packaged
default covers the six programme antigens; deployments may ship their own.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from datetime import date, timedelta
from enum import Enum
from importlib import resources

from .errors import DomainError, ErrorCode

MAX_SCHEDULE_DAYS = 18 * 365  # offsets plus grace must fit in childhood


class Vaccine(str, Enum):
    BCG = "BCG"
    OPV = "OPV"
    DPT = "DPT"
    HEPB = "HEPB"
    MEASLES = "MEASLES"
    TT = "TT"

    @property
    def order_index(self) -> int:
        """Programme listing position; ties in due-date sorts break on this."""
        return _VACCINE_ORDER[self]


_VACCINE_ORDER = {v: i for i, v in enumerate(Vaccine)}


class DoseStatus(str, Enum):
    GIVEN = "GIVEN"
    DUE = "DUE"
    OVERDUE = "OVERDUE"
    FUTURE = "FUTURE"


DoseKey = tuple[Vaccine, int]
HistoryItem = tuple[Vaccine, int, date]


@dataclass(frozen=True)
class ScheduleEntry:
    vaccine: Vaccine
    dose_number: int
    due_offset_days: int
    grace_days: int

    @property
    def key(self) -> DoseKey:
        return (self.vaccine, self.dose_number)


@dataclass(frozen=True)
class DueDose:
    """A pending dose with its computed calendar due date.

    next_due only ever emits DUE or OVERDUE; outstanding_doses also reports
    FUTURE entries so callers can name the next visit date for a child who is
    currently up to date.
    """

    vaccine: Vaccine
    dose_number: int
    due_date: date
    status: DoseStatus


@dataclass(frozen=True)
class ScheduleConfig:
    entries: tuple[ScheduleEntry, ...]
    fully_immunized_doses: frozenset[DoseKey]
    cutoff_days: int

    def entry_map(self) -> dict[DoseKey, ScheduleEntry]:
        return {e.key: e for e in self.entries}

    def doses_per_vaccine(self) -> dict[Vaccine, int]:
        counts: dict[Vaccine, int] = {}
        for e in self.entries:
            counts[e.vaccine] = counts.get(e.vaccine, 0) + 1
        return counts


def load_schedule(document: str) -> ScheduleConfig:
    """Parse and validate a schedule document (see the packaged default for the shape)."""
    if not document.strip():
        raise DomainError(ErrorCode.INVALID_SCHEDULE, "schedule document is empty")
    try:
        doc = json.loads(document)
    except json.JSONDecodeError as exc:
        raise DomainError(ErrorCode.PARSE_ERROR, f"schedule is not valid JSON: {exc}") from None

    try:
        raw_entries = doc["entries"]
        raw_rule = doc["fully_immunized"]
        cutoff_days = int(raw_rule["cutoff_days"])
        raw_rule_doses = raw_rule["doses"]
        entries = []
        for item in raw_entries:
            entries.append(
                ScheduleEntry(
                    vaccine=_parse_vaccine(item["vaccine"]),
                    dose_number=int(item["dose"]),
                    due_offset_days=int(item["offset_days"]),
                    grace_days=int(item["grace_days"]),
                )
            )
        rule_doses = frozenset((_parse_vaccine(v), int(d)) for v, d in raw_rule_doses)
    except DomainError:
        raise
    except (KeyError, TypeError, ValueError) as exc:
        raise DomainError(ErrorCode.PARSE_ERROR, f"schedule document has the wrong shape: {exc}") from None

    cfg = ScheduleConfig(entries=tuple(entries), fully_immunized_doses=rule_doses, cutoff_days=cutoff_days)
    _check_invariants(cfg)
    return cfg


def _parse_vaccine(name: object) -> Vaccine:
    try:
        return Vaccine(name)
    except ValueError:
        raise DomainError(ErrorCode.INVALID_SCHEDULE, f"unknown vaccine {name!r}") from None


def _check_invariants(cfg: ScheduleConfig) -> None:
    if not cfg.entries:
        raise DomainError(ErrorCode.INVALID_SCHEDULE, "schedule has no entries")
    if cfg.cutoff_days <= 0:
        raise DomainError(ErrorCode.INVALID_SCHEDULE, "fully_immunized cutoff_days must be positive")
    seen: set[DoseKey] = set()
    per_vaccine: dict[Vaccine, list[ScheduleEntry]] = {}
    for e in cfg.entries:
        if e.dose_number < 0 or e.due_offset_days < 0 or e.grace_days < 0:
            raise DomainError(ErrorCode.INVALID_SCHEDULE, f"negative field in entry {e.vaccine.value}-{e.dose_number}")
        if e.due_offset_days + e.grace_days > MAX_SCHEDULE_DAYS:
            raise DomainError(
                ErrorCode.INVALID_SCHEDULE,
                f"{e.vaccine.value}-{e.dose_number} falls outside the first 18 years",
            )
        if e.key in seen:
            raise DomainError(ErrorCode.INVALID_SCHEDULE, f"duplicate entry {e.vaccine.value}-{e.dose_number}")
        seen.add(e.key)
        per_vaccine.setdefault(e.vaccine, []).append(e)
    for vaccine, group in per_vaccine.items():
        group.sort(key=lambda e: e.dose_number)
        for earlier, later in zip(group, group[1:]):
            if later.due_offset_days <= earlier.due_offset_days:
                raise DomainError(
                    ErrorCode.INVALID_SCHEDULE,
                    f"{vaccine.value} dose {later.dose_number} is not due after dose {earlier.dose_number}",
                )
    missing = cfg.fully_immunized_doses - seen
    if missing:
        raise DomainError(ErrorCode.INVALID_SCHEDULE, f"fully_immunized references unknown doses: {sorted(missing)}")


def load_schedule_file(path: str) -> ScheduleConfig:
    with open(path, "r", encoding="utf-8") as fh:
        return load_schedule(fh.read())


def default_schedule() -> ScheduleConfig:
    text = resources.files("imzregistry.data").joinpath("default_schedule.json").read_text("utf-8")
    return load_schedule(text)


def _given_keys(history: "list[HistoryItem] | set[HistoryItem]", cfg: ScheduleConfig) -> set[DoseKey]:
    known = {e.key for e in cfg.entries}
    given: set[DoseKey] = set()
    for vaccine, dose_number, _administered in history:
        key = (vaccine, dose_number)
        if key not in known:
            raise DomainError(ErrorCode.UNKNOWN_VACCINE, f"history references {vaccine.value}-{dose_number}, not in schedule")
        given.add(key)
    return given


def dose_status(
    dob: date,
    history: "list[HistoryItem] | set[HistoryItem]",
    as_of: date,
    cfg: ScheduleConfig,
) -> dict[DoseKey, DoseStatus]:
    """Classify every schedule entry as GIVEN, DUE, OVERDUE, or FUTURE."""
    if as_of < dob:
        raise DomainError(ErrorCode.MALFORMED_PAYLOAD, "as_of precedes date of birth")
    given = _given_keys(history, cfg)
    statuses: dict[DoseKey, DoseStatus] = {}
    for e in cfg.entries:
        if e.key in given:
            statuses[e.key] = DoseStatus.GIVEN
            continue
        due = dob + timedelta(days=e.due_offset_days)
        if as_of < due:
            statuses[e.key] = DoseStatus.FUTURE
        elif as_of <= due + timedelta(days=e.grace_days):
            statuses[e.key] = DoseStatus.DUE
        else:
            statuses[e.key] = DoseStatus.OVERDUE
    return statuses


def next_due(
    dob: date,
    history: "list[HistoryItem] | set[HistoryItem]",
    as_of: date,
    cfg: ScheduleConfig,
) -> list[DueDose]:
    """Exactly the DUE and OVERDUE entries, sorted by (due_date, vaccine, dose)."""
    statuses = dose_status(dob, history, as_of, cfg)
    out = []
    for e in cfg.entries:
        status = statuses[e.key]
        if status in (DoseStatus.DUE, DoseStatus.OVERDUE):
            out.append(
                DueDose(
                    vaccine=e.vaccine,
                    dose_number=e.dose_number,
                    due_date=dob + timedelta(days=e.due_offset_days),
                    status=status,
                )
            )
    out.sort(key=lambda d: (d.due_date, d.vaccine.order_index, d.dose_number))
    return out


def outstanding_doses(
    dob: date,
    history: "list[HistoryItem] | set[HistoryItem]",
    as_of: date,
    cfg: ScheduleConfig,
) -> list[DueDose]:
    """Every not-yet-given entry (FUTURE included), sorted by (due_date, vaccine, dose).

    The earliest element is the child's next vaccination date even right after
    a visit, when nothing is DUE yet.
    """
    statuses = dose_status(dob, history, as_of, cfg)
    out = [
        DueDose(
            vaccine=e.vaccine,
            dose_number=e.dose_number,
            due_date=dob + timedelta(days=e.due_offset_days),
            status=statuses[e.key],
        )
        for e in cfg.entries
        if statuses[e.key] is not DoseStatus.GIVEN
    ]
    out.sort(key=lambda d: (d.due_date, d.vaccine.order_index, d.dose_number))
    return out


def next_outstanding_date(
    dob: date,
    history: "list[HistoryItem] | set[HistoryItem]",
    cfg: ScheduleConfig,
) -> date | None:
    """Earliest due date over not-yet-given entries; None when all are given.

    Equals outstanding_doses(...)[0].due_date without building the full list —
    the hot path for per-event reminder composition.
    """
    given = {(v, n) for v, n, _ in history}
    best: int | None = None
    for e in cfg.entries:
        if (e.vaccine, e.dose_number) not in given and (best is None or e.due_offset_days < best):
            best = e.due_offset_days
    return None if best is None else dob + timedelta(days=best)


def is_fully_immunized(dob: date, history: "list[HistoryItem] | set[HistoryItem]", cfg: ScheduleConfig) -> bool:
    """True iff every rule dose was administered within cutoff_days of birth."""
    cutoff = dob + timedelta(days=cfg.cutoff_days)
    held: set[DoseKey] = set()
    for vaccine, dose_number, administered in history:
        if administered <= cutoff:
            held.add((vaccine, dose_number))
    return cfg.fully_immunized_doses <= held
