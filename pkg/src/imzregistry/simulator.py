"""Deterministic synthetic-population simulator.

Generates a birth cohort with per-child latent compliance classes, drives
every life-history through the full pipeline — identity issuance, guardian
verification, registration, vaccination recording at (possibly relocated)
centers, store-and-forward sync into the central service, SMS spooling —
and then measures coverage and dropout over the resulting registry state.

Determinism: every child draws from its own generator keyed by (seed, child
index), so histories are independent of generation order; the pipeline is
then driven in one fixed order, making final state and report bytes a pure
function of the configuration.
"""

from __future__ import annotations

import dataclasses
import json
import random
from dataclasses import dataclass, field
from datetime import date, datetime, time, timedelta, timezone

import numpy as np

from .analytics import ALL_ZONES, DateWindow, coverage_report, dropout_rate
from .central import CentralService
from .errors import DomainError, ErrorCode
from .notification import FileSpoolGateway, MemoryGateway, NotificationQueue
from .registry import CenterKind, CenterRecord
from .schedule import ScheduleConfig, Vaccine, default_schedule
from .sync import CenterNode, DEFAULT_BATCH_SIZE, InProcessTransport, SyncKind, drain, push_batch
from .uids import (
    GuardianRecord,
    GuardianType,
    IdentityStore,
    InfantRegistrationRequest,
    Sex,
    compute_check_digit,
    issue_infant_uid,
)

EPOCH = date(2020, 1, 1)

# Per-visit quit probability for PARTIAL compliers. The default reproduces the
# population where partial compliers almost never finish (the coverage target
# counts only full compliers); the calibrated value reproduces the observed
# BCG→measles dropout and was fixed by bisection at N=20,000 (see
# calibrate_quit_hazard and the repository build notes).
DEFAULT_PARTIAL_QUIT_HAZARD = 0.8
CALIBRATED_PARTIAL_QUIT_HAZARD = 0.2734  # reproduces dropout ≈ 0.327 at N=20,000

_GIVEN_NAMES = (
    "Aarav", "Asha", "Diya", "Ishaan", "Kavya", "Meera", "Nikhil", "Priya",
    "Rahul", "Sanya", "Tara", "Vihaan", "Zara", "Arjun", "Lata", "Mohan",
)
_FAMILY_NAMES = (
    "Sharma", "Verma", "Patel", "Reddy", "Singh", "Gupta", "Khan", "Das",
    "Nair", "Joshi", "Rao", "Mehta",
)


@dataclass(frozen=True)
class SimConfig:
    seed: int
    zones: tuple[tuple[str, int], ...]  # (zone_id, births_per_year)
    years: int = 1
    p_full: float = 0.435
    p_partial: float = 0.515
    p_none: float = 0.05
    partial_quit_hazard: float = DEFAULT_PARTIAL_QUIT_HAZARD
    relocation_prob: float = 0.1
    centers_per_zone: int = 3
    missing_mobile_prob: float = 0.02

    def validate(self) -> None:
        probs = {
            "p_full": self.p_full,
            "p_partial": self.p_partial,
            "p_none": self.p_none,
            "partial_quit_hazard": self.partial_quit_hazard,
            "relocation_prob": self.relocation_prob,
            "missing_mobile_prob": self.missing_mobile_prob,
        }
        for name, p in probs.items():
            if not (0.0 <= p <= 1.0):
                raise DomainError(ErrorCode.INVALID_CONFIG, f"{name} must be in [0,1], got {p}")
        if abs(self.p_full + self.p_partial + self.p_none - 1.0) > 1e-9:
            raise DomainError(ErrorCode.INVALID_CONFIG, "compliance probabilities must sum to 1")
        if self.years <= 0:
            raise DomainError(ErrorCode.INVALID_CONFIG, "years must be positive")
        if self.centers_per_zone <= 0:
            raise DomainError(ErrorCode.INVALID_CONFIG, "centers_per_zone must be positive")
        if not self.zones:
            raise DomainError(ErrorCode.INVALID_CONFIG, "at least one zone is required")
        seen = set()
        for zone_id, births in self.zones:
            if zone_id in seen:
                raise DomainError(ErrorCode.INVALID_CONFIG, f"duplicate zone {zone_id!r}")
            seen.add(zone_id)
            if births < 0:
                raise DomainError(ErrorCode.INVALID_CONFIG, f"births_per_year for {zone_id!r} must be ≥ 0")

    def to_payload(self) -> dict:
        return {
            "seed": self.seed,
            "zones": [[z, n] for z, n in self.zones],
            "years": self.years,
            "p_full": self.p_full,
            "p_partial": self.p_partial,
            "p_none": self.p_none,
            "partial_quit_hazard": self.partial_quit_hazard,
            "relocation_prob": self.relocation_prob,
            "centers_per_zone": self.centers_per_zone,
            "missing_mobile_prob": self.missing_mobile_prob,
        }

    @classmethod
    def from_payload(cls, doc: dict) -> "SimConfig":
        try:
            cfg = cls(
                seed=int(doc["seed"]),
                zones=tuple((str(z), int(n)) for z, n in doc["zones"]),
                years=int(doc.get("years", 1)),
                p_full=float(doc.get("p_full", 0.435)),
                p_partial=float(doc.get("p_partial", 0.515)),
                p_none=float(doc.get("p_none", 0.05)),
                partial_quit_hazard=float(doc.get("partial_quit_hazard", DEFAULT_PARTIAL_QUIT_HAZARD)),
                relocation_prob=float(doc.get("relocation_prob", 0.1)),
                centers_per_zone=int(doc.get("centers_per_zone", 3)),
                missing_mobile_prob=float(doc.get("missing_mobile_prob", 0.02)),
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise DomainError(ErrorCode.INVALID_CONFIG, f"bad simulation config: {exc}") from None
        cfg.validate()
        return cfg


@dataclass(frozen=True)
class SimChild:
    index: int
    zone_id: str
    home_center: str
    child_name: str
    sex: Sex
    date_of_birth: date
    guardian: GuardianRecord
    compliance: str  # "full" | "partial" | "none"
    visits: tuple[tuple[date, str, tuple[tuple[Vaccine, int], ...]], ...]  # (date, center_id, doses)


@dataclass
class SimSummary:
    n_children: int = 0
    registrations_accepted: int = 0
    events_accepted: int = 0
    duplicates: int = 0
    conflicts: int = 0
    messages_spooled: int = 0
    messages_skipped_no_mobile: int = 0
    coverage: dict = field(default_factory=dict)
    dropout: float | None = None

    def to_payload(self) -> dict:
        return {
            "n_children": self.n_children,
            "registrations_accepted": self.registrations_accepted,
            "events_accepted": self.events_accepted,
            "duplicates": self.duplicates,
            "conflicts": self.conflicts,
            "messages_spooled": self.messages_spooled,
            "messages_skipped_no_mobile": self.messages_skipped_no_mobile,
            "coverage": self.coverage,
            "dropout": self.dropout,
        }


def sim_centers(cfg: SimConfig) -> dict[str, CenterRecord]:
    """One government PHC plus private centers per zone, deterministic ids."""
    centers: dict[str, CenterRecord] = {}
    for zone_id, _ in cfg.zones:
        for k in range(cfg.centers_per_zone):
            center_id = f"{zone_id}-C{k + 1}"
            kind = CenterKind.GOVERNMENT if k == 0 else CenterKind.PRIVATE
            centers[center_id] = CenterRecord(center_id=center_id, name=f"Center {k + 1} {zone_id}", zone_id=zone_id, kind=kind)
    return centers


def _visit_plan(schedule: ScheduleConfig) -> list[tuple[int, tuple[tuple[Vaccine, int], ...]]]:
    by_offset: dict[int, list[tuple[Vaccine, int]]] = {}
    for entry in schedule.entries:
        by_offset.setdefault(entry.due_offset_days, []).append((entry.vaccine, entry.dose_number))
    return [
        (offset, tuple(sorted(by_offset[offset], key=lambda d: (d[0].order_index, d[1]))))
        for offset in sorted(by_offset)
    ]


def _digits(rng: np.random.Generator, n: int, nonzero_lead: bool = True) -> str:
    first = str(rng.integers(1 if nonzero_lead else 0, 10))
    rest = "".join(str(d) for d in rng.integers(0, 10, size=n - 1))
    return first + rest


def generate_cohort(cfg: SimConfig, schedule: ScheduleConfig | None = None) -> list[SimChild]:
    """Build every child's full life-history; deterministic for a fixed seed."""
    cfg.validate()
    schedule = schedule or default_schedule()
    plan = _visit_plan(schedule)
    centers = sorted(sim_centers(cfg))
    children: list[SimChild] = []
    index = 0
    for zone_id, births_per_year in cfg.zones:
        zone_centers = [c for c in centers if c.startswith(f"{zone_id}-")]
        for _ in range(births_per_year * cfg.years):
            rng = np.random.default_rng([cfg.seed, index])
            birth_offset = int(rng.integers(0, 365 * cfg.years))
            dob = EPOCH + timedelta(days=birth_offset)
            sex = Sex(["F", "M", "X"][int(rng.choice(3, p=[0.48, 0.48, 0.04]))])
            child_name = f"{_GIVEN_NAMES[int(rng.integers(0, len(_GIVEN_NAMES)))]} {_FAMILY_NAMES[int(rng.integers(0, len(_FAMILY_NAMES)))]}"
            guardian_name = f"{_GIVEN_NAMES[int(rng.integers(0, len(_GIVEN_NAMES)))]} {_FAMILY_NAMES[int(rng.integers(0, len(_FAMILY_NAMES)))]}"
            guardian_payload = _digits(rng, 11)
            guardian_uid = guardian_payload + compute_check_digit(guardian_payload)
            mobile = "" if rng.random() < cfg.missing_mobile_prob else "+91" + _digits(rng, 10)
            home_center = zone_centers[int(rng.integers(0, len(zone_centers)))]

            u = rng.random()
            if u < cfg.p_full:
                compliance = "full"
            elif u < cfg.p_full + cfg.p_partial:
                compliance = "partial"
            else:
                compliance = "none"

            # Per-visit draws happen for every child in a fixed order so the
            # stream layout does not depend on the compliance class.
            quit_draws = rng.random(len(plan))
            reloc_draws = rng.random(len(plan))
            center_picks = rng.integers(0, max(len(centers) - 1, 1), size=len(plan))

            visits: list[tuple[date, str, tuple[tuple[Vaccine, int], ...]]] = []
            if compliance != "none":
                for i, (offset, doses) in enumerate(plan):
                    if compliance == "partial" and quit_draws[i] < cfg.partial_quit_hazard:
                        break
                    visit_center = home_center
                    if reloc_draws[i] < cfg.relocation_prob and len(centers) > 1:
                        others = [c for c in centers if c != home_center]
                        visit_center = others[int(center_picks[i]) % len(others)]
                    visits.append((dob + timedelta(days=offset), visit_center, doses))

            children.append(
                SimChild(
                    index=index,
                    zone_id=zone_id,
                    home_center=home_center,
                    child_name=child_name,
                    sex=sex,
                    date_of_birth=dob,
                    guardian=GuardianRecord(
                        uid=guardian_uid,
                        name=guardian_name,
                        mobile=mobile or "+910000000000",
                        guardian_type=GuardianType.PARENT,
                    ),
                    compliance=compliance,
                    visits=tuple(visits),
                )
            )
            index += 1
    return children


def _measure_dropout_from_histories(children: list[SimChild]) -> float:
    n_bcg = 0
    n_both = 0
    for child in children:
        held = {dose for _, _, doses in child.visits for dose in doses}
        if (Vaccine.BCG, 1) in held:
            n_bcg += 1
            if (Vaccine.MEASLES, 1) in held:
                n_both += 1
    if n_bcg == 0:
        raise DomainError(ErrorCode.NO_STARTERS, "no BCG recipients in generated cohort")
    return (n_bcg - n_both) / n_bcg


def calibrate_quit_hazard(
    target: float = 0.327,
    n: int = 20_000,
    seed: int = 7,
    tol: float = 1e-3,
    max_iter: int = 30,
) -> float:
    """Bisection on partial_quit_hazard so measured BCG→measles dropout hits target.

    Dropout is monotone increasing in the hazard, so plain bisection converges;
    the returned value is a build artifact to freeze, not re-derived at runtime.
    """
    # Dropout rises with the hazard on the lower branch and falls again as
    # very high hazards suppress BCG uptake itself; bracketing at 0.5 keeps
    # the search on the rising branch, where the target has a unique root.
    lo, hi = 0.0, 0.5
    base = SimConfig(seed=seed, zones=(("CAL", n),), years=1)
    for _ in range(max_iter):
        mid = (lo + hi) / 2
        cfg = dataclasses.replace(base, partial_quit_hazard=mid)
        measured = _measure_dropout_from_histories(generate_cohort(cfg))
        if abs(measured - target) <= tol:
            return round(mid, 4)
        if measured < target:
            lo = mid
        else:
            hi = mid
    return round((lo + hi) / 2, 4)


def run_simulation(
    cfg: SimConfig,
    out_dir: str | None = None,
    schedule: ScheduleConfig | None = None,
    log_path: str | None = None,
    gateway=None,
) -> tuple[SimSummary, CentralService]:
    """Drive the generated cohort through the full pipeline and measure results."""
    cfg.validate()
    schedule = schedule or default_schedule()
    children = generate_cohort(cfg, schedule)
    centers = sim_centers(cfg)

    if gateway is None:
        gateway = FileSpoolGateway(f"{out_dir}/sms_spool") if out_dir else MemoryGateway()
    queue = NotificationQueue(gateway)
    identity = IdentityStore(rng=random.Random(cfg.seed))
    central = CentralService(schedule, centers, identity, queue, log_path=log_path)
    transport = InProcessTransport(central.applier)
    nodes = {center_id: CenterNode(center_id) for center_id in centers}

    def pump() -> None:
        for center_id in sorted(nodes):
            node = nodes[center_id]
            while node.pending >= DEFAULT_BATCH_SIZE:
                push_batch(node, transport)

    for child in children:
        identity.seed_adult(child.guardian)
        request = InfantRegistrationRequest(
            request_id=f"sim-{cfg.seed}-{child.index}",
            child_name=child.child_name,
            date_of_birth=child.date_of_birth,
            sex=child.sex,
            place_of_birth=child.home_center,
            guardian=child.guardian,
            center_id=child.home_center,
        )
        registered_at = datetime.combine(child.date_of_birth, time(10, 0), tzinfo=timezone.utc)
        uid = issue_infant_uid(request, identity, received_at=registered_at)
        guardian_mobile = "" if child.guardian.mobile == "+910000000000" else child.guardian.mobile
        record = {
            "uid": uid,
            "child_name": child.child_name,
            "guardian_name": child.guardian.name,
            "guardian_mobile": guardian_mobile,
            "guardian_uid": child.guardian.uid,
            "date_of_birth": child.date_of_birth.isoformat(),
            "sex": child.sex.value,
            "place_of_birth": child.home_center,
            "zone_id": child.zone_id,
            "registered_center": child.home_center,
            "registered_at": registered_at.isoformat(),
        }
        nodes[child.home_center].append_local(SyncKind.REGISTER_CHILD, record, f"reg-{uid}", registered_at)
        for visit_date, visit_center, doses in child.visits:
            recorded_at = datetime.combine(visit_date, time(12, 0), tzinfo=timezone.utc)
            for vaccine, dose_number in doses:
                payload = {
                    "event_id": f"{uid}-{vaccine.value}{dose_number}",
                    "child_uid": uid,
                    "vaccine": vaccine.value,
                    "dose_number": dose_number,
                    "administered_date": visit_date.isoformat(),
                    "center_id": visit_center,
                    "batch_id": f"LOT-{vaccine.value}",
                    "recorded_at": recorded_at.isoformat(),
                }
                nodes[visit_center].append_local(
                    SyncKind.RECORD_VACCINATION, payload, payload["event_id"], recorded_at
                )
        pump()

    for center_id in sorted(nodes):
        drain(nodes[center_id], transport)
    queue.drain()

    if central.applier.parked:
        raise DomainError(ErrorCode.INVALID_ENVELOPE, "events left parked after full drain")

    window = DateWindow(EPOCH, EPOCH + timedelta(days=365 * cfg.years))
    summary = SimSummary(
        n_children=len(children),
        registrations_accepted=central.applier.counters["registrations"],
        events_accepted=central.applier.counters["vaccinations"],
        duplicates=central.applier.counters["duplicates"],
        conflicts=central.applier.counters["conflicts"],
        messages_spooled=queue.delivered,
        messages_skipped_no_mobile=central.skipped_no_mobile,
    )
    if children:
        report = coverage_report(central.registry, ALL_ZONES, window, schedule)
        summary.coverage = report.to_payload()
        try:
            summary.dropout = dropout_rate(central.registry, ALL_ZONES, window)
        except DomainError as exc:
            if exc.code is not ErrorCode.NO_STARTERS:
                raise
            summary.dropout = None
    if out_dir:
        _write_outputs(out_dir, cfg, summary, central, schedule, window)
    return summary, central


def _write_outputs(
    out_dir: str,
    cfg: SimConfig,
    summary: SimSummary,
    central: CentralService,
    schedule: ScheduleConfig,
    window: DateWindow,
) -> None:
    import os

    from .analytics import municipal_report, report_to_json

    reports_dir = os.path.join(out_dir, "reports")
    os.makedirs(reports_dir, exist_ok=True)
    with open(os.path.join(out_dir, "summary.json"), "w", encoding="utf-8") as fh:
        json.dump({"config": cfg.to_payload(), "summary": summary.to_payload()}, fh, sort_keys=True, indent=2)
        fh.write("\n")
    if summary.n_children:
        report = coverage_report(central.registry, ALL_ZONES, window, schedule)
        with open(os.path.join(reports_dir, "coverage.json"), "w", encoding="utf-8") as fh:
            fh.write(report_to_json(report))
        with open(os.path.join(reports_dir, "coverage.csv"), "w", encoding="utf-8") as fh:
            fh.write(report.to_csv())
        municipal = municipal_report(central.registry, ALL_ZONES, window)
        with open(os.path.join(reports_dir, "municipal.csv"), "w", encoding="utf-8") as fh:
            fh.write(municipal.to_csv())
