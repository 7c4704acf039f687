"""Central immunization registry: child records and vaccination events.

State is an append-only event log plus in-memory indexes rebuilt by replay.
Writes serialize under one lock, so operations on the same child are
linearizable; duplicate doses resolve by keeping the earliest administered
date (ties to the smaller event_id), which makes the merge order-insensitive.
"""

from __future__ import annotations

import csv
import hashlib
import threading
from dataclasses import dataclass, replace
from datetime import date, datetime
from enum import Enum

from .errors import DomainError, ErrorCode
from .eventlog import EventLog
from .schedule import DueDose, ScheduleConfig, Vaccine, next_due
from .uids import Sex, validate_uid


def parse_timestamp(value: str) -> datetime:
    """Parse an RFC 3339 timestamp, accepting the ``Z`` UTC suffix."""
    if value.endswith(("Z", "z")):
        value = value[:-1] + "+00:00"
    return datetime.fromisoformat(value)


class CenterKind(str, Enum):
    GOVERNMENT = "GOVERNMENT"
    PRIVATE = "PRIVATE"


class RecordOutcome(str, Enum):
    ACCEPTED = "ACCEPTED"
    DUPLICATE_IGNORED = "DUPLICATE_IGNORED"
    CONFLICT_RESOLVED = "CONFLICT_RESOLVED"


@dataclass(frozen=True)
class ChildRecord:
    uid: str
    child_name: str
    guardian_name: str
    guardian_mobile: str
    guardian_uid: str
    date_of_birth: date
    sex: Sex
    place_of_birth: str
    zone_id: str
    registered_center: str
    registered_at: datetime

    def to_payload(self) -> dict:
        return {
            "uid": self.uid,
            "child_name": self.child_name,
            "guardian_name": self.guardian_name,
            "guardian_mobile": self.guardian_mobile,
            "guardian_uid": self.guardian_uid,
            "date_of_birth": self.date_of_birth.isoformat(),
            "sex": self.sex.value,
            "place_of_birth": self.place_of_birth,
            "zone_id": self.zone_id,
            "registered_center": self.registered_center,
            "registered_at": self.registered_at.isoformat(),
        }

    @classmethod
    def from_payload(cls, doc: dict) -> "ChildRecord":
        return cls(
            uid=doc["uid"],
            child_name=doc["child_name"],
            guardian_name=doc["guardian_name"],
            guardian_mobile=doc["guardian_mobile"],
            guardian_uid=doc["guardian_uid"],
            date_of_birth=date.fromisoformat(doc["date_of_birth"]),
            sex=Sex(doc["sex"]),
            place_of_birth=doc["place_of_birth"],
            zone_id=doc["zone_id"],
            registered_center=doc["registered_center"],
            registered_at=parse_timestamp(doc["registered_at"]),
        )


@dataclass(frozen=True)
class VaccinationEvent:
    event_id: str
    child_uid: str
    vaccine: Vaccine
    dose_number: int
    administered_date: date
    center_id: str
    batch_id: str
    recorded_at: datetime

    def to_payload(self) -> dict:
        return {
            "event_id": self.event_id,
            "child_uid": self.child_uid,
            "vaccine": self.vaccine.value,
            "dose_number": self.dose_number,
            "administered_date": self.administered_date.isoformat(),
            "center_id": self.center_id,
            "batch_id": self.batch_id,
            "recorded_at": self.recorded_at.isoformat(),
        }

    @classmethod
    def from_payload(cls, doc: dict) -> "VaccinationEvent":
        return cls(
            event_id=doc["event_id"],
            child_uid=doc["child_uid"],
            vaccine=Vaccine(doc["vaccine"]),
            dose_number=int(doc["dose_number"]),
            administered_date=date.fromisoformat(doc["administered_date"]),
            center_id=doc["center_id"],
            batch_id=doc["batch_id"],
            recorded_at=parse_timestamp(doc["recorded_at"]),
        )


@dataclass(frozen=True)
class CenterRecord:
    center_id: str
    name: str
    zone_id: str
    kind: CenterKind
    api_key_hash: str = ""
    active: bool = True


def hash_api_key(api_key: str) -> str:
    return hashlib.sha256(api_key.encode("utf-8")).hexdigest()


def load_centers_file(path: str, api_keys_path: str | None = None) -> dict[str, CenterRecord]:
    """Load `center_id,name,zone_id,kind` records; keys come from a separate
    `center_id,api_key` file and are stored only as SHA-256 digests."""
    key_hashes: dict[str, str] = {}
    if api_keys_path:
        with open(api_keys_path, "r", encoding="utf-8", newline="") as fh:
            for lineno, row in enumerate(csv.reader(fh), start=1):
                if lineno == 1 and [f.strip().lower() for f in row] == ["center_id", "api_key"]:
                    continue
                if len(row) >= 2 and row[0].strip():
                    key_hashes[row[0].strip()] = hash_api_key(row[1].strip())
    centers: dict[str, CenterRecord] = {}
    with open(path, "r", encoding="utf-8", newline="") as fh:
        for lineno, row in enumerate(csv.reader(fh), start=1):
            if not row or (len(row) == 1 and not row[0].strip()):
                continue
            if lineno == 1 and [f.strip().lower() for f in row] == ["center_id", "name", "zone_id", "kind"]:
                continue
            if len(row) != 4:
                raise DomainError(
                    ErrorCode.MALFORMED_PAYLOAD, f"center registry line {lineno}: expected 4 fields"
                )
            center_id, name, zone_id, kind = (f.strip() for f in row)
            if center_id in centers:
                raise DomainError(ErrorCode.MALFORMED_PAYLOAD, f"duplicate center_id {center_id!r}")
            try:
                center_kind = CenterKind(kind)
            except ValueError:
                raise DomainError(
                    ErrorCode.MALFORMED_PAYLOAD, f"center registry line {lineno}: unknown kind {kind!r}"
                ) from None
            centers[center_id] = CenterRecord(
                center_id=center_id,
                name=name,
                zone_id=zone_id,
                kind=center_kind,
                api_key_hash=key_hashes.get(center_id, ""),
            )
    return centers


class Registry:
    """In-memory registry state over an optional append-only log."""

    def __init__(
        self,
        cfg: ScheduleConfig,
        centers: dict[str, CenterRecord] | None = None,
        log: EventLog | None = None,
    ):
        self.cfg = cfg
        self.centers = centers if centers is not None else {}
        self.log = log
        self.children: dict[str, ChildRecord] = {}
        self.events: dict[str, VaccinationEvent] = {}
        self.active: dict[tuple[str, Vaccine, int], str] = {}
        self.superseded: set[str] = set()
        self._events_by_child: dict[str, list[str]] = {}
        self._by_guardian_uid: dict[str, list[str]] = {}
        self._by_guardian_mobile: dict[str, list[str]] = {}
        self._lock = threading.RLock()
        self._schedule_keys = {e.key for e in cfg.entries}

    # -- writes ---------------------------------------------------------

    def register_child(self, child: ChildRecord) -> ChildRecord:
        """Persist a child record; a byte-identical re-send is a no-op."""
        if not validate_uid(child.uid):
            raise DomainError(ErrorCode.INVALID_UID, f"child uid {child.uid!r} fails validation")
        if child.uid == child.guardian_uid:
            raise DomainError(ErrorCode.INVALID_UID, "child uid equals guardian uid")
        if child.date_of_birth > child.registered_at.date():
            raise DomainError(ErrorCode.MALFORMED_PAYLOAD, "date_of_birth is after registration time")
        with self._lock:
            existing = self.children.get(child.uid)
            if existing is not None:
                if existing == child:
                    return existing
                raise DomainError(ErrorCode.UID_CONFLICT, f"uid {child.uid} already registered with different data")
            self.children[child.uid] = child
            self._by_guardian_uid.setdefault(child.guardian_uid, []).append(child.uid)
            if child.guardian_mobile:
                self._by_guardian_mobile.setdefault(child.guardian_mobile, []).append(child.uid)
            if self.log is not None:
                self.log.append(
                    {
                        "type": "register_child",
                        "payload": child.to_payload(),
                        "recorded_at": child.registered_at.isoformat(),
                    }
                )
            return child

    def record_vaccination(self, event: VaccinationEvent) -> RecordOutcome:
        """Record one administered dose.

        Replaying an event_id changes nothing. A second event for an already
        recorded (child, vaccine, dose) is kept but the later administered
        date (ties: larger event_id) is marked superseded.
        """
        with self._lock:
            child = self.children.get(event.child_uid)
            if child is None:
                raise DomainError(ErrorCode.UNKNOWN_CHILD, f"uid {event.child_uid} is not registered")
            if (event.vaccine, event.dose_number) not in self._schedule_keys:
                raise DomainError(
                    ErrorCode.UNKNOWN_DOSE,
                    f"{event.vaccine.value}-{event.dose_number} is not in the active schedule",
                )
            if event.administered_date < child.date_of_birth:
                raise DomainError(ErrorCode.DATE_BEFORE_BIRTH, "administered_date precedes date of birth")
            if event.administered_date > event.recorded_at.date():
                raise DomainError(ErrorCode.MALFORMED_PAYLOAD, "administered_date is after recording time")
            if event.event_id in self.events:
                return RecordOutcome.DUPLICATE_IGNORED

            self.events[event.event_id] = event
            self._events_by_child.setdefault(event.child_uid, []).append(event.event_id)
            if self.log is not None:
                self.log.append(
                    {
                        "type": "record_vaccination",
                        "payload": event.to_payload(),
                        "recorded_at": event.recorded_at.isoformat(),
                    }
                )
            key = (event.child_uid, event.vaccine, event.dose_number)
            incumbent_id = self.active.get(key)
            if incumbent_id is None:
                self.active[key] = event.event_id
                return RecordOutcome.ACCEPTED
            incumbent = self.events[incumbent_id]
            if (event.administered_date, event.event_id) < (incumbent.administered_date, incumbent_id):
                self.active[key] = event.event_id
                self.superseded.add(incumbent_id)
            else:
                self.superseded.add(event.event_id)
            return RecordOutcome.CONFLICT_RESOLVED

    # -- reads ----------------------------------------------------------

    def get_child(self, uid: str) -> ChildRecord:
        child = self.children.get(uid)
        if child is None:
            raise DomainError(ErrorCode.UNKNOWN_CHILD, f"uid {uid} is not registered")
        return child

    def is_superseded(self, event_id: str) -> bool:
        return event_id in self.superseded

    def vaccination_history(
        self, uid: str, include_superseded: bool = False
    ) -> tuple[ChildRecord, list[VaccinationEvent]]:
        """The child plus their events in clinical order.

        Sorted by administered date, then vaccine declaration order and dose
        number so same-day doses list deterministically, then event_id.
        """
        child = self.get_child(uid)
        events = [
            self.events[eid]
            for eid in self._events_by_child.get(uid, [])
            if include_superseded or eid not in self.superseded
        ]
        events.sort(
            key=lambda e: (e.administered_date, e.vaccine.order_index, e.dose_number, e.event_id)
        )
        return child, events

    def history_triples(self, uid: str) -> list[tuple[Vaccine, int, date]]:
        """Active doses as (vaccine, dose, date) triples for the schedule engine."""
        _child, events = self.vaccination_history(uid)
        return [(e.vaccine, e.dose_number, e.administered_date) for e in events]

    def due_list(
        self, center_id: str, on_date: date, cfg: ScheduleConfig | None = None
    ) -> list[tuple[ChildRecord, list[DueDose]]]:
        """Children registered at the center with at least one DUE or OVERDUE dose."""
        if center_id not in self.centers:
            raise DomainError(ErrorCode.UNKNOWN_CENTER, f"center {center_id!r} is not registered")
        cfg = cfg or self.cfg
        out = []
        for uid in sorted(self.children):
            child = self.children[uid]
            if child.registered_center != center_id or on_date < child.date_of_birth:
                continue
            due = next_due(child.date_of_birth, self.history_triples(uid), on_date, cfg)
            if due:
                out.append((child, due))
        return out

    def child_lookup(
        self, guardian_uid: str | None = None, guardian_mobile: str | None = None
    ) -> list[ChildRecord]:
        """All children linked to a guardian key, for desk flows without the UID slip."""
        uids: list[str] = []
        if guardian_uid is not None:
            uids.extend(self._by_guardian_uid.get(guardian_uid, []))
        if guardian_mobile is not None:
            for uid in self._by_guardian_mobile.get(guardian_mobile, []):
                if uid not in uids:
                    uids.append(uid)
        return [self.children[uid] for uid in sorted(uids)]

    def state_dict(self) -> dict:
        """Canonical structure for snapshots and deep-equality comparison."""
        return {
            "children": [self.children[uid].to_payload() for uid in sorted(self.children)],
            "events": [
                dict(self.events[eid].to_payload(), superseded=eid in self.superseded)
                for eid in sorted(self.events)
            ],
        }
