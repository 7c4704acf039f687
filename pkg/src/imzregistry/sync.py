"""Store-and-forward replication from health-center nodes to the central registry.

Center nodes queue registrations and vaccination events in a bounded local
outbox, then push them in batches. Delivery is at-least-once; the central
apply path is idempotent and order-insensitive, so re-sends, batch splits,
and interleaved centers all converge to the same state. Vaccination events
that arrive before their child's registration are parked and applied the
moment the registration lands.
"""

from __future__ import annotations

import threading
from dataclasses import dataclass, field
from datetime import datetime
from enum import Enum
from typing import Callable

from .errors import DomainError, ErrorCode
from .eventlog import iter_log
from .registry import CenterRecord, ChildRecord, RecordOutcome, Registry, VaccinationEvent, parse_timestamp
from .schedule import ScheduleConfig

DEFAULT_BATCH_SIZE = 100
DEFAULT_OUTBOX_CAPACITY = 10_000


class SyncKind(str, Enum):
    REGISTER_CHILD = "REGISTER_CHILD"
    RECORD_VACCINATION = "RECORD_VACCINATION"


@dataclass(frozen=True)
class SyncEnvelope:
    event_id: str
    center_id: str
    center_seq: int
    kind: SyncKind
    payload: dict
    occurred_at: datetime

    def to_payload(self) -> dict:
        return {
            "event_id": self.event_id,
            "center_id": self.center_id,
            "center_seq": self.center_seq,
            "kind": self.kind.value,
            "payload": self.payload,
            "occurred_at": self.occurred_at.isoformat(),
        }

    @classmethod
    def from_payload(cls, doc: dict) -> "SyncEnvelope":
        try:
            return cls(
                event_id=doc["event_id"],
                center_id=doc["center_id"],
                center_seq=int(doc["center_seq"]),
                kind=SyncKind(doc["kind"]),
                payload=doc["payload"],
                occurred_at=parse_timestamp(doc["occurred_at"]),
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise DomainError(ErrorCode.INVALID_ENVELOPE, f"bad sync envelope: {exc}") from None


@dataclass
class SyncResult:
    accepted: int = 0
    duplicates: int = 0
    conflicts: int = 0
    last_acked_seq: int = 0

    def to_payload(self) -> dict:
        return {
            "accepted": self.accepted,
            "duplicates": self.duplicates,
            "conflicts": self.conflicts,
            "last_acked_seq": self.last_acked_seq,
        }

    @classmethod
    def from_payload(cls, doc: dict) -> "SyncResult":
        return cls(
            accepted=int(doc["accepted"]),
            duplicates=int(doc["duplicates"]),
            conflicts=int(doc["conflicts"]),
            last_acked_seq=int(doc["last_acked_seq"]),
        )


class CenterNode:
    """A health-center node's durable outbox of unacknowledged envelopes."""

    def __init__(self, center_id: str, capacity: int = DEFAULT_OUTBOX_CAPACITY):
        self.center_id = center_id
        self.capacity = capacity
        self._entries: list[SyncEnvelope] = []
        self._base_seq = 1  # seq of _entries[0]
        self._next_seq = 1
        self.acked_seq = 0
        self._lock = threading.Lock()

    def append_local(
        self, kind: SyncKind, payload: dict, event_id: str, occurred_at: datetime
    ) -> int:
        """Queue one envelope; returns its assigned per-center sequence number."""
        with self._lock:
            if len(self._entries) >= self.capacity:
                raise DomainError(ErrorCode.QUEUE_FULL, f"outbox for {self.center_id} is at capacity {self.capacity}")
            seq = self._next_seq
            self._next_seq += 1
            self._entries.append(
                SyncEnvelope(
                    event_id=event_id,
                    center_id=self.center_id,
                    center_seq=seq,
                    kind=kind,
                    payload=payload,
                    occurred_at=occurred_at,
                )
            )
            return seq

    def slice_from(self, from_seq: int, max_n: int) -> list[SyncEnvelope]:
        with self._lock:
            start = max(from_seq - self._base_seq, 0)
            return self._entries[start : start + max_n]

    def ack(self, seq: int) -> None:
        """Advance the acknowledged watermark and prune everything at or below it."""
        with self._lock:
            if seq <= self.acked_seq:
                return
            self.acked_seq = seq
            drop = seq - self._base_seq + 1
            if drop > 0:
                del self._entries[:drop]
                self._base_seq = seq + 1

    @property
    def pending(self) -> int:
        with self._lock:
            return self._next_seq - 1 - self.acked_seq


class CentralApplier:
    """Central-side idempotent apply path shared by sync pushes, direct API
    calls, and log replay.

    Tracks per-center acknowledged sequence numbers and a parking area for
    vaccination events whose child registration has not arrived yet.
    """

    def __init__(
        self,
        registry: Registry,
        on_vaccination: "Callable[[VaccinationEvent, ChildRecord], None] | None" = None,
    ):
        self.registry = registry
        self.on_vaccination = on_vaccination
        self.parked: dict[str, dict[str, VaccinationEvent]] = {}  # child uid -> event_id -> event
        self.acked: dict[str, int] = {}
        self.rejected: dict[str, str] = {}  # envelope/event id -> error code
        self.counters = {
            "registrations": 0,
            "vaccinations": 0,
            "duplicates": 0,
            "conflicts": 0,
            "rejected": 0,
            "parked": 0,
        }
        self._lock = threading.RLock()

    # -- single-operation apply -----------------------------------------

    def apply_registration(self, child: ChildRecord) -> RecordOutcome:
        with self._lock:
            existing = self.registry.children.get(child.uid)
            if existing is not None:
                if existing == child:
                    self.counters["duplicates"] += 1
                    return RecordOutcome.DUPLICATE_IGNORED
                raise DomainError(ErrorCode.UID_CONFLICT, f"uid {child.uid} already registered with different data")
            self.registry.register_child(child)
            self.counters["registrations"] += 1
            self._flush_parked(child)
            return RecordOutcome.ACCEPTED

    def apply_vaccination(
        self, event: VaccinationEvent, allow_park: bool = True, notify: bool = True
    ) -> RecordOutcome | None:
        """Apply one event; returns None when the event was parked."""
        with self._lock:
            child = self.registry.children.get(event.child_uid)
            if child is None and allow_park:
                bucket = self.parked.setdefault(event.child_uid, {})
                if event.event_id in bucket or event.event_id in self.registry.events:
                    self.counters["duplicates"] += 1
                    return RecordOutcome.DUPLICATE_IGNORED
                bucket[event.event_id] = event
                self.counters["parked"] += 1
                if self.registry.log is not None:
                    self.registry.log.append(
                        {
                            "type": "record_vaccination",
                            "payload": event.to_payload(),
                            "recorded_at": event.recorded_at.isoformat(),
                        }
                    )
                return None
            outcome = self.registry.record_vaccination(event)
            if outcome is RecordOutcome.ACCEPTED:
                self.counters["vaccinations"] += 1
                if notify and self.on_vaccination is not None:
                    self.on_vaccination(event, child)
            elif outcome is RecordOutcome.DUPLICATE_IGNORED:
                self.counters["duplicates"] += 1
            else:
                self.counters["conflicts"] += 1
            return outcome

    def _flush_parked(self, child: ChildRecord) -> None:
        bucket = self.parked.pop(child.uid, None)
        if not bucket:
            return
        events = sorted(bucket.values(), key=lambda e: (e.administered_date, e.event_id))
        for event in events:
            try:
                self.apply_vaccination(event, allow_park=False)
            except DomainError as exc:
                self.rejected[event.event_id] = exc.code.value
                self.counters["rejected"] += 1

    # -- batch apply ----------------------------------------------------

    def apply_batch(self, envelopes: list[SyncEnvelope], expect_center: str | None = None) -> SyncResult:
        """Apply a single-center batch; the result always accounts for every envelope."""
        result = SyncResult()
        with self._lock:
            for env in envelopes:
                if expect_center is not None and env.center_id != expect_center:
                    raise DomainError(
                        ErrorCode.INVALID_ENVELOPE,
                        f"envelope {env.event_id} claims center {env.center_id!r}, batch is for {expect_center!r}",
                    )
                category = self._apply_envelope(env)
                if category == "accepted":
                    result.accepted += 1
                elif category == "duplicate":
                    result.duplicates += 1
                else:
                    result.conflicts += 1
                prev = self.acked.get(env.center_id, 0)
                if env.center_seq > prev:
                    self.acked[env.center_id] = env.center_seq
            if envelopes:
                result.last_acked_seq = self.acked.get(envelopes[-1].center_id, 0)
            elif expect_center is not None:
                result.last_acked_seq = self.acked.get(expect_center, 0)
        return result

    def _apply_envelope(self, env: SyncEnvelope) -> str:
        try:
            if env.kind is SyncKind.REGISTER_CHILD:
                child = ChildRecord.from_payload(env.payload)
                outcome = self.apply_registration(child)
                return "accepted" if outcome is RecordOutcome.ACCEPTED else "duplicate"
            event = VaccinationEvent.from_payload(env.payload)
            outcome = self.apply_vaccination(event)
            if outcome is None:
                return "accepted"  # parked: durably held, applied on registration
            if outcome is RecordOutcome.ACCEPTED:
                return "accepted"
            if outcome is RecordOutcome.DUPLICATE_IGNORED:
                return "duplicate"
            return "conflict"
        except DomainError as exc:
            self.rejected[env.event_id] = exc.code.value
            self.counters["rejected"] += 1
            return "conflict"
        except (KeyError, TypeError, ValueError):
            self.rejected[env.event_id] = ErrorCode.INVALID_ENVELOPE.value
            self.counters["rejected"] += 1
            return "conflict"

    # -- state ----------------------------------------------------------

    def state_dict(self) -> dict:
        state = self.registry.state_dict()
        parked = []
        for uid in sorted(self.parked):
            for eid in sorted(self.parked[uid]):
                parked.append(self.parked[uid][eid].to_payload())
        state["parked"] = parked
        return state


class InProcessTransport:
    """Direct handoff to a central applier; used by tests and the simulator."""

    def __init__(self, applier: CentralApplier):
        self.applier = applier

    def send(self, envelopes: list[SyncEnvelope]) -> SyncResult:
        return self.applier.apply_batch(envelopes)


def push_batch(
    node: CenterNode,
    transport,
    from_seq: int | None = None,
    max_n: int | None = None,
) -> SyncResult:
    """Push one batch of unacknowledged envelopes; safe to repeat after failures."""
    start = from_seq if from_seq is not None else node.acked_seq + 1
    batch = node.slice_from(start, max_n if max_n is not None else DEFAULT_BATCH_SIZE)
    if not batch:
        return SyncResult(last_acked_seq=node.acked_seq)
    result = transport.send(batch)
    node.ack(result.last_acked_seq)
    return result


def drain(node: CenterNode, transport, max_n: int | None = None) -> SyncResult:
    """Push until the outbox is empty; returns the aggregate result."""
    total = SyncResult(last_acked_seq=node.acked_seq)
    while node.pending > 0:
        result = push_batch(node, transport, max_n=max_n)
        total.accepted += result.accepted
        total.duplicates += result.duplicates
        total.conflicts += result.conflicts
        total.last_acked_seq = result.last_acked_seq
    return total


def replay_log(path: str, cfg: ScheduleConfig, centers: dict[str, CenterRecord] | None = None) -> CentralApplier:
    """Rebuild central state by replaying the append-only log from disk."""
    registry = Registry(cfg, centers=centers, log=None)
    applier = CentralApplier(registry)
    for offset, record in iter_log(path):
        try:
            rtype = record["type"]
            payload = record["payload"]
            if rtype == "register_child":
                applier.apply_registration(ChildRecord.from_payload(payload))
            elif rtype == "record_vaccination":
                applier.apply_vaccination(VaccinationEvent.from_payload(payload))
            else:
                raise DomainError(ErrorCode.CORRUPT_RECORD, f"unknown record type {rtype!r} at offset {offset}")
        except DomainError:
            raise
        except (KeyError, TypeError, ValueError) as exc:
            raise DomainError(ErrorCode.CORRUPT_RECORD, f"bad record at offset {offset}: {exc}") from None
    return applier
