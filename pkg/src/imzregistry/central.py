"""Central registry service: the composition root for the server side.

Wires together the identity store, child registry, append-only log, sync
applier, certificate store, and the SMS queue. All mutating entry points —
direct API calls and synced batches from center nodes — funnel through one
idempotent apply path, so every accepted vaccination produces exactly one
reminder message no matter how it arrived or how often it was re-delivered.
"""

from __future__ import annotations

import json
import uuid
from dataclasses import dataclass
from datetime import date, datetime
from typing import Iterable

from .certificates import BirthCertificate, CertificateStore
from .errors import DomainError, ErrorCode
from .eventlog import EventLog
from .notification import NotificationQueue, SmsMessage, compose_reminder, dose_label
from .registry import CenterRecord, ChildRecord, RecordOutcome, Registry, VaccinationEvent
from .schedule import ScheduleConfig, Vaccine, next_outstanding_date, outstanding_doses
from .sync import CentralApplier, SyncEnvelope, SyncResult
from .uids import IdentityStore, InfantRegistrationRequest, VerificationResult, issue_infant_uid, verify_guardian


@dataclass(frozen=True)
class RegistrationOutcome:
    uid: str
    child: ChildRecord
    certificate: BirthCertificate
    created: bool


@dataclass(frozen=True)
class VisitOutcome:
    child_uid: str
    accepted: tuple[str, ...]
    duplicates: tuple[str, ...]
    conflicts: tuple[str, ...]
    next_due_date: date | None
    message_queued: bool


class CentralService:
    def __init__(
        self,
        cfg: ScheduleConfig,
        centers: dict[str, CenterRecord],
        identity: IdentityStore,
        queue: NotificationQueue,
        log_path: str | None = None,
    ):
        self.cfg = cfg
        self.centers = centers
        self.identity = identity
        self.queue = queue
        self.log = EventLog(log_path) if log_path else None
        self.registry = Registry(cfg, centers=centers, log=self.log)
        self.applier = CentralApplier(self.registry, on_vaccination=self._notify_event)
        self.certificates = CertificateStore()
        self.notified = 0
        self.skipped_no_mobile = 0

    def close(self) -> None:
        if self.log is not None:
            self.log.close()

    # -- notifications ---------------------------------------------------

    def _queue_reminder(self, child: ChildRecord, labels: list[str], created_at: datetime) -> bool:
        if not child.guardian_mobile:
            self.skipped_no_mobile += 1
            return False
        next_date = next_outstanding_date(child.date_of_birth, self.registry.history_triples(child.uid), self.cfg)
        body = compose_reminder(child.child_name, child.uid, labels, next_date)
        self.queue.enqueue(SmsMessage(to=child.guardian_mobile, body=body, child_uid=child.uid, created_at=created_at))
        self.notified += 1
        return True

    def _notify_event(self, event: VaccinationEvent, child: ChildRecord) -> None:
        self._queue_reminder(
            child,
            [dose_label(event.vaccine.value, event.dose_number)],
            event.recorded_at,
        )

    # -- registration (composite: verify, issue uid, register, certify) --

    def register_infant(self, request: InfantRegistrationRequest, registered_at: datetime) -> RegistrationOutcome:
        center = self.centers.get(request.center_id)
        if center is None:
            raise DomainError(ErrorCode.UNKNOWN_CENTER, f"unknown center {request.center_id!r}")
        uid = issue_infant_uid(request, self.identity, received_at=registered_at)
        existing = self.registry.children.get(uid)
        if existing is not None:
            return RegistrationOutcome(uid=uid, child=existing, certificate=self.certificates.issue(existing), created=False)
        child = ChildRecord(
            uid=uid,
            child_name=request.child_name,
            guardian_name=request.guardian.name,
            guardian_mobile=request.guardian.mobile,
            guardian_uid=request.guardian.uid,
            date_of_birth=request.date_of_birth,
            sex=request.sex,
            place_of_birth=request.place_of_birth,
            zone_id=center.zone_id,
            registered_center=center.center_id,
            registered_at=registered_at,
        )
        self.applier.apply_registration(child)
        return RegistrationOutcome(uid=uid, child=child, certificate=self.certificates.issue(child), created=True)

    # -- vaccination visits ----------------------------------------------

    def record_visit(
        self,
        uid: str,
        doses: Iterable[tuple[Vaccine, int]],
        administered_date: date,
        center_id: str,
        recorded_at: datetime,
        batch_id: str = "",
        event_ids: list[str] | None = None,
    ) -> VisitOutcome:
        """Record one visit's doses atomically and queue a single reminder."""
        if center_id not in self.centers:
            raise DomainError(ErrorCode.UNKNOWN_CENTER, f"unknown center {center_id!r}")
        child = self.registry.get_child(uid)
        dose_list = list(doses)
        if not dose_list:
            raise DomainError(ErrorCode.MALFORMED_PAYLOAD, "a visit must record at least one dose")
        if len(set(dose_list)) != len(dose_list):
            raise DomainError(ErrorCode.MALFORMED_PAYLOAD, "a visit cannot repeat the same dose")
        entry_map = self.cfg.entry_map()
        for vaccine, dose_number in dose_list:
            if (vaccine, dose_number) not in entry_map:
                raise DomainError(ErrorCode.UNKNOWN_DOSE, f"{vaccine.value} dose {dose_number} is not in the schedule")
        if administered_date < child.date_of_birth:
            raise DomainError(ErrorCode.DATE_BEFORE_BIRTH, "administered date precedes date of birth")
        if administered_date > recorded_at.date():
            raise DomainError(ErrorCode.MALFORMED_PAYLOAD, "administered date is in the future")

        if event_ids is not None and len(event_ids) != len(dose_list):
            raise DomainError(ErrorCode.MALFORMED_PAYLOAD, "event_ids must match doses one to one")
        accepted: list[tuple[Vaccine, int]] = []
        duplicates: list[str] = []
        conflicts: list[str] = []
        for i, (vaccine, dose_number) in enumerate(dose_list):
            event = VaccinationEvent(
                event_id=event_ids[i] if event_ids is not None else uuid.uuid4().hex,
                child_uid=uid,
                vaccine=vaccine,
                dose_number=dose_number,
                administered_date=administered_date,
                center_id=center_id,
                batch_id=batch_id,
                recorded_at=recorded_at,
            )
            outcome = self.applier.apply_vaccination(event, allow_park=False, notify=False)
            label = dose_label(vaccine.value, dose_number)
            if outcome is RecordOutcome.ACCEPTED:
                accepted.append((vaccine, dose_number))
            elif outcome is RecordOutcome.DUPLICATE_IGNORED:
                duplicates.append(label)
            else:
                conflicts.append(label)

        remaining = outstanding_doses(child.date_of_birth, self.registry.history_triples(uid), administered_date, self.cfg)
        next_date = remaining[0].due_date if remaining else None
        accepted.sort(key=lambda d: (d[0].order_index, d[1]))
        accepted_labels = [dose_label(v.value, n) for v, n in accepted]
        queued = False
        if accepted_labels:
            queued = self._queue_reminder(child, accepted_labels, recorded_at)
        return VisitOutcome(
            child_uid=uid,
            accepted=tuple(accepted_labels),
            duplicates=tuple(duplicates),
            conflicts=tuple(conflicts),
            next_due_date=next_date,
            message_queued=queued,
        )

    # -- sync ------------------------------------------------------------

    def apply_sync_batch(self, center_id: str, envelopes: list[SyncEnvelope]) -> SyncResult:
        if center_id not in self.centers:
            raise DomainError(ErrorCode.UNKNOWN_CENTER, f"unknown center {center_id!r}")
        return self.applier.apply_batch(envelopes, expect_center=center_id)

    # -- queries ---------------------------------------------------------

    def verify_guardian_request(self, uid: str, name: str) -> VerificationResult:
        from .uids import GuardianRecord

        probe = GuardianRecord(uid=uid, name=name, mobile="+00000000")
        return verify_guardian(probe, self.identity)

    def snapshot_bytes(self) -> bytes:
        return json.dumps(self.applier.state_dict(), sort_keys=True, separators=(",", ":")).encode("utf-8")
