"""HTTP service: authenticated endpoints for every desk and reporting workflow.

Centers authenticate with per-center API keys (stored hashed, compared in
constant time). Mutating endpoints honor an Idempotency-Key header: replaying
the identical request returns the stored response; reusing a key with a
different body is a conflict. Domain errors map to stable machine-readable
codes in a fixed ``{"error": {"code", "message"}}`` shape.
"""

from __future__ import annotations

import hashlib
import hmac
import os
import random
import threading
import uuid
from contextlib import asynccontextmanager
from datetime import date, datetime, timezone
from typing import Callable

from fastapi import Depends, FastAPI, Header, Query, Request
from fastapi.exceptions import RequestValidationError
from fastapi.responses import JSONResponse

from ..analytics import (
    ALL_ZONES,
    DateWindow,
    coverage_report,
    default_wastage_rates,
    demand_forecast,
    dropout_rate,
    load_wastage_file,
    municipal_report,
)
from ..central import CentralService
from ..config import ServiceConfig
from ..errors import DomainError, ErrorCode
from ..notification import FileSpoolGateway, MemoryGateway, NotificationQueue
from ..registry import CenterRecord, hash_api_key, load_centers_file
from ..schedule import Vaccine, default_schedule, load_schedule_file, outstanding_doses
from ..sync import SyncEnvelope
from ..uids import GuardianRecord, GuardianType, IdentityStore, InfantRegistrationRequest, Sex
from . import schemas

_STATUS_BY_CODE = {
    ErrorCode.UNAUTHENTICATED: 401,
    ErrorCode.GUARDIAN_UNVERIFIED: 403,
    ErrorCode.UNKNOWN_CHILD: 404,
    ErrorCode.UNKNOWN_CENTER: 404,
    ErrorCode.UID_CONFLICT: 409,
    ErrorCode.DUPLICATE_REQUEST_CONFLICT: 409,
    ErrorCode.CONFLICT_IDEMPOTENCY: 409,
    ErrorCode.QUEUE_FULL: 503,
    ErrorCode.TRANSPORT_FAILURE: 503,
    ErrorCode.INTERNAL: 500,
}


def _error_response(code: ErrorCode, message: str) -> JSONResponse:
    return JSONResponse(
        status_code=_STATUS_BY_CODE.get(code, 400),
        content={"error": {"code": code.value, "message": message}},
    )


class IdempotencyStore:
    """Stored responses for (center, endpoint, key); body-hash guarded."""

    def __init__(self):
        self._entries: dict[tuple[str, str, str], tuple[str, int, dict]] = {}
        self._lock = threading.Lock()

    def lookup(self, center_id: str, endpoint: str, key: str, body_hash: str) -> tuple[int, dict] | None:
        with self._lock:
            entry = self._entries.get((center_id, endpoint, key))
        if entry is None:
            return None
        stored_hash, status, body = entry
        if stored_hash != body_hash:
            raise DomainError(
                ErrorCode.CONFLICT_IDEMPOTENCY,
                f"idempotency key {key!r} was already used with a different request body",
            )
        return status, body

    def store(self, center_id: str, endpoint: str, key: str, body_hash: str, status: int, body: dict) -> None:
        with self._lock:
            self._entries.setdefault((center_id, endpoint, key), (body_hash, status, body))


def build_central_from_config(cfg: ServiceConfig) -> tuple[CentralService, dict[Vaccine, float]]:
    """Construct the wired central service described by a config file."""
    cfg.validate()
    os.makedirs(cfg.data_dir, exist_ok=True)
    schedule = load_schedule_file(cfg.schedule_path) if cfg.schedule_path else default_schedule()
    wastage = load_wastage_file(cfg.wastage_path) if cfg.wastage_path else default_wastage_rates()
    centers: dict[str, CenterRecord] = {}
    if cfg.centers_path:
        centers = load_centers_file(cfg.centers_path, api_keys_path=cfg.api_keys_path)
    identity = (
        IdentityStore.from_seed_file(cfg.identity_seed_path, rng=random.Random(0))
        if cfg.identity_seed_path
        else IdentityStore(rng=random.Random(0))
    )
    gateway = FileSpoolGateway(cfg.spool_dir) if cfg.sms_gateway == "file" else MemoryGateway()
    queue = NotificationQueue(gateway, max_attempts=cfg.sms_max_attempts, backoff_base=cfg.sms_backoff_base)
    central = CentralService(schedule, centers, identity, queue, log_path=cfg.log_path)
    return central, wastage


def create_app(
    central: CentralService,
    wastage_rates: dict[Vaccine, float] | None = None,
    clock: Callable[[], datetime] | None = None,
) -> FastAPI:
    now = clock or (lambda: datetime.now(timezone.utc))
    wastage = wastage_rates or {}

    @asynccontextmanager
    async def lifespan(app: FastAPI):
        # Dispatch is decoupled from request handlers: a single worker drains
        # the SMS queue while the service runs; shutdown flushes the rest.
        stop = threading.Event()

        def dispatch_loop() -> None:
            while not stop.is_set():
                if central.queue.drain() == 0:
                    stop.wait(0.2)

        worker = threading.Thread(target=dispatch_loop, name="sms-dispatch", daemon=True)
        worker.start()
        yield
        stop.set()
        worker.join(timeout=10)
        central.queue.drain()
        central.close()

    app = FastAPI(title="Child Immunization Registry", lifespan=lifespan)
    app.state.central = central
    idempotency = IdempotencyStore()

    # -- auth ------------------------------------------------------------

    def authenticate(x_api_key: str | None = Header(default=None)) -> CenterRecord:
        if not x_api_key:
            raise DomainError(ErrorCode.UNAUTHENTICATED, "missing X-Api-Key header")
        presented = hash_api_key(x_api_key)
        matched: CenterRecord | None = None
        for center in central.centers.values():
            # constant-time comparison on every candidate; no early exit
            if center.api_key_hash and hmac.compare_digest(presented, center.api_key_hash):
                matched = center
        if matched is None or not matched.active:
            raise DomainError(ErrorCode.UNAUTHENTICATED, "unknown or revoked API key")
        return matched

    # -- error handling --------------------------------------------------

    @app.exception_handler(DomainError)
    async def domain_error_handler(_req: Request, exc: DomainError):
        return _error_response(exc.code, exc.message)

    @app.exception_handler(RequestValidationError)
    async def validation_handler(_req: Request, exc: RequestValidationError):
        first = exc.errors()[0] if exc.errors() else {}
        loc = ".".join(str(p) for p in first.get("loc", ()))
        msg = first.get("msg", "invalid request")
        return _error_response(ErrorCode.MALFORMED_REQUEST, f"{loc}: {msg}" if loc else msg)

    @app.exception_handler(Exception)
    async def fallback_handler(_req: Request, exc: Exception):
        return _error_response(ErrorCode.INTERNAL, f"unexpected failure: {type(exc).__name__}")

    # -- helpers ----------------------------------------------------------

    def _body_hash(model) -> str:
        return hashlib.sha256(model.model_dump_json().encode("utf-8")).hexdigest()

    def _next_due_payload(uid: str, as_of: date) -> list[dict]:
        child = central.registry.get_child(uid)
        doses = outstanding_doses(child.date_of_birth, central.registry.history_triples(uid), as_of, central.cfg)
        return [
            {"vaccine": d.vaccine.value, "dose_number": d.dose_number, "due_date": d.due_date.isoformat(), "status": d.status.value}
            for d in doses
        ]

    # -- endpoints ---------------------------------------------------------

    @app.get("/healthz", response_model=schemas.HealthOut)
    def healthz():
        return {"status": "ok", "children": len(central.registry.children), "events": len(central.registry.events)}

    @app.post("/guardians/verify", response_model=schemas.VerifyGuardianOut)
    def verify_guardian_endpoint(body: schemas.VerifyGuardianIn, _center: CenterRecord = Depends(authenticate)):
        result = central.verify_guardian_request(body.uid, body.name)
        return {"uid": body.uid, "result": result.value}

    @app.post("/registrations", response_model=schemas.RegistrationOut, status_code=201)
    def register(
        body: schemas.RegistrationIn,
        center: CenterRecord = Depends(authenticate),
        idempotency_key: str | None = Header(default=None, alias="Idempotency-Key"),
    ):
        body_hash = _body_hash(body)
        if idempotency_key:
            stored = idempotency.lookup(center.center_id, "POST /registrations", idempotency_key, body_hash)
            if stored is not None:
                return JSONResponse(status_code=stored[0], content=stored[1])
        request_id = body.request_id or idempotency_key or uuid.uuid4().hex
        guardian = GuardianRecord(
            uid=body.guardian.uid,
            name=body.guardian.name,
            mobile=body.guardian.mobile,
            guardian_type=GuardianType(body.guardian.guardian_type),
        )
        guardian.validate()
        request = InfantRegistrationRequest(
            request_id=request_id,
            child_name=body.child_name,
            date_of_birth=body.date_of_birth,
            sex=Sex(body.sex),
            place_of_birth=body.place_of_birth,
            guardian=guardian,
            center_id=center.center_id,
        )
        outcome = central.register_infant(request, registered_at=now())
        response = {
            "uid": outcome.uid,
            "created": outcome.created,
            "child": outcome.child.to_payload(),
            "certificate": outcome.certificate.to_payload(),
        }
        if idempotency_key:
            idempotency.store(center.center_id, "POST /registrations", idempotency_key, body_hash, 201, response)
        return JSONResponse(status_code=201, content=response)

    @app.post("/children/{uid}/vaccinations", response_model=schemas.VaccinationOut)
    def record_vaccinations(
        uid: str,
        body: schemas.VaccinationIn,
        center: CenterRecord = Depends(authenticate),
        idempotency_key: str | None = Header(default=None, alias="Idempotency-Key"),
    ):
        endpoint = f"POST /children/{uid}/vaccinations"
        body_hash = _body_hash(body)
        if idempotency_key:
            stored = idempotency.lookup(center.center_id, endpoint, idempotency_key, body_hash)
            if stored is not None:
                return JSONResponse(status_code=stored[0], content=stored[1])
        outcome = central.record_visit(
            uid,
            [(Vaccine(d.vaccine), d.dose_number) for d in body.doses],
            administered_date=body.administered_date,
            center_id=center.center_id,
            recorded_at=now(),
            batch_id=body.batch_id,
        )
        response = {
            "uid": uid,
            "accepted": list(outcome.accepted),
            "duplicates": list(outcome.duplicates),
            "conflicts": list(outcome.conflicts),
            "next_due": _next_due_payload(uid, body.administered_date),
            "message_queued": outcome.message_queued,
        }
        if idempotency_key:
            idempotency.store(center.center_id, endpoint, idempotency_key, body_hash, 200, response)
        return JSONResponse(status_code=200, content=response)

    @app.get("/children/{uid}/history", response_model=schemas.HistoryOut)
    def history(uid: str, _center: CenterRecord = Depends(authenticate)):
        _child, events = central.registry.vaccination_history(uid, include_superseded=True)
        return {
            "uid": uid,
            "events": [
                dict(e.to_payload(), superseded=central.registry.is_superseded(e.event_id)) for e in events
            ],
        }

    @app.get("/children/{uid}/next-due", response_model=schemas.NextDueOut)
    def next_due_endpoint(
        uid: str,
        as_of: date | None = Query(default=None),
        _center: CenterRecord = Depends(authenticate),
    ):
        effective = as_of or now().date()
        return {"uid": uid, "as_of": effective.isoformat(), "doses": _next_due_payload(uid, effective)}

    @app.get("/centers/{center_id}/due-list", response_model=schemas.DueListOut)
    def due_list_endpoint(
        center_id: str,
        date_: date = Query(..., alias="date"),
        _center: CenterRecord = Depends(authenticate),
    ):
        rows = central.registry.due_list(center_id, date_)
        return {
            "center_id": center_id,
            "date": date_.isoformat(),
            "children": [
                {
                    "uid": child.uid,
                    "child_name": child.child_name,
                    "guardian_mobile": child.guardian_mobile,
                    "doses": [
                        {
                            "vaccine": d.vaccine.value,
                            "dose_number": d.dose_number,
                            "due_date": d.due_date.isoformat(),
                            "status": d.status.value,
                        }
                        for d in doses
                    ],
                }
                for child, doses in rows
            ],
        }

    # -- reports -----------------------------------------------------------

    @app.get("/reports/coverage")
    def coverage_endpoint(
        zone: str = Query(default=ALL_ZONES),
        from_: date = Query(..., alias="from"),
        to: date = Query(...),
        _center: CenterRecord = Depends(authenticate),
    ):
        report = coverage_report(central.registry, zone, DateWindow(from_, to), central.cfg)
        return report.to_payload()

    @app.get("/reports/dropout")
    def dropout_endpoint(
        zone: str = Query(default=ALL_ZONES),
        from_: date = Query(..., alias="from"),
        to: date = Query(...),
        _center: CenterRecord = Depends(authenticate),
    ):
        rate = dropout_rate(central.registry, zone, DateWindow(from_, to))
        return {
            "scope": zone,
            "cohort": {"start": from_.isoformat(), "end": to.isoformat()},
            "from_dose": "BCG-1",
            "to_dose": "MEASLES-1",
            "rate": rate,
        }

    @app.get("/reports/demand")
    def demand_endpoint(
        zone: str = Query(default=ALL_ZONES),
        cohort: int = Query(..., ge=0),
        _center: CenterRecord = Depends(authenticate),
    ):
        return demand_forecast(zone, cohort, central.cfg, wastage).to_payload()

    @app.get("/reports/municipal")
    def municipal_endpoint(
        zone: str = Query(default=ALL_ZONES),
        from_: date = Query(..., alias="from"),
        to: date = Query(...),
        _center: CenterRecord = Depends(authenticate),
    ):
        return municipal_report(central.registry, zone, DateWindow(from_, to)).to_payload()

    # -- sync --------------------------------------------------------------

    @app.post("/sync", response_model=schemas.SyncOut)
    def sync_endpoint(body: schemas.SyncIn, center: CenterRecord = Depends(authenticate)):
        if body.center_id != center.center_id:
            raise DomainError(
                ErrorCode.INVALID_ENVELOPE,
                f"batch claims center {body.center_id!r} but the key belongs to {center.center_id!r}",
            )
        envelopes = [SyncEnvelope.from_payload(e.model_dump(mode="json")) for e in body.envelopes]
        result = central.apply_sync_batch(center.center_id, envelopes)
        return result.to_payload()

    return app
