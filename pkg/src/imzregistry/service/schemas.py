"""Wire models for the HTTP API. Field names are the wire contract."""

from __future__ import annotations

from datetime import date, datetime
from typing import Any, Literal

from pydantic import BaseModel, ConfigDict, Field


class ApiModel(BaseModel):
    model_config = ConfigDict(extra="forbid")


# -- errors --------------------------------------------------------------


class ErrorDetail(ApiModel):
    code: str
    message: str


class ErrorBody(ApiModel):
    error: ErrorDetail


# -- guardian verification ----------------------------------------------


class VerifyGuardianIn(ApiModel):
    uid: str
    name: str


class VerifyGuardianOut(ApiModel):
    uid: str
    result: Literal["VERIFIED", "UNKNOWN_UID", "NAME_MISMATCH"]


# -- registration --------------------------------------------------------


class GuardianIn(ApiModel):
    uid: str
    name: str
    mobile: str
    guardian_type: Literal["PARENT", "GUARDIAN", "ORPHANAGE"] = "PARENT"


class RegistrationIn(ApiModel):
    child_name: str
    date_of_birth: date
    sex: Literal["F", "M", "X"]
    place_of_birth: str
    guardian: GuardianIn
    request_id: str | None = None  # defaults to the Idempotency-Key header


class CertificateOut(ApiModel):
    certificate_id: str
    uid: str
    child_name: str
    date_of_birth: date
    sex: str
    place_of_birth: str
    guardian_name: str
    guardian_uid: str
    issuing_center: str
    issued_at: datetime
    digest: str
    canonical_text: str


class ChildOut(ApiModel):
    uid: str
    child_name: str
    guardian_name: str
    guardian_mobile: str
    guardian_uid: str
    date_of_birth: date
    sex: str
    place_of_birth: str
    zone_id: str
    registered_center: str
    registered_at: datetime


class RegistrationOut(ApiModel):
    uid: str
    created: bool
    child: ChildOut
    certificate: CertificateOut


# -- vaccinations --------------------------------------------------------


class DoseIn(ApiModel):
    vaccine: Literal["BCG", "OPV", "DPT", "HEPB", "MEASLES", "TT"]
    dose_number: int = Field(ge=0, le=20)


class VaccinationIn(ApiModel):
    doses: list[DoseIn] = Field(min_length=1)
    administered_date: date
    batch_id: str = ""


class DueDoseOut(ApiModel):
    vaccine: str
    dose_number: int
    due_date: date
    status: str


class VaccinationOut(ApiModel):
    uid: str
    accepted: list[str]
    duplicates: list[str]
    conflicts: list[str]
    next_due: list[DueDoseOut]
    message_queued: bool


# -- history / schedule --------------------------------------------------


class EventOut(ApiModel):
    event_id: str
    child_uid: str
    vaccine: str
    dose_number: int
    administered_date: date
    center_id: str
    batch_id: str
    recorded_at: datetime
    superseded: bool


class HistoryOut(ApiModel):
    uid: str
    events: list[EventOut]


class NextDueOut(ApiModel):
    uid: str
    as_of: date
    doses: list[DueDoseOut]


class DueChildOut(ApiModel):
    uid: str
    child_name: str
    guardian_mobile: str
    doses: list[DueDoseOut]


class DueListOut(ApiModel):
    center_id: str
    date: date
    children: list[DueChildOut]


# -- sync ----------------------------------------------------------------


class SyncEnvelopeIn(ApiModel):
    event_id: str
    center_id: str
    center_seq: int = Field(ge=1)
    kind: Literal["REGISTER_CHILD", "RECORD_VACCINATION"]
    payload: dict[str, Any]
    occurred_at: datetime


class SyncIn(ApiModel):
    center_id: str
    envelopes: list[SyncEnvelopeIn]


class SyncOut(ApiModel):
    accepted: int
    duplicates: int
    conflicts: int
    last_acked_seq: int


# -- misc ----------------------------------------------------------------


class HealthOut(ApiModel):
    status: Literal["ok"]
    children: int
    events: int
