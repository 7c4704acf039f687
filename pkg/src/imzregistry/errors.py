"""Stable machine-readable error codes shared by every module and the wire API."""

from __future__ import annotations

from enum import Enum


class ErrorCode(str, Enum):
    # identity
    MALFORMED_PAYLOAD = "MALFORMED_PAYLOAD"
    GUARDIAN_UNVERIFIED = "GUARDIAN_UNVERIFIED"
    DUPLICATE_REQUEST_CONFLICT = "DUPLICATE_REQUEST_CONFLICT"
    # schedule
    PARSE_ERROR = "PARSE_ERROR"
    INVALID_SCHEDULE = "INVALID_SCHEDULE"
    UNKNOWN_VACCINE = "UNKNOWN_VACCINE"
    # registry
    INVALID_UID = "INVALID_UID"
    UID_CONFLICT = "UID_CONFLICT"
    UNKNOWN_CHILD = "UNKNOWN_CHILD"
    UNKNOWN_DOSE = "UNKNOWN_DOSE"
    DATE_BEFORE_BIRTH = "DATE_BEFORE_BIRTH"
    UNKNOWN_CENTER = "UNKNOWN_CENTER"
    # sync
    QUEUE_FULL = "QUEUE_FULL"
    TRANSPORT_FAILURE = "TRANSPORT_FAILURE"
    CORRUPT_RECORD = "CORRUPT_RECORD"
    INVALID_ENVELOPE = "INVALID_ENVELOPE"
    # notification
    MISSING_MOBILE = "MISSING_MOBILE"
    # analytics
    EMPTY_COHORT = "EMPTY_COHORT"
    NO_STARTERS = "NO_STARTERS"
    INVALID_COUNTS = "INVALID_COUNTS"
    INVALID_WASTAGE_RATE = "INVALID_WASTAGE_RATE"
    # simulator
    INVALID_CONFIG = "INVALID_CONFIG"
    # service
    UNAUTHENTICATED = "UNAUTHENTICATED"
    CONFLICT_IDEMPOTENCY = "CONFLICT_IDEMPOTENCY"
    MALFORMED_REQUEST = "MALFORMED_REQUEST"
    INTERNAL = "INTERNAL"


class DomainError(Exception):
    """Raised by core operations; carries the stable code surfaced on the wire."""

    def __init__(self, code: ErrorCode, message: str):
        super().__init__(message)
        self.code = code
        self.message = message

    def __repr__(self) -> str:  # pragma: no cover
        return f"DomainError({self.code.value}: {self.message})"
