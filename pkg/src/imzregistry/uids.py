"""Citizen/infant UID issuance and validation.

UIDs are 12 decimal digits: an 11-digit payload with a nonzero leading digit
plus a Verhoeff check digit. Guardian identity is checked against a locally
seeded directory; infant UIDs are issued on a verified guardian's behalf.
"""

from __future__ import annotations

import csv
import hashlib
import json
import random
import re
import threading
from dataclasses import dataclass
from datetime import date, datetime
from enum import Enum

from .errors import DomainError, ErrorCode

# --- Verhoeff tables (standard dihedral D5 construction) ---
_d = [
    [0, 1, 2, 3, 4, 5, 6, 7, 8, 9],
    [1, 2, 3, 4, 0, 6, 7, 8, 9, 5],
    [2, 3, 4, 0, 1, 7, 8, 9, 5, 6],
    [3, 4, 0, 1, 2, 8, 9, 5, 6, 7],
    [4, 0, 1, 2, 3, 9, 5, 6, 7, 8],
    [5, 9, 8, 7, 6, 0, 4, 3, 2, 1],
    [6, 5, 9, 8, 7, 1, 0, 4, 3, 2],
    [7, 6, 5, 9, 8, 2, 1, 0, 4, 3],
    [8, 7, 6, 5, 9, 3, 2, 1, 0, 4],
    [9, 8, 7, 6, 5, 4, 3, 2, 1, 0],
]
_p = [
    [0, 1, 2, 3, 4, 5, 6, 7, 8, 9],
    [1, 5, 7, 6, 2, 8, 3, 0, 9, 4],
    [5, 8, 0, 3, 7, 9, 6, 1, 4, 2],
    [8, 9, 1, 6, 0, 4, 3, 5, 2, 7],
    [9, 4, 5, 3, 1, 2, 6, 8, 7, 0],
    [4, 2, 8, 6, 5, 7, 3, 9, 0, 1],
    [2, 7, 9, 3, 8, 0, 6, 4, 1, 5],
    [7, 0, 4, 6, 9, 1, 3, 2, 5, 8],
]
_inv = [0, 4, 3, 2, 1, 5, 6, 7, 8, 9]

UID_LENGTH = 12
PAYLOAD_LENGTH = 11

_MOBILE_RE = re.compile(r"\+\d{8,15}")


def compute_check_digit(payload: str) -> str:
    """Return the Verhoeff check digit for an 11-digit payload.

    Appending the returned digit makes the 12-digit string pass the Verhoeff
    check (and pass full UID validation whenever the payload's leading digit
    is nonzero).
    """
    if not isinstance(payload, str) or len(payload) != PAYLOAD_LENGTH or not payload.isdigit():
        raise DomainError(ErrorCode.MALFORMED_PAYLOAD, "payload must be exactly 11 decimal digits")
    c = 0
    for i, ch in enumerate(reversed(payload)):
        # the future check digit occupies position 0, so payload starts at 1
        c = _d[c][_p[(i + 1) % 8][ord(ch) - 48]]
    return str(_inv[c])


def validate_uid(candidate: object) -> bool:
    """True iff candidate is a 12-digit, nonzero-leading, Verhoeff-valid UID."""
    if not isinstance(candidate, str) or len(candidate) != UID_LENGTH or not candidate.isdigit():
        return False
    if candidate[0] == "0":
        return False
    c = 0
    d = _d
    p = _p
    i = 0
    for ch in reversed(candidate):
        c = d[c][p[i & 7][ord(ch) - 48]]
        i += 1
    return c == 0


class GuardianType(str, Enum):
    PARENT = "PARENT"
    GUARDIAN = "GUARDIAN"
    ORPHANAGE = "ORPHANAGE"


class Sex(str, Enum):
    F = "F"
    M = "M"
    X = "X"


class VerificationResult(str, Enum):
    VERIFIED = "VERIFIED"
    UNKNOWN_UID = "UNKNOWN_UID"
    NAME_MISMATCH = "NAME_MISMATCH"


@dataclass(frozen=True)
class GuardianRecord:
    uid: str
    name: str
    mobile: str
    guardian_type: GuardianType = GuardianType.PARENT

    def validate(self) -> None:
        if not validate_uid(self.uid):
            raise DomainError(ErrorCode.MALFORMED_PAYLOAD, f"guardian uid {self.uid!r} is not a valid UID")
        if not _MOBILE_RE.fullmatch(self.mobile):
            raise DomainError(
                ErrorCode.MALFORMED_PAYLOAD, "guardian mobile must be '+' followed by 8 to 15 digits"
            )


@dataclass(frozen=True)
class InfantRegistrationRequest:
    request_id: str
    child_name: str
    date_of_birth: date
    sex: Sex
    place_of_birth: str
    guardian: GuardianRecord
    center_id: str

    def fingerprint(self) -> str:
        """Content digest used to detect request_id reuse with a different payload."""
        doc = {
            "child_name": self.child_name,
            "date_of_birth": self.date_of_birth.isoformat(),
            "sex": self.sex.value,
            "place_of_birth": self.place_of_birth,
            "guardian": [
                self.guardian.uid,
                self.guardian.name,
                self.guardian.mobile,
                self.guardian.guardian_type.value,
            ],
            "center_id": self.center_id,
        }
        blob = json.dumps(doc, sort_keys=True, separators=(",", ":")).encode("utf-8")
        return hashlib.sha256(blob).hexdigest()


def _normalize_name(name: str) -> str:
    return " ".join(name.split()).casefold()


class IdentityStore:
    """Seeded directory of known adults plus every infant UID issued so far.

    Stands in for the national identity authority. Uniqueness and request
    idempotency are guaranteed by check-and-insert under a single lock.
    """

    def __init__(self, rng: random.Random | None = None):
        self._adults: dict[str, GuardianRecord] = {}
        self._children: dict[str, str] = {}  # infant uid -> guardian uid
        self._requests: dict[str, tuple[str, str]] = {}  # request_id -> (fingerprint, uid)
        self._rng = rng if rng is not None else random.Random()
        self._lock = threading.Lock()

    def seed_adult(self, record: GuardianRecord) -> None:
        record.validate()
        with self._lock:
            self._adults[record.uid] = record

    def lookup_adult(self, uid: str) -> GuardianRecord | None:
        return self._adults.get(uid)

    def guardian_of(self, infant_uid: str) -> str | None:
        return self._children.get(infant_uid)

    def known_uid(self, uid: str) -> bool:
        return uid in self._adults or uid in self._children

    def __len__(self) -> int:
        return len(self._adults) + len(self._children)

    @classmethod
    def from_seed_file(cls, path: str, rng: random.Random | None = None) -> "IdentityStore":
        """Load `uid,name,mobile,guardian_type` records, one per line, UTF-8."""
        store = cls(rng=rng)
        with open(path, "r", encoding="utf-8", newline="") as fh:
            for lineno, row in enumerate(csv.reader(fh), start=1):
                if not row or (len(row) == 1 and not row[0].strip()):
                    continue
                if lineno == 1 and [f.strip().lower() for f in row] == ["uid", "name", "mobile", "guardian_type"]:
                    continue
                if len(row) != 4:
                    raise DomainError(
                        ErrorCode.MALFORMED_PAYLOAD,
                        f"identity seed line {lineno}: expected 4 fields, got {len(row)}",
                    )
                uid, name, mobile, gtype = (f.strip() for f in row)
                try:
                    guardian_type = GuardianType(gtype)
                except ValueError:
                    raise DomainError(
                        ErrorCode.MALFORMED_PAYLOAD,
                        f"identity seed line {lineno}: unknown guardian_type {gtype!r}",
                    ) from None
                store.seed_adult(GuardianRecord(uid=uid, name=name, mobile=mobile, guardian_type=guardian_type))
        return store


def verify_guardian(guardian: GuardianRecord, store: IdentityStore) -> VerificationResult:
    """Check the claimed guardian against the identity directory.

    Name comparison is case and whitespace insensitive.
    """
    known = store.lookup_adult(guardian.uid)
    if known is None:
        return VerificationResult.UNKNOWN_UID
    if _normalize_name(known.name) != _normalize_name(guardian.name):
        return VerificationResult.NAME_MISMATCH
    return VerificationResult.VERIFIED


def issue_infant_uid(
    req: InfantRegistrationRequest,
    store: IdentityStore,
    received_at: datetime | None = None,
) -> str:
    """Issue a fresh UID for the infant in `req`, linked to the verified guardian.

    Idempotent on request_id: replaying the identical request returns the same
    UID; reusing the id with a different payload is a conflict. Allocation
    draws random 11-digit payloads and retries on collision.
    """
    now = received_at if received_at is not None else datetime.now().astimezone()
    if not req.child_name.strip():
        raise DomainError(ErrorCode.MALFORMED_PAYLOAD, "child_name must be non-empty")
    if req.date_of_birth > now.date():
        raise DomainError(ErrorCode.MALFORMED_PAYLOAD, "date_of_birth is in the future")
    if verify_guardian(req.guardian, store) is not VerificationResult.VERIFIED:
        raise DomainError(ErrorCode.GUARDIAN_UNVERIFIED, f"guardian {req.guardian.uid} could not be verified")

    fp = req.fingerprint()
    with store._lock:
        prior = store._requests.get(req.request_id)
        if prior is not None:
            prior_fp, prior_uid = prior
            if prior_fp == fp:
                return prior_uid
            raise DomainError(
                ErrorCode.DUPLICATE_REQUEST_CONFLICT,
                f"request_id {req.request_id!r} was already used with a different payload",
            )
        while True:
            payload = str(store._rng.randint(10**10, 10**11 - 1))
            uid = payload + compute_check_digit(payload)
            if uid not in store._adults and uid not in store._children:
                break
        store._children[uid] = req.guardian.uid
        store._requests[req.request_id] = (fp, uid)
    return uid
