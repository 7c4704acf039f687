"""Digital birth certificates with a tamper-evident digest.

A certificate is a fixed, ordered set of fields plus a SHA-256 digest of
its canonical serialization. Any change to any field changes the digest,
so verification is a pure recomputation. Issuing is idempotent: the same
child always yields the identical certificate.
"""

from __future__ import annotations

import hashlib
import threading
from dataclasses import dataclass
from datetime import date, datetime
from enum import Enum

from .errors import DomainError, ErrorCode
from .registry import ChildRecord, parse_timestamp

# Serialization order is part of the format; changing it invalidates digests.
_FIELD_ORDER = (
    "certificate_id",
    "uid",
    "child_name",
    "date_of_birth",
    "sex",
    "place_of_birth",
    "guardian_name",
    "guardian_uid",
    "issuing_center",
    "issued_at",
)


class CertificateVerdict(str, Enum):
    VALID = "VALID"
    HASH_MISMATCH = "HASH_MISMATCH"
    UNKNOWN_CERTIFICATE = "UNKNOWN_CERTIFICATE"


@dataclass(frozen=True)
class BirthCertificate:
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

    def field_values(self) -> dict[str, str]:
        return {
            "certificate_id": self.certificate_id,
            "uid": self.uid,
            "child_name": self.child_name,
            "date_of_birth": self.date_of_birth.isoformat(),
            "sex": self.sex,
            "place_of_birth": self.place_of_birth,
            "guardian_name": self.guardian_name,
            "guardian_uid": self.guardian_uid,
            "issuing_center": self.issuing_center,
            "issued_at": self.issued_at.isoformat(),
        }

    def canonical_form(self) -> str:
        values = self.field_values()
        return "\n".join(f"{name}={values[name]}" for name in _FIELD_ORDER)

    def to_payload(self) -> dict:
        doc = self.field_values()
        doc["digest"] = self.digest
        doc["canonical_text"] = self.canonical_form()
        return doc

    @classmethod
    def from_payload(cls, doc: dict) -> "BirthCertificate":
        return cls(
            certificate_id=doc["certificate_id"],
            uid=doc["uid"],
            child_name=doc["child_name"],
            date_of_birth=date.fromisoformat(doc["date_of_birth"]),
            sex=doc["sex"],
            place_of_birth=doc["place_of_birth"],
            guardian_name=doc["guardian_name"],
            guardian_uid=doc["guardian_uid"],
            issuing_center=doc["issuing_center"],
            issued_at=parse_timestamp(doc["issued_at"]),
            digest=doc["digest"],
        )


def _digest_of(canonical: str) -> str:
    return hashlib.sha256(canonical.encode("utf-8")).hexdigest()


def issue_birth_certificate(child: ChildRecord) -> BirthCertificate:
    """Build the certificate for a registered child; deterministic per child."""
    certificate_id = "BC-" + hashlib.sha256(f"birth-certificate:{child.uid}".encode()).hexdigest()[:16].upper()
    draft = BirthCertificate(
        certificate_id=certificate_id,
        uid=child.uid,
        child_name=child.child_name,
        date_of_birth=child.date_of_birth,
        sex=child.sex.value,
        place_of_birth=child.place_of_birth,
        guardian_name=child.guardian_name,
        guardian_uid=child.guardian_uid,
        issuing_center=child.registered_center,
        issued_at=child.registered_at,
        digest="",
    )
    return BirthCertificate(**{**draft.__dict__, "digest": _digest_of(draft.canonical_form())})


def verify_certificate(certificate: BirthCertificate) -> bool:
    """True when the digest matches the certificate's current contents."""
    return _digest_of(certificate.canonical_form()) == certificate.digest


class CertificateStore:
    def __init__(self):
        self._by_id: dict[str, BirthCertificate] = {}
        self._by_uid: dict[str, BirthCertificate] = {}
        self._lock = threading.Lock()

    def issue(self, child: ChildRecord) -> BirthCertificate:
        with self._lock:
            cert = self._by_uid.get(child.uid)
            if cert is None:
                cert = issue_birth_certificate(child)
                self._by_uid[child.uid] = cert
                self._by_id[cert.certificate_id] = cert
            return cert

    def get(self, uid: str) -> BirthCertificate:
        cert = self._by_uid.get(uid)
        if cert is None:
            raise DomainError(ErrorCode.UNKNOWN_CHILD, f"no certificate for uid {uid}")
        return cert

    def verify(self, document: BirthCertificate) -> CertificateVerdict:
        """Check a presented document against content hash and stored record."""
        stored = self._by_id.get(document.certificate_id)
        if stored is None:
            return CertificateVerdict.UNKNOWN_CERTIFICATE
        if not verify_certificate(document) or document != stored:
            return CertificateVerdict.HASH_MISMATCH
        return CertificateVerdict.VALID

    def __len__(self) -> int:
        return len(self._by_uid)
