"""Builders shared across test modules."""
from __future__ import annotations

from datetime import date, datetime, timezone

from imzregistry.registry import ChildRecord, Registry, VaccinationEvent
from imzregistry.schedule import Vaccine
from imzregistry.uids import GuardianRecord, InfantRegistrationRequest, Sex, compute_check_digit

UTC = timezone.utc


def make_uid(payload11: str) -> str:
    """Build a full 12-digit identifier from an 11-digit payload."""
    return payload11 + compute_check_digit(payload11)


GUARDIAN_UID = make_uid("51234567890")
OTHER_GUARDIAN_UID = make_uid("69876543210")


def make_child(uid: str, dob: date, *, zone: str = "Z1", center: str = "PHC-1",
               name: str = "Ravi Rao", mobile: str = "+919812345678") -> ChildRecord:
    return ChildRecord(
        uid=uid,
        child_name=name,
        guardian_name="Asha Rao",
        guardian_mobile=mobile,
        guardian_uid=GUARDIAN_UID,
        date_of_birth=dob,
        sex=Sex.M,
        place_of_birth="Ward 4 Hospital",
        zone_id=zone,
        registered_center=center,
        registered_at=datetime(dob.year, dob.month, dob.day, 10, 0, tzinfo=UTC),
    )


def make_event(event_id: str, uid: str, vaccine: Vaccine, dose: int, administered: date,
               *, center: str = "PHC-1", batch: str = "LOT-1") -> VaccinationEvent:
    return VaccinationEvent(
        event_id=event_id,
        child_uid=uid,
        vaccine=vaccine,
        dose_number=dose,
        administered_date=administered,
        center_id=center,
        batch_id=batch,
        recorded_at=datetime(administered.year, administered.month, administered.day, 12, 0, tzinfo=UTC),
    )


def make_registry(cfg, centers, children=()) -> Registry:
    reg = Registry(cfg, centers=centers)
    for child in children:
        reg.register_child(child)
    return reg


def make_request(request_id: str, *, name: str = "Ravi Rao", dob: date = date(2020, 1, 1),
                 center: str = "PHC-1") -> InfantRegistrationRequest:
    return InfantRegistrationRequest(
        request_id=request_id,
        child_name=name,
        date_of_birth=dob,
        sex=Sex.M,
        place_of_birth="Ward 4 Hospital",
        guardian=GuardianRecord(GUARDIAN_UID, "Asha Rao", "+919812345678"),
        center_id=center,
    )
