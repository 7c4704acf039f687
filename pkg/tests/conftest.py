"""Shared fixtures: seeded identity data, centers, and a wired service."""
from __future__ import annotations

import random

import pytest

from imzregistry.central import CentralService
from imzregistry.notification import MemoryGateway, NotificationQueue
from imzregistry.registry import CenterKind, CenterRecord
from imzregistry.schedule import default_schedule
from imzregistry.uids import GuardianRecord, IdentityStore

from helpers import GUARDIAN_UID, OTHER_GUARDIAN_UID


@pytest.fixture
def cfg():
    return default_schedule()


@pytest.fixture
def centers():
    return {
        "PHC-1": CenterRecord("PHC-1", "Ward 4 PHC", "Z1", CenterKind.GOVERNMENT, None, True),
        "PHC-2": CenterRecord("PHC-2", "Ward 9 PHC", "Z1", CenterKind.GOVERNMENT, None, True),
        "PRIV-1": CenterRecord("PRIV-1", "Lotus Clinic", "Z2", CenterKind.PRIVATE, None, True),
    }


@pytest.fixture
def identity():
    store = IdentityStore(rng=random.Random(42))
    store.seed_adult(GuardianRecord(GUARDIAN_UID, "Asha Rao", "+919812345678"))
    store.seed_adult(GuardianRecord(OTHER_GUARDIAN_UID, "Vikram Shah", "+919811111111"))
    return store


@pytest.fixture
def gateway():
    return MemoryGateway()


@pytest.fixture
def central(cfg, centers, identity, gateway):
    queue = NotificationQueue(gateway, max_attempts=2, backoff_base=0.0, sleeper=lambda _s: None)
    svc = CentralService(cfg, centers, identity, queue)
    yield svc
    svc.close()
