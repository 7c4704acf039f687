"""Federated child-immunization registry.

UID-anchored infant registration, vaccination scheduling and recording across
any health center, store-and-forward sync into a central registry, SMS
reminders, tamper-evident birth certificates, and planning analytics — plus a
deterministic population simulator that drives the whole pipeline.
"""

from .errors import DomainError, ErrorCode

__version__ = "1.0.0"

__all__ = ["DomainError", "ErrorCode", "__version__"]
