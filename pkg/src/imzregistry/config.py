"""Service configuration: one JSON file describing paths, gateway, and bounds."""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, field

from .errors import DomainError, ErrorCode

_KNOWN_KEYS = {
    "listen_host",
    "listen_port",
    "data_dir",
    "schedule_path",
    "wastage_path",
    "centers_path",
    "api_keys_path",
    "identity_seed_path",
    "sms_gateway",
    "sms_max_attempts",
    "sms_backoff_base",
    "outbox_capacity",
}


@dataclass(frozen=True)
class ServiceConfig:
    listen_host: str = "127.0.0.1"
    listen_port: int = 8000
    data_dir: str = "./data"
    schedule_path: str | None = None  # None -> packaged default schedule
    wastage_path: str | None = None  # None -> packaged default rates
    centers_path: str | None = None
    api_keys_path: str | None = None
    identity_seed_path: str | None = None
    sms_gateway: str = "file"  # "file" | "memory"
    sms_max_attempts: int = 5
    sms_backoff_base: float = 0.5
    outbox_capacity: int = 10_000

    @property
    def log_path(self) -> str:
        return os.path.join(self.data_dir, "events.log")

    @property
    def spool_dir(self) -> str:
        return os.path.join(self.data_dir, "sms_spool")

    def validate(self) -> None:
        if self.sms_gateway not in ("file", "memory"):
            raise DomainError(ErrorCode.INVALID_CONFIG, f"sms_gateway must be 'file' or 'memory', got {self.sms_gateway!r}")
        if not (0 < self.listen_port < 65536):
            raise DomainError(ErrorCode.INVALID_CONFIG, f"listen_port out of range: {self.listen_port}")
        if self.sms_max_attempts < 1 or self.sms_backoff_base < 0:
            raise DomainError(ErrorCode.INVALID_CONFIG, "sms delivery settings out of range")
        if self.outbox_capacity <= 0:
            raise DomainError(ErrorCode.INVALID_CONFIG, "outbox_capacity must be positive")


def load_config(path: str) -> ServiceConfig:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            doc = json.load(fh)
    except OSError as exc:
        raise DomainError(ErrorCode.INVALID_CONFIG, f"cannot read config {path}: {exc}") from None
    except json.JSONDecodeError as exc:
        raise DomainError(ErrorCode.PARSE_ERROR, f"config {path} is not valid JSON: {exc}") from None
    if not isinstance(doc, dict):
        raise DomainError(ErrorCode.INVALID_CONFIG, "config root must be a JSON object")
    unknown = set(doc) - _KNOWN_KEYS
    if unknown:
        raise DomainError(ErrorCode.INVALID_CONFIG, f"unknown config keys: {', '.join(sorted(unknown))}")
    try:
        cfg = ServiceConfig(**doc)
    except TypeError as exc:
        raise DomainError(ErrorCode.INVALID_CONFIG, f"bad config value: {exc}") from None
    cfg.validate()
    return cfg
