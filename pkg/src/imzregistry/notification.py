"""SMS reminders for recorded vaccinations.

Message bodies follow a fixed template so downstream gateways and parsers
can rely on them byte for byte:

    IMZ <child name> UID <uid>: given <DOSE[,DOSE...]>; next due <YYYY-MM-DD>

or, when nothing further is scheduled:

    IMZ <child name> UID <uid>: given <DOSE[,DOSE...]>; schedule complete

Bodies never exceed ``MAX_BODY_CHARS``; the child name is truncated to fit.
Delivery is fire-and-retry: a queue worker dispatches each message with
exponential backoff and parks permanently failing messages in a dead-letter
list rather than blocking the rest.
"""

from __future__ import annotations

import os
import re
import time
from collections import deque
from dataclasses import dataclass
from datetime import date, datetime
from typing import Callable, Protocol

from .errors import DomainError, ErrorCode

MAX_BODY_CHARS = 320  # two concatenated GSM message segments
_SPOOL_SANITIZE = re.compile(r"[^A-Za-z0-9]+")


@dataclass(frozen=True)
class SmsMessage:
    to: str
    body: str
    child_uid: str
    created_at: datetime


def dose_label(vaccine: str, dose_number: int) -> str:
    return f"{vaccine}-{dose_number}"


def compose_reminder(
    child_name: str,
    uid: str,
    given: list[str],
    next_due: date | None,
) -> str:
    """Build the reminder body for one visit's recorded doses."""
    if not given:
        raise DomainError(ErrorCode.MALFORMED_PAYLOAD, "reminder needs at least one administered dose")
    tail = f"; next due {next_due.isoformat()}" if next_due is not None else "; schedule complete"
    fixed = f"IMZ  UID {uid}: given {','.join(given)}{tail}"
    room = MAX_BODY_CHARS - len(fixed)
    name = child_name if len(child_name) <= room else child_name[: max(room, 0)]
    body = f"IMZ {name} UID {uid}: given {','.join(given)}{tail}"
    return body


class SmsGateway(Protocol):
    def send(self, message: SmsMessage) -> None: ...


class MemoryGateway:
    """In-memory gateway; can simulate a number of failures before success."""

    def __init__(self, failures_before_success: int = 0):
        self.sent: list[SmsMessage] = []
        self.attempts = 0
        self._failures_left = failures_before_success

    def send(self, message: SmsMessage) -> None:
        self.attempts += 1
        if self._failures_left > 0:
            self._failures_left -= 1
            raise DomainError(ErrorCode.TRANSPORT_FAILURE, "gateway unavailable")
        self.sent.append(message)


class FileSpoolGateway:
    """Writes each message as one file in a spool directory.

    File name: ``<created_at:%Y%m%dT%H%M%S%f>-<uid>.sms`` with a numeric
    suffix on collision, so a directory listing is a complete, ordered,
    countable record of delivered messages.
    """

    def __init__(self, spool_dir: str):
        self.spool_dir = spool_dir
        os.makedirs(spool_dir, exist_ok=True)

    def send(self, message: SmsMessage) -> None:
        stamp = message.created_at.strftime("%Y%m%dT%H%M%S%f")
        uid = _SPOOL_SANITIZE.sub("", message.child_uid) or "unknown"
        base = f"{stamp}-{uid}"
        path = os.path.join(self.spool_dir, f"{base}.sms")
        n = 0
        while os.path.exists(path):
            n += 1
            path = os.path.join(self.spool_dir, f"{base}-{n}.sms")
        try:
            with open(path, "x", encoding="utf-8") as fh:
                fh.write(f"{message.to}\n{message.body}\n")
        except OSError as exc:
            raise DomainError(ErrorCode.TRANSPORT_FAILURE, f"spool write failed: {exc}") from None

    def count(self) -> int:
        return sum(1 for name in os.listdir(self.spool_dir) if name.endswith(".sms"))


def dispatch(
    message: SmsMessage,
    gateway: SmsGateway,
    max_attempts: int = 5,
    backoff_base: float = 0.5,
    sleeper: Callable[[float], None] = time.sleep,
) -> None:
    """Send with exponential backoff; raises TRANSPORT_FAILURE after the last attempt.

    ``max_attempts`` bounds the total number of sends. Only transport errors
    are retried; anything else propagates immediately.
    """
    if max_attempts < 1:
        raise DomainError(ErrorCode.INVALID_CONFIG, "max_attempts must be at least 1")
    for attempt in range(max_attempts):
        try:
            gateway.send(message)
            return
        except DomainError as exc:
            if exc.code is not ErrorCode.TRANSPORT_FAILURE or attempt == max_attempts - 1:
                raise
            sleeper(backoff_base * (2**attempt))


class NotificationQueue:
    """FIFO of composed messages awaiting dispatch."""

    def __init__(
        self,
        gateway: SmsGateway,
        max_attempts: int = 5,
        backoff_base: float = 0.5,
        sleeper: Callable[[float], None] = time.sleep,
    ):
        self.gateway = gateway
        self.max_attempts = max_attempts
        self.backoff_base = backoff_base
        self.sleeper = sleeper
        self._queue: deque[SmsMessage] = deque()
        self.dead_letters: list[SmsMessage] = []
        self.delivered = 0

    def enqueue(self, message: SmsMessage) -> None:
        if not message.to:
            raise DomainError(ErrorCode.MISSING_MOBILE, f"no mobile number on file for child {message.child_uid}")
        self._queue.append(message)

    def drain(self) -> int:
        """Dispatch everything queued; returns the number delivered this call."""
        delivered = 0
        while self._queue:
            message = self._queue.popleft()
            try:
                dispatch(message, self.gateway, self.max_attempts, self.backoff_base, self.sleeper)
                delivered += 1
            except DomainError:
                self.dead_letters.append(message)
        self.delivered += delivered
        return delivered

    def __len__(self) -> int:
        return len(self._queue)
