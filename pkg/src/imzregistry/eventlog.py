"""Append-only log of length-prefixed JSON records.

Framing: a 10-digit ASCII byte length, one space, the UTF-8 JSON document,
then a newline. Anything that breaks the frame (short header, bad length,
missing terminator, undecodable JSON) reports the byte offset of the broken
record.
"""

from __future__ import annotations

import json
import os
from typing import Iterator

from .errors import DomainError, ErrorCode

_HEADER_LEN = 11  # 10 length digits + 1 space


def encode_record(record: dict) -> bytes:
    body = json.dumps(record, sort_keys=True, separators=(",", ":"), ensure_ascii=False).encode("utf-8")
    return b"%010d " % len(body) + body + b"\n"


class EventLog:
    """Writable handle on a log file; appends are flushed immediately."""

    def __init__(self, path: str):
        self.path = path
        os.makedirs(os.path.dirname(os.path.abspath(path)), exist_ok=True)
        self._fh = open(path, "ab")

    def append(self, record: dict) -> None:
        self._fh.write(encode_record(record))
        self._fh.flush()

    def close(self) -> None:
        if not self._fh.closed:
            self._fh.close()

    def __enter__(self) -> "EventLog":
        return self

    def __exit__(self, *exc) -> None:
        self.close()


def iter_log(path: str) -> Iterator[tuple[int, dict]]:
    """Yield (byte_offset, record) for every record in the log file.

    A missing file is an empty log: replaying a store that has never written
    anything yields no records.
    """
    try:
        fh = open(path, "rb")
    except FileNotFoundError:
        return
    with fh:
        offset = 0
        while True:
            header = fh.read(_HEADER_LEN)
            if not header:
                return
            if len(header) < _HEADER_LEN or not header[:10].isdigit() or header[10:11] != b" ":
                raise DomainError(ErrorCode.CORRUPT_RECORD, f"corrupt record header at offset {offset}")
            length = int(header[:10])
            body = fh.read(length + 1)
            if len(body) < length + 1 or body[-1:] != b"\n":
                raise DomainError(ErrorCode.CORRUPT_RECORD, f"truncated record at offset {offset}")
            try:
                record = json.loads(body[:-1].decode("utf-8"))
            except (UnicodeDecodeError, json.JSONDecodeError):
                raise DomainError(ErrorCode.CORRUPT_RECORD, f"undecodable record at offset {offset}") from None
            yield offset, record
            offset += _HEADER_LEN + length + 1


def read_log(path: str) -> list[dict]:
    return [record for _offset, record in iter_log(path)]
