"""Append-only log framing, replay, and corruption reporting."""
from __future__ import annotations

import json

import pytest

from imzregistry.errors import DomainError, ErrorCode
from imzregistry.eventlog import EventLog, encode_record, iter_log, read_log


@pytest.fixture
def log_path(tmp_path):
    return str(tmp_path / "events.log")


class TestFraming:
    def test_record_layout(self):
        encoded = encode_record({"b": 1, "a": [2, "x"]})
        # ten-digit length prefix, space, canonical JSON (sorted keys, no
        # spaces), trailing newline
        assert encoded == b'0000000019 {"a":[2,"x"],"b":1}\n'
        body = encoded[11:-1]
        assert int(encoded[:10]) == len(body)
        assert json.loads(body) == {"a": [2, "x"], "b": 1}

    def test_encoding_is_canonical(self):
        a = encode_record({"x": 1, "y": 2})
        b = encode_record({"y": 2, "x": 1})
        assert a == b

    def test_non_serializable_payload_is_a_programming_error(self):
        # Record payloads are produced internally, never from user input, so
        # a non-serializable value surfaces as a plain TypeError.
        with pytest.raises(TypeError):
            encode_record({"x": object()})


class TestAppendAndRead:
    def test_round_trip(self, log_path):
        records = [{"type": "t", "n": i} for i in range(5)]
        log = EventLog(log_path)
        for r in records:
            log.append(r)
        log.close()
        assert read_log(log_path) == records

    def test_iter_reports_offsets(self, log_path):
        log = EventLog(log_path)
        log.append({"n": 1})
        log.append({"n": 22})
        log.close()
        offsets = [off for off, _rec in iter_log(log_path)]
        assert offsets[0] == 0
        # second record starts where the first one ended
        first_len = len(encode_record({"n": 1}))
        assert offsets[1] == first_len

    def test_reopen_appends_not_truncates(self, log_path):
        log = EventLog(log_path)
        log.append({"n": 1})
        log.close()
        log = EventLog(log_path)
        log.append({"n": 2})
        log.close()
        assert [r["n"] for r in read_log(log_path)] == [1, 2]

    def test_missing_file_is_empty(self, log_path):
        assert read_log(log_path) == []


class TestCorruption:
    def _write(self, log_path, *records):
        log = EventLog(log_path)
        for r in records:
            log.append(r)
        log.close()

    def test_truncated_tail_reports_offset(self, log_path, tmp_path):
        self._write(log_path, {"n": 1}, {"n": 2})
        raw = (tmp_path / "events.log").read_bytes()
        (tmp_path / "events.log").write_bytes(raw[:-5])
        with pytest.raises(DomainError) as err:
            read_log(log_path)
        assert err.value.code == ErrorCode.CORRUPT_RECORD
        first_len = len(encode_record({"n": 1}))
        assert str(first_len) in err.value.message

    def test_garbage_header_reports_offset(self, log_path, tmp_path):
        self._write(log_path, {"n": 1}, {"n": 2})
        raw = (tmp_path / "events.log").read_bytes()
        first_len = len(encode_record({"n": 1}))
        (tmp_path / "events.log").write_bytes(raw[:first_len] + b"XXXX" + raw[first_len:])
        with pytest.raises(DomainError) as err:
            read_log(log_path)
        assert err.value.code == ErrorCode.CORRUPT_RECORD
        assert str(first_len) in err.value.message

    def test_records_before_corruption_still_iterable(self, log_path, tmp_path):
        self._write(log_path, {"n": 1}, {"n": 2})
        raw = (tmp_path / "events.log").read_bytes()
        (tmp_path / "events.log").write_bytes(raw[:-5])
        seen = []
        with pytest.raises(DomainError):
            for _off, rec in iter_log(log_path):
                seen.append(rec)
        assert seen == [{"n": 1}]
