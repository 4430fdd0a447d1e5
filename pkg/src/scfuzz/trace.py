"""Line codec for API-call records.

Two record shapes, one per instrumented API category::

    TC <obj_id> <type_name> <exact:0|1> <result:0|1>
    AG <obj_id> <key> <ret_id|NULL> <incref:0|1>
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from enum import Enum
from typing import Iterable, Optional, Union

from .errors import TraceParseError

_INT_RE = re.compile(r"0|[1-9][0-9]*")
_BIT = {"0": False, "1": True}


class Act(str, Enum):
    TYPE_CHECK = "TC"
    ATTR_GET = "AG"


@dataclass(frozen=True)
class ApiCallRecord:
    act: Act
    obj_id: int
    val_act: str
    ret: Union[bool, Optional[int]]
    exact: bool = False
    incref: bool = False

    @property
    def is_type_check(self) -> bool:
        return self.act is Act.TYPE_CHECK

    @property
    def ret_kind(self) -> str:
        """Return-value class used for coverage accounting."""
        if self.is_type_check:
            return "true" if self.ret else "false"
        return "NULL" if self.ret is None else "non-NULL"


def type_check(obj_id: int, type_name: str, result: bool, exact=False) -> ApiCallRecord:
    return ApiCallRecord(Act.TYPE_CHECK, obj_id, type_name, bool(result), exact=bool(exact))


def attr_get(obj_id: int, key: str, ret: Optional[int], incref=False) -> ApiCallRecord:
    return ApiCallRecord(Act.ATTR_GET, obj_id, key, ret, incref=bool(incref))


def encode_record(r: ApiCallRecord) -> str:
    if r.is_type_check:
        return f"TC {r.obj_id} {r.val_act} {int(r.exact)} {int(bool(r.ret))}"
    ret = "NULL" if r.ret is None else str(r.ret)
    return f"AG {r.obj_id} {r.val_act} {ret} {int(r.incref)}"


def _int(tok, what, lineno):
    if not _INT_RE.fullmatch(tok):
        raise TraceParseError(f"bad {what} {tok!r}", lineno)
    return int(tok)


def _bit(tok, what, lineno):
    try:
        return _BIT[tok]
    except KeyError:
        raise TraceParseError(f"bad {what} flag {tok!r}", lineno) from None


def parse_record(line: str, lineno: Optional[int] = None) -> ApiCallRecord:
    fields = line.rstrip("\n").split(" ")
    if len(fields) != 5 or not all(fields):
        raise TraceParseError(f"expected 5 space-separated fields in {line!r}", lineno)
    tag, obj, val, a, b = fields
    obj_id = _int(obj, "object id", lineno)
    if tag == "TC":
        return type_check(obj_id, val, _bit(b, "result", lineno), _bit(a, "exact", lineno))
    if tag == "AG":
        ret = None if a == "NULL" else _int(a, "return id", lineno)
        return attr_get(obj_id, val, ret, _bit(b, "incref", lineno))
    raise TraceParseError(f"unknown record tag {tag!r}", lineno)


def encode_trace(records: Iterable[ApiCallRecord]) -> str:
    return "".join(encode_record(r) + "\n" for r in records)


def parse_trace(text: str) -> list[ApiCallRecord]:
    lines = text.split("\n")
    if lines and lines[-1] == "":
        lines.pop()
    return [parse_record(line, n) for n, line in enumerate(lines, 1)]
