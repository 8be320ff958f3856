"""Message taxonomy and the line-delimited transcript encoding.

Each record is one JSON object per line with keys ``seq, phase, channel,
from, to, kind, body``. Integers are written as decimal strings and octet
strings as lowercase hex, so a record round-trips bit for bit. Body fields
are typed by the per-kind schema in :data:`KINDS`.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Iterable

from .errors import TranscriptParseError


class Channel(str, Enum):
    PRIVATE = "private"
    PUBLIC = "public"
    BIDDERS = "bidders"


SELLER = "S"
HARNESS = "H"
EVERYONE = "*"
ALL_BIDDERS = "B*"

PHASES = ("init", "ot", "commit", "sharing", "sigma", "solve", "claim", "proof2", "outcome")
PHASE_INDEX = {name: i for i, name in enumerate(PHASES)}


def bidder_id(j: int) -> str:
    return f"B{j}"


def bidder_index(role: str) -> int | None:
    if len(role) > 1 and role[0] == "B" and role[1:].isdigit():
        return int(role[1:])
    return None


# Field types: int (plain integer), scalar (mod q), element (group member),
# hex (octet string), str; a trailing "s" marks a list.
KINDS: dict[str, tuple[Channel, dict[str, str]]] = {
    "announce": (Channel.PUBLIC, {"prices": "ints", "eta": "elements", "xi": "elements"}),
    "randomizer_update": (Channel.PUBLIC, {"removed": "ints", "bidders": "ints", "xi": "elements"}),
    "ot_request": (Channel.PRIVATE, {"y": "element"}),
    "ot_response": (Channel.PRIVATE, {"u": "elements", "v": "hexs"}),
    "ot_ack": (Channel.PUBLIC, {"status": "str"}),
    "zeta": (Channel.BIDDERS, {"zeta": "element"}),
    "proof1_setup": (Channel.PUBLIC, {"code_commits": "elements", "bidders": "ints",
                                      "rand_commits": "elements", "neg_rand_commits": "elements"}),
    "proof1_verdict": (Channel.BIDDERS, {"rejected": "ints", "tied": "ints"}),
    "share_commits": (Channel.BIDDERS, {"recipients": "ints", "commits": "elements"}),
    "share": (Channel.PRIVATE, {"d": "scalar"}),
    "share_ack": (Channel.BIDDERS, {"sender": "int", "status": "str"}),
    "sigma_commit": (Channel.PUBLIC, {"commit": "element"}),
    "sigma_verdict": (Channel.PUBLIC, {"rejected": "ints"}),
    "sigma": (Channel.PRIVATE, {"sigma": "scalar"}),
    "result": (Channel.PUBLIC, {"flags": "ints", "highest": "int", "second": "int", "discarded": "ints"}),
    "claim": (Channel.PRIVATE, {"code": "scalar"}),
    "claim_verdict": (Channel.PUBLIC, {"claimant": "int", "status": "str"}),
    "eqdl_commit": (Channel.PRIVATE, {"a": "element", "b": "element"}),
    "eqdl_challenge": (Channel.PRIVATE, {"challenge": "scalar"}),
    "eqdl_response": (Channel.PRIVATE, {"response": "scalar"}),
    "proof2_verdict": (Channel.PUBLIC, {"status": "str"}),
    # harness events
    "dropout": (Channel.PUBLIC, {"bidder": "int", "case": "int"}),
    "disqualify": (Channel.PUBLIC, {"bidders": "ints", "check": "str"}),
    "rebid": (Channel.PUBLIC, {"round": "int", "bidders": "ints"}),
    "reshare": (Channel.PUBLIC, {"bidders": "ints"}),
    "outcome": (Channel.PUBLIC, {"status": "str", "highest": "int", "second": "int", "winner": "int",
                                 "paid": "int", "reason": "str", "culprit": "str"}),
}

HARNESS_KINDS = frozenset({"dropout", "disqualify", "rebid", "reshare", "outcome"})

# Bidder-only kinds; none of these may ever reach the seller.
BIDDER_ONLY_KINDS = frozenset(k for k, (ch, _) in KINDS.items() if ch is Channel.BIDDERS)


@dataclass
class Record:
    seq: int
    phase: str
    channel: Channel
    sender: str
    receiver: str
    kind: str
    body: dict[str, Any] = field(default_factory=dict)

    def to_line(self) -> str:
        return encode_record(self)


def _base_type(ftype: str) -> tuple[str, bool]:
    if ftype.endswith("s") and ftype != "str":
        return ftype[:-1], True
    return ftype, False


def field_type(kind: str, name: str) -> str | None:
    entry = KINDS.get(kind)
    return entry[1].get(name) if entry else None


def _encode_value(value, base: str):
    if base == "hex":
        return bytes(value).hex()
    if base == "str":
        return str(value)
    return str(int(value))


def _decode_value(raw, base: str):
    if not isinstance(raw, str):
        raise ValueError(f"expected a string, got {type(raw).__name__}")
    if base == "hex":
        if raw != raw.lower():
            raise ValueError("hex must be lowercase")
        return bytes.fromhex(raw)
    if base == "str":
        return raw
    if not raw or not (raw.isdigit() or (raw[0] == "-" and raw[1:].isdigit())):
        raise ValueError(f"not a decimal integer: {raw!r}")
    return int(raw, 10)


def encode_body(kind: str, body: dict) -> dict:
    schema = KINDS[kind][1]
    out = {}
    for name, value in body.items():
        base, is_list = _base_type(schema[name])
        out[name] = [_encode_value(v, base) for v in value] if is_list else _encode_value(value, base)
    return out


def decode_body(kind: str, raw: dict) -> dict:
    schema = KINDS[kind][1]
    out = {}
    for name, value in raw.items():
        if name not in schema:
            raise ValueError(f"unknown field {name!r} for kind {kind!r}")
        base, is_list = _base_type(schema[name])
        if is_list:
            if not isinstance(value, list):
                raise ValueError(f"field {name!r} must be a list")
            out[name] = [_decode_value(v, base) for v in value]
        else:
            out[name] = _decode_value(value, base)
    return out


def encode_record(record: Record) -> str:
    obj = {
        "seq": str(record.seq),
        "phase": record.phase,
        "channel": Channel(record.channel).value,
        "from": record.sender,
        "to": record.receiver,
        "kind": record.kind,
        "body": dict(sorted(encode_body(record.kind, record.body).items())),
    }
    return json.dumps(obj, separators=(",", ":"))


def decode_record(line: str, lineno: int | None = None) -> Record:
    try:
        obj = json.loads(line)
    except json.JSONDecodeError as exc:
        raise TranscriptParseError(f"invalid JSON: {exc.msg}", line=lineno) from None
    seq = obj.get("seq") if isinstance(obj, dict) else None
    if isinstance(seq, str) and seq.isdigit():
        seq = int(seq)
    try:
        if not isinstance(obj, dict):
            raise ValueError("record must be an object")
        expected = {"seq", "phase", "channel", "from", "to", "kind", "body"}
        if set(obj) != expected:
            raise ValueError(f"record keys {sorted(obj)} != {sorted(expected)}")
        kind = obj["kind"]
        if kind not in KINDS:
            raise ValueError(f"unknown kind {kind!r}")
        if obj["phase"] not in PHASE_INDEX:
            raise ValueError(f"unknown phase {obj['phase']!r}")
        if not isinstance(obj["body"], dict):
            raise ValueError("body must be an object")
        record = Record(
            seq=_decode_value(obj["seq"], "int"),
            phase=obj["phase"],
            channel=Channel(obj["channel"]),
            sender=str(obj["from"]),
            receiver=str(obj["to"]),
            kind=kind,
            body=decode_body(kind, obj["body"]),
        )
    except (ValueError, TypeError) as exc:
        raise TranscriptParseError(str(exc), seq=seq, line=lineno) from None
    return record


def dump_transcript(records: Iterable[Record]) -> str:
    return "".join(encode_record(r) + "\n" for r in records)


def load_transcript(text: str) -> list[Record]:
    records = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        if line.strip():
            records.append(decode_record(line, lineno))
    if text and not text.endswith("\n"):
        raise TranscriptParseError("transcript is truncated (no trailing newline)", line=len(text.splitlines()))
    return records
