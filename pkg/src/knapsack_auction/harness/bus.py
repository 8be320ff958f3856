"""Deterministic in-process message bus with wire-level adversary rules."""

from __future__ import annotations

import copy
from collections import defaultdict
from dataclasses import dataclass, field
from typing import Any

from ..errors import ScriptError
from ..messages import (
    ALL_BIDDERS,
    EVERYONE,
    HARNESS,
    KINDS,
    PHASE_INDEX,
    SELLER,
    Channel,
    Record,
    bidder_id,
    bidder_index,
    field_type,
)

ACTIONS = ("mutate-field", "drop-message", "drop-participant", "replace-payload")
MATCH_KEYS = ("phase", "sender", "receiver", "kind")
DROP_PHASES = ("ot", "commit", "sharing", "sigma")
SELLER_CORRUPTIONS = {"swap_ot_slots"}
BIDDER_CORRUPTIONS = {"forge_zeta", "false_claim"}


@dataclass
class Rule:
    action: str
    match: dict[str, str] = field(default_factory=dict)
    path: list[str] = field(default_factory=list)
    value: Any = None
    add: int | None = None
    payload: dict | None = None
    repeat: bool = False
    fired: int = 0

    def matches(self, record: Record) -> bool:
        if self.fired and not self.repeat:
            return False
        probe = {"phase": record.phase, "sender": record.sender, "receiver": record.receiver, "kind": record.kind}
        return all(probe[k] == v for k, v in self.match.items())

    @classmethod
    def from_dict(cls, data: dict) -> "Rule":
        if not isinstance(data, dict):
            raise ScriptError("rule must be an object")
        unknown = set(data) - {"action", "match", "path", "value", "add", "payload", "repeat"}
        if unknown:
            raise ScriptError(f"unknown rule keys {sorted(unknown)}")
        action = data.get("action")
        if action not in ACTIONS:
            raise ScriptError(f"unknown action {action!r}")
        match = dict(data.get("match") or {})
        bad = set(match) - set(MATCH_KEYS)
        if bad:
            raise ScriptError(f"unknown match keys {sorted(bad)}")
        if "phase" in match and match["phase"] not in PHASE_INDEX:
            raise ScriptError(f"unknown phase {match['phase']!r}")
        if "kind" in match and match["kind"] not in KINDS:
            raise ScriptError(f"unknown kind {match['kind']!r}")
        raw_path = data.get("path", "")
        path = [p for p in str(raw_path).split(".") if p] if raw_path != "" else []
        rule = cls(action=action, match=match, path=path, value=data.get("value"), add=data.get("add"),
                   payload=data.get("payload"), repeat=bool(data.get("repeat", False)))
        rule._check()
        return rule

    def _check(self):
        if self.action == "mutate-field":
            kind = self.match.get("kind")
            if kind is None:
                raise ScriptError("mutate-field needs match.kind to resolve its path")
            if not self.path:
                raise ScriptError("mutate-field needs a path")
            ftype = field_type(kind, self.path[0])
            if ftype is None:
                raise ScriptError(f"kind {kind!r} has no field {self.path[0]!r}")
            is_list = ftype.endswith("s") and ftype != "str"
            if is_list and (len(self.path) != 2 or not self.path[1].lstrip("-").isdigit()):
                raise ScriptError(f"list field {self.path[0]!r} needs one integer index")
            if not is_list and len(self.path) != 1:
                raise ScriptError(f"field {self.path[0]!r} is not a list")
            if (self.value is None) == (self.add is None):
                raise ScriptError("mutate-field needs exactly one of value/add")
            if self.add is not None and ftype.rstrip("s") in ("hex", "str"):
                raise ScriptError("add only applies to integer fields")
        elif self.action == "replace-payload":
            kind = self.match.get("kind")
            if kind is None or not isinstance(self.payload, dict):
                raise ScriptError("replace-payload needs match.kind and a payload object")
            extra = set(self.payload) - set(KINDS[kind][1])
            if extra:
                raise ScriptError(f"payload fields {sorted(extra)} not defined for {kind!r}")
        elif self.action == "drop-participant":
            phase = self.match.get("phase")
            if phase not in DROP_PHASES:
                raise ScriptError(f"drop-participant needs match.phase in {DROP_PHASES}")
            if bidder_index(self.match.get("sender", "")) is None:
                raise ScriptError("drop-participant needs match.sender naming a bidder")


def _coerce(value, ftype: str):
    base = ftype[:-1] if ftype.endswith("s") and ftype != "str" else ftype
    if base == "hex":
        return bytes.fromhex(value) if isinstance(value, str) else bytes(value)
    if base == "str":
        return str(value)
    return int(value)


@dataclass
class AdversaryScript:
    """Wire rules plus optional corrupt-party behaviour switches.

    ``corrupt`` maps a role id to flags: the seller accepts
    ``swap_ot_slots: [a, b]``; bidders accept ``forge_zeta`` and ``false_claim``.
    """

    rules: list[Rule] = field(default_factory=list)
    corrupt: dict[str, dict] = field(default_factory=dict)

    @classmethod
    def from_dict(cls, data: dict | None) -> "AdversaryScript":
        if not data:
            return cls()
        if not isinstance(data, dict):
            raise ScriptError("script must be an object")
        unknown = set(data) - {"rules", "corrupt"}
        if unknown:
            raise ScriptError(f"unknown script keys {sorted(unknown)}")
        rules = [Rule.from_dict(r) for r in data.get("rules") or []]
        corrupt = dict(data.get("corrupt") or {})
        for role, flags in corrupt.items():
            if not isinstance(flags, dict):
                raise ScriptError(f"corruption for {role} must be an object")
            allowed = SELLER_CORRUPTIONS if role == SELLER else BIDDER_CORRUPTIONS
            if role != SELLER and bidder_index(role) is None:
                raise ScriptError(f"unknown role {role!r}")
            bad = set(flags) - allowed
            if bad:
                raise ScriptError(f"unsupported corruption {sorted(bad)} for {role}")
            if "swap_ot_slots" in flags:
                slots = flags["swap_ot_slots"]
                if not (isinstance(slots, list) and len(slots) == 2 and all(isinstance(s, int) for s in slots)):
                    raise ScriptError("swap_ot_slots must be two integers")
        return cls(rules, corrupt)

    def corruption(self, role: str) -> dict:
        return self.corrupt.get(role, {})

    def dropouts(self, phase: str) -> list[int]:
        """Bidders scheduled to leave at the start of ``phase`` (consumed once)."""
        out = []
        for rule in self.rules:
            if rule.action == "drop-participant" and rule.match.get("phase") == phase and not rule.fired:
                rule.fired += 1
                out.append(bidder_index(rule.match["sender"]))
        return out

    def apply(self, record: Record, q: int) -> bool:
        """Apply matching rules in place. Returns False if the message is dropped."""
        for rule in self.rules:
            if rule.action == "drop-participant" or not rule.matches(record):
                continue
            rule.fired += 1
            if rule.action == "drop-message":
                return False
            if rule.action == "replace-payload":
                schema = KINDS[record.kind][1]
                record.body = {}
                for name, value in rule.payload.items():
                    ftype = schema[name]
                    if ftype.endswith("s") and ftype != "str":
                        record.body[name] = [_coerce(v, ftype) for v in value]
                    else:
                        record.body[name] = _coerce(value, ftype)
            elif rule.action == "mutate-field":
                self._mutate(record, rule, q)
        return True

    @staticmethod
    def _mutate(record: Record, rule: Rule, q: int):
        name = rule.path[0]
        ftype = field_type(record.kind, name)
        if name not in record.body:
            raise ScriptError(f"seq {record.seq}: {record.kind} carries no field {name!r}")
        if len(rule.path) == 2:
            container, key = record.body[name], int(rule.path[1])
            if not -len(container) <= key < len(container):
                raise ScriptError(f"seq {record.seq}: index {key} out of range for {name!r}")
        else:
            container, key = record.body, name
        if rule.add is not None:
            new = container[key] + int(rule.add)
            container[key] = new % q if ftype.startswith("scalar") else new
        else:
            container[key] = _coerce(rule.value, ftype)


class Bus:
    """Sequences, records and routes every protocol message.

    Adversary rules run before recording, so the transcript shows what was
    actually delivered.
    """

    def __init__(self, n: int, q: int, script: AdversaryScript | None = None):
        self.q = q
        self.script = script or AdversaryScript()
        self.bidders = list(range(1, n + 1))
        self.records: list[Record] = []
        self.views: dict[str, list[int]] = defaultdict(list)

    def remove_bidder(self, j: int):
        if j in self.bidders:
            self.bidders.remove(j)

    def recipients(self, record: Record) -> list[str]:
        bidders = [bidder_id(j) for j in self.bidders]
        if record.channel is Channel.PUBLIC:
            return [r for r in [SELLER] + bidders if r != record.sender]
        if record.channel is Channel.BIDDERS:
            return [r for r in bidders if r != record.sender]
        return [record.receiver]

    def deliver(self, record: Record) -> list[str] | None:
        """Route one record. Returns the delivery set, or None when dropped."""
        if record.sender != HARNESS and not self.script.apply(record, self.q):
            return None
        record.seq = len(self.records) + 1
        self.records.append(record)
        to = self.recipients(record)
        for role in to:
            self.views[role].append(record.seq)
        return to

    def send(self, phase: str, channel: Channel, sender: str, receiver: str, kind: str, body: dict) -> dict | None:
        if channel is Channel.PUBLIC:
            receiver = EVERYONE
        elif channel is Channel.BIDDERS:
            receiver = ALL_BIDDERS
        expected = KINDS[kind][0]
        if channel is not expected:
            raise ValueError(f"{kind} travels on {expected.value}, not {channel.value}")
        record = Record(0, phase, channel, sender, receiver, kind, copy.deepcopy(body))
        if self.deliver(record) is None:
            return None
        return copy.deepcopy(record.body)

    def event(self, phase: str, kind: str, body: dict) -> Record:
        record = Record(0, phase, Channel.PUBLIC, HARNESS, EVERYONE, kind, copy.deepcopy(body))
        self.deliver(record)
        return record

    def seller_view(self) -> list[Record]:
        seen = set(self.views[SELLER])
        return [r for r in self.records if r.seq in seen or r.sender == SELLER]
