"""JSON run-configuration files.

A run file is one JSON object. Required keys: ``prices``, ``n`` and ``bids``.
Optional keys: ``group`` (``"toy"`` or an object of decimal strings; default
``"toy"``), ``mode``, ``payment_rule``, ``seed``, ``seeds``, ``codes``,
``randomizers``, ``shares``, ``rebids`` and ``script``. Unknown keys are
rejected.
"""

from __future__ import annotations

import json
import random
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

from .errors import AuctionError, ConfigError
from .group import GroupParams, toy_group_params
from .harness.bus import AdversaryScript
from .protocol.parties import AuctionConfig

KEYS = frozenset({"group", "prices", "n", "mode", "payment_rule", "seed", "seeds", "codes", "randomizers",
                  "shares", "bids", "rebids", "script"})


@dataclass
class RunConfig:
    auction: AuctionConfig
    bids: list[int]
    script: dict = field(default_factory=dict)
    rebids: list[dict[int, int]] = field(default_factory=list)

    def adversary(self) -> AdversaryScript:
        return AdversaryScript.from_dict(self.script)


def _ints(value: Any, name: str) -> tuple[int, ...]:
    if not isinstance(value, list) or not all(isinstance(v, int) and not isinstance(v, bool) for v in value):
        raise ConfigError(f"{name} must be a list of integers")
    return tuple(value)


def _group(value: Any) -> GroupParams:
    if value in (None, "toy"):
        return toy_group_params()
    if isinstance(value, dict):
        return GroupParams.from_dict(value)
    raise ConfigError('group must be "toy" or an object of decimal strings')


def _bids(value: Any, n: int, k: int) -> list[int]:
    if isinstance(value, str):
        if not value.startswith("random:"):
            raise ConfigError('bids must be a list or "random:<seed>"')
        if n > k:
            raise ConfigError("cannot draw distinct random bids: more bidders than prices")
        return random.Random(value[len("random:"):]).sample(range(1, k + 1), n)
    bids = list(_ints(value, "bids"))
    if len(bids) != n:
        raise ConfigError(f"{n} bidders but {len(bids)} bids")
    if any(not 1 <= b <= k for b in bids):
        raise ConfigError(f"bids must be price indices in 1..{k}")
    return bids


def _rebids(value: Any) -> list[dict[int, int]]:
    if not isinstance(value, list):
        raise ConfigError("rebids must be a list of objects")
    out = []
    for entry in value:
        if not isinstance(entry, dict):
            raise ConfigError("each rebid round maps bidder numbers to new indices")
        try:
            out.append({int(j): int(b) for j, b in entry.items()})
        except (TypeError, ValueError):
            raise ConfigError("rebid entries must be integers") from None
    return out


def parse_run_config(data: Any, mode: str | None = None) -> RunConfig:
    """Build a run configuration from decoded JSON; ``mode`` overrides the file."""
    if not isinstance(data, dict):
        raise ConfigError("configuration must be a JSON object")
    unknown = set(data) - KEYS
    if unknown:
        raise ConfigError(f"unknown configuration keys {sorted(unknown)}")
    missing = {"prices", "n", "bids"} - set(data)
    if missing:
        raise ConfigError(f"missing configuration keys {sorted(missing)}")
    n = data["n"]
    if not isinstance(n, int) or isinstance(n, bool):
        raise ConfigError("n must be an integer")
    seeds = data.get("seeds", {})
    if not isinstance(seeds, dict):
        raise ConfigError("seeds must map role names to strings")
    try:
        shares = data.get("shares")
        auction = AuctionConfig(
            params=_group(data.get("group")),
            prices=_ints(data["prices"], "prices"),
            n=n,
            mode=mode or data.get("mode", "malicious"),
            payment_rule=data.get("payment_rule", "second-price"),
            seed=str(data.get("seed", "auction")),
            seeds={str(k): str(v) for k, v in seeds.items()},
            codes=_ints(data["codes"], "codes") if "codes" in data else None,
            randomizers=_ints(data["randomizers"], "randomizers") if "randomizers" in data else None,
            shares=tuple(_ints(row, "shares") for row in shares) if shares is not None else None,
        )
        bids = _bids(data["bids"], n, auction.k)
        script = data.get("script") or {}
        AdversaryScript.from_dict(script)
    except ConfigError:
        raise
    except (AuctionError, ValueError, TypeError) as exc:
        raise ConfigError(str(exc)) from None
    return RunConfig(auction, bids, script, _rebids(data.get("rebids", [])))


def load_run_config(path: str | Path, mode: str | None = None) -> RunConfig:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc.strerror}") from None
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: invalid JSON ({exc.msg} at line {exc.lineno})") from None
    return parse_run_config(data, mode)


def golden_config() -> dict:
    """The worked eight-price, four-bidder scenario with every secret pinned."""
    return {
        "group": "toy",
        "prices": [10, 20, 30, 40, 50, 60, 70, 80],
        "n": 4,
        "mode": "honest",
        "payment_rule": "second-price",
        "seed": "golden",
        "codes": [3, 5, 10, 21, 40, 90, 180, 360],
        "randomizers": [700, 100, 200, 502],
        "shares": [[100, 400, 200, 10], [10, 50, 40, 3], [150, 50, 19, 2], [30, 35, 35, 11]],
        "bids": [3, 1, 4, 8],
    }
