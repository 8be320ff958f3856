"""Shared scenario builders for the protocol tests."""

from knapsack_auction.config import golden_config, parse_run_config
from knapsack_auction.harness import run_auction


def golden_run_config(mode="honest", **overrides):
    data = golden_config()
    data.update(overrides)
    return parse_run_config(data, mode)


def run_golden(mode="honest", script=None, **overrides):
    rc = golden_run_config(mode, **overrides)
    outcome, records = run_auction(rc.auction, rc.bids, script, rc.rebids)
    return rc, outcome, records


ATTACKS = {
    "wrong_ot_slot": {"corrupt": {"S": {"swap_ot_slots": [1, 2]}}},
    "forged_zeta": {"corrupt": {"B2": {"forge_zeta": True}}},
    "mutated_share": {"rules": [{"action": "mutate-field", "path": "d", "add": 40,
                                 "match": {"kind": "share", "sender": "B2", "receiver": "B3"}}]},
    "wrong_sigma": {"rules": [{"action": "mutate-field", "path": "sigma", "add": 5,
                               "match": {"kind": "sigma", "sender": "B1"}}]},
    "lying_flags": {"rules": [{"action": "mutate-field", "path": "flags.1", "value": 1,
                               "match": {"kind": "result"}}]},
}
