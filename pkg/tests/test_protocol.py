import random

import pytest

from knapsack_auction.errors import ParameterError
from knapsack_auction.harness import AdversaryScript, Bus, run_auction
from knapsack_auction.knapsack import PriceTable
from knapsack_auction.protocol import Aborted, AuctionConfig, Winner
from knapsack_auction.protocol.parties import Seller, WinnerClaim, detect_tie, verify_winner_claim
from knapsack_auction.protocol.session import MAX_TIE_ROUNDS, AuctionSession
from helpers import ATTACKS, golden_run_config, run_golden
from oracles import auction_result, subset_sums, winner_of

PRICES = (10, 20, 30, 40, 50, 60, 70, 80)


def _session(mode="honest", script=None, **overrides):
    rc = golden_run_config(mode, **overrides)
    script = AdversaryScript.from_dict(script)
    bus = Bus(rc.auction.n, rc.auction.params.q, script)
    session = AuctionSession(rc.auction, bus, script.corrupt, rc.rebids, script.dropouts)
    return rc, session, bus


@pytest.mark.parametrize("mode", ["honest", "malicious"])
def test_worked_example_intermediate_values(mode):
    rc, session, _ = _session(mode)
    outcome = session.run(rc.bids)
    assert [session.bidders[j].code for j in range(1, 5)] == [710, 103, 221, 111]
    assert [session.bidders[j].sigma for j in range(1, 5)] == [290, 535, 294, 26]
    assert session.seller.sigma_k == 394
    assert outcome.flags == (1, 0, 1, 1, 0, 0, 0, 1)
    assert (outcome.highest, outcome.second, outcome.winner, outcome.paid) == (80, 40, 4, 40)


def test_first_price_rule():
    _, outcome, _ = run_golden(payment_rule="first-price")
    assert outcome.paid == 80


def test_lone_flag_pays_lowest_price_under_second_price():
    # distinct bids from two or more bidders always set two flags, so drive settle directly
    _, session, _ = _session()
    session.announced = {"flags": [0, 0, 0, 0, 0, 0, 0, 1]}
    outcome = session.settle(4)
    assert (outcome.highest, outcome.second, outcome.paid) == (80, None, 10)


@pytest.mark.parametrize("mode", ["honest", "malicious"])
@pytest.mark.parametrize("seed", range(20))
def test_random_auctions_match_oracle(mode, seed, toy):
    rng = random.Random(seed)
    n = rng.randint(2, 6)
    k = rng.randint(n, 9)
    prices = tuple(sorted(rng.sample(range(1, 1000), k)))
    bids = rng.sample(range(1, k + 1), n)
    config = AuctionConfig(toy, prices, n, mode=mode, seed=f"r{seed}")
    outcome, _ = run_auction(config, bids)
    flags, highest, second = auction_result(bids, prices)
    assert isinstance(outcome, Winner)
    assert outcome.flags == flags
    assert (outcome.highest, outcome.second) == (highest, second)
    assert outcome.winner == winner_of(bids)


class TestDetectionMatrix:
    EXPECTED = {
        "wrong_ot_slot": ("ot_code", "S", Aborted),
        "forged_zeta": ("proof1_membership", "B2", Winner),
        "mutated_share": ("share", "B2", Winner),
        "wrong_sigma": ("sigma", "B1", Aborted),
        "lying_flags": ("proof2", "S", Aborted),
    }

    @pytest.mark.parametrize("attack", sorted(EXPECTED))
    def test_malicious_mode_names_the_culprit(self, attack):
        check, culprit, kind = self.EXPECTED[attack]
        _, outcome, _ = run_golden("malicious", ATTACKS[attack])
        assert isinstance(outcome, kind)
        assert [(d.check, d.culprit) for d in outcome.detections] == [(check, culprit)]
        if isinstance(outcome, Aborted):
            assert outcome.culprit == culprit

    @pytest.mark.parametrize("attack", sorted(EXPECTED))
    def test_honest_mode_detects_nothing(self, attack):
        _, outcome, _ = run_golden("honest", ATTACKS[attack])
        assert isinstance(outcome, Winner)
        assert outcome.detections == ()

    def test_honest_mode_outcomes_are_silently_wrong(self):
        results = {a: run_golden("honest", ATTACKS[a])[1] for a in self.EXPECTED}
        assert results["wrong_ot_slot"].flags == (0, 1, 1, 1, 0, 0, 0, 1)
        # +40 on one share adds the 50-price code to the sum
        assert results["mutated_share"].flags == (1, 0, 1, 1, 1, 0, 0, 1)
        assert results["mutated_share"].second == 50
        assert results["lying_flags"].flags == (1, 1, 1, 1, 0, 0, 0, 1)
        assert results["forged_zeta"].flags == (1, 0, 1, 1, 0, 0, 0, 1)

    def test_disqualified_forger_loses_its_bid(self):
        _, outcome, records = run_golden("malicious", ATTACKS["forged_zeta"])
        flags, highest, second = auction_result([3, 4, 8], PRICES)
        assert outcome.flags == flags and (outcome.highest, outcome.second) == (highest, second)
        assert any(r.kind == "disqualify" and r.body["bidders"] == [2] for r in records)

    def test_false_claim_is_refused(self):
        _, outcome, records = run_golden("malicious", {"corrupt": {"B1": {"false_claim": True}}})
        assert isinstance(outcome, Winner) and outcome.winner == 4
        assert [(d.check, d.culprit) for d in outcome.detections] == [("claim", "B1")]
        verdicts = [r.body for r in records if r.kind == "claim_verdict"]
        assert verdicts == [{"claimant": 1, "status": "REJ"}, {"claimant": 4, "status": "ACC"}]


def test_winner_claim_check():
    rc = golden_run_config()
    seller = Seller(rc.auction, random.Random(0))
    seller.flags = (1, 0, 1, 1, 0, 0, 0, 1)
    assert verify_winner_claim(seller, WinnerClaim(4, 111))
    assert not verify_winner_claim(seller, WinnerClaim(4, 710))
    assert not verify_winner_claim(seller, WinnerClaim(1, 710))


class TestTies:
    def test_tie_found_before_sharing_and_resolved(self):
        _, outcome, records = run_golden("malicious", bids=[3, 1, 3, 8], rebids=[{3: 4}])
        kinds = [r.kind for r in records]
        assert kinds.index("rebid") < kinds.index("share_commits")
        assert isinstance(outcome, Winner)
        assert outcome.flags == auction_result([3, 1, 4, 8], PRICES)[0]

    def test_tie_at_the_top(self):
        _, outcome, _ = run_golden("malicious", bids=[8, 1, 3, 8], rebids=[{1: 7}])
        assert (outcome.highest, outcome.second, outcome.winner) == (80, 70, 4)

    def test_tie_needs_several_rounds(self):
        _, outcome, records = run_golden("malicious", bids=[3, 1, 3, 8], rebids=[{}, {1: 2}])
        assert [r.body["round"] for r in records if r.kind == "rebid"] == [1, 2]
        assert isinstance(outcome, Winner)

    def test_persistent_tie_aborts(self):
        _, outcome, records = run_golden("malicious", bids=[3, 1, 3, 8])
        assert isinstance(outcome, Aborted) and outcome.reason == "tie_unresolved"
        assert len([r for r in records if r.kind == "rebid"]) == MAX_TIE_ROUNDS

    def test_honest_mode_tie_is_unsolvable(self):
        codes = (3, 5, 10, 21, 40, 90, 180, 360)
        assert (10 + 3 + 10 + 360) not in subset_sums(codes)
        _, outcome, _ = run_golden("honest", bids=[3, 1, 3, 8])
        assert isinstance(outcome, Aborted) and outcome.reason == "unsolvable_knapsack"

    def test_detect_tie(self, toy):
        neg = {j: pow(toy.g_b, -r % toy.q, toy.p) for j, r in enumerate((700, 100, 200, 502), start=1)}
        zeta = {1: pow(toy.g_b, 710, toy.p), 2: pow(toy.g_b, 103, toy.p), 3: pow(toy.g_b, 210, toy.p),
                4: pow(toy.g_b, 111, toy.p)}
        assert detect_tie(zeta, neg, toy) == [(1, 3)]
        zeta[3] = pow(toy.g_b, 221, toy.p)
        assert detect_tie(zeta, neg, toy) == []


class TestDropouts:
    @pytest.mark.parametrize("mode", ["honest", "malicious"])
    @pytest.mark.parametrize("phase,case", [("ot", 1), ("commit", 2), ("sharing", 2), ("sigma", 3)])
    @pytest.mark.parametrize("who", [1, 3, 4])
    def test_survivors_outcome_matches_oracle(self, mode, phase, case, who):
        script = {"rules": [{"action": "drop-participant", "match": {"phase": phase, "sender": f"B{who}"}}]}
        _, outcome, records = run_golden(mode, script)
        bids = [b for j, b in enumerate([3, 1, 4, 8], start=1) if j != who]
        flags, highest, second = auction_result(bids, PRICES)
        assert isinstance(outcome, Winner)
        assert (outcome.flags, outcome.highest, outcome.second) == (flags, highest, second)
        drops = [r.body for r in records if r.kind == "dropout"]
        assert drops == [{"bidder": who, "case": case}]

    def test_case_three_forces_reshare(self):
        script = {"rules": [{"action": "drop-participant", "match": {"phase": "sigma", "sender": "B2"}}]}
        _, _, records = run_golden("malicious", script)
        reshare = [r.body for r in records if r.kind == "reshare"]
        assert reshare == [{"bidders": [1, 3, 4]}]

    def test_last_unserved_bidder_drops(self):
        # nobody is left to absorb r_4, so its bid is discarded and r_4 re-added by the seller
        script = {"rules": [{"action": "drop-message", "match": {"kind": "ot_request", "sender": "B4"}}]}
        _, outcome, records = run_golden("honest", script)
        flags, highest, second = auction_result([3, 1, 4], PRICES)
        assert (outcome.flags, outcome.highest) == (flags, highest)
        result = next(r for r in records if r.kind == "result")
        assert result.body["discarded"] == [4]

    def test_case_one_republishes_randomizer(self):
        script = {"rules": [{"action": "drop-participant", "match": {"phase": "ot", "sender": "B1"}}]}
        _, _, records = run_golden("malicious", script)
        update = next(r for r in records if r.kind == "randomizer_update")
        assert update.body["removed"] == [1]

    def test_quorum(self):
        script = {"rules": [{"action": "drop-participant", "match": {"phase": "ot", "sender": f"B{j}"}}
                            for j in (1, 2, 3)]}
        _, outcome, _ = run_golden("honest", script)
        assert isinstance(outcome, Aborted) and outcome.reason == "too_few_bidders"

    def test_silent_seller_aborts(self):
        script = {"rules": [{"action": "drop-message", "match": {"kind": "result"}}]}
        _, outcome, _ = run_golden("honest", script)
        assert isinstance(outcome, Aborted) and outcome.culprit == "S"


class TestConfig:
    def test_bid_count_must_match(self):
        rc = golden_run_config()
        with pytest.raises(ValueError):
            run_auction(rc.auction, [1, 2, 3])

    @pytest.mark.parametrize("kwargs", [
        {"n": 1},
        {"mode": "paranoid"},
        {"payment_rule": "third-price"},
        {"codes": (3, 5)},
        {"randomizers": (1, 2, 3, 744)},
        {"randomizers": (700, 51)},
        {"shares": ((1, 2), (3, 4))},
    ])
    def test_invalid_configs(self, toy, kwargs):
        base = dict(params=toy, prices=PRICES, n=4)
        with pytest.raises(ParameterError):
            AuctionConfig(**{**base, **kwargs})

    def test_mode_alias(self, toy):
        assert AuctionConfig(toy, PRICES, 2, mode="malicious-detecting").mode == "malicious"

    def test_role_seeds_can_be_overridden(self, toy):
        config = AuctionConfig(toy, PRICES, 2, seeds={"S": "fixed"})
        assert config.role_seed("S") == b"fixed"
        assert config.role_seed("B1") != config.role_seed("B2")

    def test_price_table_coercion(self, toy):
        assert isinstance(AuctionConfig(toy, PRICES, 2).prices, PriceTable)
