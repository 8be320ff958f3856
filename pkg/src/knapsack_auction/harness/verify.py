"""Offline replay of a transcript against every publicly checkable equation.

The replayer walks the records in order, rebuilding what the bidders saw
(commitments, active set, randomizer updates) and re-running each check.
Private records are included because the harness captured them; the secrets
behind them (choices, blinding exponents, codes) never are.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from ..group import prod_mod
from ..knapsack import winning_prices
from ..messages import (
    ALL_BIDDERS,
    EVERYONE,
    HARNESS,
    HARNESS_KINDS,
    KINDS,
    PHASE_INDEX,
    PHASES,
    SELLER,
    Channel,
    Record,
    bidder_index,
)
from ..protocol.parties import ACC, AuctionConfig, detect_tie
from ..zkp import EqdlProofSession, EqdlStatement, eqdl_verify

# (sender role, receiver role) for point-to-point kinds; "B" is any bidder
PRIVATE_ROUTES = {
    "ot_request": ("B", "S"),
    "ot_response": ("S", "B"),
    "share": ("B", "B"),
    "sigma": ("B", "S"),
    "claim": ("B", "S"),
    "eqdl_commit": ("S", "B"),
    "eqdl_challenge": ("B", "S"),
    "eqdl_response": ("S", "B"),
}
SELLER_BROADCASTS = {"announce", "randomizer_update", "proof1_setup", "result", "claim_verdict"}

CHECKS = (
    "sequence",
    "channel_discipline",
    "phase_order",
    "group_membership",
    "announcement",
    "randomizer_sum",
    "ot_acceptance",
    "proof1_membership",
    "tie_detection",
    "share_commitments",
    "share_acceptance",
    "sigma_commitments",
    "result_consistency",
    "claim",
    "proof2",
    "outcome",
)
MALICIOUS_ONLY = {"randomizer_sum", "ot_acceptance", "proof1_membership", "tie_detection", "share_commitments",
                  "share_acceptance", "sigma_commitments", "claim", "proof2"}


@dataclass
class CheckResult:
    name: str
    passed: bool = True
    seq: int | None = None
    detail: str = ""
    failures: int = 0

    def line(self) -> str:
        if self.passed:
            return f"PASS {self.name}"
        return f"FAIL {self.name} seq={self.seq}: {self.detail}" + (
            f" (+{self.failures - 1} more)" if self.failures > 1 else "")


@dataclass
class VerificationReport:
    checks: list[CheckResult] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return all(c.passed for c in self.checks)

    @property
    def failures(self) -> list[CheckResult]:
        return [c for c in self.checks if not c.passed]

    def check(self, name: str) -> CheckResult:
        for c in self.checks:
            if c.name == name:
                return c
        raise KeyError(name)

    def lines(self) -> list[str]:
        return [c.line() for c in self.checks]


def _role_kind(role: str, n: int) -> str | None:
    if role == SELLER:
        return "S"
    if role == HARNESS:
        return "H"
    j = bidder_index(role)
    if j is not None and 1 <= j <= n:
        return "B"
    return None


class _Replayer:
    def __init__(self, config: AuctionConfig):
        self.cfg = config
        self.params = config.params
        self.malicious = config.malicious
        names = [c for c in CHECKS if self.malicious or c not in MALICIOUS_ONLY]
        self.results = {name: CheckResult(name) for name in names}
        n = config.n
        self.active = set(range(1, n + 1))
        self.removed_post_ot: set[int] = set()
        self.eta: list[int] = []
        self.xi: dict[int, int] = {}
        self.zeta: dict[int, int] = {}
        self.code_commits: list[int] = []
        self.rand: dict[int, int] = {}
        self.neg: dict[int, int] = {}
        self.share_commits: dict[int, dict[int, int]] = {}
        self.sigma_commits: dict[int, int] = {}
        self.result: Record | None = None
        self.claims: dict[int, int] = {}
        self.winner: int | None = None
        self.eqdl: dict[str, int] = {}
        self.outcome: Record | None = None
        self.served: set[int] = set()
        self.last_seq = 0
        self.phase_floor = 0
        self.reset_to: int | None = None

    def fail(self, name: str, record: Record | None, detail: str):
        res = self.results.get(name)
        if res is None:
            return
        res.failures += 1
        if res.passed:
            res.passed = False
            res.seq = record.seq if record is not None else None
            res.detail = detail

    # -- structural checks ---------------------------------------------------

    def structure(self, r: Record):
        if r.seq != self.last_seq + 1:
            self.fail("sequence", r, f"expected seq {self.last_seq + 1}")
        self.last_seq = r.seq

        channel, schema = KINDS[r.kind]
        n = self.cfg.n
        sender = _role_kind(r.sender, n)
        if r.channel is not channel:
            self.fail("channel_discipline", r, f"{r.kind} sent on {r.channel.value}")
        elif (r.kind in HARNESS_KINDS) != (sender == "H"):
            self.fail("channel_discipline", r, f"{r.kind} from unexpected role {r.sender}")
        elif channel is Channel.BIDDERS and (r.receiver != ALL_BIDDERS or sender != "B"):
            self.fail("channel_discipline", r, "bidder-only record leaves the bidder channel")
        elif channel is Channel.PUBLIC and r.receiver != EVERYONE:
            self.fail("channel_discipline", r, "public record with a single addressee")
        elif channel is Channel.PUBLIC and r.kind in SELLER_BROADCASTS and sender != "S":
            self.fail("channel_discipline", r, f"{r.kind} must come from the seller")
        elif channel is Channel.PUBLIC and r.kind not in SELLER_BROADCASTS | HARNESS_KINDS and sender != "B":
            self.fail("channel_discipline", r, f"{r.kind} must come from a bidder")
        elif channel is Channel.PRIVATE:
            want = PRIVATE_ROUTES[r.kind]
            got = (sender, _role_kind(r.receiver, n))
            if got != want or r.sender == r.receiver:
                self.fail("channel_discipline", r, f"{r.kind} routed {r.sender}->{r.receiver}")

        idx = PHASE_INDEX[r.phase]
        if idx < self.phase_floor:
            if self.reset_to is not None and idx >= self.reset_to:
                self.phase_floor = idx
                self.reset_to = None
            else:
                self.fail("phase_order", r, f"phase {r.phase} after {PHASES[self.phase_floor]}")
        else:
            self.phase_floor = idx
        if r.kind == "rebid":
            self.reset_to = PHASE_INDEX["ot"]
        elif r.kind in ("dropout", "disqualify", "reshare") and self.reset_to is None:
            self.reset_to = PHASE_INDEX["sharing"]

        for name, value in r.body.items():
            ftype = schema[name]
            if ftype.startswith("element"):
                values = value if isinstance(value, list) else [value]
                if not all(self.params.is_member(v) for v in values):
                    self.fail("group_membership", r, f"{name} holds a non-member")
            elif ftype.startswith("scalar") and not 0 <= value < self.params.q:
                self.fail("group_membership", r, f"{name} outside [0, q)")

    # -- protocol checks -----------------------------------------------------

    def on_announce(self, r: Record):
        b = r.body
        if b.get("prices") != list(self.cfg.prices.prices):
            self.fail("announcement", r, "price list differs from the configuration")
        if self.malicious:
            if len(b.get("eta", [])) != self.cfg.k or len(b.get("xi", [])) != self.cfg.n:
                self.fail("announcement", r, "wrong number of code or randomizer commitments")
            self.eta = list(b.get("eta", []))
            self.xi = dict(zip(range(1, self.cfg.n + 1), b.get("xi", [])))
            self._randomizer_sum(r)
        elif "eta" in b or "xi" in b:
            self.fail("announcement", r, "honest mode carries prices only")

    def _randomizer_sum(self, r: Record):
        if prod_mod(self.xi.values(), self.params.p) != 1:
            self.fail("randomizer_sum", r, "published randomizers do not sum to 0 mod q")

    def on_randomizer_update(self, r: Record):
        for j in r.body.get("removed", []):
            self.xi.pop(j, None)
        self.xi.update(zip(r.body.get("bidders", []), r.body.get("xi", [])))
        self._randomizer_sum(r)

    def on_ot_response(self, r: Record):
        j = bidder_index(r.receiver)
        if len(r.body.get("u", [])) != self.cfg.k or len(r.body.get("v", [])) != self.cfg.k:
            self.fail("channel_discipline", r, "transfer does not carry one slot per price")
        self.served.add(j)

    def on_ot_ack(self, r: Record):
        if r.body.get("status") != ACC:
            self.fail("ot_acceptance", r, f"{r.sender} rejected its code")

    def on_proof1_setup(self, r: Record):
        b = r.body
        self.code_commits = list(b["code_commits"])
        self.rand = dict(zip(b["bidders"], b["rand_commits"]))
        self.neg = dict(zip(b["bidders"], b["neg_rand_commits"]))
        if len(self.code_commits) != self.cfg.k:
            self.fail("proof1_membership", r, "shuffled list does not have one entry per price")
        for j in self.rand:
            if self.rand[j] * self.neg.get(j, 0) % self.params.p != 1:
                self.fail("proof1_membership", r, f"g_b^r and g_b^-r of B{j} do not cancel")
        members = set(self.code_commits)
        self.bad_zeta = set()
        for j in sorted(self.active):
            z = self.zeta.get(j)
            if z is None or j not in self.neg or z * self.neg[j] % self.params.p not in members:
                self.bad_zeta.add(j)
                self.fail("proof1_membership", r, f"commitment of B{j} matches no published code")
        clean = {j: self.zeta[j] for j in self.active if j not in self.bad_zeta}
        self.ties = sorted(j for g in detect_tie(clean, self.neg, self.params) for j in g)

    def on_proof1_verdict(self, r: Record):
        if sorted(r.body.get("tied", [])) != getattr(self, "ties", []):
            self.fail("tie_detection", r, f"{r.sender} reports ties {r.body.get('tied')}")
        if sorted(r.body.get("rejected", [])) != sorted(getattr(self, "bad_zeta", set())):
            self.fail("proof1_membership", r, f"{r.sender} verdict disagrees with replay")

    def on_share_commits(self, r: Record):
        j = bidder_index(r.sender)
        row = dict(zip(r.body["recipients"], r.body["commits"]))
        self.share_commits[j] = row
        if sorted(row) != sorted(self.active):
            self.fail("share_commitments", r, f"B{j} did not commit to one share per active bidder")
        if prod_mod(row.values(), self.params.p) != self.zeta.get(j):
            self.fail("share_commitments", r, f"share commitments of B{j} do not multiply to its code commitment")

    def on_share(self, r: Record):
        if not self.malicious:
            return
        j, v = bidder_index(r.sender), bidder_index(r.receiver)
        commit = self.share_commits.get(j, {}).get(v)
        if commit is None or pow(self.params.g_b, r.body["d"], self.params.p) != commit:
            self.fail("share_commitments", r, f"share B{j}->B{v} does not match its commitment")

    def on_share_ack(self, r: Record):
        if r.body.get("status") != ACC:
            self.fail("share_acceptance", r, f"{r.sender} rejected the share from B{r.body.get('sender')}")

    def on_sigma_commit(self, r: Record):
        j = bidder_index(r.sender)
        self.sigma_commits[j] = r.body["commit"]
        column = [self.share_commits.get(v, {}).get(j) for v in sorted(self.active)]
        if None in column or prod_mod(column, self.params.p) != r.body["commit"]:
            self.fail("sigma_commitments", r, f"published share sum of B{j} does not match the column")

    def on_sigma_verdict(self, r: Record):
        if r.body.get("rejected"):
            self.fail("sigma_commitments", r, f"{r.sender} rejected {r.body['rejected']}")

    def on_sigma(self, r: Record):
        if not self.malicious:
            return
        j = bidder_index(r.sender)
        if pow(self.params.g_b, r.body["sigma"], self.params.p) != self.sigma_commits.get(j):
            self.fail("sigma_commitments", r, f"delivered share of B{j} does not match its commitment")

    def on_result(self, r: Record):
        self.result = r
        b = r.body
        flags = b.get("flags", [])
        if len(flags) != self.cfg.k or any(f not in (0, 1) for f in flags) or not any(flags):
            self.fail("result_consistency", r, "malformed flag vector")
            return
        highest, second = winning_prices(flags, self.cfg.prices)
        if b.get("highest") != highest or b.get("second") != second:
            self.fail("result_consistency", r, "announced prices disagree with the flags")
        discarded = set(b.get("discarded", []))
        if not self.removed_post_ot <= discarded or not discarded <= set(range(1, self.cfg.n + 1)) - self.active:
            self.fail("result_consistency", r, "discarded bids disagree with the dropout record")

    def on_claim(self, r: Record):
        self.claims[bidder_index(r.sender)] = r.body["code"]

    def on_claim_verdict(self, r: Record):
        j = r.body.get("claimant")
        accepted = r.body.get("status") == ACC
        if accepted:
            self.winner = j
        if not self.malicious or self.result is None:
            return
        code = self.claims.get(j)
        flags = self.result.body.get("flags", [])
        top = max((i for i, f in enumerate(flags, start=1) if f), default=None)
        if code is None or top is None or j not in self.xi:
            self.fail("claim", r, f"verdict for B{j} without a matching claim")
            return
        valid = pow(self.params.g_s, code, self.params.p) == self.eta[top - 1] * self.xi[j] % self.params.p
        if not valid:
            self.fail("claim", r, f"B{j} claimed the item with a code that does not open the top commitment")
        if valid != accepted:
            self.fail("claim", r, f"claim of B{j} judged {'valid' if valid else 'invalid'} on replay")

    def on_eqdl(self, r: Record):
        self.eqdl.update(r.body)

    def on_proof2_verdict(self, r: Record):
        e = self.eqdl
        if self.result is None or not {"a", "b", "challenge", "response"} <= set(e):
            self.fail("proof2", r, "incomplete proof exchange")
            return
        flags = self.result.body["flags"]
        p = self.params.p
        v = prod_mod((h for h, f in zip(self.eta, flags) if f), p)
        w = prod_mod((self.sigma_commits[j] for j in sorted(self.sigma_commits)), p)
        w = w * prod_mod((self.rand.get(j, 0) for j in self.result.body.get("discarded", [])), p) % p
        statement = EqdlStatement(self.params.g_s, self.params.g_b, v, w)
        ok = eqdl_verify(statement, EqdlProofSession(e["a"], e["b"], e["challenge"], e["response"]), self.params)
        if not ok:
            self.fail("proof2", r, "flags do not match the committed knapsack value")
        if r.body.get("status") != ACC:
            self.fail("proof2", r, f"{r.sender} rejected the proof")

    def on_dropout(self, r: Record):
        j = r.body["bidder"]
        self.active.discard(j)
        if r.body.get("case") in (2, 3):
            self.removed_post_ot.add(j)

    def on_disqualify(self, r: Record):
        for j in r.body.get("bidders", []):
            self.active.discard(j)
            self.removed_post_ot.add(j)

    def on_reshare(self, r: Record):
        if sorted(r.body.get("bidders", [])) != sorted(self.active):
            self.fail("phase_order", r, "re-share set differs from the surviving bidders")
        self.share_commits = {}

    def on_zeta(self, r: Record):
        self.zeta[bidder_index(r.sender)] = r.body["zeta"]

    def on_outcome(self, r: Record):
        self.outcome = r
        b = r.body
        if b.get("status") == "winner":
            if self.result is None or self.winner is None:
                self.fail("outcome", r, "winner declared without result and accepted claim")
                return
            res = self.result.body
            if b.get("winner") != self.winner or b.get("highest") != res.get("highest") \
                    or b.get("second") != res.get("second"):
                self.fail("outcome", r, "winner record disagrees with the announced result")
            if self.cfg.payment_rule == "first-price":
                expected = res.get("highest")
            else:
                expected = res.get("second", self.cfg.prices.prices[0])
            if b.get("paid") != expected:
                self.fail("outcome", r, f"paid {b.get('paid')} but the payment rule gives {expected}")
        elif b.get("status") != "aborted" or "reason" not in b:
            self.fail("outcome", r, "malformed outcome")

    def finish(self, records: list[Record]):
        if self.outcome is None:
            self.fail("outcome", records[-1] if records else None, "transcript has no outcome record")
        elif records[-1] is not self.outcome:
            self.fail("outcome", records[-1], "records follow the outcome")


_HANDLERS = {
    "announce": "on_announce",
    "randomizer_update": "on_randomizer_update",
    "ot_response": "on_ot_response",
    "ot_ack": "on_ot_ack",
    "zeta": "on_zeta",
    "proof1_setup": "on_proof1_setup",
    "proof1_verdict": "on_proof1_verdict",
    "share_commits": "on_share_commits",
    "share": "on_share",
    "share_ack": "on_share_ack",
    "sigma_commit": "on_sigma_commit",
    "sigma_verdict": "on_sigma_verdict",
    "sigma": "on_sigma",
    "result": "on_result",
    "claim": "on_claim",
    "claim_verdict": "on_claim_verdict",
    "eqdl_commit": "on_eqdl",
    "eqdl_challenge": "on_eqdl",
    "eqdl_response": "on_eqdl",
    "proof2_verdict": "on_proof2_verdict",
    "dropout": "on_dropout",
    "disqualify": "on_disqualify",
    "reshare": "on_reshare",
    "outcome": "on_outcome",
}


def verify_transcript(records: list[Record], config: AuctionConfig) -> VerificationReport:
    """Replay every check that can be run from the recorded messages alone."""
    rp = _Replayer(config)
    for record in records:
        rp.structure(record)
        handler = _HANDLERS.get(record.kind)
        if handler is None:
            continue
        try:
            getattr(rp, handler)(record)
        except (KeyError, TypeError, ValueError, IndexError) as exc:
            rp.fail("channel_discipline", record, f"malformed {record.kind}: {exc!r}")
    rp.finish(records)
    return VerificationReport(list(rp.results.values()))


__all__ = ["CHECKS", "CheckResult", "VerificationReport", "verify_transcript"]
