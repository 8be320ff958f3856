"""Phase drivers: who sends what, when, and what each party checks.

A session owns one seller, ``n`` bidders and a bus. Bidders share one view of
everything published to them (``self.bundle``); the seller only ever reads
messages the bus hands it. Any failure that ends the auction is raised as
:class:`AuctionAborted`.
"""

from __future__ import annotations

from typing import Callable, Mapping, Sequence

from ..errors import NoBids, UnsolvableKnapsack
from ..group import prod_mod
from ..knapsack import highest_index, winning_prices
from ..messages import ALL_BIDDERS, EVERYONE, SELLER, Channel, bidder_id
from ..ot import OtRequest, OtResponse
from ..sharing import CommitmentBundle, verify_row, verify_share, verify_zeta_membership
from ..zkp import EqdlProofSession, eqdl_verify, proof2_statement
from .parties import (
    ACC,
    REJ,
    AuctionAborted,
    AuctionConfig,
    Bidder,
    Detection,
    Seller,
    Winner,
    WinnerClaim,
    detect_tie,
)

MAX_TIE_ROUNDS = 3


class _Silent(Exception):
    """A bidder's message never arrived."""

    def __init__(self, j: int):
        super().__init__(j)
        self.j = j


class AuctionSession:
    def __init__(self, config: AuctionConfig, bus, corrupt: Mapping[str, dict] | None = None,
                 rebids: Sequence[Mapping[int, int]] = (), dropouts: Callable[[str], list[int]] | None = None):
        self.config = config
        self.params = config.params
        self.bus = bus
        self.corrupt = dict(corrupt or {})
        self.rebids = [dict(r) for r in rebids]
        self._dropouts = dropouts or (lambda phase: [])
        self.malicious = config.malicious
        self.seller: Seller | None = None
        self.bidders: dict[int, Bidder] = {}
        self.active: list[int] = []
        self.served: set[int] = set()
        self.bundle = CommitmentBundle()
        self.detections: list[Detection] = []
        self.sharing_started = False
        self.share_round = 0
        self.announced: dict | None = None
        self.winner: int | None = None

    # -- plumbing ------------------------------------------------------------

    def _send(self, phase, channel, sender, receiver, kind, body):
        return self.bus.send(phase, channel, sender, receiver, kind, body)

    def _from_seller(self, phase, channel, receiver, kind, body):
        got = self._send(phase, channel, SELLER, receiver, kind, body)
        if got is None:
            raise AuctionAborted("seller_unresponsive", SELLER, f"{kind} never arrived")
        return got

    def _from_bidder(self, phase, channel, j, receiver, kind, body):
        got = self._send(phase, channel, bidder_id(j), receiver, kind, body)
        if got is None:
            raise _Silent(j)
        return got

    def _detect(self, check: str, culprit: str, detector: str):
        self.detections.append(Detection(check, culprit, detector))

    def _ensure_quorum(self):
        if len(self.active) < 2:
            raise AuctionAborted("too_few_bidders", None, f"{len(self.active)} bidder(s) left")

    def _apply_scheduled_dropouts(self, phase: str) -> bool:
        dropped = [j for j in self._dropouts(phase) if j in self.active]
        for j in dropped:
            self.handle_dropout(phase, j)
        return bool(dropped)

    # -- setup ----------------------------------------------------------------

    def seller_init(self) -> dict:
        cfg = self.config
        self.seller = Seller(cfg, cfg.rng(SELLER), self.corrupt.get(SELLER))
        self.bidders = {j: Bidder(j, cfg, cfg.rng(bidder_id(j)), self.corrupt.get(bidder_id(j)))
                        for j in range(1, cfg.n + 1)}
        self.active = list(self.bidders)
        got = self._from_seller("init", Channel.PUBLIC, EVERYONE, "announce", self.seller.announcement())
        self.announced = got
        if self.malicious:
            self.bundle.eta = list(got.get("eta", []))
            self.bundle.xi = dict(zip(range(1, cfg.n + 1), got.get("xi", [])))
        return got

    def bidder_bid(self, j: int, price_index: int):
        self.bidders[j].bid(price_index)

    # -- dropouts -------------------------------------------------------------

    def handle_dropout(self, phase: str, j: int, check: str | None = None) -> int:
        """Remove bidder ``j`` and repair the randomizer bookkeeping.

        Case 1: before its transfer; ``r_j`` is folded into a bidder not yet
        served. Case 2: code received, no sharing yet; the bid is discarded.
        Case 3: sharing under way; the bid is discarded and the survivors must
        re-share. ``check`` marks a disqualification rather than a halt.
        """
        if j not in self.active:
            return 0
        self.active.remove(j)
        self.bus.remove_bidder(j)
        if j not in self.served:
            case = 1
            pending = [m for m in self.active if m not in self.served]
            absorbed = self.seller.drop_randomizer(j, pending)
            if absorbed is not None and self.malicious:
                xi = self.seller.xi(absorbed)
                got = self._from_seller(phase, Channel.PUBLIC, EVERYONE, "randomizer_update",
                                        {"removed": [j], "bidders": [absorbed], "xi": [xi]})
                self.bundle.xi.pop(j, None)
                self.bundle.xi.update(zip(got["bidders"], got["xi"]))
        else:
            case = 3 if self.sharing_started else 2
            self.seller.discard_bid(j)
        if check is None:
            self.bus.event(phase, "dropout", {"bidder": j, "case": case})
        self._ensure_quorum()
        return case

    def disqualify(self, phase: str, culprits: Sequence[int], check: str):
        culprits = sorted(set(culprits) & set(self.active))
        if not culprits:
            return
        self.bus.event(phase, "disqualify", {"bidders": culprits, "check": check})
        for j in culprits:
            self.handle_dropout(phase, j, check=check)

    # -- oblivious transfer ---------------------------------------------------

    def run_ot_phase(self, j: int) -> str | None:
        bidder = self.bidders[j]
        try:
            req = self._from_bidder("ot", Channel.PRIVATE, j, SELLER, "ot_request",
                                    {"y": bidder.request_code().y})
        except _Silent:
            self.handle_dropout("ot", j)
            return None
        resp = self.seller.respond_ot(j, OtRequest(req["y"]))
        got = self._from_seller("ot", Channel.PRIVATE, bidder_id(j), "ot_response",
                                {"u": list(resp.u), "v": list(resp.v)})
        if self.malicious:
            status = bidder.receive_code(OtResponse(tuple(got["u"]), tuple(got["v"])),
                                         self.bundle.eta, self.bundle.xi.get(j))
        else:
            status = bidder.receive_code(OtResponse(tuple(got["u"]), tuple(got["v"])))
        self.served.add(j)
        if not self.malicious:
            return None
        try:
            ack = self._from_bidder("ot", Channel.PUBLIC, j, EVERYONE, "ot_ack", {"status": status})
        except _Silent:
            self.handle_dropout("ot", j)
            return None
        self.seller.record_ack(j, ack["status"])
        if ack["status"] != ACC:
            self._detect("ot_code", SELLER, bidder_id(j))
            raise AuctionAborted("ot_rejected", SELLER, f"{bidder_id(j)} rejected its transferred code")
        return ack["status"]

    def run_ot_round(self, who: Sequence[int]):
        for j in list(who):
            if j in self.active:
                self.run_ot_phase(j)

    # -- commitments to codes, proof 1, ties ---------------------------------

    def run_commit_phase(self, who: Sequence[int] | None = None) -> list[tuple[int, ...]]:
        """Publish code commitments, check them against the seller's shuffled
        list, disqualify forgers and return tie groups among the rest."""
        who = list(self.active if who is None else who)
        for j in who:
            if j not in self.active:
                continue
            try:
                got = self._from_bidder("commit", Channel.BIDDERS, j, ALL_BIDDERS, "zeta",
                                        {"zeta": self.bidders[j].zeta()})
                self.bundle.zeta[j] = got["zeta"]
            except _Silent:
                self.handle_dropout("commit", j)
        setup = self._from_seller("commit", Channel.PUBLIC, EVERYONE, "proof1_setup", self.seller.proof1_setup())
        b = self.bundle
        b.shuffled_code_commits = list(setup["code_commits"])
        b.rand_commits = dict(zip(setup["bidders"], setup["rand_commits"]))
        b.neg_rand_commits = dict(zip(setup["bidders"], setup["neg_rand_commits"]))

        rejected = [j for j in self.active
                    if j not in b.neg_rand_commits
                    or not verify_zeta_membership(b.zeta.get(j, 0), b.neg_rand_commits[j],
                                                  b.shuffled_code_commits, self.params)]
        clean = {j: b.zeta[j] for j in self.active if j not in rejected}
        groups = detect_tie(clean, b.neg_rand_commits, self.params)
        tied = sorted(j for g in groups for j in g)
        flagged: set[int] = set()
        for v in list(self.active):
            try:
                got = self._from_bidder("commit", Channel.BIDDERS, v, ALL_BIDDERS, "proof1_verdict",
                                        {"rejected": rejected, "tied": tied})
            except _Silent:
                self.handle_dropout("commit", v)
                continue
            flagged.update(got["rejected"])
        for j in sorted(flagged):
            self._detect("proof1_membership", bidder_id(j), "bidders")
        self.disqualify("commit", sorted(flagged), "proof1_membership")
        return [g for g in (tuple(j for j in grp if j in self.active) for grp in groups) if len(g) > 1]

    def resolve_ties(self, groups: list[tuple[int, ...]]):
        """Re-run choice, transfer and commitment for tied bidders only."""
        rounds = 0
        while groups:
            if rounds == MAX_TIE_ROUNDS:
                raise AuctionAborted("tie_unresolved", None, f"still tied after {rounds} re-bid rounds: {groups}")
            rounds += 1
            tied = sorted({j for g in groups for j in g})
            self.bus.event("commit", "rebid", {"round": rounds, "bidders": tied})
            overrides = self.rebids[rounds - 1] if rounds <= len(self.rebids) else {}
            for j in tied:
                self.bidder_bid(j, overrides.get(j, self.bidders[j].choice))
                self.served.discard(j)
            fresh = self.seller.refresh(tied)
            if self.malicious:
                xi = [pow(self.params.g_s, r, self.params.p) for r in fresh]
                got = self._from_seller("commit", Channel.PUBLIC, EVERYONE, "randomizer_update",
                                        {"removed": [], "bidders": tied, "xi": xi})
                self.bundle.xi.update(zip(got["bidders"], got["xi"]))
            self.run_ot_round(tied)
            groups = self.run_commit_phase(who=[j for j in tied if j in self.active])

    # -- verifiable additive sharing -----------------------------------------

    def run_sharing_phase(self):
        """Split, commit, exchange and check shares until a round is clean."""
        while True:
            self.share_round += 1
            recipients = list(self.active)
            if self.share_round > 1:
                self.bus.event("sharing", "reshare", {"bidders": recipients})
            fixed = self.config.shares if self.share_round == 1 and len(recipients) == self.config.n else None
            silent: set[int] = set()
            for j in recipients:
                bidder = self.bidders[j]
                row = fixed[j - 1] if fixed else None
                # a pinned row only applies to the code it was written for
                if row is not None and sum(row) % self.params.q != bidder.code:
                    row = None
                shares = bidder.split(recipients, row)
                if self.malicious:
                    commits = [pow(self.params.g_b, shares[v], self.params.p) for v in recipients]
                    try:
                        got = self._from_bidder("sharing", Channel.BIDDERS, j, ALL_BIDDERS, "share_commits",
                                                {"recipients": recipients, "commits": commits})
                        self.bundle.share_commits[j] = dict(zip(got["recipients"], got["commits"]))
                    except _Silent:
                        silent.add(j)
            self.sharing_started = True
            for j in recipients:
                self.bidders[j].receive_share(j, self.bidders[j].outgoing[j])
            for j in recipients:
                if j in silent:
                    continue
                for v in recipients:
                    if v == j:
                        continue
                    got = self._send("sharing", Channel.PRIVATE, bidder_id(j), bidder_id(v), "share",
                                     {"d": self.bidders[j].outgoing[v]})
                    if got is None:
                        silent.add(j)
                    else:
                        self.bidders[v].receive_share(j, got["d"])
            bad: set[int] = set()
            if self.malicious:
                bad |= self._check_shares(recipients, silent)
            for j in sorted(silent):
                self.handle_dropout("sharing", j)
            if bad:
                self.disqualify("sharing", sorted(bad - silent), "share")
            if not (bad or silent):
                return

    def _check_shares(self, recipients: list[int], silent: set[int]) -> set[int]:
        b = self.bundle
        bad: set[int] = set()
        for j in recipients:
            row = b.share_commits.get(j)
            if j in silent or row is None:
                continue
            if list(row) != recipients or not verify_row(list(row.values()), b.zeta.get(j, 0), self.params):
                self._detect("share_row", bidder_id(j), "bidders")
                bad.add(j)
        for v in recipients:
            for j in recipients:
                if j == v or j in silent:
                    continue
                d = self.bidders[v].incoming.get(j)
                commit = b.share_commits.get(j, {}).get(v)
                ok = d is not None and commit is not None and verify_share(d, commit, self.params)
                got = self._send("sharing", Channel.BIDDERS, bidder_id(v), ALL_BIDDERS, "share_ack",
                                 {"sender": j, "status": ACC if ok else REJ})
                if got is not None and got["status"] == REJ:
                    self._detect("share", bidder_id(got["sender"]), bidder_id(v))
                    bad.add(got["sender"])
        return bad

    def run_sigma_phase(self) -> bool:
        """Deliver the additive shares of the knapsack value to the seller.

        Returns False when a bidder fell silent and the survivors must re-share.
        """
        for j in self.active:
            self.bidders[j].compute_sigma()
        b = self.bundle
        b.sigma_commits = {}
        silent = []
        if self.malicious:
            for j in self.active:
                try:
                    got = self._from_bidder("sigma", Channel.PUBLIC, j, EVERYONE, "sigma_commit",
                                            {"commit": pow(self.params.g_b, self.bidders[j].sigma, self.params.p)})
                    b.sigma_commits[j] = got["commit"]
                except _Silent:
                    silent.append(j)
            if not silent:
                wrong = [j for j in self.active
                         if prod_mod((b.share_commits[v][j] for v in self.active), self.params.p)
                         != b.sigma_commits[j]]
                flagged: set[int] = set()
                for v in self.active:
                    got = self._send("sigma", Channel.PUBLIC, bidder_id(v), EVERYONE, "sigma_verdict",
                                     {"rejected": wrong})
                    if got is not None:
                        flagged.update(got["rejected"])
                if flagged:
                    culprit = bidder_id(min(flagged))
                    for j in sorted(flagged):
                        self._detect("sigma_commit", bidder_id(j), "bidders")
                    raise AuctionAborted("sigma_commit_rejected", culprit, "published share sum does not match")
        if not silent:
            for j in self.active:
                got = self._send("sigma", Channel.PRIVATE, bidder_id(j), SELLER, "sigma",
                                 {"sigma": self.bidders[j].sigma})
                if got is None:
                    silent.append(j)
                    continue
                if not self.seller.accept_sigma(j, got["sigma"], b.sigma_commits.get(j)):
                    self._detect("sigma", bidder_id(j), SELLER)
                    raise AuctionAborted("sigma_rejected", bidder_id(j), "delivered share does not match its commitment")
        for j in silent:
            self.handle_dropout("sigma", j)
        if silent:
            self.seller.sigmas.clear()
            return False
        return True

    # -- solving and announcing -----------------------------------------------

    def seller_solve(self) -> dict:
        try:
            flags = self.seller.solve()
            highest, second = winning_prices(flags, self.config.prices)
        except UnsolvableKnapsack as exc:
            raise AuctionAborted("unsolvable_knapsack", None,
                                 f"{exc}; a tie among bids or a tampered share") from None
        except NoBids:
            raise AuctionAborted("no_bids", None, "no price was flagged") from None
        body = {"flags": list(flags), "highest": highest, "discarded": sorted(self.seller.discarded)}
        if second is not None:
            body["second"] = second
        self.announced = self._from_seller("solve", Channel.PUBLIC, EVERYONE, "result", body)
        return self.announced

    def announced_flags(self) -> tuple[int, ...]:
        flags = tuple(self.announced["flags"])
        if len(flags) != self.config.k or any(f not in (0, 1) for f in flags):
            raise AuctionAborted("bad_result", SELLER, "announced flag vector is malformed")
        return flags

    def run_claim_phase(self) -> int:
        flags = self.announced_flags()
        try:
            top = highest_index(flags)
        except NoBids:
            raise AuctionAborted("no_bids", None, "no price was flagged") from None
        for j in list(self.active):
            bidder = self.bidders[j]
            if not bidder.claims(top):
                continue
            got = self._send("claim", Channel.PRIVATE, bidder_id(j), SELLER, "claim", {"code": bidder.code})
            if got is None:
                continue
            ok = self.seller.verify_claim(WinnerClaim(j, got["code"]))
            self._from_seller("claim", Channel.PUBLIC, EVERYONE, "claim_verdict",
                              {"claimant": j, "status": ACC if ok else REJ})
            if ok:
                self.winner = j
                return j
            self._detect("claim", bidder_id(j), SELLER)
        raise AuctionAborted("no_valid_claim", None, "nobody proved ownership of the top code")

    def run_proof2(self, winner: int) -> bool:
        """The seller proves the announced flags match the summed shares."""
        w = bidder_id(winner)
        b = self.bundle
        flags = self.announced_flags()
        discarded = self.announced.get("discarded", [])
        statement = proof2_statement(b.eta, flags, [b.sigma_commits[j] for j in sorted(b.sigma_commits)],
                                     self.params, [b.rand_commits.get(j, 0) for j in discarded])
        a, bb = self.seller.proof2_commit()
        got = self._from_seller("proof2", Channel.PRIVATE, w, "eqdl_commit", {"a": a, "b": bb})
        challenge = self.bidders[winner].rng.randrange(1, self.params.q)
        ch = self._send("proof2", Channel.PRIVATE, w, SELLER, "eqdl_challenge", {"challenge": challenge})
        if ch is None:
            raise AuctionAborted("winner_unresponsive", w, "challenge never arrived")
        resp = self._from_seller("proof2", Channel.PRIVATE, w, "eqdl_response",
                                 {"response": self.seller.proof2_respond(ch["challenge"])})
        session = EqdlProofSession(got["a"], got["b"], challenge, resp["response"])
        ok = eqdl_verify(statement, session, self.params)
        verdict = self._send("proof2", Channel.PUBLIC, w, EVERYONE, "proof2_verdict", {"status": ACC if ok else REJ})
        if verdict is not None and verdict["status"] == REJ:
            self._detect("proof2", SELLER, w)
            raise AuctionAborted("proof2_failed", SELLER, "announced flags do not match the knapsack value")
        return ok

    def settle(self, winner: int) -> Winner:
        flags = self.announced_flags()
        highest, second = winning_prices(flags, self.config.prices)
        if self.config.payment_rule == "first-price":
            paid = highest
        else:
            paid = second if second is not None else self.config.prices.prices[0]
        return Winner(highest, second, winner, paid, flags, tuple(self.detections))

    # -- whole auction ----------------------------------------------------------

    def run(self, bids: Sequence[int]) -> Winner:
        if len(bids) != self.config.n:
            raise ValueError(f"expected {self.config.n} bids, got {len(bids)}")
        self.seller_init()
        for j, index in enumerate(bids, start=1):
            self.bidder_bid(j, index)
        self._apply_scheduled_dropouts("ot")
        self.run_ot_round(list(self.active))
        self._apply_scheduled_dropouts("commit")
        if self.malicious:
            self.resolve_ties(self.run_commit_phase())
        while True:
            self._apply_scheduled_dropouts("sharing")
            self.run_sharing_phase()
            if self._apply_scheduled_dropouts("sigma"):
                continue
            if self.run_sigma_phase():
                break
        self.seller_solve()
        winner = self.run_claim_phase()
        if self.malicious:
            self.run_proof2(winner)
        return self.settle(winner)
