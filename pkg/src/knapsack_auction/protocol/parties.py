"""Seller and bidder state, auction configuration and outcomes."""

from __future__ import annotations

import hashlib
import random
from dataclasses import dataclass, field
from typing import Mapping, Sequence

from ..errors import AuctionError, ParameterError
from ..group import GroupParams
from ..knapsack import CodeBook, PriceTable, generate_codes, highest_index, solve
from ..ot import (
    OtReceiverState,
    OtRequest,
    OtResponse,
    decode_scalar,
    encode_scalar,
    ot_recover,
    ot_request,
    ot_respond,
)
from ..sharing import (
    RandomizerSet,
    column_sum,
    generate_randomizers,
    randomize_code,
    refresh_randomizers,
    split_additive,
    verify_received_code,
)
from ..zkp import EqdlStatement, eqdl_commit, eqdl_respond

MODES = ("honest", "malicious")
PAYMENT_RULES = ("first-price", "second-price")
ACC, REJ = "ACC", "REJ"


@dataclass(frozen=True)
class AuctionConfig:
    """Everything needed to run one auction deterministically.

    ``codes``, ``randomizers`` and ``shares`` pin the otherwise random choices
    of the seller and the first sharing round; they exist to replay worked
    examples exactly.
    """

    params: GroupParams
    prices: PriceTable
    n: int
    mode: str = "malicious"
    payment_rule: str = "second-price"
    seed: str = "auction"
    seeds: Mapping[str, str] = field(default_factory=dict)
    codes: tuple[int, ...] | None = None
    randomizers: tuple[int, ...] | None = None
    shares: tuple[tuple[int, ...], ...] | None = None

    def __post_init__(self):
        if not isinstance(self.prices, PriceTable):
            object.__setattr__(self, "prices", PriceTable(tuple(self.prices)))
        if self.mode == "malicious-detecting":
            object.__setattr__(self, "mode", "malicious")
        if self.mode not in MODES:
            raise ParameterError(f"mode must be one of {MODES}")
        if self.payment_rule not in PAYMENT_RULES:
            raise ParameterError(f"payment_rule must be one of {PAYMENT_RULES}")
        if self.n < 2:
            raise ParameterError("at least two bidders are required")
        q = self.params.q
        if self.codes is not None:
            book = CodeBook(tuple(self.codes), q)
            if len(book) != self.k:
                raise ParameterError("one code per price is required")
        if self.randomizers is not None:
            rs = RandomizerSet(tuple(self.randomizers), q)
            if len(rs.r) != self.n:
                raise ParameterError("one randomizer per bidder is required")
        if self.shares is not None:
            rows = tuple(tuple(int(d) % q for d in row) for row in self.shares)
            if len(rows) != self.n or any(len(row) != self.n for row in rows):
                raise ParameterError("shares must be an n x n matrix")
            object.__setattr__(self, "shares", rows)

    @property
    def k(self) -> int:
        return len(self.prices)

    @property
    def malicious(self) -> bool:
        return self.mode == "malicious"

    def role_seed(self, role: str) -> bytes:
        if role in self.seeds:
            return str(self.seeds[role]).encode()
        return hashlib.sha256(f"{self.seed}|{role}".encode()).digest()

    def rng(self, role: str) -> random.Random:
        return random.Random(self.role_seed(role))


@dataclass(frozen=True)
class Detection:
    check: str
    culprit: str
    detector: str


@dataclass(frozen=True)
class Winner:
    highest: int
    second: int | None
    winner: int
    paid: int
    flags: tuple[int, ...]
    detections: tuple[Detection, ...] = ()

    status = "winner"


@dataclass(frozen=True)
class Aborted:
    reason: str
    culprit: str | None = None
    detail: str = ""
    detections: tuple[Detection, ...] = ()

    status = "aborted"


class AuctionAborted(AuctionError):
    def __init__(self, reason: str, culprit: str | None = None, detail: str = ""):
        super().__init__(f"{reason}" + (f" (culprit {culprit})" if culprit else "") + (f": {detail}" if detail else ""))
        self.reason = reason
        self.culprit = culprit
        self.detail = detail


@dataclass(frozen=True)
class WinnerClaim:
    claimant: int
    revealed: int


class Seller:
    def __init__(self, config: AuctionConfig, rng: random.Random, corrupt: dict | None = None):
        self.config = config
        self.params = config.params
        self.rng = rng
        q = self.params.q
        self.book = CodeBook(config.codes, q) if config.codes else generate_codes(config.k, q, rng)
        rs = RandomizerSet(config.randomizers, q) if config.randomizers else generate_randomizers(config.n, q, rng)
        self.randomizers: dict[int, int] = dict(enumerate(rs.r, start=1))
        self.discarded: list[int] = []
        self.acks: dict[int, str] = {}
        self.sigma_commits: dict[int, int] = {}
        self.sigmas: dict[int, int] = {}
        self.flags: tuple[int, ...] | None = None
        self.sigma_k: int | None = None
        self.swap = tuple((corrupt or {}).get("swap_ot_slots") or ())
        self._proof_nonce: int | None = None

    # -- publication -------------------------------------------------------

    def announcement(self) -> dict:
        body = {"prices": list(self.config.prices.prices)}
        if self.config.malicious:
            body["eta"] = [pow(self.params.g_s, c, self.params.p) for c in self.book.codes]
            body["xi"] = [self.xi(j) for j in sorted(self.randomizers)]
        return body

    def xi(self, j: int) -> int:
        return pow(self.params.g_s, self.randomizers[j], self.params.p)

    def proof1_setup(self) -> dict:
        p, g_b = self.params.p, self.params.g_b
        commits = [pow(g_b, c, p) for c in self.book.codes]
        self.rng.shuffle(commits)
        holders = sorted(self.randomizers)
        return {
            "code_commits": commits,
            "bidders": holders,
            "rand_commits": [pow(g_b, self.randomizers[j], p) for j in holders],
            "neg_rand_commits": [pow(g_b, -self.randomizers[j] % self.params.q, p) for j in holders],
        }

    # -- oblivious transfer ------------------------------------------------

    def ot_messages(self, j: int) -> list[bytes]:
        q, length = self.params.q, self.params.scalar_len
        codes = [randomize_code(c, self.randomizers[j], q) for c in self.book.codes]
        if self.swap:
            a, b = self.swap
            codes[a - 1], codes[b - 1] = codes[b - 1], codes[a - 1]
        return [encode_scalar(c, length) for c in codes]

    def respond_ot(self, j: int, request: OtRequest) -> OtResponse:
        return ot_respond(self.ot_messages(j), request, self.params, self.rng)

    def record_ack(self, j: int, status: str):
        self.acks[j] = status

    def accepts_code_dispute(self, j: int) -> bool:
        """A bidder who acknowledged its code cannot later have it disputed."""
        return self.acks.get(j) != ACC

    # -- randomizer bookkeeping --------------------------------------------

    def drop_randomizer(self, j: int, candidates: Sequence[int]) -> int | None:
        """Remove ``r_j`` before its transfer, folding it into a bidder not yet served.

        Returns the bidder whose randomizer absorbed it, or None when nobody
        qualified and ``r_j`` was kept as a discarded bid instead.
        """
        q = self.params.q
        r_j = self.randomizers[j]
        for m in candidates:
            if m != j and m in self.randomizers and (self.randomizers[m] + r_j) % q:
                self.randomizers[m] = (self.randomizers[m] + r_j) % q
                del self.randomizers[j]
                return m
        self.discard_bid(j)
        return None

    def discard_bid(self, j: int):
        if j not in self.discarded:
            self.discarded.append(j)

    @property
    def offset(self) -> int:
        return sum(self.randomizers[j] for j in self.discarded) % self.params.q

    def refresh(self, bidders: Sequence[int]) -> list[int]:
        fresh = refresh_randomizers([self.randomizers[j] for j in bidders], self.params.q, self.rng)
        self.randomizers.update(zip(bidders, fresh))
        return fresh

    # -- solving -----------------------------------------------------------

    def accept_sigma(self, j: int, sigma: int, commit: int | None) -> bool:
        if commit is not None and pow(self.params.g_b, sigma, self.params.p) != commit:
            return False
        self.sigmas[j] = sigma
        return True

    def knapsack_value(self) -> int:
        return (column_sum(self.sigmas.values(), self.params.q) + self.offset) % self.params.q

    def solve(self) -> tuple[int, ...]:
        self.sigma_k = self.knapsack_value()
        self.flags = solve(self.book, self.sigma_k)
        return self.flags

    def verify_claim(self, claim: WinnerClaim) -> bool:
        return verify_winner_claim(self, claim)

    # -- proof of correct flags -------------------------------------------

    def proof2_commit(self) -> tuple[int, int]:
        p, x = self.params.p, self.sigma_k
        g_s, g_b = self.params.g_s, self.params.g_b
        statement = EqdlStatement(g_s, g_b, pow(g_s, x, p), pow(g_b, x, p))
        a, b, self._proof_nonce = eqdl_commit(statement, self.params, self.rng)
        return a, b

    def proof2_respond(self, challenge: int) -> int:
        return eqdl_respond(self._proof_nonce, self.sigma_k, challenge, self.params.q)


class Bidder:
    def __init__(self, index: int, config: AuctionConfig, rng: random.Random, corrupt: dict | None = None):
        self.index = index
        self.config = config
        self.params = config.params
        self.rng = rng
        self.corrupt = dict(corrupt or {})
        self.choice: int | None = None
        self.code: int | None = None
        self.status: str | None = None
        self.ot_state: OtReceiverState | None = None
        self.outgoing: dict[int, int] = {}
        self.incoming: dict[int, int] = {}
        self.sigma: int | None = None

    def bid(self, price_index: int):
        if not 1 <= price_index <= self.config.k:
            raise ParameterError(f"price index {price_index} outside [1, {self.config.k}]")
        self.choice = price_index
        self.code = None
        self.status = None

    def request_code(self) -> OtRequest:
        request, self.ot_state = ot_request(self.choice, self.params, self.rng, k=self.config.k)
        return request

    def receive_code(self, response: OtResponse, eta: Sequence[int] | None = None, xi: int | None = None) -> str | None:
        raw = ot_recover(response, self.ot_state, self.params)
        self.code = decode_scalar(raw) % self.params.q
        self.ot_state = None
        if eta is None:
            return None
        ok = xi is not None and verify_received_code(eta[self.choice - 1], xi, self.code, self.params)
        self.status = ACC if ok else REJ
        return self.status

    def zeta(self) -> int:
        p, g_b = self.params.p, self.params.g_b
        if self.corrupt.get("forge_zeta"):
            return pow(g_b, self.rng.randrange(1, self.params.q), p)
        return pow(g_b, self.code, p)

    def split(self, recipients: Sequence[int], fixed: Sequence[int] | None = None) -> dict[int, int]:
        q = self.params.q
        if fixed is not None:
            if len(fixed) != len(recipients) or sum(fixed) % q != self.code:
                raise ParameterError(f"fixed shares for B{self.index} do not split its code")
            shares = list(fixed)
        else:
            shares = split_additive(self.code, len(recipients), q, self.rng)
        self.outgoing = dict(zip(recipients, shares))
        self.incoming = {}
        self.sigma = None
        return self.outgoing

    def receive_share(self, sender: int, d: int):
        self.incoming[sender] = d

    def compute_sigma(self) -> int:
        self.sigma = column_sum(self.incoming.values(), self.params.q)
        return self.sigma

    def claims(self, top: int) -> bool:
        return self.choice == top or bool(self.corrupt.get("false_claim"))


def verify_winner_claim(seller: Seller, claim: WinnerClaim) -> bool:
    """True iff the revealed code unmasks to the code of the highest flagged price."""
    if seller.flags is None:
        raise ParameterError("flags have not been solved yet")
    r = seller.randomizers.get(claim.claimant)
    if r is None:
        return False
    top = highest_index(seller.flags)
    return (claim.revealed - r) % seller.params.q == seller.book.code(top)


def detect_tie(zetas: Mapping[int, int], neg_rand_commits: Mapping[int, int],
               params: GroupParams) -> list[tuple[int, ...]]:
    """Groups of bidders whose unmasked code commitments coincide."""
    groups: dict[int, list[int]] = {}
    for j in sorted(zetas):
        key = zetas[j] * neg_rand_commits[j] % params.p
        groups.setdefault(key, []).append(j)
    return sorted(tuple(g) for g in groups.values() if len(g) > 1)
