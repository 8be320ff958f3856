"""Randomizers, n-of-n additive sharing and exponent commitments.

Every check the bidders and the seller run against published commitments
lives here as a plain predicate; the protocol layer decides what a ``False``
means for the auction.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

from .errors import ParameterError
from .group import GroupParams, prod_mod


@dataclass(frozen=True)
class RandomizerSet:
    r: tuple[int, ...]
    q: int

    def __post_init__(self):
        object.__setattr__(self, "r", tuple(int(x) for x in self.r))
        if len(self.r) < 2:
            raise ParameterError("need at least two randomizers")
        if any(not 0 < x < self.q for x in self.r):
            raise ParameterError("randomizers must be nonzero scalars")
        if sum(self.r) % self.q:
            raise ParameterError("randomizers must sum to 0 mod q")


def _nonzero_tail(target: int, count: int, q: int, rng) -> list[int]:
    """``count`` nonzero scalars summing to ``target`` mod q; the last is forced."""
    while True:
        head = [rng.randrange(1, q) for _ in range(count - 1)]
        last = (target - sum(head)) % q
        if last:
            return head + [last]


def generate_randomizers(n: int, q: int, rng) -> RandomizerSet:
    if n < 2:
        raise ParameterError("at least two bidders are required (a single randomizer would be 0)")
    return RandomizerSet(tuple(_nonzero_tail(0, n, q, rng)), q)


def refresh_randomizers(current: Sequence[int], q: int, rng) -> list[int]:
    """Fresh nonzero values with the same sum mod q as ``current``."""
    if len(current) < 2:
        raise ParameterError("refreshing needs at least two randomizers")
    return _nonzero_tail(sum(current) % q, len(current), q, rng)


def randomize_code(code: int, r: int, q: int) -> int:
    return (code + r) % q


def split_additive(secret: int, n: int, q: int, rng) -> list[int]:
    if n < 1:
        raise ParameterError("need at least one share")
    head = [rng.randrange(q) for _ in range(n - 1)]
    return head + [(secret - sum(head)) % q]


def column_sum(shares: Sequence[int], q: int) -> int:
    return sum(shares) % q


def commit(g: int, x: int, params: GroupParams) -> int:
    return pow(g, x, params.p)


@dataclass
class CommitmentBundle:
    """Everything published for the malicious-mode checks.

    Bidder-indexed maps are keyed by the 1-based bidder number so dropouts do
    not shift anything.
    """

    eta: list[int] = field(default_factory=list)
    xi: dict[int, int] = field(default_factory=dict)
    zeta: dict[int, int] = field(default_factory=dict)
    share_commits: dict[int, dict[int, int]] = field(default_factory=dict)
    sigma_commits: dict[int, int] = field(default_factory=dict)
    shuffled_code_commits: list[int] = field(default_factory=list)
    rand_commits: dict[int, int] = field(default_factory=dict)
    neg_rand_commits: dict[int, int] = field(default_factory=dict)


def verify_received_code(eta_i: int, xi_j: int, code: int, params: GroupParams) -> bool:
    return eta_i * xi_j % params.p == pow(params.g_s, code, params.p)


def unmask_zeta(zeta_j: int, neg_rand_j: int, params: GroupParams) -> int:
    return zeta_j * neg_rand_j % params.p


def verify_zeta_membership(zeta_j: int, neg_rand_j: int, shuffled_code_commits: Sequence[int],
                           params: GroupParams) -> bool:
    return unmask_zeta(zeta_j, neg_rand_j, params) in set(shuffled_code_commits)


def verify_share(d: int, published_commit: int, params: GroupParams) -> bool:
    return pow(params.g_b, d, params.p) == published_commit


def verify_row(row_commits: Sequence[int], zeta_j: int, params: GroupParams) -> bool:
    return prod_mod(row_commits, params.p) == zeta_j


def verify_sigma(sigma_j: int, sigma_commit_j: int, column_commits: Sequence[int] | None,
                 params: GroupParams) -> bool:
    """Check ``g_b^sigma_j`` against its published commitment and, when the
    column of share commitments is visible, the commitment against the column."""
    if pow(params.g_b, sigma_j, params.p) != sigma_commit_j:
        return False
    if column_commits is not None:
        return prod_mod(column_commits, params.p) == sigma_commit_j
    return True
