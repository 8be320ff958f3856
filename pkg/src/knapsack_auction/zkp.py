"""Interactive proof that two elements share one discrete log, and its use
for checking the seller's announced flags."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Sequence

from .group import GroupParams, prod_mod


@dataclass(frozen=True)
class EqdlStatement:
    g1: int
    g2: int
    v: int
    w: int


@dataclass(frozen=True)
class EqdlProofSession:
    commit_a: int
    commit_b: int
    challenge: int
    response: int


def eqdl_commit(statement: EqdlStatement, params: GroupParams, rng, z: int | None = None):
    """First move. Returns ``(A, B, z)``; ``z`` stays with the prover."""
    if z is None:
        z = rng.randrange(1, params.q)
    return pow(statement.g1, z, params.p), pow(statement.g2, z, params.p), z


def eqdl_respond(z: int, x: int, challenge: int, q: int) -> int:
    return (z + challenge * x) % q


def eqdl_verify(statement: EqdlStatement, session: EqdlProofSession, params: GroupParams) -> bool:
    p = params.p
    r, c = session.response, session.challenge
    if not (0 <= r < params.q and 0 <= c < params.q):
        return False
    lhs1 = pow(statement.g1, r, p)
    rhs1 = session.commit_a * pow(statement.v, c, p) % p
    lhs2 = pow(statement.g2, r, p)
    rhs2 = session.commit_b * pow(statement.w, c, p) % p
    return lhs1 == rhs1 and lhs2 == rhs2


def extract_witness(s1: EqdlProofSession, s2: EqdlProofSession, q: int) -> int:
    """Recover ``x`` from two accepting sessions sharing commitments."""
    if (s1.commit_a, s1.commit_b) != (s2.commit_a, s2.commit_b):
        raise ValueError("sessions must share their commitments")
    if s1.challenge == s2.challenge:
        raise ValueError("challenges must differ")
    return (s1.response - s2.response) * pow(s1.challenge - s2.challenge, -1, q) % q


def proof2_statement(eta: Sequence[int], flags: Sequence[int], sigma_commits: Sequence[int] | Mapping[int, int],
                     params: GroupParams, discarded_rand_commits: Sequence[int] = ()) -> EqdlStatement:
    """Statement tying the flagged codes to the bidders' summed shares.

    ``discarded_rand_commits`` are ``g_b^{r_j}`` for bids dropped after the
    transfer; the seller adds those ``r_j`` back when forming the knapsack value.
    """
    p = params.p
    v = prod_mod((e for e, f in zip(eta, flags) if f), p)
    commits = sigma_commits.values() if isinstance(sigma_commits, Mapping) else sigma_commits
    w = prod_mod(commits, p) * prod_mod(discarded_rand_commits, p) % p
    return EqdlStatement(params.g_s, params.g_b, v, w)
