import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from knapsack_auction.errors import ParameterError
from knapsack_auction.group import prod_mod
from knapsack_auction.sharing import (
    RandomizerSet,
    column_sum,
    commit,
    generate_randomizers,
    randomize_code,
    refresh_randomizers,
    split_additive,
    unmask_zeta,
    verify_received_code,
    verify_row,
    verify_share,
    verify_sigma,
    verify_zeta_membership,
)

Q = 751
WORKED_R = (700, 100, 200, 502)
WORKED_SHARES = ((100, 400, 200, 10), (10, 50, 40, 3), (150, 50, 19, 2), (30, 35, 35, 11))


def test_worked_randomizers_sum_to_zero():
    assert sum(WORKED_R) % Q == 0
    RandomizerSet(WORKED_R, Q)


def test_worked_randomized_codes():
    codes = (10, 3, 21, 360)
    assert [randomize_code(c, r, Q) for c, r in zip(codes, WORKED_R)] == [710, 103, 221, 111]


def test_worked_share_columns():
    assert [sum(row) % Q for row in WORKED_SHARES] == [710, 103, 221, 111]
    sigmas = [column_sum(col, Q) for col in zip(*WORKED_SHARES)]
    assert sigmas == [290, 535, 294, 26]
    assert sum(sigmas) % Q == 394


@pytest.mark.parametrize("r", [(1, 2), (0, 751), (750,), (375, 376, 0)])
def test_randomizer_set_validation(r):
    with pytest.raises(ParameterError):
        RandomizerSet(r, Q)


@settings(max_examples=100, deadline=None)
@given(n=st.integers(2, 12), seed=st.integers(0, 2**32))
def test_generated_randomizers(n, seed):
    rs = generate_randomizers(n, Q, random.Random(seed))
    assert len(rs.r) == n
    assert sum(rs.r) % Q == 0
    assert all(0 < x < Q for x in rs.r)


def test_single_bidder_has_no_randomizer():
    with pytest.raises(ParameterError):
        generate_randomizers(1, Q, random.Random(0))


@settings(max_examples=100, deadline=None)
@given(seed=st.integers(0, 2**32), n=st.integers(2, 6))
def test_refresh_keeps_the_sum(seed, n):
    rng = random.Random(seed)
    current = [rng.randrange(1, Q) for _ in range(n)]
    fresh = refresh_randomizers(current, Q, rng)
    assert sum(fresh) % Q == sum(current) % Q
    assert all(0 < x < Q for x in fresh)


@settings(max_examples=200, deadline=None)
@given(secret=st.integers(0, Q - 1), n=st.integers(1, 10), seed=st.integers(0, 2**32))
def test_split_reconstructs(secret, n, seed):
    shares = split_additive(secret, n, Q, random.Random(seed))
    assert len(shares) == n
    assert sum(shares) % Q == secret


def test_column_sums_add_up_to_the_total():
    rng = random.Random(4)
    codes = [rng.randrange(Q) for _ in range(5)]
    matrix = [split_additive(c, 5, Q, rng) for c in codes]
    sigmas = [column_sum(col, Q) for col in zip(*matrix)]
    assert sum(sigmas) % Q == sum(codes) % Q


def test_commitment_checks(toy):
    code, r = 10, 700
    eta = commit(toy.g_s, code, toy)
    xi = commit(toy.g_s, r, toy)
    assert verify_received_code(eta, xi, randomize_code(code, r, Q), toy)
    assert not verify_received_code(eta, xi, randomize_code(5, r, Q), toy)


def test_zeta_membership(toy):
    shuffled = [commit(toy.g_b, c, toy) for c in (21, 3, 10, 5)]
    r = 700
    zeta = commit(toy.g_b, randomize_code(10, r, Q), toy)
    neg = commit(toy.g_b, -r % Q, toy)
    assert unmask_zeta(zeta, neg, toy) == commit(toy.g_b, 10, toy)
    assert verify_zeta_membership(zeta, neg, shuffled, toy)
    assert not verify_zeta_membership(zeta * toy.g_b % toy.p, neg, shuffled, toy)


def test_share_row_and_sigma(toy):
    p = toy.p
    row_commits = [[commit(toy.g_b, d, toy) for d in row] for row in WORKED_SHARES]
    zetas = [commit(toy.g_b, c, toy) for c in (710, 103, 221, 111)]
    for commits, zeta in zip(row_commits, zetas):
        assert verify_row(commits, zeta, toy)
    assert not verify_row(row_commits[0], zetas[1], toy)
    assert verify_share(400, row_commits[0][1], toy)
    assert not verify_share(401, row_commits[0][1], toy)
    for v, sigma in enumerate((290, 535, 294, 26)):
        column = [row[v] for row in row_commits]
        s_commit = prod_mod(column, p)
        assert verify_sigma(sigma, s_commit, column, toy)
        assert verify_sigma(sigma, s_commit, None, toy)
        assert not verify_sigma((sigma + 1) % Q, s_commit, column, toy)
        assert not verify_sigma(sigma, s_commit * toy.g_b % p, column, toy)
