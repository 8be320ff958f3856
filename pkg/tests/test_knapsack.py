import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from knapsack_auction.errors import NoBids, ParameterError, UnsolvableKnapsack
from knapsack_auction.knapsack import (
    CodeBook,
    PriceTable,
    encode,
    generate_codes,
    highest_index,
    is_super_increasing,
    solve,
    winning_prices,
)
from oracles import subset_sums

WORKED_CODES = (3, 5, 10, 21, 40, 90, 180, 360)
PRICES = PriceTable((10, 20, 30, 40, 50, 60, 70, 80))


@pytest.fixture
def book():
    return CodeBook(WORKED_CODES, 751)


def test_worked_example_decodes(book):
    assert solve(book, 394) == (1, 0, 1, 1, 0, 0, 0, 1)


def test_worked_example_prices(book):
    assert winning_prices((1, 0, 1, 1, 0, 0, 0, 1), PRICES) == (80, 40)


def test_worked_example_sum(book):
    assert encode(book, (1, 0, 1, 1, 0, 0, 0, 1)) == 3 + 10 + 21 + 360


def test_super_increasing_predicate():
    assert is_super_increasing(WORKED_CODES)
    assert is_super_increasing([1])
    assert not is_super_increasing([3, 3])
    assert not is_super_increasing([1, 2, 3])
    assert not is_super_increasing([0, 1])


@pytest.mark.parametrize("codes,q", [
    ((3, 5, 10), 18),          # sum must stay below q
    ((3, 2), 751),             # not super-increasing
    ((0, 5), 751),
    ((), 751),
])
def test_codebook_rejects_invalid(codes, q):
    with pytest.raises(ParameterError):
        CodeBook(codes, q)


def test_codebook_is_one_based(book):
    assert book.code(1) == 3 and book.code(8) == 360
    assert len(book) == 8


def test_price_table_validation():
    with pytest.raises(ParameterError):
        PriceTable((10, 10))
    with pytest.raises(ParameterError):
        PriceTable((0, 10))
    with pytest.raises(ParameterError):
        PriceTable(())
    assert PRICES.price(3) == 30


def test_every_reachable_sum_decodes(book):
    for sigma, flags in subset_sums(book.codes).items():
        assert solve(book, sigma) == flags


def test_unreachable_sums_raise(book):
    reachable = subset_sums(book.codes)
    for sigma in range(book.q):
        if sigma not in reachable:
            with pytest.raises(UnsolvableKnapsack):
                solve(book, sigma)


def test_unsolvable_carries_residual(book):
    with pytest.raises(UnsolvableKnapsack) as info:
        solve(book, 1)
    assert info.value.sigma == 1 and info.value.residual == 1


def test_sigma_outside_range(book):
    with pytest.raises(ParameterError):
        solve(book, 751)


def test_duplicate_bid_can_alias_a_valid_decode():
    # 2*c = c' in this book, so two equal bids look like one higher bid
    book = CodeBook(WORKED_CODES, 751)
    assert solve(book, 2 * 5) == (0, 0, 1, 0, 0, 0, 0, 0)
    with pytest.raises(UnsolvableKnapsack):
        solve(book, 2 * 3)


@pytest.mark.parametrize("k", range(1, 13))
def test_generated_books_fit(k):
    rng = random.Random(k)
    for q in (4507, 751, (1 << k) + 1 if k > 1 else 3, 2179119049):
        if (1 << k) - 1 >= q:
            continue
        book = generate_codes(k, q, rng)
        assert len(book) == k
        assert is_super_increasing(book.codes)
        assert sum(book.codes) < q


def test_generation_needs_room():
    with pytest.raises(ParameterError):
        generate_codes(10, 751, random.Random(0))
    with pytest.raises(ParameterError):
        generate_codes(0, 751, random.Random(0))


def test_smallest_possible_q_forces_powers_of_two():
    book = generate_codes(5, 32, random.Random(0))
    assert book.codes == (1, 2, 4, 8, 16)


@settings(max_examples=200, deadline=None)
@given(k=st.integers(1, 12), seed=st.integers(0, 2**32), data=st.data())
def test_round_trip_property(k, seed, data):
    book = generate_codes(k, 2179119049, random.Random(seed))
    flags = tuple(data.draw(st.lists(st.integers(0, 1), min_size=k, max_size=k)))
    assert solve(book, encode(book, flags)) == flags


def test_encode_validates(book):
    with pytest.raises(ParameterError):
        encode(book, (1, 0))
    with pytest.raises(ParameterError):
        encode(book, (2, 0, 0, 0, 0, 0, 0, 0))


def test_winning_prices_edge_cases():
    assert winning_prices((0, 0, 0, 0, 0, 0, 0, 1), PRICES) == (80, None)
    assert winning_prices((1, 1, 0, 0, 0, 0, 0, 0), PRICES) == (20, 10)
    with pytest.raises(NoBids):
        winning_prices((0,) * 8, PRICES)
    with pytest.raises(ParameterError):
        winning_prices((1,), PRICES)


def test_highest_index():
    assert highest_index((1, 0, 1, 1, 0, 0, 0, 1)) == 8
    assert highest_index((0, 1, 0)) == 2
    with pytest.raises(NoBids):
        highest_index((0, 0))
