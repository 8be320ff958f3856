"""Super-increasing code books and the greedy subset-sum decoder."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

from .errors import NoBids, ParameterError, UnsolvableKnapsack


@dataclass(frozen=True)
class PriceTable:
    prices: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "prices", tuple(int(p) for p in self.prices))
        if not self.prices:
            raise ParameterError("price table is empty")
        if any(p <= 0 for p in self.prices):
            raise ParameterError("prices must be positive")
        if any(b <= a for a, b in zip(self.prices, self.prices[1:])):
            raise ParameterError("prices must be strictly ascending")

    def __len__(self):
        return len(self.prices)

    def price(self, index: int) -> int:
        """Price at a 1-based index."""
        return self.prices[index - 1]


def is_super_increasing(codes: Sequence[int]) -> bool:
    total = 0
    for c in codes:
        if c <= total:
            return False
        total += c
    return True


@dataclass(frozen=True)
class CodeBook:
    """Secret codes, one per price, ordered like the price table."""

    codes: tuple[int, ...]
    q: int

    def __post_init__(self):
        object.__setattr__(self, "codes", tuple(int(c) for c in self.codes))
        if not self.codes:
            raise ParameterError("code book is empty")
        if any(not 1 <= c < self.q for c in self.codes):
            raise ParameterError("codes must lie in [1, q)")
        if not is_super_increasing(self.codes):
            raise ParameterError("codes are not super-increasing")
        if sum(self.codes) >= self.q:
            raise ParameterError(f"sum of codes {sum(self.codes)} must stay below q={self.q}")

    def __len__(self):
        return len(self.codes)

    def code(self, index: int) -> int:
        """Code at a 1-based index."""
        return self.codes[index - 1]


def _max_running_sum(q: int, steps_left: int) -> int:
    # later codes need at least running+1 each, so the total at least doubles per step
    return q // (1 << steps_left) - 1


def generate_codes(k: int, q: int, rng) -> CodeBook:
    """Random super-increasing book: each code is the running sum plus a delta in ``[1, running sum]``.

    The delta range is clipped so the codes still to come always fit below ``q``.
    """
    if k < 1:
        raise ParameterError("need at least one code")
    if (1 << k) - 1 >= q:
        raise ParameterError(f"q={q} too small for {k} super-increasing codes")
    running = rng.randint(1, _max_running_sum(q, k - 1))
    codes = [running]
    for i in range(1, k):
        top = min(running, _max_running_sum(q, k - 1 - i) - 2 * running)
        code = running + rng.randint(1, top)
        codes.append(code)
        running += code
    return CodeBook(tuple(codes), q)


def _check_flags(flags: Sequence[int]) -> tuple[int, ...]:
    flags = tuple(int(f) for f in flags)
    if any(f not in (0, 1) for f in flags):
        raise ParameterError("flags must be 0 or 1")
    return flags


def encode(book: CodeBook, flags: Sequence[int]) -> int:
    flags = _check_flags(flags)
    if len(flags) != len(book):
        raise ParameterError(f"flag vector has {len(flags)} entries, code book has {len(book)}")
    return sum(c for c, f in zip(book.codes, flags) if f)


def solve(book: CodeBook, sigma: int) -> tuple[int, ...]:
    """Greedy decode from the largest code down.

    A residual equal to a code selects that code. Anything left over at the
    end raises :class:`UnsolvableKnapsack` instead of being dropped.
    """
    if not 0 <= sigma < book.q:
        raise ParameterError(f"sigma={sigma} outside [0, q)")
    residual = sigma
    flags = [0] * len(book)
    for i in range(len(book) - 1, -1, -1):
        if residual >= book.codes[i]:
            flags[i] = 1
            residual -= book.codes[i]
    if residual:
        raise UnsolvableKnapsack(sigma, residual)
    return tuple(flags)


def winning_prices(flags: Sequence[int], table: PriceTable) -> tuple[int, int | None]:
    """Highest flagged price and the next flagged one below it (None if alone)."""
    flags = _check_flags(flags)
    if len(flags) != len(table):
        raise ParameterError("flag vector and price table differ in length")
    picked = [p for p, f in zip(table.prices, flags) if f]
    if not picked:
        raise NoBids("no flag is set")
    return picked[-1], (picked[-2] if len(picked) > 1 else None)


def highest_index(flags: Sequence[int]) -> int:
    """1-based index of the highest set flag."""
    for i in range(len(flags) - 1, -1, -1):
        if flags[i]:
            return i + 1
    raise NoBids("no flag is set")
