"""Prime-order subgroup arithmetic.

Scalars and group elements are plain Python ints. A scalar lives in
``[0, q)``; a group element is an int in ``[1, p)`` whose order divides ``q``.
The helpers here validate those ranges where it matters and otherwise stay
out of the way.
"""

from __future__ import annotations

import hashlib
import random
from dataclasses import dataclass

from .errors import DomainError, GroupGenerationError, ParameterError

MR_ROUNDS = 40
MAX_PRIME_ATTEMPTS = 2000
MAX_COFACTOR = 10_000

# Seed for which ``generate_group_params(10, TOY_SEED)`` lands on q=751, p=4507.
TOY_SEED = b"toy-213"

_SMALL_PRIMES = [
    2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53, 59, 61, 67,
    71, 73, 79, 83, 89, 97, 101, 103, 107, 109, 113, 127, 131, 137, 139, 149,
    151, 157, 163, 167, 173, 179, 181, 191, 193, 197, 199, 211, 223, 227, 229,
]


def is_probable_prime(n: int, rounds: int = MR_ROUNDS) -> bool:
    """Miller-Rabin with ``rounds`` bases.

    Bases come from a generator seeded by ``n`` itself so the answer is
    reproducible run to run.
    """
    if n < 2:
        return False
    for sp in _SMALL_PRIMES:
        if n == sp:
            return True
        if n % sp == 0:
            return False
    d, s = n - 1, 0
    while d % 2 == 0:
        d //= 2
        s += 1
    rng = random.Random(n)
    for _ in range(rounds):
        a = rng.randrange(2, n - 1)
        x = pow(a, d, n)
        if x in (1, n - 1):
            continue
        for _ in range(s - 1):
            x = x * x % n
            if x == n - 1:
                break
        else:
            return False
    return True


@dataclass(frozen=True)
class GroupParams:
    """Primes ``p = mu*q + 1`` plus the four order-q generators in use.

    ``g_s`` commits the seller, ``g_b`` commits bidders, and ``g_ot``/``h_ot``
    drive oblivious transfer. The OT pair is hashed from public labels so no
    party knows the discrete log between them.
    """

    p: int
    q: int
    mu: int
    g_s: int
    g_b: int
    g_ot: int
    h_ot: int

    def validate(self) -> "GroupParams":
        if not is_probable_prime(self.q):
            raise ParameterError(f"q={self.q} is not prime")
        if not is_probable_prime(self.p):
            raise ParameterError(f"p={self.p} is not prime")
        if self.p != self.mu * self.q + 1:
            raise ParameterError("p != mu*q + 1")
        gens = self.generators()
        for name, g in gens.items():
            if not is_generator(g, self.p, self.q):
                raise ParameterError(f"{name}={g} does not generate the order-q subgroup")
        if len(set(gens.values())) != len(gens):
            raise ParameterError("generators must be pairwise distinct")
        return self

    def generators(self) -> dict[str, int]:
        return {"g_s": self.g_s, "g_b": self.g_b, "g_ot": self.g_ot, "h_ot": self.h_ot}

    @property
    def element_len(self) -> int:
        return (self.p.bit_length() + 7) // 8

    @property
    def scalar_len(self) -> int:
        return (self.q.bit_length() + 7) // 8

    def is_member(self, x: int) -> bool:
        return is_member(x, self.p, self.q)

    def to_dict(self) -> dict[str, str]:
        return {k: str(v) for k, v in self.__dict__.items()}

    @classmethod
    def from_dict(cls, data: dict) -> "GroupParams":
        fields = ("p", "q", "mu", "g_s", "g_b", "g_ot", "h_ot")
        missing = [f for f in fields if f not in data]
        extra = [k for k in data if k not in fields]
        if missing or extra:
            raise ParameterError(f"bad group params: missing={missing} unknown={extra}")
        try:
            values = {f: int(str(data[f]), 10) for f in fields}
        except ValueError as exc:
            raise ParameterError(f"group params must be decimal integers: {exc}") from None
        return cls(**values).validate()


def is_member(x: int, p: int, q: int) -> bool:
    return 0 < x < p and pow(x, q, p) == 1


def is_generator(g: int, p: int, q: int) -> bool:
    # q prime, so any non-identity member has order exactly q
    return g != 1 and is_member(g, p, q)


def pow_mod(base: int, exp: int, p: int) -> int:
    if base % p == 0 and exp < 0:
        raise DomainError("cannot raise 0 to a negative power")
    return pow(base, exp, p)


def mul_mod(a: int, b: int, p: int) -> int:
    return a * b % p


def inv_mod(x: int, p: int) -> int:
    if x % p == 0:
        raise DomainError("0 has no inverse")
    return pow(x, -1, p)


def prod_mod(values, p: int) -> int:
    acc = 1
    for v in values:
        acc = acc * v % p
    return acc


def find_subgroup_generator(p: int, q: int, mu: int, rng) -> int:
    """Return ``h**mu mod p`` for random ``h``, retrying while the result is 1."""
    while True:
        h = rng.randrange(2, p - 1)
        g = pow(h, mu, p)
        if g != 1:
            return g


def hash_to_subgroup(label: bytes, p: int, q: int, mu: int) -> int:
    nbytes = (p.bit_length() + 7) // 8 + 16
    counter = 0
    while True:
        digest = hashlib.shake_256(b"knapsack-auction/h2g|" + label + b"|" + counter.to_bytes(4, "big"))
        g = pow(int.from_bytes(digest.digest(nbytes), "big") % p, mu, p)
        if g not in (0, 1):
            return g
        counter += 1


def _next_prime(n: int, limit: int) -> int | None:
    if n <= 2:
        return 2
    n |= 1
    while n < limit:
        if is_probable_prime(n):
            return n
        n += 2
    return None


def _ot_generators(p: int, q: int, mu: int, taken: set[int]) -> tuple[int, int]:
    g_ot = hash_to_subgroup(b"ot-g", p, q, mu)
    h_ot = hash_to_subgroup(b"ot-h", p, q, mu)
    tweak = 0
    while g_ot in taken or h_ot in taken | {g_ot}:
        tweak += 1
        g_ot = hash_to_subgroup(b"ot-g#%d" % tweak, p, q, mu)
        h_ot = hash_to_subgroup(b"ot-h#%d" % tweak, p, q, mu)
    return g_ot, h_ot


def params_from_primes(p: int, q: int, rng) -> GroupParams:
    """Build a full parameter set for known primes ``p = mu*q + 1``."""
    if (p - 1) % q:
        raise ParameterError("q does not divide p - 1")
    mu = (p - 1) // q
    # g_s, g_b and the OT pair must be four distinct elements
    if q < 5:
        raise ParameterError("subgroup too small for four distinct generators")
    g_s = find_subgroup_generator(p, q, mu, rng)
    g_b = g_s
    while g_b == g_s:
        g_b = find_subgroup_generator(p, q, mu, rng)
    g_ot, h_ot = _ot_generators(p, q, mu, {g_s, g_b})
    return GroupParams(p, q, mu, g_s, g_b, g_ot, h_ot).validate()


def generate_group_params(q_bits: int, rng_seed: bytes | str) -> GroupParams:
    """Search for ``q`` with ``q_bits`` bits and the smallest even ``mu`` making ``mu*q+1`` prime.

    Deterministic for a fixed seed.
    """
    if q_bits < 8:
        raise GroupGenerationError(f"q_bits={q_bits} is below the minimum of 8")
    if isinstance(rng_seed, str):
        rng_seed = rng_seed.encode()
    rng = random.Random(rng_seed)
    lo, hi = 1 << (q_bits - 1), 1 << q_bits
    for _ in range(MAX_PRIME_ATTEMPTS):
        q = _next_prime(rng.randrange(lo, hi), hi)
        if q is None:
            continue
        for mu in range(2, MAX_COFACTOR, 2):
            p = mu * q + 1
            if is_probable_prime(p):
                return params_from_primes(p, q, rng)
    raise GroupGenerationError(f"no suitable primes found for q_bits={q_bits}")


def toy_group_params() -> GroupParams:
    """The q=751, p=4507 group used by the worked example."""
    params = generate_group_params(10, TOY_SEED)
    assert params.q == 751 and params.p == 4507
    return params


def random_scalar(rng, q: int, nonzero: bool = True) -> int:
    return rng.randrange(1 if nonzero else 0, q)
