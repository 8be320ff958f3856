"""1-out-of-k oblivious transfer of fixed-length strings over a prime-order group.

The receiver blinds its choice as ``y = g^a * h^choice``. For every slot ``i``
the sender picks ``s_i`` and publishes ``u_i = g^{s_i}`` together with the
message masked by a pad derived from ``(y * h^{-i})^{s_i}``. Only slot
``choice`` reduces to ``g^{a*s_i} = u_i^a``, which the receiver can compute.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass
from typing import Sequence

from .errors import ParameterError
from .group import GroupParams, inv_mod

PAD_LABEL = b"knapsack-auction/ot-pad"


@dataclass(frozen=True)
class OtRequest:
    y: int


@dataclass(frozen=True)
class OtReceiverState:
    a: int
    choice: int
    k: int | None = None


@dataclass(frozen=True)
class OtResponse:
    u: tuple[int, ...]
    v: tuple[bytes, ...]

    def __len__(self):
        return len(self.u)


def message_len(params: GroupParams) -> int:
    return params.scalar_len


def encode_scalar(x: int, length: int) -> bytes:
    return x.to_bytes(length, "big")


def decode_scalar(data: bytes) -> int:
    return int.from_bytes(data, "big")


def pad(params: GroupParams, key: int, index: int, length: int) -> bytes:
    h = hashlib.shake_256()
    h.update(PAD_LABEL)
    h.update(key.to_bytes(params.element_len, "big"))
    h.update(index.to_bytes(4, "big"))
    return h.digest(length)


def _xor(a: bytes, b: bytes) -> bytes:
    return bytes(x ^ y for x, y in zip(a, b))


def ot_request(choice: int, params: GroupParams, rng, k: int | None = None) -> tuple[OtRequest, OtReceiverState]:
    """Blind a 1-based ``choice``. Pass ``k`` to range-check it up front."""
    if choice < 1 or (k is not None and choice > k):
        raise ParameterError(f"choice {choice} outside [1, {k if k is not None else 'k'}]")
    a = rng.randrange(1, params.q)
    y = pow(params.g_ot, a, params.p) * pow(params.h_ot, choice, params.p) % params.p
    return OtRequest(y), OtReceiverState(a, choice, k)


def ot_respond(messages: Sequence[bytes], request: OtRequest, params: GroupParams, rng) -> OtResponse:
    if not messages:
        raise ParameterError("nothing to transfer")
    length = message_len(params)
    if any(len(m) != length for m in messages):
        raise ParameterError(f"every message must be {length} octets")
    if not params.is_member(request.y):
        raise ParameterError("request is not a subgroup element")
    p = params.p
    h_inv = inv_mod(params.h_ot, p)
    us, vs = [], []
    for i, m in enumerate(messages, start=1):
        s = rng.randrange(1, params.q)
        key = pow(request.y * pow(h_inv, i, p) % p, s, p)
        us.append(pow(params.g_ot, s, p))
        vs.append(_xor(m, pad(params, key, i, length)))
    return OtResponse(tuple(us), tuple(vs))


def ot_recover(response: OtResponse, state: OtReceiverState, params: GroupParams) -> bytes:
    if not 1 <= state.choice <= len(response):
        raise ParameterError("choice outside the response")
    u = response.u[state.choice - 1]
    v = response.v[state.choice - 1]
    key = pow(u, state.a, params.p)
    return _xor(v, pad(params, key, state.choice, len(v)))
