"""Arithmetic in GF(2^L) for 1 <= L <= 16.

Elements are plain ints in ``[0, 2**L)``. Each field context carries
log/antilog tables; the carry-less schoolbook product :func:`clmul_mod` is
kept as an independent path used to build and cross-check the tables.
"""

from __future__ import annotations

from dataclasses import dataclass, field as dc_field
from functools import lru_cache

import numpy as np

from .errors import InvalidParameter

MAX_L = 16

# One pinned reduction polynomial per degree; bit i is the x^i coefficient.
REDUCTION_POLYS = {
    1: 0b11,  # x + 1
    2: 0b111,  # x^2 + x + 1
    3: 0b1011,
    4: 0b10011,  # x^4 + x + 1
    5: 0b100101,
    6: 0b1000011,
    7: 0b10001001,
    8: 0b100011011,  # x^8 + x^4 + x^3 + x + 1
    9: 0b1000010001,
    10: 0b10000001001,  # x^10 + x^3 + 1
    11: 0b100000000101,
    12: 0b1000001010011,
    13: 0b10000000011011,
    14: 0b100010001000011,
    15: 0b1000000000000011,
    16: 0b10001000000001011,
}


def poly_degree(a: int) -> int:
    return a.bit_length() - 1


def poly_mod(a: int, m: int) -> int:
    dm = poly_degree(m)
    while a and poly_degree(a) >= dm:
        a ^= m << (poly_degree(a) - dm)
    return a


def clmul(a: int, b: int) -> int:
    """Carry-less product of two GF(2) polynomials."""
    out = 0
    while b:
        if b & 1:
            out ^= a
        a <<= 1
        b >>= 1
    return out


def clmul_mod(a: int, b: int, poly: int) -> int:
    return poly_mod(clmul(a, b), poly)


def is_irreducible(poly: int) -> bool:
    """Trial division by every polynomial of degree 1..deg/2."""
    deg = poly_degree(poly)
    if deg < 1:
        return False
    for d in range(1, deg // 2 + 1):
        for low in range(1 << d):
            if poly_mod(poly, (1 << d) | low) == 0:
                return False
    return True


@dataclass(frozen=True)
class FieldCtx:
    L: int
    poly: int
    generator: int
    exp: list = dc_field(repr=False, compare=False)
    log: list = dc_field(repr=False, compare=False)
    exp_np: np.ndarray = dc_field(repr=False, compare=False)
    log_np: np.ndarray = dc_field(repr=False, compare=False)

    @property
    def q(self) -> int:
        return 1 << self.L

    @property
    def order(self) -> int:
        return (1 << self.L) - 1


def _build_tables(L: int, poly: int):
    order = (1 << L) - 1
    if L == 1:
        return 1, [1, 1], [0, 0]
    factors = _prime_factors(order)
    for g in range(2, 1 << L):
        if all(_pow_slow(g, order // f, poly) != 1 for f in factors):
            break
    else:  # pragma: no cover - cannot happen for an irreducible poly
        raise InvalidParameter(f"no generator found for GF(2^{L})")
    exp = [0] * (2 * order)
    log = [0] * (1 << L)
    x = 1
    for i in range(order):
        exp[i] = x
        log[x] = i
        x = clmul_mod(x, g, poly)
    for i in range(order, 2 * order):
        exp[i] = exp[i - order]
    return g, exp, log


def _pow_slow(a: int, e: int, poly: int) -> int:
    result = 1
    while e:
        if e & 1:
            result = clmul_mod(result, a, poly)
        a = clmul_mod(a, a, poly)
        e >>= 1
    return result


def _prime_factors(n: int) -> list[int]:
    out, d = [], 2
    while d * d <= n:
        if n % d == 0:
            out.append(d)
            while n % d == 0:
                n //= d
        d += 1
    if n > 1:
        out.append(n)
    return out


@lru_cache(maxsize=None)
def field(L: int) -> FieldCtx:
    """Shared, immutable context for GF(2^L)."""
    if not 1 <= L <= MAX_L:
        raise InvalidParameter(f"L must be in [1, {MAX_L}], got {L}")
    poly = REDUCTION_POLYS[L]
    if not is_irreducible(poly):
        raise InvalidParameter(f"pinned polynomial {poly:#x} is reducible")
    g, exp, log = _build_tables(L, poly)
    return FieldCtx(
        L=L,
        poly=poly,
        generator=g,
        exp=exp,
        log=log,
        exp_np=np.array(exp, dtype=np.uint32),
        log_np=np.array(log, dtype=np.int64),
    )


def fe_add(ctx: FieldCtx, a: int, b: int) -> int:
    return a ^ b


def fe_mul(ctx: FieldCtx, a: int, b: int) -> int:
    if a == 0 or b == 0:
        return 0
    return ctx.exp[ctx.log[a] + ctx.log[b]]


def fe_inv(ctx: FieldCtx, a: int) -> int:
    if a == 0:
        raise ZeroDivisionError("zero has no inverse")
    return ctx.exp[(ctx.order - ctx.log[a]) % ctx.order]


def fe_pow(ctx: FieldCtx, a: int, e: int) -> int:
    if e == 0:
        return 1
    if a == 0:
        return 0
    return ctx.exp[(ctx.log[a] * e) % ctx.order]


def fe_mul_array(ctx: FieldCtx, c: int, values: np.ndarray) -> np.ndarray:
    """Multiply every symbol of ``values`` by the scalar ``c``."""
    if c == 0:
        return np.zeros_like(values)
    if c == 1:
        return values.copy()
    prod = ctx.exp_np[ctx.log_np[values] + ctx.log[c]]
    return np.where(values == 0, 0, prod).astype(values.dtype)


def beta_element(ctx: FieldCtx) -> int:
    """Deterministic element of multiplicative order exactly ``L + 1``."""
    n = ctx.L + 1
    if ctx.order % n:
        raise InvalidParameter(f"order {n} does not divide 2^{ctx.L} - 1")
    beta = fe_pow(ctx, ctx.generator, ctx.order // n)
    if any(fe_pow(ctx, beta, k) == 1 for k in range(1, n)):
        raise InvalidParameter(f"no element of order exactly {n}")
    return beta
