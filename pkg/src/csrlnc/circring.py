"""The ring of binary circulants of size L+1 and block algebra over it.

A ring element is an ``(L+1)``-bit mask: bit ``l`` set means the cyclic
permutation ``C^l`` is a summand.  Multiplication is cyclic convolution of
masks, i.e. arithmetic in GF(2)[x]/(x^(L+1) + 1).

Coding coefficients are small ints: ``0`` is the zero coefficient and
``l`` in ``1..L+1`` is the shift coefficient ``G C^l H`` (``L+1`` is the
identity).  Block matrices over the ring are lists of rows of masks.

Conjugation ``Psi -> G Psi H`` is a ring homomorphism whose kernel is
``{0, all-ones}``; several checks below rely on that.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import InvalidParameter, ShapeMismatch, SingularMatrix

MAX_DET_BLOCKS = 12


def _is_prime(n: int) -> bool:
    if n < 2:
        return False
    d = 2
    while d * d <= n:
        if n % d == 0:
            return False
        d += 1
    return True


def mult_order_of_two(n: int) -> int:
    k, x = 1, 2 % n
    while x != 1:
        x = (x * 2) % n
        k += 1
        if k > n:
            return 0
    return k


def is_admissible(L: int) -> bool:
    """Even L with L+1 prime and 2 primitive modulo L+1."""
    return L >= 2 and L % 2 == 0 and _is_prime(L + 1) and mult_order_of_two(L + 1) == L


def admissible_values(limit: int = 60) -> list[int]:
    return [L for L in range(2, limit + 1) if is_admissible(L)]


@dataclass(frozen=True)
class ShiftParams:
    L: int

    def __post_init__(self):
        if not is_admissible(self.L):
            raise InvalidParameter(
                f"L={self.L} is not admissible; valid values: {admissible_values(30)} ..."
            )

    @property
    def n(self) -> int:
        return self.L + 1

    @property
    def full(self) -> int:
        return (1 << (self.L + 1)) - 1


def rotl(mask: int, k: int, n: int) -> int:
    k %= n
    full = (1 << n) - 1
    return ((mask << k) | (mask >> (n - k))) & full


def weight(a: int) -> int:
    return bin(a).count("1")


def ring_add(p: ShiftParams, a: int, b: int) -> int:
    return a ^ b


def ring_mul(p: ShiftParams, a: int, b: int) -> int:
    n = p.L + 1
    full = (1 << n) - 1
    out = 0
    i = 0
    while a:
        if a & 1:
            out ^= ((b << i) | (b >> (n - i))) & full
        a >>= 1
        i += 1
    return out


def ring_pow(p: ShiftParams, a: int, e: int) -> int:
    result = 1
    while e:
        if e & 1:
            result = ring_mul(p, result, a)
        a = ring_mul(p, a, a)
        e >>= 1
    return result


def sigma(p: ShiftParams, a: int) -> int:
    """Complement masks heavier than L/2; leaves the G.H image unchanged."""
    if 2 * weight(a) > p.L:
        return a ^ p.full
    return a


def monomial(p: ShiftParams, l: int) -> int:
    return 1 << (l % p.n)


def coeff_to_ring(p: ShiftParams, c: int) -> int:
    if c == 0:
        return 0
    if not 1 <= c <= p.n:
        raise InvalidParameter(f"shift exponent {c} outside [1, {p.n}]")
    return 1 << (c % p.n)


def shift_inverse(p: ShiftParams, c: int) -> int:
    """Exponent of the inverse shift coefficient, in ``1..L+1``."""
    return p.n - c % p.n


def _check_square(m: list[list[int]]) -> int:
    J = len(m)
    if any(len(row) != J for row in m):
        raise ShapeMismatch("block matrix must be square")
    return J


def _det(p: ShiftParams, m: list[list[int]], tally: list[int] | None = None) -> int:
    J = len(m)
    if J == 0:
        return 1
    memo: dict[int, int] = {}

    def expand(row: int, cols: int) -> int:
        # determinant of rows row.. restricted to column set `cols`; char 2 drops signs
        if row == J:
            return 1
        hit = memo.get(cols)
        if hit is not None:
            return hit
        total = 0
        for c in range(J):
            if cols >> c & 1 and m[row][c]:
                sub = expand(row + 1, cols & ~(1 << c))
                if sub:
                    total ^= ring_mul(p, m[row][c], sub)
                    if tally is not None:
                        tally[0] += 1
        memo[cols] = total
        return total

    return expand(0, (1 << J) - 1)


def ring_det(p: ShiftParams, m: list[list[int]], tally: list[int] | None = None) -> int:
    """Determinant computed over the ring (memoised Laplace expansion).

    ``tally[0]``, when given, is incremented once per ring multiplication.
    """
    J = _check_square(m)
    if J > MAX_DET_BLOCKS:
        raise ShapeMismatch(f"block size {J} exceeds {MAX_DET_BLOCKS}")
    return _det(p, m, tally)


def ring_minor(p: ShiftParams, m: list[list[int]], j: int, jp: int, tally: list[int] | None = None) -> int:
    """Determinant of ``m`` with block row ``j`` and block column ``jp`` deleted (0-based)."""
    J = _check_square(m)
    if J < 2:
        raise ShapeMismatch("minors need at least a 2x2 block matrix")
    if not (0 <= j < J and 0 <= jp < J):
        raise IndexError(f"minor index ({j}, {jp}) out of range for size {J}")
    sub = [[x for c, x in enumerate(row) if c != jp] for r, row in enumerate(m) if r != j]
    return _det(p, sub, tally)


def ring_matmul(p: ShiftParams, a: list[list[int]], b: list[list[int]]) -> list[list[int]]:
    inner = len(b)
    out = []
    for row in a:
        if len(row) != inner:
            raise ShapeMismatch("inner block dimensions differ")
        out_row = []
        for c in range(len(b[0])):
            acc = 0
            for k in range(inner):
                if row[k] and b[k][c]:
                    acc ^= ring_mul(p, row[k], b[k][c])
            out_row.append(acc)
        out.append(out_row)
    return out


def is_identity_mod_ones(p: ShiftParams, m: list[list[int]]) -> bool:
    """True when ``G m H`` (blockwise) is the identity, i.e. ``m`` equals I up to all-ones blocks."""
    for r, row in enumerate(m):
        for c, x in enumerate(row):
            if r == c:
                x ^= 1
            if x and x != p.full:
                return False
    return True


def thm3_inverse(p: ShiftParams, m: list[list[int]], tally: list[int] | None = None) -> list[list[int]]:
    """Inverse of the binary block matrix ``[G m[j][k] H]`` expressed over the ring.

    Entry ``[b][a]`` of the result is ``sigma(det^(2^L - 2) * minor(a, b))``;
    every returned block therefore has weight at most ``L/2``.  ``tally``
    counts ring multiplications, excluding the final verification product.
    """
    J = _check_square(m)
    if J == 0:
        return []
    lam = ring_det(p, m, tally)
    lam_inv = ring_pow(p, lam, (1 << p.L) - 2)
    if tally is not None:
        tally[0] += 2 * p.L
    if J == 1:
        out = [[sigma(p, lam_inv)]]
    else:
        out = [[0] * J for _ in range(J)]
        for a in range(J):
            for b in range(J):
                minor = ring_minor(p, m, a, b, tally)
                out[b][a] = sigma(p, ring_mul(p, lam_inv, minor)) if minor else 0
                if tally is not None:
                    tally[0] += 1
    if not is_identity_mod_ones(p, ring_matmul(p, m, out)):
        raise SingularMatrix("block matrix is not invertible after G/H conjugation")
    return out


# Dense binary matrices, used as independent oracles.


@lru_cache(maxsize=None)
def dense_C(n: int) -> np.ndarray:
    """Cyclic permutation [[0, I], [1, 0]] of size n."""
    c = np.zeros((n, n), dtype=np.uint8)
    for i in range(n - 1):
        c[i, i + 1] = 1
    c[n - 1, 0] = 1
    return c


@lru_cache(maxsize=None)
def dense_G(L: int) -> np.ndarray:
    return np.hstack([np.eye(L, dtype=np.uint8), np.ones((L, 1), dtype=np.uint8)])


@lru_cache(maxsize=None)
def dense_H(L: int) -> np.ndarray:
    return np.vstack([np.eye(L, dtype=np.uint8), np.zeros((1, L), dtype=np.uint8)])


def gf2_matmul(*mats: np.ndarray) -> np.ndarray:
    out = mats[0].astype(np.int64)
    for m in mats[1:]:
        out = (out @ m.astype(np.int64)) % 2
    return out.astype(np.uint8)


def dense_ring(L: int, mask: int) -> np.ndarray:
    n = L + 1
    out = np.zeros((n, n), dtype=np.int64)
    c = dense_C(n).astype(np.int64)
    power = np.eye(n, dtype=np.int64)
    for l in range(n):
        if mask >> l & 1:
            out += power
        power = power @ c
    return (out % 2).astype(np.uint8)


def dense_conjugate(L: int, mask: int) -> np.ndarray:
    """``G Psi H`` as an L x L binary matrix."""
    return gf2_matmul(dense_G(L), dense_ring(L, mask), dense_H(L))


def expand_block_matrix(L: int, m: list[list[int]]) -> np.ndarray:
    """``(I (x) G) [Psi] (I (x) H)`` as a dense binary matrix."""
    rows = [np.hstack([dense_conjugate(L, x) for x in row]) for row in m]
    return np.vstack(rows)
