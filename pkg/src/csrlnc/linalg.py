"""Rank tracking and dense solvers over GF(2) and GF(2^L).

Bit-vectors are Python ints (bit i = coordinate i).  Field vectors are
sequences of field elements.  Pivots are always the lowest-index nonzero
coordinate so results are deterministic.
"""

from __future__ import annotations

from functools import lru_cache
from typing import Sequence

import numpy as np

from .bits import Packet
from .circring import ShiftParams, dense_conjugate, is_identity_mod_ones, ring_matmul, sigma
from .errors import ShapeMismatch, SingularMatrix
from .gf2e import FieldCtx, beta_element, fe_inv, fe_mul, fe_mul_array, fe_pow, field


def _lowbit(v: int) -> int:
    return v & -v


class Gf2RankTracker:
    """Incremental row-echelon basis of bit-vectors in GF(2)^n."""

    def __init__(self, n: int):
        self.n = n
        self.rows: list[tuple[int, int]] = []  # (pivot bit, row), insertion order

    @property
    def rank(self) -> int:
        return len(self.rows)

    def reduce(self, v: int) -> int:
        for pivot, row in self.rows:
            if v & pivot:
                v ^= row
        return v

    def absorb(self, v: int) -> bool:
        if v >> self.n:
            raise ShapeMismatch(f"vector wider than ambient dimension {self.n}")
        v = self.reduce(v)
        if v:
            self.rows.append((_lowbit(v), v))
            return True
        return False

    def absorb_column(self, cols: Sequence[int]) -> int:
        """Absorb the columns of one block coding vector; returns the rank increase."""
        before = self.rank
        for c in cols:
            self.absorb(c)
        return self.rank - before


def rank_gf2(m) -> int:
    """Rank of a dense 0/1 matrix, or of a list of int row bit-vectors."""
    if isinstance(m, np.ndarray):
        rows = [int("".join(str(int(b)) for b in row[::-1]) or "0", 2) for row in m]
    else:
        rows = list(m)
    basis: dict[int, int] = {}
    for v in rows:
        while v:
            top = v.bit_length() - 1
            if top not in basis:
                basis[top] = v
                break
            v ^= basis[top]
    return len(basis)


def gf2_inverse(m: np.ndarray) -> np.ndarray:
    """Inverse of a square 0/1 matrix by Gauss-Jordan on int rows."""
    n = m.shape[0]
    if m.shape != (n, n):
        raise ShapeMismatch("matrix must be square")
    rows = [int(sum(int(b) << i for i, b in enumerate(row))) | (1 << (n + r)) for r, row in enumerate(m)]
    for col in range(n):
        pivot = next((r for r in range(col, n) if rows[r] >> col & 1), None)
        if pivot is None:
            raise SingularMatrix("binary matrix is singular")
        rows[col], rows[pivot] = rows[pivot], rows[col]
        for r in range(n):
            if r != col and rows[r] >> col & 1:
                rows[r] ^= rows[col]
    out = np.zeros((n, n), dtype=np.uint8)
    for r in range(n):
        for c in range(n):
            out[r, c] = rows[r] >> (n + c) & 1
    return out


class GfRankTracker:
    """Incremental reduced row-echelon basis over GF(2^L).

    Each basis row is ``e_pivot`` plus entries on the still-free columns, so
    only the free part is stored.  Testing a new vector costs
    O(rank x free columns) field operations.
    """

    def __init__(self, ctx: FieldCtx, n: int):
        self.ctx = ctx
        self.n = n
        self.free: list[int] = list(range(n))
        self.pivots: set[int] = set()
        self.parts: dict[int, dict[int, int]] = {}  # pivot -> {free column: value}, nonzero only

    @property
    def rank(self) -> int:
        return len(self.pivots)

    def add_unit(self, j: int) -> bool:
        if j in self.pivots:
            return False
        if self.parts:
            return self.absorb([1 if k == j else 0 for k in range(self.n)])
        self.pivots.add(j)
        self.free.remove(j)
        return True

    def absorb(self, v: Sequence[int]) -> bool:
        if len(v) != self.n:
            raise ShapeMismatch(f"vector length {len(v)} != {self.n}")
        exp, log = self.ctx.exp, self.ctx.log
        resid = {f: v[f] for f in self.free}
        for c, part in self.parts.items():
            a = v[c]
            if a:
                la = log[a]
                for f, x in part.items():
                    resid[f] ^= exp[la + log[x]]
        star = next((f for f in self.free if resid[f]), None)
        if star is None:
            return False
        inv = fe_inv(self.ctx, resid[star])
        new = {f: fe_mul(self.ctx, x, inv) for f, x in resid.items() if x and f != star}
        for part in self.parts.values():
            a = part.pop(star, 0)
            if a:
                for f, x in new.items():
                    y = part.get(f, 0) ^ fe_mul(self.ctx, a, x)
                    if y:
                        part[f] = y
                    else:
                        part.pop(f, None)
        self.parts = {c: part for c, part in self.parts.items() if part}
        if new:
            self.parts[star] = new
        self.pivots.add(star)
        self.free.remove(star)
        return True


def rank_gf(ctx: FieldCtx, rows: Sequence[Sequence[int]]) -> int:
    """Rank over GF(2^L) by plain Gaussian elimination (no incremental state)."""
    work = [list(r) for r in rows]
    if not work:
        return 0
    ncols = len(work[0])
    rank = 0
    for col in range(ncols):
        pivot = next((r for r in range(rank, len(work)) if work[r][col]), None)
        if pivot is None:
            continue
        work[rank], work[pivot] = work[pivot], work[rank]
        inv = fe_inv(ctx, work[rank][col])
        work[rank] = [fe_mul(ctx, x, inv) for x in work[rank]]
        for r in range(len(work)):
            if r != rank and work[r][col]:
                a = work[r][col]
                work[r] = [x ^ fe_mul(ctx, a, y) for x, y in zip(work[r], work[rank])]
        rank += 1
    return rank


@lru_cache(maxsize=None)
def beta_table(L: int) -> tuple[int, ...]:
    """Coefficient code -> field element: 0 -> 0, l -> beta^l."""
    ctx = field(L)
    beta = beta_element(ctx)
    return (0,) + tuple(fe_pow(ctx, beta, l) for l in range(1, L + 2))


def beta_rank(params: ShiftParams, m: Sequence[Sequence[int]]) -> bool:
    """Whether the P x J coefficient matrix has full block rank J.

    ``m[j'][j]`` is the coefficient code of packet ``j`` on original ``j'``.
    The test maps shifts to powers of an order-(L+1) element of GF(2^L) and
    computes the rank there.
    """
    table = beta_table(params.L)
    J = len(m[0]) if m else 0
    cols = [[table[row[j]] for row in m] for j in range(J)]
    return rank_gf(field(params.L), cols) == J


@lru_cache(maxsize=None)
def _shift_blocks(L: int) -> tuple[np.ndarray, ...]:
    """Dense L x L matrices of every coefficient code."""
    zero = np.zeros((L, L), dtype=np.uint8)
    return (zero,) + tuple(dense_conjugate(L, 1 << (l % (L + 1))) for l in range(1, L + 2))


def expand_coeff_matrix(params: ShiftParams, m: Sequence[Sequence[int]]) -> np.ndarray:
    """Dense PL x JL binary matrix of a P x J coefficient-code matrix."""
    blocks = _shift_blocks(params.L)
    return np.vstack([np.hstack([blocks[c] for c in row]) for row in m])


def coeff_columns(params: ShiftParams, coeffs: Sequence[int]) -> list[int]:
    """The L columns of one packet's PL x L coding vector, as PL-bit ints."""
    L = params.L
    blocks = _shift_blocks(L)
    cols = []
    for k in range(L):
        v = 0
        for jp, c in enumerate(coeffs):
            if c:
                block = blocks[c]
                for i in range(L):
                    if block[i, k]:
                        v |= 1 << (jp * L + i)
        cols.append(v)
    return cols


def solve_dense_gf(ctx: FieldCtx, a: Sequence[Sequence[int]], rhs: Sequence[Packet]) -> list[Packet]:
    """Solve ``a x = rhs`` for packets ``x`` (``rhs[i] = sum_k a[i][k] x[k]``)."""
    n = len(a)
    if any(len(row) != n for row in a) or len(rhs) != n:
        raise ShapeMismatch("system must be square")
    work = [list(row) for row in a]
    vals = [p.data.copy() for p in rhs]
    for col in range(n):
        pivot = next((r for r in range(col, n) if work[r][col]), None)
        if pivot is None:
            raise SingularMatrix("coefficient matrix is singular")
        work[col], work[pivot] = work[pivot], work[col]
        vals[col], vals[pivot] = vals[pivot], vals[col]
        inv = fe_inv(ctx, work[col][col])
        work[col] = [fe_mul(ctx, x, inv) for x in work[col]]
        vals[col] = fe_mul_array(ctx, inv, vals[col])
        for r in range(n):
            if r != col and work[r][col]:
                f = work[r][col]
                work[r] = [x ^ fe_mul(ctx, f, y) for x, y in zip(work[r], work[col])]
                vals[r] = vals[r] ^ fe_mul_array(ctx, f, vals[col])
    return [Packet(ctx.L, v) for v in vals]


def _symbols_to_bits(data: np.ndarray, width: int) -> np.ndarray:
    return ((data[:, None] >> np.arange(width, dtype=data.dtype)) & 1).astype(np.int64)


def solve_circ_dense(params: ShiftParams, headers: Sequence[Sequence[int]], payloads: Sequence[Packet]) -> list[Packet]:
    """Reference decoder: invert the PL x PL binary coding matrix symbol by symbol.

    ``headers[j][jp]`` is the coefficient code of received packet ``j`` on
    original ``jp``; payloads carry L-bit symbols.
    """
    L = params.L
    P = len(headers)
    # received row vector y = x . T with block (jp, j) of T = Gamma_{j jp}
    T = expand_coeff_matrix(params, [[headers[j][jp] for j in range(P)] for jp in range(P)])
    Tinv = gf2_inverse(T).astype(np.int64)
    Y = np.hstack([_symbols_to_bits(p.data, L) for p in payloads])
    X = (Y @ Tinv) % 2
    weights = (1 << np.arange(L)).astype(np.int64)
    out = []
    for jp in range(P):
        sym = X[:, jp * L:(jp + 1) * L] @ weights
        out.append(Packet(L, sym.astype(payloads[0].data.dtype)))
    return out


def gf_matrix_inverse(ctx: FieldCtx, a: Sequence[Sequence[int]]) -> tuple[list[list[int]], int]:
    """Gauss-Jordan inverse over GF(2^L); also returns the field-operation tally.

    The tally charges ``L`` per addition and ``2L^2`` per multiplication, the
    same model used for payload work.
    """
    n = len(a)
    if any(len(row) != n for row in a):
        raise ShapeMismatch("matrix must be square")
    work = [list(row) + [1 if c == r else 0 for c in range(n)] for r, row in enumerate(a)]
    mul_cost, add_cost = 2 * ctx.L * ctx.L, ctx.L
    ops = 0
    for col in range(n):
        pivot = next((r for r in range(col, n) if work[r][col]), None)
        if pivot is None:
            raise SingularMatrix("coefficient matrix is singular")
        work[col], work[pivot] = work[pivot], work[col]
        inv = fe_inv(ctx, work[col][col])
        work[col] = [fe_mul(ctx, x, inv) for x in work[col]]
        ops += 2 * n * mul_cost
        for r in range(n):
            if r != col and work[r][col]:
                f = work[r][col]
                work[r] = [x ^ fe_mul(ctx, f, y) for x, y in zip(work[r], work[col])]
                ops += 2 * n * (mul_cost + add_cost)
    return [row[n:] for row in work], ops


@lru_cache(maxsize=None)
def _field_to_ring(L: int) -> dict[int, int]:
    """Field element -> ring mask with bit ``L`` clear, inverting the beta map."""
    ctx = field(L)
    beta = beta_element(ctx)
    powers = [fe_pow(ctx, beta, l) for l in range(L)]
    out = {}
    for mask in range(1 << L):
        v = 0
        for l in range(L):
            if mask >> l & 1:
                v ^= powers[l]
        out[v] = mask
    return out


def ring_to_field(params: ShiftParams, a: int) -> int:
    table = beta_table(params.L)
    v = 0
    for l in range(params.n):
        if a >> l & 1:
            v ^= table[l if l else params.n]
    return v


def field_block_inverse(params: ShiftParams, m: Sequence[Sequence[int]]) -> tuple[list[list[int]], int]:
    """Block inverse of ``[G m H]`` computed in GF(2^L) through the beta map.

    The ring splits into GF(2) x GF(2^L); the GF(2) part only decides between
    ``a`` and ``a + 1``, which ``sigma`` settles, so inverting the GF(2^L)
    image and lifting back gives the same blocks as the determinant formula.
    Also returns the field-operation tally of the inversion.
    """
    if params.L > 16:
        raise ShapeMismatch("field route needs L <= 16")
    ctx = field(params.L)
    image = [[ring_to_field(params, x) for x in row] for row in m]
    inverse, ops = gf_matrix_inverse(ctx, image)
    lift = _field_to_ring(params.L)
    out = [[sigma(params, lift[x]) for x in row] for row in inverse]
    if not is_identity_mod_ones(params, ring_matmul(params, [list(r) for r in m], out)):
        raise SingularMatrix("block matrix is not invertible after G/H conjugation")
    return out, ops
