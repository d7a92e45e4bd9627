"""Packet payloads and symbol-wise operations with binary-operation accounting.

A packet is an array of ``M/L`` symbols, one machine word per symbol.  In the
plain state each symbol has ``L`` bits; after parity expansion (multiplying
by ``G = [I_L 1]``) it has ``L+1`` bits with the parity in bit ``L``.
Rotation by ``l`` maps bit ``i`` to bit ``(i + l) mod (L+1)``.

Cost model: XOR of two b-bit symbols costs b, a rotation is free, parity
expansion costs L-1 per symbol, and dropping the parity bit is free.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ShapeMismatch

SYMBOL_DTYPE = np.uint32


@dataclass
class OpCounter:
    binary_ops: int = 0
    # matrix-inversion work, reported separately and excluded from binary_ops
    inverse_ops: int = 0

    def add(self, n: int) -> None:
        self.binary_ops += n


@dataclass
class Packet:
    L: int
    data: np.ndarray
    expanded: bool = False

    @property
    def symbol_bits(self) -> int:
        return self.L + 1 if self.expanded else self.L

    @property
    def num_symbols(self) -> int:
        return len(self.data)

    def copy(self) -> "Packet":
        return Packet(self.L, self.data.copy(), self.expanded)

    def __eq__(self, other):
        if not isinstance(other, Packet):
            return NotImplemented
        return (
            self.L == other.L
            and self.expanded == other.expanded
            and np.array_equal(self.data, other.data)
        )


def zero_packet(L: int, num_symbols: int, expanded: bool = False) -> Packet:
    return Packet(L, np.zeros(num_symbols, dtype=SYMBOL_DTYPE), expanded)


def random_packet(L: int, num_symbols: int, gen: np.random.Generator) -> Packet:
    return Packet(L, gen.integers(0, 1 << L, size=num_symbols, dtype=SYMBOL_DTYPE))


def _require(pkt: Packet, expanded: bool) -> None:
    if pkt.expanded != expanded:
        state = "L+1" if expanded else "L"
        raise ShapeMismatch(f"packet must hold {state}-bit symbols")


def xor_into(dst: Packet, src: Packet, ctr: OpCounter | None = None) -> None:
    if dst.L != src.L or dst.expanded != src.expanded or dst.num_symbols != src.num_symbols:
        raise ShapeMismatch("xor of packets with different shapes")
    dst.data ^= src.data
    if ctr is not None:
        ctr.binary_ops += dst.num_symbols * dst.symbol_bits


def rotate_symbols(data: np.ndarray, l: int, n: int) -> np.ndarray:
    l %= n
    if l == 0:
        return data.copy()
    full = (1 << n) - 1
    return ((data << l) | (data >> (n - l))) & full


def apply_shift(pkt: Packet, l: int) -> Packet:
    """Rotate every (L+1)-bit symbol by ``l`` positions; free of cost."""
    _require(pkt, True)
    return Packet(pkt.L, rotate_symbols(pkt.data, l, pkt.L + 1), True)


def expand_G(pkt: Packet, ctr: OpCounter | None = None) -> Packet:
    _require(pkt, False)
    parity = np.bitwise_count(pkt.data) & 1
    data = pkt.data | (parity.astype(SYMBOL_DTYPE) << pkt.L)
    if ctr is not None:
        ctr.binary_ops += pkt.num_symbols * (pkt.L - 1)
    return Packet(pkt.L, data, True)


def project_H(pkt: Packet) -> Packet:
    _require(pkt, True)
    return Packet(pkt.L, pkt.data & SYMBOL_DTYPE((1 << pkt.L) - 1), False)


def apply_ring(e: int, pkt: Packet, ctr: OpCounter | None = None) -> Packet:
    """Sum of the rotations of ``pkt`` selected by the ring mask ``e``."""
    _require(pkt, True)
    n = pkt.L + 1
    out = None
    terms = 0
    for l in range(n):
        if e >> l & 1:
            rotated = rotate_symbols(pkt.data, l, n)
            out = rotated if out is None else out ^ rotated
            terms += 1
    if out is None:
        return zero_packet(pkt.L, pkt.num_symbols, expanded=True)
    if ctr is not None and terms > 1:
        ctr.binary_ops += (terms - 1) * n * pkt.num_symbols
    return Packet(pkt.L, out, True)
