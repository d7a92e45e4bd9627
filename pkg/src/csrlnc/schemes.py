"""Scheme configuration, encoders and header/wire codecs.

Four scheme kinds share one configuration type:

* ``CONV_GF``  conventional RLNC over GF(2^L) (L = 1 is plain GF(2));
* ``PERFECT``  the idealised scheme, modelled by counting only;
* ``CIRC``     circular-shift coefficients with zero probability ``p0``;
* ``CIRC_RED`` the same coefficients, sent with one parity bit per symbol.

Coefficient headers are tuples of ints of length ``P``.  For ``CONV_GF`` an
entry is a field element; for the circular-shift kinds it is a coefficient
code (0 = zero, ``l`` in ``1..L+1`` = shift by ``l``).
"""

from __future__ import annotations

import enum
import struct
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np

from .bits import Packet, apply_shift, expand_G, project_H, zero_packet
from .circring import ShiftParams, is_admissible, admissible_values
from .errors import InvalidParameter, MalformedHeader, ShapeMismatch
from .gf2e import MAX_L, field, fe_mul_array


class Scheme(enum.IntEnum):
    CONV_GF = 0
    PERFECT = 1
    CIRC = 2
    CIRC_RED = 3

    @property
    def is_circ(self) -> bool:
        return self in (Scheme.CIRC, Scheme.CIRC_RED)


def parse_p0(text: str | Fraction) -> Fraction:
    """Parse ``N/D``; decimal notation is refused so sampling stays exact."""
    if isinstance(text, Fraction):
        return text
    parts = str(text).strip().split("/")
    if len(parts) != 2 or not all(p.strip().isdigit() for p in parts):
        raise InvalidParameter(f"p0 must be a rational N/D, got {text!r}")
    num, den = (int(p) for p in parts)
    if den == 0:
        raise InvalidParameter("p0 denominator is zero")
    return Fraction(num, den)


@dataclass(frozen=True)
class SchemeConfig:
    kind: Scheme
    P: int
    L: int = 1
    M: int = 1024
    p0: Fraction | None = None
    # draw conventional coefficients from the nonzero elements only (op-count experiments)
    forced_nonzero: bool = False

    def __post_init__(self):
        if self.P < 1:
            raise InvalidParameter("P must be at least 1")
        if self.M < 1 or self.M % self.L:
            raise InvalidParameter(f"M={self.M} must be a positive multiple of L={self.L}")
        if self.kind == Scheme.CONV_GF and not 1 <= self.L <= MAX_L:
            raise InvalidParameter(f"conventional scheme needs 1 <= L <= {MAX_L}")
        if self.kind.is_circ:
            if not is_admissible(self.L):
                raise InvalidParameter(
                    f"L={self.L} is not admissible for circular-shift coding; "
                    f"valid values: {admissible_values(30)} ..."
                )
            if self.p0 is None:
                raise InvalidParameter("circular-shift schemes need p0")
            p0 = Fraction(self.p0)
            object.__setattr__(self, "p0", p0)
            if not Fraction(1, self.L + 2) <= p0 < 1:
                raise InvalidParameter(f"p0={p0} outside [1/(L+2), 1)")

    @property
    def num_symbols(self) -> int:
        return self.M // self.L

    @property
    def q(self) -> int:
        return 1 << self.L

    @property
    def shift(self) -> ShiftParams:
        return ShiftParams(self.L)

    @property
    def unit(self) -> int:
        """Header value of the identity coefficient."""
        return self.L + 1 if self.kind.is_circ else 1

    @property
    def payload_bits(self) -> int:
        """Bits per transmitted symbol."""
        return self.L + 1 if self.kind == Scheme.CIRC_RED else self.L


@dataclass
class CodedPacket:
    header: tuple[int, ...]
    payload: Packet | None
    # index of the original for uncoded packets, None for coded ones
    systematic: int | None = None


def _check_originals(cfg: SchemeConfig, originals: Sequence[Packet]) -> None:
    if len(originals) != cfg.P:
        raise ShapeMismatch(f"expected {cfg.P} originals, got {len(originals)}")
    for m in originals:
        if m.L != cfg.L or m.expanded or m.num_symbols != cfg.num_symbols:
            raise ShapeMismatch("original packet does not match the configuration")


def unit_header(cfg: SchemeConfig, j: int) -> tuple[int, ...]:
    return tuple(cfg.unit if k == j else 0 for k in range(cfg.P))


def encode_systematic(cfg: SchemeConfig, originals: Sequence[Packet]) -> list[CodedPacket]:
    _check_originals(cfg, originals)
    out = []
    for j, m in enumerate(originals):
        payload = expand_G(m) if cfg.kind == Scheme.CIRC_RED else m.copy()
        out.append(CodedPacket(unit_header(cfg, j), payload, systematic=j))
    return out


def draw_conv_coeffs(cfg: SchemeConfig, rng: np.random.Generator) -> tuple[int, ...]:
    if cfg.forced_nonzero:
        draws = rng.integers(1, cfg.q, size=cfg.P)
    else:
        draws = rng.integers(0, cfg.q, size=cfg.P)
    return tuple(int(x) for x in draws)


def p0_layout(p0: Fraction, L: int) -> tuple[int, int, int]:
    """(range size, zero slots, slots per shift) of the exact integer draw."""
    a, b = p0.numerator, p0.denominator
    if a * (L + 1) < b - a or not 0 < a < b:
        raise InvalidParameter(f"p0={p0} must satisfy 1/(L+2) <= p0 < 1")
    return b * (L + 1), a * (L + 1), b - a


def coeff_from_draw(t: int, zeros: int, per_shift: int) -> int:
    return 0 if t < zeros else 1 + (t - zeros) // per_shift


def draw_p0_coeff(p0: Fraction, L: int, rng: np.random.Generator) -> int:
    """One coefficient code: zero with probability p0, else a uniform shift.

    A uniform integer in ``[0, b(L+1))`` for ``p0 = a/b`` is split into
    ``a(L+1)`` zero outcomes followed by ``b-a`` outcomes per shift, so the
    probabilities are exact rationals.
    """
    size, zeros, per_shift = p0_layout(p0, L)
    return coeff_from_draw(int(rng.integers(0, size)), zeros, per_shift)


def draw_circ_coeffs(cfg: SchemeConfig, rng: np.random.Generator) -> tuple[int, ...]:
    size, zeros, per_shift = p0_layout(cfg.p0, cfg.L)
    t = rng.integers(0, size, size=cfg.P)
    codes = np.where(t < zeros, 0, 1 + (t - zeros) // per_shift)
    return tuple(int(x) for x in codes)


def draw_coeffs(cfg: SchemeConfig, rng: np.random.Generator) -> tuple[int, ...]:
    if cfg.kind == Scheme.CONV_GF:
        return draw_conv_coeffs(cfg, rng)
    if cfg.kind.is_circ:
        return draw_circ_coeffs(cfg, rng)
    raise InvalidParameter("the perfect scheme has no coefficients")


def combine_conv(cfg: SchemeConfig, originals: Sequence[Packet], header: Sequence[int]) -> Packet:
    ctx = field(cfg.L)
    acc = np.zeros(cfg.num_symbols, dtype=originals[0].data.dtype)
    for g, m in zip(header, originals):
        if g:
            acc ^= fe_mul_array(ctx, g, m.data)
    return Packet(cfg.L, acc)


def combine_circ(
    cfg: SchemeConfig, originals: Sequence[Packet], header: Sequence[int], expanded: Sequence[Packet] | None = None
) -> Packet:
    """Payload of a circular-shift packet; pass ``expanded`` to reuse parity-extended originals."""
    if expanded is None:
        expanded = [expand_G(m) for m in originals]
    acc = zero_packet(cfg.L, cfg.num_symbols, expanded=True)
    for c, e in zip(header, expanded):
        if c:
            acc.data ^= apply_shift(e, c).data
    return acc if cfg.kind == Scheme.CIRC_RED else project_H(acc)


def encode_coded_conv(cfg: SchemeConfig, originals: Sequence[Packet], rng: np.random.Generator) -> CodedPacket:
    if cfg.kind != Scheme.CONV_GF:
        raise InvalidParameter("encode_coded_conv needs a conventional configuration")
    _check_originals(cfg, originals)
    header = draw_conv_coeffs(cfg, rng)
    return CodedPacket(header, combine_conv(cfg, originals, header))


def encode_coded_circ(cfg: SchemeConfig, originals: Sequence[Packet], rng: np.random.Generator) -> CodedPacket:
    if not cfg.kind.is_circ:
        raise InvalidParameter("encode_coded_circ needs a circular-shift configuration")
    _check_originals(cfg, originals)
    header = draw_circ_coeffs(cfg, rng)
    return CodedPacket(header, combine_circ(cfg, originals, header))


# Header and wire codecs.


def header_width(cfg: SchemeConfig) -> int:
    """Packed header width in bits."""
    if cfg.kind.is_circ:
        return ((cfg.L + 2) ** cfg.P - 1).bit_length()
    if cfg.kind == Scheme.CONV_GF:
        return cfg.P * cfg.L
    raise InvalidParameter("the perfect scheme has no header")


def header_pack(cfg: SchemeConfig, coeffs: Sequence[int]) -> int:
    """Pack a header into an int of :func:`header_width` bits.

    Circular-shift headers use base ``L+2`` with coefficient ``j`` as digit
    ``j`` (least significant first); conventional headers use ``L`` bits per
    element in the same order.
    """
    if len(coeffs) != cfg.P:
        raise ShapeMismatch(f"header needs {cfg.P} coefficients")
    radix = cfg.L + 2 if cfg.kind.is_circ else cfg.q
    if cfg.kind == Scheme.PERFECT:
        raise InvalidParameter("the perfect scheme has no header")
    value = 0
    for c in reversed(coeffs):
        if not 0 <= c < radix:
            raise InvalidParameter(f"coefficient {c} out of range for radix {radix}")
        value = value * radix + c
    return value


def header_unpack(cfg: SchemeConfig, value: int) -> tuple[int, ...]:
    if cfg.kind == Scheme.PERFECT:
        raise InvalidParameter("the perfect scheme has no header")
    radix = cfg.L + 2 if cfg.kind.is_circ else cfg.q
    if not 0 <= value < radix**cfg.P:
        raise MalformedHeader(f"header value {value} exceeds {cfg.P} base-{radix} digits")
    out = []
    for _ in range(cfg.P):
        value, digit = divmod(value, radix)
        out.append(digit)
    return tuple(out)


_PREFIX = struct.Struct("<HHH")


def _pack_symbols(data: np.ndarray, width: int) -> bytes:
    bits = ((data[:, None] >> np.arange(width, dtype=data.dtype)) & 1).astype(np.uint8)
    return np.packbits(bits.ravel(), bitorder="little").tobytes()


def _unpack_symbols(raw: bytes, width: int, count: int) -> np.ndarray:
    bits = np.unpackbits(np.frombuffer(raw, dtype=np.uint8), bitorder="little")[: width * count]
    if len(bits) < width * count:
        raise MalformedHeader("payload shorter than declared")
    weights = (1 << np.arange(width)).astype(np.uint32)
    return (bits.reshape(count, width).astype(np.uint32) @ weights).astype(np.uint32)


def to_wire(cfg: SchemeConfig, pkt: CodedPacket) -> bytes:
    """``[u16 kind][u16 P][u16 L][header][payload]``, little-endian, byte-aligned fields."""
    width = header_width(cfg)
    head = header_pack(cfg, pkt.header).to_bytes((width + 7) // 8, "little")
    if pkt.payload is None:
        raise ShapeMismatch("packet has no payload")
    return _PREFIX.pack(int(cfg.kind), cfg.P, cfg.L) + head + _pack_symbols(pkt.payload.data, cfg.payload_bits)


def from_wire(cfg: SchemeConfig, raw: bytes) -> CodedPacket:
    if len(raw) < _PREFIX.size:
        raise MalformedHeader("truncated prefix")
    kind, P, L = _PREFIX.unpack_from(raw)
    if (kind, P, L) != (int(cfg.kind), cfg.P, cfg.L):
        raise MalformedHeader(f"prefix {(kind, P, L)} does not match the configuration")
    hbytes = (header_width(cfg) + 7) // 8
    start = _PREFIX.size
    value = int.from_bytes(raw[start:start + hbytes], "little")
    header = header_unpack(cfg, value)
    data = _unpack_symbols(raw[start + hbytes:], cfg.payload_bits, cfg.num_symbols)
    payload = Packet(cfg.L, data, expanded=cfg.kind == Scheme.CIRC_RED)
    unit = [j for j, c in enumerate(header) if c]
    systematic = unit[0] if len(unit) == 1 and header[unit[0]] == cfg.unit else None
    return CodedPacket(header, payload, systematic)
