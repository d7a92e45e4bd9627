"""Two-phase decoders with binary-operation accounting.

Both decoders take exactly ``P`` received packets whose coding vectors are
jointly full rank.  Uncoded packets are used directly; phase I strips them
out of the coded packets, step one of phase II peels coded packets that
depend on a single remaining original, and step two inverts whatever
residual system is left.

Counting rules (per symbol): GF(2^L) addition ``L``; multiplication ``2L^2``
unless the multiplier is 1; XOR of (L+1)-bit symbols ``L+1``; rotations
free.  Work spent computing inverse matrices goes to ``inverse_ops`` only.
"""

from __future__ import annotations

from dataclasses import dataclass, field as dc_field
from typing import Iterable, Sequence

from .bits import OpCounter, Packet, apply_ring, apply_shift, expand_G, project_H, xor_into
from .circring import ShiftParams, ring_mul, thm3_inverse
from .errors import InvalidParameter, ShapeMismatch, SingularMatrix
from .gf2e import fe_inv, fe_mul_array, field
from .linalg import field_block_inverse, gf_matrix_inverse
from .schemes import CodedPacket, Scheme, SchemeConfig

# larger residual systems are inverted through GF(2^L); same result, less work
RING_INVERSE_MAX_BLOCKS = 8


@dataclass
class DecodeSession:
    cfg: SchemeConfig
    received: list[CodedPacket]
    counter: OpCounter = dc_field(default_factory=OpCounter)


@dataclass
class DecodeResult:
    originals: list[Packet]
    counter: OpCounter
    uncoded: int
    # size of the residual system handed to step two; 0 when step one finishes
    residual: int


def singleton_scan(matrix: Sequence[Sequence[int]], rows: Iterable[int], cols: Iterable[int]) -> tuple[int, int] | None:
    """Lowest row in ``rows`` with exactly one nonzero entry among ``cols``."""
    cols = sorted(cols)
    for j in sorted(rows):
        hit = None
        for c in cols:
            if matrix[j][c]:
                if hit is not None:
                    hit = None
                    break
                hit = c
        else:
            if hit is not None:
                return j, hit
    return None


def _split(session: DecodeSession) -> tuple[dict[int, CodedPacket], list[CodedPacket]]:
    cfg = session.cfg
    if len(session.received) != cfg.P:
        raise ShapeMismatch(f"need exactly {cfg.P} packets, got {len(session.received)}")
    uncoded: dict[int, CodedPacket] = {}
    coded = []
    for pkt in session.received:
        if pkt.payload is None:
            raise ShapeMismatch("packet has no payload")
        if len(pkt.header) != cfg.P:
            raise ShapeMismatch("header length differs from P")
        if pkt.systematic is None:
            coded.append(pkt)
        elif pkt.systematic in uncoded:
            raise SingularMatrix(f"uncoded packet {pkt.systematic} received twice")
        else:
            uncoded[pkt.systematic] = pkt
    return uncoded, coded


def decode_conv(session: DecodeSession) -> DecodeResult:
    cfg = session.cfg
    if cfg.kind != Scheme.CONV_GF:
        raise InvalidParameter("decode_conv needs a conventional session")
    ctx = field(cfg.L)
    ctr = session.counter
    ns = cfg.num_symbols
    mul_cost = 2 * cfg.L * cfg.L * ns
    add_cost = cfg.L * ns

    def scaled(g: int, data):
        if g == 1:
            return data
        ctr.add(mul_cost)
        return fe_mul_array(ctx, g, data)

    uncoded, coded = _split(session)
    known = {j: pkt.payload.data for j, pkt in uncoded.items()}
    rows = [pkt.header for pkt in coded]
    ys = [pkt.payload.data.copy() for pkt in coded]

    # phase I: strip uncoded originals
    for r, header in enumerate(rows):
        for jp, x in known.items():
            g = header[jp]
            if g:
                ys[r] ^= scaled(g, x)
                ctr.add(add_cost)

    live = list(range(len(rows)))
    cols = {j for j in range(cfg.P) if j not in known}

    # phase II step one: peel rows with a single remaining coefficient
    while (hit := singleton_scan(rows, live, cols)) is not None:
        j0, j0p = hit
        x = scaled(fe_inv(ctx, rows[j0][j0p]), ys[j0])
        known[j0p] = x
        live.remove(j0)
        cols.discard(j0p)
        for j in live:
            g = rows[j][j0p]
            if g:
                ys[j] ^= scaled(g, x)
                ctr.add(add_cost)

    residual = len(live)
    if residual:
        order = sorted(cols)
        sub = [[rows[j][c] for c in order] for j in live]
        inverse, inv_ops = gf_matrix_inverse(ctx, sub)
        ctr.inverse_ops += inv_ops * ns
        for a, c in enumerate(order):
            acc = None
            for b, j in enumerate(live):
                g = inverse[a][b]
                if g:
                    term = scaled(g, ys[j])
                    if acc is None:
                        acc = term.copy()
                    else:
                        acc ^= term
                        ctr.add(add_cost)
            known[c] = acc

    originals = [Packet(cfg.L, known[j].copy()) for j in range(cfg.P)]
    return DecodeResult(originals, ctr, len(uncoded), residual)


def _decode_shift(session: DecodeSession, pre_expanded: bool) -> DecodeResult:
    cfg = session.cfg
    params = ShiftParams(cfg.L)
    n = params.n
    ctr = session.counter
    xor_cost = n * cfg.num_symbols

    def lifted(pkt: CodedPacket) -> Packet:
        if pre_expanded:
            if not pkt.payload.expanded:
                raise ShapeMismatch("redundant-bit scheme expects (L+1)-bit symbols")
            return pkt.payload.copy()
        return expand_G(pkt.payload, ctr)

    uncoded, coded = _split(session)
    # phase I: parity-extend everything, then strip uncoded originals
    known = {j: lifted(pkt) for j, pkt in uncoded.items()}
    rows = [pkt.header for pkt in coded]
    ys = [lifted(pkt) for pkt in coded]
    for r, header in enumerate(rows):
        for jp, x in known.items():
            c = header[jp]
            if c:
                xor_into(ys[r], apply_shift(x, c), ctr)

    live = list(range(len(rows)))
    cols = {j for j in range(cfg.P) if j not in known}

    # step one: a single shift coefficient is undone by the opposite rotation
    while (hit := singleton_scan(rows, live, cols)) is not None:
        j0, j0p = hit
        x = apply_shift(ys[j0], -rows[j0][j0p])
        known[j0p] = x
        live.remove(j0)
        cols.discard(j0p)
        for j in live:
            c = rows[j][j0p]
            if c:
                xor_into(ys[j], apply_shift(x, c), ctr)

    residual = len(live)
    if residual:
        order = sorted(cols)
        j1 = live[0]
        j1p = next((c for c in order if rows[j1][c]), None)
        if j1p is None:
            raise SingularMatrix("residual row has no nonzero coefficient")
        back = -rows[j1][j1p]
        pivot = apply_shift(ys[j1], back)
        # normalised pivot row, as rotation amounts
        norm = {c: (rows[j1][c] + back) % n for c in order if rows[j1][c] and c != j1p}

        rest_rows = live[1:]
        rest_cols = [c for c in order if c != j1p]
        psi = []
        for j in rest_rows:
            cj = rows[j][j1p]
            if cj:
                xor_into(ys[j], apply_shift(pivot, cj), ctr)
            row = []
            for c in rest_cols:
                e = 1 << (rows[j][c] % n) if rows[j][c] else 0
                if cj and c in norm:
                    e ^= ring_mul(params, 1 << (cj % n), 1 << norm[c])
                row.append(e)
            psi.append(row)

        if len(psi) <= RING_INVERSE_MAX_BLOCKS:
            tally = [0]
            phi = thm3_inverse(params, psi, tally)
            ctr.inverse_ops += tally[0] * n * n
        else:
            phi, inv_ops = field_block_inverse(params, psi)
            ctr.inverse_ops += inv_ops
        for a, c in enumerate(rest_cols):
            acc = None
            for b, j in enumerate(rest_rows):
                if phi[a][b]:
                    term = apply_ring(phi[a][b], ys[j], ctr)
                    if acc is None:
                        acc = term
                    else:
                        xor_into(acc, term, ctr)
            if acc is None:
                raise SingularMatrix("inverse has an all-zero row")
            known[c] = acc

        for c, s in norm.items():
            xor_into(pivot, apply_shift(known[c], s), ctr)
        known[j1p] = pivot

    originals = [project_H(known[j]) for j in range(cfg.P)]
    return DecodeResult(originals, ctr, len(uncoded), residual)


def decode_circ(session: DecodeSession) -> DecodeResult:
    if session.cfg.kind != Scheme.CIRC:
        raise InvalidParameter("decode_circ needs a circular-shift session")
    return _decode_shift(session, pre_expanded=False)


def decode_circ_red(session: DecodeSession) -> DecodeResult:
    """Same pipeline for packets that already carry the parity bit."""
    if session.cfg.kind != Scheme.CIRC_RED:
        raise InvalidParameter("decode_circ_red needs a redundant-bit session")
    return _decode_shift(session, pre_expanded=True)


def decode(session: DecodeSession) -> DecodeResult:
    kind = session.cfg.kind
    if kind == Scheme.CONV_GF:
        return decode_conv(session)
    if kind == Scheme.CIRC:
        return decode_circ(session)
    if kind == Scheme.CIRC_RED:
        return decode_circ_red(session)
    raise InvalidParameter("the perfect scheme has no payload to decode")
