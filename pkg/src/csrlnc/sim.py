"""Seeded Monte Carlo engine for systematic broadcast over erasure channels.

One trial: the sender broadcasts the ``P`` originals, then coded packets
until every receiver can decode.  Each receiver keeps an incremental rank
tracker; ``D_r`` is the phase-two slot in which receiver ``r`` reaches full
rank, counting every coded slot whether or not it helped.

Randomness per trial comes from three independent streams keyed on
``(base_seed, trial_index, purpose)``, so results do not depend on how
trials are scheduled across workers.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Iterator, Sequence

import numpy as np

from .analysis import ChannelConfig
from .bits import expand_G, random_packet
from .decoders import DecodeSession, decode
from .errors import InvalidParameter
from .gf2e import MAX_L, field as gf_field
from .linalg import Gf2RankTracker, GfRankTracker, beta_table, coeff_columns
from .rng import PURPOSE_CHANNEL, PURPOSE_PAYLOAD, PURPOSE_TRAFFIC, SplitMix64, derive_seed
from .schemes import CodedPacket, Scheme, SchemeConfig, combine_circ, combine_conv, draw_coeffs, encode_systematic


@dataclass(frozen=True)
class UniformChannel:
    """Each receiver's success probability drawn uniformly from ``[lo, hi]``."""

    R: int
    lo: float
    hi: float

    def __post_init__(self):
        if self.R < 1 or not 0.0 < self.lo <= self.hi <= 1.0:
            raise InvalidParameter("need R >= 1 and 0 < lo <= hi <= 1")


def draw_channel(rule: ChannelConfig | UniformChannel, seed: int) -> ChannelConfig:
    if isinstance(rule, ChannelConfig):
        return rule
    gen = SplitMix64(seed)
    return ChannelConfig(tuple(rule.lo + (rule.hi - rule.lo) * gen.uniform() for _ in range(rule.R)))


@dataclass(frozen=True)
class ExperimentSpec:
    scheme: SchemeConfig
    channel: ChannelConfig | UniformChannel
    trials: int
    base_seed: int = 0
    decode: bool = False
    # uniform channels: redraw p_r every trial (default) or once per experiment
    redraw_channel: bool = True
    # diagnostic: give every receiver its own coefficient draws instead of one
    # broadcast packet, which makes receivers independent
    independent_coding: bool = False

    def __post_init__(self):
        if self.trials < 1:
            raise InvalidParameter("trials must be at least 1")

    @property
    def R(self) -> int:
        return self.channel.R

    def channel_for(self, trial_index: int) -> ChannelConfig:
        if self.redraw_channel:
            seed = derive_seed(self.base_seed, trial_index, PURPOSE_CHANNEL)
        else:
            seed = derive_seed(self.base_seed, PURPOSE_CHANNEL)
        return draw_channel(self.channel, seed)


@dataclass
class TrialResult:
    trial_index: int
    D: int
    D_r: tuple[int, ...]
    U_r: tuple[int, ...]
    N_r: tuple[int, ...]
    # filled only when payloads are decoded
    residual: tuple[int, ...] | None = None
    ops: tuple[int, ...] | None = None
    inverse_ops: tuple[int, ...] | None = None
    p: tuple[float, ...] = field(default=(), repr=False)


class _Receiver:
    """Rank tracker plus the innovative packets kept for decoding."""

    __slots__ = ("tracker", "rank", "kept", "uncoded", "done_at", "received")

    def __init__(self, tracker):
        self.tracker = tracker
        self.rank = 0
        self.kept: list[tuple] = []  # (cache key, header) of stored coded packets
        self.uncoded: list[int] = []
        self.done_at: int | None = None
        self.received = 0


def make_tracker(cfg: SchemeConfig):
    if cfg.kind == Scheme.PERFECT:
        return None
    if cfg.kind == Scheme.CONV_GF:
        return Gf2RankTracker(cfg.P) if cfg.L == 1 else GfRankTracker(gf_field(cfg.L), cfg.P)
    if cfg.L <= MAX_L:
        return GfRankTracker(gf_field(cfg.L), cfg.P)
    return Gf2RankTracker(cfg.P * cfg.L)


def innovation_test(cfg: SchemeConfig):
    """Return ``(unit(tracker, j), absorb(tracker, header)) -> bool`` callables."""
    if cfg.kind == Scheme.CONV_GF and cfg.L == 1:
        return (
            lambda t, j: t.absorb(1 << j),
            lambda t, h: t.absorb(sum(1 << k for k, g in enumerate(h) if g)),
        )
    if cfg.kind == Scheme.CONV_GF:
        return (lambda t, j: t.add_unit(j), lambda t, h: t.absorb(h))
    if cfg.L <= MAX_L:
        table = beta_table(cfg.L)
        return (lambda t, j: t.add_unit(j), lambda t, h: t.absorb([table[c] for c in h]))
    params = cfg.shift
    unit = cfg.unit
    L = cfg.L

    def unit_cols(t, j):
        return t.absorb_column(coeff_columns(params, [unit if k == j else 0 for k in range(cfg.P)])) == L

    return (unit_cols, lambda t, h: t.absorb_column(coeff_columns(params, h)) == L)


def run_trial(spec: ExperimentSpec, trial_index: int) -> TrialResult:
    cfg = spec.scheme
    P = cfg.P
    channel = spec.channel_for(trial_index)
    R = channel.R
    p = np.array(channel.p)
    traffic = np.random.default_rng(derive_seed(spec.base_seed, trial_index, PURPOSE_TRAFFIC))
    perfect = cfg.kind == Scheme.PERFECT
    receivers = [_Receiver(make_tracker(cfg)) for _ in range(R)]
    if not perfect:
        add_unit, absorb = innovation_test(cfg)

    # phase one: systematic packets
    hits = traffic.random((P, R)) < p
    for r, rx in enumerate(receivers):
        for j in np.nonzero(hits[:, r])[0]:
            j = int(j)
            rx.uncoded.append(j)
            if not perfect:
                add_unit(rx.tracker, j)
        rx.rank = len(rx.uncoded)
        rx.received = rx.rank
        if rx.rank == P:
            rx.done_at = 0

    # phase two: coded packets until everyone is done
    own = spec.independent_coding and not perfect
    active = [r for r in range(R) if receivers[r].done_at is None]
    slot = 0
    while active:
        slot += 1
        header = None if perfect or own else draw_coeffs(cfg, traffic)
        got = traffic.random(R) < p
        still = []
        for r in active:
            rx = receivers[r]
            if got[r]:
                rx.received += 1
                if own:
                    header = draw_coeffs(cfg, traffic)
                if perfect or absorb(rx.tracker, header):
                    rx.rank += 1
                    rx.kept.append(((slot, r) if own else slot, header))
                    if rx.rank == P:
                        rx.done_at = slot
                        continue
            still.append(r)
        active = still

    D_r = tuple(rx.done_at for rx in receivers)
    result = TrialResult(
        trial_index=trial_index,
        D=max(D_r),
        D_r=D_r,
        U_r=tuple(len(rx.uncoded) for rx in receivers),
        N_r=tuple(rx.received for rx in receivers),
        p=channel.p,
    )
    if spec.decode and not perfect:
        _decode_all(spec, trial_index, receivers, result)
    return result


def _decode_all(spec: ExperimentSpec, trial_index: int, receivers, result: TrialResult) -> None:
    cfg = spec.scheme
    payload_gen = np.random.default_rng(derive_seed(spec.base_seed, trial_index, PURPOSE_PAYLOAD))
    originals = [random_packet(cfg.L, cfg.num_symbols, payload_gen) for _ in range(cfg.P)]
    systematic = encode_systematic(cfg, originals)
    expanded = [expand_G(m) for m in originals] if cfg.kind.is_circ else None
    coded: dict = {}

    def coded_packet(key, h) -> CodedPacket:
        pkt = coded.get(key)
        if pkt is None:
            if cfg.kind == Scheme.CONV_GF:
                payload = combine_conv(cfg, originals, h)
            else:
                payload = combine_circ(cfg, originals, h, expanded)
            pkt = coded[key] = CodedPacket(h, payload)
        return pkt

    residual, ops, inv_ops = [], [], []
    for rx in receivers:
        received = [systematic[j] for j in rx.uncoded] + [coded_packet(k, h) for k, h in rx.kept]
        out = decode(DecodeSession(cfg, received))
        if any(a != b for a, b in zip(out.originals, originals)):
            raise AssertionError(f"trial {trial_index}: decoded packets differ from the originals")
        residual.append(out.residual)
        ops.append(out.counter.binary_ops)
        inv_ops.append(out.counter.inverse_ops)
    result.residual = tuple(residual)
    result.ops = tuple(ops)
    result.inverse_ops = tuple(inv_ops)


def _run_chunk(args) -> list[TrialResult]:
    spec, start, stop = args
    return [run_trial(spec, i) for i in range(start, stop)]


def worker_count() -> int:
    try:
        return max(1, int(os.environ.get("RLNC_THREADS", "1")))
    except ValueError:
        return 1


def iter_trials(spec: ExperimentSpec, workers: int | None = None) -> Iterator[TrialResult]:
    """Trial results in index order, optionally computed by a process pool."""
    workers = worker_count() if workers is None else workers
    if workers <= 1 or spec.trials < 2 * workers:
        for i in range(spec.trials):
            yield run_trial(spec, i)
        return
    chunk = max(1, spec.trials // (8 * workers))
    bounds = [(spec, s, min(s + chunk, spec.trials)) for s in range(0, spec.trials, chunk)]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        for part in pool.map(_run_chunk, bounds):
            yield from part


@dataclass(frozen=True)
class ExperimentStats:
    trials: int
    mean_D: float
    mean_D_per_P: float
    ci95_D: float
    mean_ops: float | None
    mean_ops_per_bit: float | None
    mean_Ur: float
    mean_absA: float | None
    mean_N: float
    # every (trial, receiver) success probability, in trial order
    p_values: tuple[float, ...] = field(default=(), repr=False)


def summarize(spec: ExperimentSpec, results: Sequence[TrialResult]) -> ExperimentStats:
    n = len(results)
    ds = [float(t.D) for t in results]
    mean_d = math.fsum(ds) / n
    var = math.fsum((d - mean_d) ** 2 for d in ds) / (n - 1) if n > 1 else 0.0
    ci = 1.96 * math.sqrt(var / n)
    ur = [u for t in results for u in t.U_r]
    nr = [x for t in results for x in t.N_r]
    decoded = [t for t in results if t.ops is not None]
    if decoded:
        ops = [o for t in decoded for o in t.ops]
        res = [a for t in decoded for a in t.residual]
        mean_ops = math.fsum(ops) / len(ops)
        per_bit = mean_ops / (spec.scheme.P * spec.scheme.M)
        mean_a = math.fsum(res) / len(res)
    else:
        mean_ops = per_bit = mean_a = None
    return ExperimentStats(
        trials=n,
        mean_D=mean_d,
        mean_D_per_P=mean_d / spec.scheme.P,
        ci95_D=ci,
        mean_ops=mean_ops,
        mean_ops_per_bit=per_bit,
        mean_Ur=math.fsum(ur) / len(ur),
        mean_absA=mean_a,
        mean_N=math.fsum(nr) / len(nr),
        p_values=tuple(x for t in results for x in t.p),
    )


def run_experiment(spec: ExperimentSpec, workers: int | None = None) -> ExperimentStats:
    return summarize(spec, list(iter_trials(spec, workers)))
