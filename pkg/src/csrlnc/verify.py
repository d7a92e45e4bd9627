"""One-command check suite: algebraic identities, oracle comparisons and Monte Carlo bounds.

Every check is a function ``(budget, seed) -> (ok, stats)``.  ``quick`` runs
exhaustive small cases plus about 10^4 Monte Carlo samples; ``full`` uses the
sample sizes of the acceptance tests.  Reports never contain timings, so a
fixed seed gives identical bytes.
"""

from __future__ import annotations

import itertools
import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable

import numpy as np

from .analysis import (
    ChannelConfig,
    appendix_a_table,
    delay_pmf_conditional,
    expected_delay,
    lemma1_bounds,
    p_prime,
    thm2_compare,
)
from .bits import Packet, apply_shift, expand_G, project_H, random_packet
from .circring import (
    ShiftParams,
    dense_C,
    dense_G,
    dense_H,
    dense_conjugate,
    expand_block_matrix,
    gf2_matmul,
    ring_det,
    ring_minor,
    ring_mul,
    sigma,
    thm3_inverse,
    weight,
)
from .decoders import DecodeSession, decode
from .gf2e import field
from .linalg import beta_rank, expand_coeff_matrix, rank_gf2, solve_circ_dense, solve_dense_gf
from .schemes import CodedPacket, Scheme, SchemeConfig, combine_circ, combine_conv, draw_coeffs, encode_systematic, p0_layout
from .sim import ExperimentSpec, innovation_test, make_tracker, run_experiment, worker_count

BUDGETS = ("quick", "full")

Stats = dict


# Shared helpers, also used by the test suite.


def random_session(cfg: SchemeConfig, gen: np.random.Generator, p_uncoded: float = 0.5):
    """Originals plus ``P`` received packets with a full-rank coding matrix, in random order."""
    originals = [random_packet(cfg.L, cfg.num_symbols, gen) for _ in range(cfg.P)]
    systematic = encode_systematic(cfg, originals)
    tracker = make_tracker(cfg)
    add_unit, absorb = innovation_test(cfg)
    received = []
    for j in range(cfg.P):
        if gen.random() < p_uncoded:
            add_unit(tracker, j)
            received.append(systematic[j])
    expanded = [expand_G(m) for m in originals] if cfg.kind.is_circ else None
    while len(received) < cfg.P:
        header = draw_coeffs(cfg, gen)
        if absorb(tracker, header):
            if cfg.kind == Scheme.CONV_GF:
                payload = combine_conv(cfg, originals, header)
            else:
                payload = combine_circ(cfg, originals, header, expanded)
            received.append(CodedPacket(header, payload))
    order = gen.permutation(len(received))
    return originals, [received[int(i)] for i in order]


def dense_solve(cfg: SchemeConfig, received: list[CodedPacket]) -> list[Packet]:
    """Reference decoder that ignores the packet structure and inverts the whole system."""
    headers = [list(p.header) for p in received]
    if cfg.kind == Scheme.CONV_GF:
        return solve_dense_gf(field(cfg.L), headers, [p.payload for p in received])
    payloads = [project_H(p.payload) if p.payload.expanded else p.payload for p in received]
    return solve_circ_dense(cfg.shift, headers, payloads)


def draw_code_array(p0: Fraction, L: int, shape, gen: np.random.Generator) -> np.ndarray:
    size, zeros, per_shift = p0_layout(Fraction(p0), L)
    t = gen.integers(0, size, size=shape)
    return np.where(t < zeros, 0, 1 + (t - zeros) // per_shift)


def lemma1_frequency(P: int, J: int, L: int, p0: Fraction, samples: int, seed: int) -> float:
    """Fraction of P x J shift matrices with full block rank, given full-rank first J-1 columns."""
    params = ShiftParams(L)
    gen = np.random.default_rng(seed)
    hits = 0
    done = 0
    while done < samples:
        batch = draw_code_array(p0, L, (samples - done, P, J), gen)
        for m in batch:
            rows = m.tolist()
            if J > 1 and not beta_rank(params, [r[: J - 1] for r in rows]):
                continue
            done += 1
            hits += beta_rank(params, rows)
    return hits / samples


def _fmt(x: float) -> float:
    return float(f"{x:.10g}")


def _gen(seed: int, tag: int) -> np.random.Generator:
    return np.random.default_rng([seed, tag])


# Algebra of the shift coefficients.


def check_shift_conjugation_identities(budget: str, seed: int) -> tuple[bool, Stats]:
    cases = 0
    for L in (2, 4, 10, 12):
        n = L + 1
        G, H, C = dense_G(L), dense_H(L), dense_C(n)
        for l in range(1, n + 1):
            power = np.linalg.matrix_power(C.astype(np.int64), l) % 2
            gamma = gf2_matmul(G, power, H)
            inv_power = np.linalg.matrix_power(C.astype(np.int64), n - l) % 2
            gamma_inv = gf2_matmul(G, inv_power, H)
            if not np.array_equal(gf2_matmul(gamma, G), gf2_matmul(G, power)):
                return False, {"L": L, "l": l, "failed": "gamma G"}
            if not np.array_equal(gf2_matmul(gamma, gamma_inv), np.eye(L, dtype=np.uint8)):
                return False, {"L": L, "l": l, "failed": "inverse"}
            if not np.array_equal(dense_conjugate(L, 1 << (l % n)), gamma):
                return False, {"L": L, "l": l, "failed": "mask form"}
            cases += 1
    return True, {"cases": cases}


def check_sigma_bounds_weight_and_keeps_action(budget: str, seed: int) -> tuple[bool, Stats]:
    cases = 0
    for L in (2, 4, 10):
        p = ShiftParams(L)
        for a in range(1 << p.n):
            s = sigma(p, a)
            if weight(s) > L // 2:
                return False, {"L": L, "mask": a}
            if not np.array_equal(dense_conjugate(L, s), dense_conjugate(L, a)):
                return False, {"L": L, "mask": a}
            cases += 1
    return True, {"cases": cases}


def check_ring_product_matches_conjugated_product(budget: str, seed: int) -> tuple[bool, Stats]:
    gen = _gen(seed, 1)
    count = 500 if budget == "quick" else 5000
    for _ in range(count):
        L = int(gen.choice([2, 4, 10, 12]))
        p = ShiftParams(L)
        a, b = (int(x) for x in gen.integers(0, 1 << p.n, size=2))
        lhs = gf2_matmul(dense_conjugate(L, a), dense_conjugate(L, b))
        if not np.array_equal(lhs, dense_conjugate(L, ring_mul(p, a, b))):
            return False, {"L": L, "a": a, "b": b}
    return True, {"cases": count}


def _permutation_det(p: ShiftParams, m) -> int:
    J = len(m)
    acc = 0
    for perm in itertools.permutations(range(J)):
        term = 1
        for r, c in enumerate(perm):
            term = ring_mul(p, term, m[r][c])
        acc ^= term
    return acc


def check_block_determinant_matches_permutation_sum(budget: str, seed: int) -> tuple[bool, Stats]:
    gen = _gen(seed, 2)
    count = 300 if budget == "quick" else 3000
    for _ in range(count):
        L = int(gen.choice([2, 4, 10]))
        J = int(gen.integers(1, 5))
        p = ShiftParams(L)
        m = gen.integers(0, 1 << p.n, size=(J, J)).tolist()
        if ring_det(p, m) != _permutation_det(p, m):
            return False, {"L": L, "matrix": m}
    return True, {"cases": count}


WORKED_EXAMPLE = [[(0,), (1,), (1,)], [(0,), (2,), (3,)], [(0,), (3,), (4,)]]
WORKED_DET = (0, 3)
# minors indexed [deleted row][deleted column]
WORKED_MINORS = [
    [(), (3, 4), (2, 3)],
    [(0, 4), (1, 4), (1, 3)],
    [(3, 4), (1, 3), (1, 2)],
]
WORKED_INVERSE = [
    [(), (2, 4), (1, 3)],
    [(1, 3), (1,), (3,)],
    [(0, 2), (3,), (1, 4)],
]


def _masks(rows) -> list[list[int]]:
    return [[sum(1 << e for e in cell) for cell in row] for row in rows]


def check_worked_block_inverse_example(budget: str, seed: int) -> tuple[bool, Stats]:
    p = ShiftParams(4)
    m = _masks(WORKED_EXAMPLE)
    det_ok = ring_det(p, m) == sum(1 << e for e in WORKED_DET)
    minors = [[ring_minor(p, m, j, k) for k in range(3)] for j in range(3)]
    minors_ok = minors == _masks(WORKED_MINORS)
    inverse = thm3_inverse(p, m)
    inverse_ok = inverse == _masks(WORKED_INVERSE)
    product = gf2_matmul(expand_block_matrix(4, m), expand_block_matrix(4, inverse))
    product_ok = bool(np.array_equal(product, np.eye(12, dtype=np.uint8)))
    ok = det_ok and minors_ok and inverse_ok and product_ok
    return ok, {"det": det_ok, "minors": minors_ok, "inverse": inverse_ok, "product": product_ok}


def check_block_inverse_random_full_rank(budget: str, seed: int) -> tuple[bool, Stats]:
    gen = _gen(seed, 3)
    count = 200 if budget == "quick" else 1000
    done = 0
    while done < count:
        L = int(gen.choice([4, 10]))
        J = int(gen.integers(1, 7))
        p = ShiftParams(L)
        m = gen.integers(0, 1 << p.n, size=(J, J)).tolist()
        dense = expand_block_matrix(L, m)
        if rank_gf2(dense) < J * L:
            continue
        inv = thm3_inverse(p, m)
        if not np.array_equal(gf2_matmul(dense, expand_block_matrix(L, inv)), np.eye(J * L, dtype=np.uint8)):
            return False, {"L": L, "matrix": m}
        done += 1
    return True, {"instances": count}


def check_beta_rank_matches_binary_rank(budget: str, seed: int) -> tuple[bool, Stats]:
    p2 = ShiftParams(2)
    exhaustive = 0
    for flat in itertools.product(range(4), repeat=6):
        m = [list(flat[0:2]), list(flat[2:4]), list(flat[4:6])]
        dense = rank_gf2(expand_coeff_matrix(p2, m)) == 4
        if beta_rank(p2, m) != dense:
            return False, {"matrix": m}
        exhaustive += 1
    gen = _gen(seed, 4)
    count = 2000 if budget == "quick" else 10_000
    p4 = ShiftParams(4)
    codes = gen.integers(0, 6, size=(count, 6, 4))
    full = 0
    for m in codes:
        rows = m.tolist()
        dense = rank_gf2(expand_coeff_matrix(p4, rows)) == 16
        if beta_rank(p4, rows) != dense:
            return False, {"matrix": rows}
        full += dense
    return True, {"exhaustive": exhaustive, "random": count, "random_full_rank": full}


def check_packet_shift_matches_dense_action(budget: str, seed: int) -> tuple[bool, Stats]:
    L = 4
    symbols = np.arange(1 << L, dtype=np.uint32)
    pkt = Packet(L, symbols)
    bits = ((symbols[:, None] >> np.arange(L)) & 1).astype(np.int64)
    for l in range(1, L + 2):
        got = project_H(apply_shift(expand_G(pkt), l)).data
        # a symbol is a row vector, so it is multiplied on the right
        want_bits = (bits @ dense_conjugate(L, 1 << (l % (L + 1))).astype(np.int64)) % 2
        want = want_bits @ (1 << np.arange(L))
        if not np.array_equal(got, want.astype(np.uint32)):
            return False, {"l": l}
    return True, {"symbols": 1 << L, "shifts": L + 1}


# Decoders.

ROUND_TRIP_CONFIGS = (
    ("gf2", Scheme.CONV_GF, 1),
    ("gf4", Scheme.CONV_GF, 2),
    ("gf16", Scheme.CONV_GF, 4),
    ("gf1024", Scheme.CONV_GF, 10),
    ("circ_L2", Scheme.CIRC, 2),
    ("circ_L4", Scheme.CIRC, 4),
    ("circ_L10", Scheme.CIRC, 10),
    ("circ_red_L4", Scheme.CIRC_RED, 4),
    ("circ_red_L10", Scheme.CIRC_RED, 10),
)


def round_trip_config(kind: Scheme, L: int, P: int, gen: np.random.Generator) -> SchemeConfig:
    if kind.is_circ:
        lo = Fraction(1, L + 2)
        p0 = [lo, Fraction(1, 4) if Fraction(1, 4) >= lo else lo, Fraction(1, 2)][int(gen.integers(0, 3))]
        return SchemeConfig(kind, P, L, M=8 * L, p0=p0)
    return SchemeConfig(kind, P, L, M=8 * L)


def _round_trip(kind: Scheme, L: int, sessions: int, seed: int) -> tuple[bool, Stats]:
    gen = _gen(seed, 100 + 16 * int(kind) + L)
    residual = 0
    for _ in range(sessions):
        P = int(gen.integers(1, 21))
        cfg = round_trip_config(kind, L, P, gen)
        originals, received = random_session(cfg, gen, p_uncoded=float(gen.uniform(0.0, 1.0)))
        out = decode(DecodeSession(cfg, received))
        if out.originals != originals:
            return False, {"P": P, "failed": "round trip"}
        if dense_solve(cfg, received) != originals:
            return False, {"P": P, "failed": "dense oracle"}
        residual += out.residual
    return True, {"sessions": sessions, "mean_residual": _fmt(residual / sessions)}


def _make_round_trip_check(kind: Scheme, L: int) -> Callable[[str, int], tuple[bool, Stats]]:
    def check(budget: str, seed: int) -> tuple[bool, Stats]:
        return _round_trip(kind, L, 100 if budget == "quick" else 1000, seed)

    return check


def check_redundant_bit_saves_expansion(budget: str, seed: int) -> tuple[bool, Stats]:
    gen = _gen(seed, 5)
    count = 50 if budget == "quick" else 500
    for _ in range(count):
        P = int(gen.integers(1, 16))
        plain = SchemeConfig(Scheme.CIRC, P, 4, M=64, p0=Fraction(1, 4))
        red = SchemeConfig(Scheme.CIRC_RED, P, 4, M=64, p0=Fraction(1, 4))
        originals, received = random_session(plain, gen)
        paired = [
            CodedPacket(pk.header, expand_G(pk.payload) if pk.systematic is not None else None, pk.systematic)
            for pk in received
        ]
        expanded = [expand_G(m) for m in originals]
        for pk in paired:
            if pk.payload is None:
                pk.payload = combine_circ(red, originals, pk.header, expanded)
        a = decode(DecodeSession(plain, received))
        b = decode(DecodeSession(red, paired))
        saved = a.counter.binary_ops - b.counter.binary_ops
        if a.originals != b.originals or saved != P * plain.num_symbols * (plain.L - 1):
            return False, {"P": P, "saved": saved}
    return True, {"sessions": count}


# Delay distributions.

TABLE_GAPS = (1, 5, 10, 15, 20)
TABLE_NS = (0, 1, 5, 10, 20)
PRINTED_TABLE = {
    1: ("0.5", "0.25", "1.5625e-02", "4.8828e-04", "4.7684e-07"),
    5: ("0.298", "0.2887", "2.9395e-02", "9.4518e-04", "9.2387e-07"),
    10: ("0.2891", "0.2888", "3.0256e-02", "9.7466e-04", "9.5274e-07"),
    15: ("0.2888", "0.2888", "3.0283e-02", "9.7558e-04", "9.5364e-07"),
    20: ("0.2888", "0.2888", "3.0284e-02", "9.7561e-04", "9.5367e-07"),
}


def matches_printed(value: float, printed: str) -> bool:
    if "e" in printed:
        return f"{value:.4e}" == printed
    decimals = len(printed.split(".")[1])
    return round(value, decimals) == float(printed)


def check_receive_count_table(budget: str, seed: int) -> tuple[bool, Stats]:
    bad = []
    for gap in TABLE_GAPS:
        for n, printed in zip(TABLE_NS, PRINTED_TABLE[gap]):
            if not matches_printed(appendix_a_table(gap, n), printed):
                bad.append([gap, n])
    return not bad, {"cells": len(TABLE_GAPS) * len(TABLE_NS), "mismatches": bad}


def composition_pmf(rates: list[float], d: int) -> float:
    """Brute-force ``Pr(sum of geometrics = d)`` over all compositions of ``d``."""
    k = len(rates)
    if k == 0:
        return 1.0 if d == 0 else 0.0
    if d < k:
        return 0.0
    total = 0.0
    for cuts in itertools.combinations(range(1, d), k - 1):
        parts = [b - a for a, b in zip((0,) + cuts, cuts + (d,))]
        term = 1.0
        for x, t in zip(rates, parts):
            term *= x * (1 - x) ** (t - 1)
        total += term
    return total


def check_delay_pmf_matches_composition_sum(budget: str, seed: int) -> tuple[bool, Stats]:
    worst = 0.0
    cases = 0
    for q in (2, 16):
        for p_r in (0.3, 0.8, 0.95):
            for P in range(1, 5):
                for u in range(P + 1):
                    pmf = delay_pmf_conditional(q, p_r, P, u, 12)
                    rates = [p_prime(q, p_r, k, P) for k in range(u, P)]
                    for d in range(13):
                        worst = max(worst, abs(pmf[d] - composition_pmf(rates, d)))
                        cases += 1
    return worst <= 1e-12, {"cases": cases, "max_abs_error": _fmt(worst)}


def _sim_vs_analytic(q: int, P: int, R: int, p_r: float, trials: int, seed: int, independent: bool):
    L = int(math.log2(q))
    cfg = SchemeConfig(Scheme.CONV_GF, P, L)
    channel = ChannelConfig([p_r] * R)
    stats = run_experiment(ExperimentSpec(cfg, channel, trials, seed, independent_coding=independent))
    analytic = expected_delay(q, channel, P).value
    ok = abs(stats.mean_D - analytic) <= stats.ci95_D
    return ok, {
        "q": q, "P": P, "R": R, "simulated": _fmt(stats.mean_D),
        "ci95": _fmt(stats.ci95_D), "analytic": _fmt(analytic),
    }


def check_delay_formula_single_receiver(budget: str, seed: int) -> tuple[bool, Stats]:
    trials = 10_000 if budget == "quick" else 100_000
    rows = []
    ok = True
    for q, P in ((2, 5), (16, 10)):
        good, row = _sim_vs_analytic(q, P, 1, 0.85, trials, seed, independent=False)
        ok &= good
        rows.append(row)
    return ok, {"trials": trials, "cases": rows}


def check_delay_formula_independent_receivers(budget: str, seed: int) -> tuple[bool, Stats]:
    """The product formula against a simulator where receivers see independent coefficients."""
    trials = 10_000 if budget == "quick" else 100_000
    ok, row = _sim_vs_analytic(2, 10, 10, 0.85, trials, seed, independent=True)
    return ok, {"trials": trials, "cases": [row]}


def check_delay_formula_broadcast_receivers(budget: str, seed: int) -> tuple[bool, Stats]:
    """The product formula against the physical broadcast simulator with shared coefficients."""
    ok, row = _sim_vs_analytic(2, 10, 10, 0.85, 100_000, seed, independent=False)
    return ok, {"trials": 100_000, "cases": [row]}


RANK_BOUND_GRID = (
    (6, 4, 4, Fraction(1, 4)),
    (6, 6, 4, Fraction(1, 4)),
    (5, 2, 2, Fraction(1, 4)),
    (8, 5, 4, Fraction(1, 2)),
    (6, 4, 10, Fraction(1, 4)),
)


def check_shift_rank_lower_bound(budget: str, seed: int) -> tuple[bool, Stats]:
    samples = 10_000 if budget == "quick" else 100_000
    ok = True
    rows = []
    for i, (P, J, L, p0) in enumerate(RANK_BOUND_GRID):
        freq = lemma1_frequency(P, J, L, p0, samples, seed * 97 + i)
        bound, _ = lemma1_bounds(p0, P, J, 2)
        sd = math.sqrt(bound * (1 - bound) / samples)
        good = freq >= bound - 3 * sd
        ok &= good
        rows.append({"P": P, "J": J, "L": L, "p0": str(p0), "frequency": _fmt(freq), "bound": _fmt(bound)})
    return ok, {"samples": samples, "cases": rows}


def check_shift_cdf_dominates_field_cdf(budget: str, seed: int) -> tuple[bool, Stats]:
    trials = 10_000 if budget == "quick" else 100_000
    ok = True
    rows = []
    for p0, q in ((Fraction(1, 4), 4), (Fraction(1, 2), 2)):
        for P in (10, 20):
            cfg = SchemeConfig(Scheme.CIRC, P, 4, p0=p0)
            rep = thm2_compare(cfg, q, ChannelConfig([0.85]), trials, seed)
            gf2 = expected_delay(2, ChannelConfig([0.85]), P).value
            good = rep.ok and rep.mean_sim <= gf2 + rep.ci95_sim
            ok &= good
            rows.append({
                "p0": str(p0), "q": q, "P": P, "violations": len(rep.violations),
                "mean_circ": _fmt(rep.mean_sim), "ci95": _fmt(rep.ci95_sim),
                "mean_gfq": _fmt(rep.mean_analytic), "mean_gf2": _fmt(gf2),
            })
    return ok, {"trials": trials, "cases": rows}


@dataclass(frozen=True)
class Check:
    name: str
    topic: str
    fn: Callable[[str, int], tuple[bool, Stats]]
    budgets: tuple[str, ...] = BUDGETS


CHECKS: tuple[Check, ...] = (
    Check("shift_conjugation_identities", "shift coefficients and their inverses as binary matrices",
          check_shift_conjugation_identities),
    Check("sigma_bounds_weight_and_keeps_action", "complement normalisation of ring elements",
          check_sigma_bounds_weight_and_keeps_action),
    Check("ring_product_matches_conjugated_product", "ring multiplication vs dense conjugation",
          check_ring_product_matches_conjugated_product),
    Check("block_determinant_matches_permutation_sum", "block determinant over the circulant ring",
          check_block_determinant_matches_permutation_sum),
    Check("worked_block_inverse_example", "3x3 block inverse golden values",
          check_worked_block_inverse_example),
    Check("block_inverse_random_full_rank", "block inverse formula on random full-rank inputs",
          check_block_inverse_random_full_rank),
    Check("beta_rank_matches_binary_rank", "field-mapped rank test vs binary expansion",
          check_beta_rank_matches_binary_rank),
    Check("packet_shift_matches_dense_action", "packet-level shift vs binary matrix action",
          check_packet_shift_matches_dense_action),
    *(
        Check(f"decoder_round_trip_{label}", "decoded packets equal originals and the dense solver",
              _make_round_trip_check(kind, L))
        for label, kind, L in ROUND_TRIP_CONFIGS
    ),
    Check("redundant_bit_saves_expansion", "parity-bit variant saves exactly the expansion work",
          check_redundant_bit_saves_expansion),
    Check("receive_count_table", "GF(2) receive-count probabilities vs printed table",
          check_receive_count_table),
    Check("delay_pmf_matches_composition_sum", "convolution pmf vs brute-force compositions",
          check_delay_pmf_matches_composition_sum),
    Check("delay_formula_single_receiver", "analytic expected delay vs simulation, one receiver",
          check_delay_formula_single_receiver),
    Check("delay_formula_independent_receivers", "analytic expected delay vs independent-receiver simulation",
          check_delay_formula_independent_receivers),
    Check("delay_formula_broadcast_receivers", "analytic expected delay vs shared-coefficient broadcast",
          check_delay_formula_broadcast_receivers, budgets=("full",)),
    Check("shift_rank_lower_bound", "full-rank probability of shift coefficient matrices",
          check_shift_rank_lower_bound),
    Check("shift_cdf_dominates_field_cdf", "shift-scheme delay CDF vs GF(q) delay CDF",
          check_shift_cdf_dominates_field_cdf),
)


@dataclass(frozen=True)
class CheckResult:
    name: str
    topic: str
    ok: bool
    stats: Stats

    def to_json(self) -> str:
        return json.dumps(
            {"name": self.name, "topic": self.topic, "ok": self.ok, "stats": self.stats}, sort_keys=True
        )


@dataclass(frozen=True)
class Report:
    budget: str
    seed: int
    results: tuple[CheckResult, ...]

    @property
    def ok(self) -> bool:
        return all(r.ok for r in self.results)

    def text(self) -> str:
        width = max(len(r.name) for r in self.results)
        lines = [f"verify budget={self.budget} seed={self.seed}"]
        for r in self.results:
            stats = json.dumps(r.stats, sort_keys=True)
            lines.append(f"{'PASS' if r.ok else 'FAIL'}  {r.name:<{width}}  {r.topic}  {stats}")
        passed = sum(r.ok for r in self.results)
        lines.append(f"{passed}/{len(self.results)} checks passed")
        return "\n".join(lines) + "\n"

    def jsonl(self) -> str:
        return "".join(r.to_json() + "\n" for r in self.results)


_BY_NAME = {c.name: c for c in CHECKS}


def _run_one(args) -> CheckResult:
    # checks travel by name; some are closures and cannot be pickled
    name, budget, seed = args
    check = _BY_NAME[name]
    try:
        ok, stats = check.fn(budget, seed)
    except Exception as exc:  # a crash is a failed check, not a crashed report
        ok, stats = False, {"error": f"{type(exc).__name__}: {exc}"}
    return CheckResult(check.name, check.topic, bool(ok), stats)


def verify_all(budget: str = "quick", seed: int = 0, workers: int | None = None, only: list[str] | None = None) -> Report:
    if budget not in BUDGETS:
        raise ValueError(f"budget must be one of {BUDGETS}")
    checks = [c for c in CHECKS if budget in c.budgets and (only is None or c.name in only)]
    jobs = [(c.name, budget, seed) for c in checks]
    workers = worker_count() if workers is None else workers
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_run_one, jobs))
    else:
        results = [_run_one(j) for j in jobs]
    return Report(budget, seed, tuple(results))
