import itertools
import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from csrlnc.analysis import (
    ChannelConfig,
    appendix_a_table,
    binomial_moments,
    circ_complexity_expect,
    conv_complexity_approx,
    conv_complexity_expect,
    delay_dist,
    delay_pmf,
    delay_pmf_conditional,
    dkw_slack,
    expected_delay,
    expected_system_delay,
    lemma1_bounds,
    mean_formula_ops,
    p_prime,
    perfect_delay_cdf,
    thm2_compare,
)
from csrlnc.errors import InvalidParameter
from csrlnc.schemes import Scheme, SchemeConfig

# Pr(N_r = P + n | P - u = gap) as printed, rows gap = 1, 5, 10, 15, 20; columns n = 0, 1, 5, 10, 20
PRINTED = {
    1: ("0.5", "0.25", "1.5625e-02", "4.8828e-04", "4.7684e-07"),
    5: ("0.298", "0.2887", "2.9395e-02", "9.4518e-04", "9.2387e-07"),
    10: ("0.2891", "0.2888", "3.0256e-02", "9.7466e-04", "9.5274e-07"),
    15: ("0.2888", "0.2888", "3.0283e-02", "9.7558e-04", "9.5364e-07"),
    20: ("0.2888", "0.2888", "3.0284e-02", "9.7561e-04", "9.5367e-07"),
}
NS = (0, 1, 5, 10, 20)


def wasted_receptions_pmf(gap, n_max):
    """Distribution of non-innovative GF(2) receptions while ``gap`` ranks are missing."""
    out = np.zeros(n_max + 1)
    out[0] = 1.0
    for j in range(1, gap + 1):
        fail = 2.0**-j
        geo = (1 - fail) * fail ** np.arange(n_max + 1)
        out = np.convolve(out, geo)[: n_max + 1]
    return out


def compositions_pmf(rates, d):
    k = len(rates)
    if k == 0:
        return float(d == 0)
    total = 0.0
    for parts in itertools.product(range(1, d + 1), repeat=k):
        if sum(parts) == d:
            total += math.prod(x * (1 - x) ** (t - 1) for x, t in zip(rates, parts))
    return total


@pytest.mark.parametrize("gap", sorted(PRINTED))
def test_table_matches_printed_cells(gap):
    for n, printed in zip(NS, PRINTED[gap]):
        value = appendix_a_table(gap, n)
        if "e" in printed:
            assert f"{value:.4e}" == printed
        else:
            assert round(value, len(printed.split(".")[1])) == float(printed)


def test_table_matches_independent_chain():
    for gap in (1, 2, 5, 10, 20):
        want = wasted_receptions_pmf(gap, 25)
        for n in range(26):
            assert appendix_a_table(gap, n) == pytest.approx(want[n], rel=1e-10, abs=1e-300)


def test_table_monotone_in_n():
    for gap in range(1, 21):
        col = [appendix_a_table(gap, n) for n in range(1, 30)]
        assert all(a >= b for a, b in zip(col, col[1:]))


def test_p_prime_examples():
    assert p_prime(2, 0.9, 1, 2) == pytest.approx(0.45)
    assert p_prime(2, 1.0, 0, 1) == 0.5
    assert p_prime(math.inf, 0.7, 3, 5) == 0.7
    assert p_prime(2**40, 0.7, 4, 5) == pytest.approx(0.7)
    with pytest.raises(InvalidParameter):
        p_prime(2, 0.5, 3, 3)


def test_conditional_pmf_examples():
    pmf = delay_pmf_conditional(2, 0.8, 5, 4, 30)
    x = p_prime(2, 0.8, 4, 5)
    for d in range(1, 30):
        assert pmf[d] == pytest.approx((1 - x) ** (d - 1) * x)
    assert pmf[0] == 0
    assert delay_pmf_conditional(2, 0.8, 5, 5, 10)[0] == 1.0
    rates = [p_prime(2, 0.8, k, 5) for k in (2, 3, 4)]
    assert delay_pmf_conditional(2, 0.8, 5, 2, 10)[5] == pytest.approx(compositions_pmf(rates, 5), abs=1e-14)


@settings(max_examples=40, deadline=None)
@given(st.sampled_from([2, 4, 16]), st.floats(0.05, 1.0), st.integers(1, 4), st.data())
def test_conditional_pmf_equals_enumeration(q, p_r, P, data):
    u = data.draw(st.integers(0, P))
    pmf = delay_pmf_conditional(q, p_r, P, u, 12)
    rates = [p_prime(q, p_r, k, P) for k in range(u, P)]
    for d in range(13):
        assert abs(pmf[d] - compositions_pmf(rates, d)) <= 1e-12


def test_single_packet_pmf_by_hand():
    q, p = 4, 0.6
    pmf = delay_pmf(q, p, 1, 200)
    x = p * (1 - 1 / q)
    assert pmf[0] == pytest.approx(p)
    for d in range(1, 50):
        assert pmf[d] == pytest.approx((1 - p) * (1 - x) ** (d - 1) * x)


@settings(max_examples=30, deadline=None)
@given(st.sampled_from([2, 16, 256]), st.floats(0.3, 1.0), st.integers(1, 12))
def test_pmf_properties(q, p_r, P):
    dist = delay_dist(q, p_r, P)
    assert np.all(dist.pmf >= 0)
    assert dist.tail_mass < 1e-10
    cdf = dist.cdf
    assert np.all(np.diff(cdf) >= -1e-15) and cdf[-1] <= 1.0


def test_large_field_approaches_perfect():
    for P in (1, 5, 10):
        big = delay_dist(2**30, 0.8, P)
        perfect = delay_dist(math.inf, 0.8, P)
        assert np.max(np.abs(big.cdf - perfect.cdf)) < 1e-7


def test_perfect_cdf_examples():
    for d in range(10):
        assert perfect_delay_cdf(0.3, 1, d) == pytest.approx(1 - 0.7 ** (d + 1))
    assert perfect_delay_cdf(0.5, 20, 2000) == pytest.approx(1.0)
    assert perfect_delay_cdf(1.0, 3, 0) == 1.0
    assert perfect_delay_cdf(0.5, 3, -1) == 0.0


def test_perfect_cdf_against_negative_binomial_sampling():
    n = 1_000_000
    failures = np.random.default_rng(12).negative_binomial(15, 0.85, size=n)
    emp = float(np.mean(failures <= 5))
    want = perfect_delay_cdf(0.85, 15, 5)
    assert abs(emp - want) < 3 * math.sqrt(want * (1 - want) / n)


def test_expected_delay_hand_values():
    one = ChannelConfig((0.5,))
    perfect = expected_delay(math.inf, one, 1)
    assert perfect.value == pytest.approx(1.0, abs=1e-10)
    assert 0 <= perfect.remainder_bound < 1e-9
    # Pr(D=0) = 1/2, otherwise geometric with rate 1/4
    assert expected_delay(2, one, 1).value == pytest.approx(2.0, abs=1e-10)
    assert expected_delay(2, ChannelConfig((1.0,) * 10), 10).value == 0.0


def test_system_delay_matches_direct_product():
    channel = ChannelConfig((0.8, 0.9, 0.85))
    dists = [delay_dist(2, p, 6) for p in channel.p]
    direct = sum(1 - np.prod([d.cdf[k] for d in dists]) for k in range(len(dists[0].pmf)))
    got = expected_system_delay(dists)
    assert got.value == pytest.approx(direct, abs=1e-10)
    # remainder bound covers what the truncation dropped
    assert direct - got.value <= got.remainder_bound + 1e-15


def test_more_receivers_never_help():
    p = [0.8, 0.85, 0.9, 0.82]
    values = [expected_delay(2, ChannelConfig(p[:k]), 8).value for k in range(1, 5)]
    assert values == sorted(values)


def test_channel_validation():
    with pytest.raises(InvalidParameter):
        ChannelConfig(())
    with pytest.raises(InvalidParameter):
        ChannelConfig((0.0,))
    assert ChannelConfig([0.5, 1]).R == 2


@pytest.mark.parametrize("R", [1, 10])
def test_large_field_gap_shrinks_with_packets(R):
    channel = ChannelConfig((0.85,) * R)
    gaps = [
        (expected_delay(2, channel, P).value - expected_delay(math.inf, channel, P).value) / P
        for P in (10, 20, 40, 80)
    ]
    assert all(a > b for a, b in zip(gaps, gaps[1:]))


def test_binomial_moments():
    mean, second = binomial_moments(10, 0.3)
    assert mean == pytest.approx(3.0)
    assert second == pytest.approx(10 * 0.3 * 0.7 + 9.0)


def test_complexity_examples():
    cfg = SchemeConfig(Scheme.CONV_GF, 10, 10, M=64 * 10)
    assert conv_complexity_approx(cfg, 0.85, M=64) == pytest.approx(20064)
    gf2 = SchemeConfig(Scheme.CONV_GF, 10, 1, M=64)
    t = conv_complexity_expect(gf2, 0.85, 2.0)
    assert t.lower_bound and t.total == pytest.approx(64 * 7.7375)
    big = SchemeConfig(Scheme.CONV_GF, 10, 4, M=64)
    assert conv_complexity_expect(big, 1.0, 0.0).phase1 == 0.0


def test_circ_complexity_structure():
    cfg = SchemeConfig(Scheme.CIRC, 15, 4, M=64, p0=Fraction(1, 4))
    t = circ_complexity_expect(cfg, 0.85, 1.0, 12.75)
    assert t.expansion == 15 * 16 * 3
    # with |A| = 1 the quadratic step-two term is gone and only (|A|-1)(|A|-p0) remains
    assert t.step2 == 0.0
    almost = SchemeConfig(Scheme.CIRC, 15, 4, M=64, p0=Fraction(999, 1000))
    near = circ_complexity_expect(almost, 0.85, 2.0, 12.75)
    base = circ_complexity_expect(cfg, 0.85, 2.0, 12.75)
    # phase one and step one scale with 1 - p0, so they vanish as p0 -> 1
    assert near.phase1 + near.step1 == pytest.approx((base.phase1 + base.step1) * 0.001 / 0.75)
    assert near.expansion == base.expansion
    red = SchemeConfig(Scheme.CIRC_RED, 15, 4, M=64, p0=Fraction(1, 4))
    assert circ_complexity_expect(red, 0.85, 2.0, 12.75).expansion == 0.0


def test_formula_average_over_receivers():
    cfg = SchemeConfig(Scheme.CONV_GF, 10, 1, M=64)
    avg = mean_formula_ops(cfg, [0.8, 0.9], 2.0)
    each = [conv_complexity_expect(cfg, p, 2.0).total for p in (0.8, 0.9)]
    assert avg.total == pytest.approx(sum(each) / 2)
    with pytest.raises(InvalidParameter):
        mean_formula_ops(SchemeConfig(Scheme.PERFECT, 3), [0.5], 1.0)


def test_lemma_bounds():
    assert lemma1_bounds(Fraction(1, 2), 3, 2, 2) == (0.75, 0.75)
    lo, field_value = lemma1_bounds(Fraction(1, 4), 6, 4, 4)
    assert lo == field_value == 1 - 0.25**3
    lo, field_value = lemma1_bounds(Fraction(1, 4), 6, 4, 2)
    assert lo > field_value
    with pytest.raises(InvalidParameter):
        lemma1_bounds(Fraction(1, 2), 3, 2, 4)


def test_dominance_report_small_run():
    cfg = SchemeConfig(Scheme.CIRC, 6, 4, M=4, p0=Fraction(1, 2))
    rep = thm2_compare(cfg, 2, ChannelConfig((0.8, 0.9)), 4000, seed=1)
    assert rep.ok and rep.slack == pytest.approx(dkw_slack(4000))
    perfect_channel = thm2_compare(cfg, 2, ChannelConfig((1.0,)), 50)
    assert perfect_channel.ok and perfect_channel.mean_sim == 0.0 == perfect_channel.mean_analytic
    with pytest.raises(InvalidParameter):
        thm2_compare(cfg, 4, ChannelConfig((0.8,)), 10)
