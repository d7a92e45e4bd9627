import math
from fractions import Fraction

import numpy as np
import pytest

from csrlnc.analysis import ChannelConfig, delay_dist, dkw_slack
from csrlnc.errors import InvalidParameter
from csrlnc.schemes import Scheme, SchemeConfig
from csrlnc.sim import (
    ExperimentSpec,
    UniformChannel,
    draw_channel,
    iter_trials,
    run_experiment,
    run_trial,
    summarize,
)

CIRC = SchemeConfig(Scheme.CIRC, 6, 4, M=16, p0=Fraction(1, 4))


def test_lossless_channel_has_no_delay():
    for cfg in (CIRC, SchemeConfig(Scheme.CONV_GF, 6, 1), SchemeConfig(Scheme.PERFECT, 6)):
        t = run_trial(ExperimentSpec(cfg, ChannelConfig((1.0,) * 3), 1), 0)
        assert t.D == 0 and t.U_r == (6, 6, 6) and t.N_r == (6, 6, 6)


def test_trial_invariants():
    spec = ExperimentSpec(CIRC, UniformChannel(5, 0.5, 0.9), 60, base_seed=4, decode=True)
    for t in iter_trials(spec):
        assert t.D == max(t.D_r)
        assert all(n >= CIRC.P for n in t.N_r)
        assert all(u <= CIRC.P for u in t.U_r)
        assert all(a <= CIRC.P - u for a, u in zip(t.residual, t.U_r))
        assert len(t.ops) == 5 and all(o >= 0 for o in t.ops)


def test_trial_is_deterministic():
    spec = ExperimentSpec(CIRC, UniformChannel(4, 0.6, 0.9), 10, base_seed=9, decode=True)
    assert run_trial(spec, 3) == run_trial(spec, 3)
    assert run_trial(spec, 3) != run_trial(spec, 4)


def test_doubling_trials_keeps_prefix():
    cfg = SchemeConfig(Scheme.CONV_GF, 5, 2)
    small = list(iter_trials(ExperimentSpec(cfg, ChannelConfig((0.7, 0.8)), 50, 2)))
    big = list(iter_trials(ExperimentSpec(cfg, ChannelConfig((0.7, 0.8)), 100, 2)))
    assert big[:50] == small


def test_single_trial_stats():
    spec = ExperimentSpec(CIRC, ChannelConfig((0.7,)), 1, 5)
    t = run_trial(spec, 0)
    stats = run_experiment(spec)
    assert stats.mean_D == t.D and stats.ci95_D == 0.0 and stats.mean_N == t.N_r[0]


def test_worker_count_does_not_change_results():
    spec = ExperimentSpec(CIRC, UniformChannel(6, 0.8, 0.9), 40, base_seed=1, decode=True)
    assert run_experiment(spec, workers=1) == run_experiment(spec, workers=3)


def test_channel_draws():
    fixed = ChannelConfig((0.9,) * 4)
    assert draw_channel(fixed, 123) is fixed
    rule = UniformChannel(60, 0.8, 0.9)
    a = draw_channel(rule, 7)
    assert a == draw_channel(rule, 7) and a != draw_channel(rule, 8)
    assert a.R == 60 and all(0.8 <= p <= 0.9 for p in a.p)
    with pytest.raises(InvalidParameter):
        UniformChannel(3, 0.9, 0.8)


def test_channel_redraw_flag():
    rule = UniformChannel(3, 0.5, 1.0)
    redraw = ExperimentSpec(CIRC, rule, 5)
    fixed = ExperimentSpec(CIRC, rule, 5, redraw_channel=False)
    assert redraw.channel_for(0) != redraw.channel_for(1)
    assert fixed.channel_for(0) == fixed.channel_for(1)


def test_perfect_single_packet_mean():
    stats = run_experiment(ExperimentSpec(SchemeConfig(Scheme.PERFECT, 1), ChannelConfig((0.5,)), 100_000, 0))
    assert abs(stats.mean_D - 1.0) < 3 * stats.ci95_D / 1.96


@pytest.mark.parametrize("L", [1, 4])
def test_single_receiver_cdf_within_band(L):
    cfg = SchemeConfig(Scheme.CONV_GF, 5, L)
    n = 20_000
    spec = ExperimentSpec(cfg, ChannelConfig((0.8,)), n, base_seed=L)
    ds = np.array([t.D for t in iter_trials(spec)])
    dist = delay_dist(cfg.q, 0.8, 5)
    emp = np.cumsum(np.bincount(ds, minlength=len(dist.pmf))[: len(dist.pmf)]) / n
    assert np.max(np.abs(emp - dist.cdf)) < dkw_slack(n, 0.001)


def test_summary_of_decoded_run():
    spec = ExperimentSpec(CIRC, ChannelConfig((0.8, 0.9)), 30, 3, decode=True)
    results = list(iter_trials(spec))
    stats = summarize(spec, results)
    ops = [o for t in results for o in t.ops]
    assert stats.mean_ops == pytest.approx(sum(ops) / len(ops))
    assert stats.mean_ops_per_bit == pytest.approx(stats.mean_ops / (CIRC.P * CIRC.M))
    assert len(stats.p_values) == 60
    assert run_experiment(ExperimentSpec(CIRC, ChannelConfig((0.8,)), 5)).mean_ops is None


def test_spec_validation():
    with pytest.raises(InvalidParameter):
        ExperimentSpec(CIRC, ChannelConfig((0.8,)), 0)
