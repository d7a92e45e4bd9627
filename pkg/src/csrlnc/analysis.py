"""Analytic completion-delay distributions and decoding-complexity formulas.

Delay pmfs for the conventional scheme are built as sums of independent
geometric variables, one per missing rank, with success probabilities that
depend on the current rank.  The perfect scheme uses the negative-binomial
CDF written as a finite sum.  Expected system delay sums ``1 - prod F_r(d)``
and reports a bound on the part of the series that was not summed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Sequence

import numpy as np
from scipy.optimize import minimize_scalar
from scipy.signal import lfilter
from scipy.special import gammaln

from .errors import InvalidParameter, NonConvergence
from .schemes import Scheme, SchemeConfig

TAIL_EPS = 1e-12
DMAX_FACTOR = 64
DMAX_FLOOR = 1024


@dataclass(frozen=True)
class ChannelConfig:
    """Per-receiver reception probabilities."""

    p: tuple[float, ...]

    def __post_init__(self):
        object.__setattr__(self, "p", tuple(float(x) for x in self.p))
        if not self.p:
            raise InvalidParameter("at least one receiver is required")
        if any(not 0.0 < x <= 1.0 for x in self.p):
            raise InvalidParameter("every p_r must lie in (0, 1]")

    @property
    def R(self) -> int:
        return len(self.p)


def p_prime(q: float, p_r: float, rank: int, P: int) -> float:
    """Probability that a phase-two slot raises the receiver's rank."""
    if not 0 <= rank < P:
        raise InvalidParameter("rank must lie in [0, P)")
    if math.isinf(q):
        return p_r
    return p_r * (1.0 - float(q) ** (rank - P))


def _geom_convolve(pmf: np.ndarray, x: float) -> np.ndarray:
    """Distribution of ``d + T`` where ``T ~ Geom(x)`` on ``{1, 2, ...}``."""
    if x >= 1.0:
        out = np.zeros_like(pmf)
        out[1:] = pmf[:-1]
        return out
    # S(d) = x * pmf(d-1) + (1-x) * S(d-1)
    return lfilter([0.0, x], [1.0, -(1.0 - x)], pmf)


def default_dmax(P: int) -> int:
    """Summation cap: ``64 P``, but never so short that tiny generations cannot converge."""
    return max(DMAX_FACTOR * P, DMAX_FLOOR)


def delay_pmf_conditional(q: float, p_r: float, P: int, u: int, d_max: int | None = None) -> np.ndarray:
    """``Pr(D_r = d | U_r = u)`` for ``d = 0..d_max``."""
    if not 0 <= u <= P:
        raise InvalidParameter("u must lie in [0, P]")
    d_max = default_dmax(P) if d_max is None else d_max
    pmf = np.zeros(d_max + 1)
    pmf[0] = 1.0
    for rank in range(u, P):
        pmf = _geom_convolve(pmf, p_prime(q, p_r, rank, P))
    return pmf


def delay_pmf(q: float, p_r: float, P: int, d_max: int | None = None) -> np.ndarray:
    """``Pr(D_r = d)``: the binomial mixture over the number of uncoded receptions."""
    d_max = default_dmax(P) if d_max is None else d_max
    cond = np.zeros(d_max + 1)
    cond[0] = 1.0
    total = math.comb(P, P) * p_r**P * cond
    # walk u downwards so each conditional pmf extends the previous one
    for u in range(P - 1, -1, -1):
        cond = _geom_convolve(cond, p_prime(q, p_r, u, P))
        weight = math.comb(P, u) * p_r**u * (1.0 - p_r) ** (P - u)
        total = total + weight * cond
    return total


def perfect_delay_cdf(p_r: float, P: int, d: int) -> float:
    """``I_p(P, d+1)`` as the finite negative-binomial sum, accumulated in log space."""
    if d < 0:
        return 0.0
    if p_r >= 1.0:
        return 1.0
    logp, logq = math.log(p_r), math.log1p(-p_r)
    terms = [
        math.exp(math.lgamma(P + j) - math.lgamma(P) - math.lgamma(j + 1) + P * logp + j * logq)
        for j in range(d + 1)
    ]
    return min(1.0, math.fsum(terms))


def perfect_delay_pmf(p_r: float, P: int, d_max: int | None = None) -> np.ndarray:
    d_max = default_dmax(P) if d_max is None else d_max
    if p_r >= 1.0:
        out = np.zeros(d_max + 1)
        out[0] = 1.0
        return out
    j = np.arange(d_max + 1)
    logs = gammaln(P + j) - gammaln(P) - gammaln(j + 1) + P * math.log(p_r) + j * math.log1p(-p_r)
    return np.exp(logs)


@dataclass(frozen=True)
class DelayDist:
    """Per-receiver delay pmf truncated at ``d_max``, with the parameters that produced it.

    ``q = inf`` marks the perfect scheme.
    """

    pmf: np.ndarray
    q: float
    p_r: float
    P: int

    @property
    def cdf(self) -> np.ndarray:
        return np.minimum(np.cumsum(self.pmf), 1.0)

    @property
    def tail_mass(self) -> float:
        return max(0.0, 1.0 - float(self.pmf.sum()))

    def mean(self) -> float:
        return float(np.sum(1.0 - self.cdf))

    def rates(self) -> list[float]:
        """Per-slot success probability at each rank ``0..P-1``."""
        return [p_prime(self.q, self.p_r, k, self.P) for k in range(self.P)]

    def log_mgf(self, theta: float) -> float:
        """``log E[exp(theta D_r)]``, finite for ``theta < -log(1 - min rate)``."""
        rates = self.rates()
        if any((1.0 - x) * math.exp(theta) >= 1.0 for x in rates):
            return math.inf
        log_geo = [math.log(x) + theta - math.log1p(-(1.0 - x) * math.exp(theta)) for x in rates]
        logs = []
        suffix = 0.0  # sum of log_geo[u:]
        for u in range(self.P, -1, -1):
            if u < self.P:
                suffix += log_geo[u]
            logs.append(_log_binom_weight(self.P, u, self.p_r) + suffix)
        logs = [v for v in logs if v > -math.inf]
        top = max(logs)
        return top + math.log(math.fsum(math.exp(v - top) for v in logs))

    def tail_sum_bound(self, d_start: int) -> float:
        """Chernoff bound on ``sum_{d >= d_start} Pr(D_r > d)``."""
        if self.p_r >= 1.0:
            return 0.0
        theta_max = -math.log1p(-min(self.rates()))

        def log_bound(theta: float) -> float:
            return self.log_mgf(theta) - theta * (d_start + 1) - math.log(-math.expm1(-theta))

        res = minimize_scalar(log_bound, bounds=(1e-9 * theta_max, theta_max * (1 - 1e-9)), method="bounded")
        return math.exp(min(res.fun, 700.0))


def _log_binom_weight(P: int, u: int, p: float) -> float:
    if p >= 1.0:
        return 0.0 if u == P else -math.inf
    return (
        math.lgamma(P + 1) - math.lgamma(u + 1) - math.lgamma(P - u + 1)
        + u * math.log(p) + (P - u) * math.log1p(-p)
    )


@lru_cache(maxsize=4096)
def _conv_dist(q: float, p_r: float, P: int, d_max: int) -> DelayDist:
    pmf = delay_pmf(q, p_r, P, d_max)
    pmf.setflags(write=False)
    return DelayDist(pmf, q, p_r, P)


def delay_dist(q: float, p_r: float, P: int, d_max: int | None = None) -> DelayDist:
    """Delay distribution of a conventional scheme; ``q = inf`` gives the perfect scheme."""
    d_max = default_dmax(P) if d_max is None else d_max
    if math.isinf(q):
        return DelayDist(perfect_delay_pmf(p_r, P, d_max), math.inf, float(p_r), P)
    return _conv_dist(float(q), float(p_r), P, d_max)


@dataclass(frozen=True)
class DelayExpectation:
    value: float
    remainder_bound: float
    terms: int


def expected_system_delay(dists: Sequence[DelayDist], tail_eps: float = TAIL_EPS) -> DelayExpectation:
    """``sum_d (1 - prod_r Pr(D_r <= d))`` for independent receivers."""
    if not dists:
        raise InvalidParameter("no receivers")
    d_max = min(len(d.pmf) for d in dists) - 1
    log_prod = np.zeros(d_max + 1)
    for dist in dists:
        with np.errstate(divide="ignore"):
            log_prod += np.log(dist.cdf[: d_max + 1])
    summand = -np.expm1(log_prod)
    below = np.nonzero(summand < tail_eps)[0]
    if len(below) == 0:
        raise NonConvergence(f"summand still {summand[-1]:.3e} at d_max={d_max}")
    d_star = int(below[0])
    value = math.fsum(summand[:d_star].tolist())
    # 1 - prod F_r <= sum_r (1 - F_r), each bounded through the moment generating function
    bound = sum(d.tail_sum_bound(d_star) for d in dists)
    return DelayExpectation(value, bound, d_star)


def expected_delay(q: float, channel: ChannelConfig, P: int, tail_eps: float = TAIL_EPS) -> DelayExpectation:
    """Expected system delay of the conventional (``q`` finite) or perfect (``q = inf``) scheme."""
    return expected_system_delay([delay_dist(q, p, P) for p in channel.p], tail_eps)


# Receive-count table for GF(2): Pr(N_r = P + n | U_r = u).


def appendix_a_table(gap: int, n: int) -> float:
    """Probability of exactly ``n`` non-innovative receptions when ``gap`` ranks are missing.

    Uses ``A_gap = prod_{j<=gap} (1 - 2^-j)`` and ``A'_{jk} = 2^-j A'_{j,k-1} + A'_{j-1,k}``
    with ``A'_{j1} = 1``.
    """
    if gap < 1 or n < 0:
        raise InvalidParameter("gap must be >= 1 and n >= 0")
    a_gap = math.prod(1.0 - 2.0**-j for j in range(1, gap + 1))
    if n == 0:
        return a_gap
    # column k = 1
    col = [1.0] * (gap + 1)
    for _ in range(2, n + 1):
        nxt = [0.0] * (gap + 1)
        for j in range(1, gap + 1):
            nxt[j] = 2.0**-j * col[j] + nxt[j - 1]
        col = nxt
    return a_gap * math.fsum(2.0**-j * col[j] for j in range(1, gap + 1))


# Decoding-complexity formulas.


def binomial_moments(P: int, p_r: float) -> tuple[float, float]:
    """``E[U]`` and ``E[U^2]`` for ``U ~ Bin(P, p_r)``."""
    mean = P * p_r
    return mean, P * p_r * (P * p_r - p_r + 1)


@dataclass(frozen=True)
class ComplexityTerms:
    phase1: float
    step1: float
    step2: float
    expansion: float = 0.0
    lower_bound: bool = False

    @property
    def total(self) -> float:
        return self.expansion + self.phase1 + self.step1 + self.step2


def conv_complexity_approx(cfg: SchemeConfig, p_r: float, M: float | None = None) -> float:
    """Large-L approximation ``M P [(2L+1)P - 1](1 - p_r)``.

    Every complexity formula is linear in ``M``; ``M`` overrides ``cfg.M`` so
    packet lengths that are not a multiple of ``L`` can be evaluated.
    """
    M = cfg.M if M is None else M
    return M * cfg.P * ((2 * cfg.L + 1) * cfg.P - 1) * (1.0 - p_r)


def conv_complexity_expect(
    cfg: SchemeConfig, p_r: float, mean_A: float, mean_phi: float | None = None, M: float | None = None
) -> ComplexityTerms:
    """Expected decoding work of the conventional scheme.

    For ``L = 1`` this is the GF(2) lower bound
    ``(M/2)[(P^2-P)p(1-p) + 3|A| - 2]``.  Otherwise the phase-I, step-one and
    step-two terms are evaluated with the binomial moments of ``U_r``, the
    supplied mean residual size and ``phi(D)`` (default ``|A|^2``).
    """
    if cfg.kind != Scheme.CONV_GF:
        raise InvalidParameter("conventional configuration required")
    P, L = cfg.P, cfg.L
    M = cfg.M if M is None else M
    if L == 1:
        phase1 = M / 2 * (P * P - P) * p_r * (1 - p_r)
        return ComplexityTerms(phase1, 0.0, M / 2 * (3 * mean_A - 2), lower_bound=True)
    q = cfg.q
    nz = (q - 1) / q
    ns = M / L
    eu, eu2 = binomial_moments(P, p_r)
    e_u_rest = P * eu - eu2  # E[U (P - U)]
    e_rest = P - eu
    e_rest_fall = P * P - 2 * P * eu + eu2 - e_rest  # E[(P-U)(P-U-1)]
    phase1 = e_u_rest * nz * ns * (2 * L * L + L)
    step1 = (e_rest - mean_A) * ns * 2 * L * L + nz * ns * (2 * L * L + L) * (
        e_rest_fall - mean_A * (mean_A - 1)
    ) / 2
    phi = mean_A * mean_A if mean_phi is None else mean_phi
    step2 = phi * ns * 2 * L * L + (phi - mean_A) * ns * L
    return ComplexityTerms(phase1, step1, step2)


def circ_complexity_expect(
    cfg: SchemeConfig, p_r: float, mean_A: float, mean_Ur: float, M: float | None = None
) -> ComplexityTerms:
    """Expected decoding work of the circular-shift scheme, evaluated at supplied means.

    The step-one sum ``sum_{j=|A|+1}^{P-U} (j-1)`` is taken in closed form
    ``[(P-U)(P-U-1) - |A|(|A|-1)] / 2`` with the means substituted.
    """
    if not cfg.kind.is_circ:
        raise InvalidParameter("circular-shift configuration required")
    P, L = cfg.P, cfg.L
    M = cfg.M if M is None else M
    p0 = float(cfg.p0)
    ns = M / L
    n = L + 1
    a = mean_A
    expansion = ns * P * (L - 1) if cfg.kind == Scheme.CIRC else 0.0
    phase1 = ns * n * P * P * p_r * (1 - p0) * (1 - p_r)
    step2 = ns * n * ((a - 1) ** 2 * (L / 2 - 1) + (a - 1) * (a - p0))
    rest = P - mean_Ur
    step1 = ns * (1 - p0) * n * (rest * (rest - 1) - a * (a - 1)) / 2
    return ComplexityTerms(phase1, step1, step2, expansion=expansion)


def mean_formula_ops(
    cfg: SchemeConfig,
    p_values: Sequence[float],
    mean_A: float,
    mean_Ur: float | None = None,
    M: float | None = None,
) -> ComplexityTerms:
    """Complexity formula averaged over receivers with different ``p_r``.

    ``mean_Ur`` defaults to ``P`` times the mean ``p_r``.
    """
    if not p_values:
        raise InvalidParameter("no receivers")
    if cfg.kind.is_circ:
        ur = cfg.P * math.fsum(p_values) / len(p_values) if mean_Ur is None else mean_Ur
        terms = [circ_complexity_expect(cfg, p, mean_A, ur, M=M) for p in p_values]
    elif cfg.kind == Scheme.CONV_GF:
        terms = [conv_complexity_expect(cfg, p, mean_A, M=M) for p in p_values]
    else:
        raise InvalidParameter("the perfect scheme has no decoding work")
    n = len(terms)
    return ComplexityTerms(
        phase1=math.fsum(t.phase1 for t in terms) / n,
        step1=math.fsum(t.step1 for t in terms) / n,
        step2=math.fsum(t.step2 for t in terms) / n,
        expansion=math.fsum(t.expansion for t in terms) / n,
        lower_bound=terms[0].lower_bound,
    )


def lemma1_bounds(p0: Fraction | float, P: int, J: int, q: int) -> tuple[float, float]:
    """``(1 - p0^(P-J+1), 1 - q^-(P-J+1))``: the circular-shift lower bound and the GF(q) value."""
    if q * p0 > 1:
        raise InvalidParameter(f"q={q} exceeds 1/p0")
    if not 1 <= J <= P:
        raise InvalidParameter("need 1 <= J <= P")
    k = P - J + 1
    return 1.0 - float(p0) ** k, 1.0 - float(q) ** -k


@dataclass(frozen=True)
class DominanceReport:
    """Per-receiver CDF comparison of a simulated circular-shift run with an analytic GF(q) run."""

    q: int
    trials: int
    slack: float
    # (receiver, d, simulated cdf, analytic cdf) wherever simulated < analytic - slack
    violations: tuple[tuple[int, int, float, float], ...]
    mean_sim: float
    mean_analytic: float
    # normal-approximation half-width for mean_sim
    ci95_sim: float = 0.0

    @property
    def ok(self) -> bool:
        return not self.violations


def dkw_slack(n: int, alpha: float = 0.05) -> float:
    """Uniform confidence half-width of an empirical CDF from ``n`` samples."""
    return math.sqrt(math.log(2.0 / alpha) / (2.0 * n))


def thm2_compare(circ_cfg: SchemeConfig, q: int, channel: ChannelConfig, trials: int, seed: int = 0) -> DominanceReport:
    """Check ``Pr(D_r^circ <= d) >= Pr(D_r^GF(q) <= d)`` with the circular-shift side simulated.

    The GF(q) side is analytic; the simulated side uses a DKW band, so a
    violation means the analytic CDF sits above the whole band.
    """
    from .sim import ExperimentSpec, iter_trials

    if not circ_cfg.kind.is_circ:
        raise InvalidParameter("circular-shift configuration required")
    if q * circ_cfg.p0 > 1:
        raise InvalidParameter(f"q={q} exceeds 1/p0")
    spec = ExperimentSpec(circ_cfg, channel, trials, seed, redraw_channel=False)
    samples = [[] for _ in range(channel.R)]
    system = []
    for t in iter_trials(spec):
        system.append(t.D)
        for r, d in enumerate(t.D_r):
            samples[r].append(d)
    slack = dkw_slack(trials)
    violations = []
    dists = []
    for r, p_r in enumerate(channel.p):
        dist = delay_dist(q, p_r, circ_cfg.P)
        dists.append(dist)
        counts = np.bincount(samples[r], minlength=len(dist.pmf))[: len(dist.pmf)]
        emp = np.cumsum(counts) / trials
        for d in np.nonzero(emp < dist.cdf - slack)[0]:
            violations.append((r, int(d), float(emp[d]), float(dist.cdf[d])))
    mean = math.fsum(system) / trials
    var = math.fsum((d - mean) ** 2 for d in system) / (trials - 1) if trials > 1 else 0.0
    return DominanceReport(
        q=q,
        trials=trials,
        slack=slack,
        violations=tuple(violations),
        mean_sim=mean,
        mean_analytic=expected_system_delay(dists).value,
        ci95_sim=1.96 * math.sqrt(var / trials),
    )
