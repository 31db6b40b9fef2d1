"""Sample-complexity calculators.

Implements the expected-sample lower bound over the bucket partition, its
epsilon-relaxed variant, the reciprocal-Chernoff complexity term driving the
algorithm's budget, the explicit worst-case budget ceiling, and a combined
report. All calculators are pure functions of their inputs.
"""

from __future__ import annotations

import logging
import math
from dataclasses import asdict, dataclass

from .algorithm import AlgoConfig
from .errors import DomainError, PartialFormulaError
from .families import ArmFamily
from .reservoirs import BucketPartition, PiecewiseLinearReservoir, Reservoir

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class BoundsReport:
    """Evaluated bounds for one (reservoir, family, alpha, epsilon, delta)."""

    alpha: float
    epsilon: float
    delta: float
    gamma: float
    k1: float
    n: int
    m: int
    q: int
    mu_star: float
    lower: float
    lower_relaxed: float | None
    h_bar: float
    t_star: float
    per_bucket_terms: tuple[float, ...]
    #: shape-only sums from the simplified bound comparison (no constants)
    lower_sum_simplified: float | None
    upper_sum_simplified: float
    log_factor_lower: float
    log_factor_upper: float

    def to_dict(self) -> dict:
        out = asdict(self)
        out["per_bucket_terms"] = list(self.per_bucket_terms)
        return out


def _checked_buckets(res: Reservoir, fam: ArmFamily, alpha: float) -> BucketPartition:
    part = res.buckets(alpha)
    lo, hi = fam.domain
    if not lo < part.boundaries[0] < hi:
        raise DomainError(
            f"mu*={part.boundaries[0]} must lie strictly inside the {fam} mean domain"
        )
    return part


def lower_bound(
    res: Reservoir,
    fam: ArmFamily,
    alpha: float,
    delta: float,
    return_terms: bool = False,
):
    """Expected-sample lower bound for any (alpha, delta)-correct algorithm:

        (1/d(mu*, b_2) + sum_{i=2}^{m-1} 1/d(b_i, mu*)) * log(1/(2.4 delta))

    The last bucket is omitted because its measure may fall short of alpha.
    """
    part = _checked_buckets(res, fam, alpha)
    b = part.boundaries
    if part.m < 3:
        raise PartialFormulaError(
            f"need at least 3 buckets (alpha={alpha} gives m={part.m}); "
            "the i=2..m-1 sum is empty and b_2 is undefined"
        )
    mu = b[0]
    terms = [1.0 / fam.kl(mu, b[2])]
    terms.extend(1.0 / fam.kl(b[i], mu) for i in range(2, part.m))
    value = sum(terms) * math.log(1.0 / (2.4 * delta))
    if return_terms:
        return value, tuple(terms)
    return value


def finite_lower_bound(means, fam: ArmFamily, delta: float) -> float:
    """Finite-pool reduction of the lower bound for the best-arm problem
    with distinct means theta_1 > ... > theta_K:

        (1/d(theta_1, theta_2) + sum_{i=2}^K 1/d(theta_i, theta_1))
            * log(1/(2.4 delta))
    """
    theta = sorted((float(x) for x in means), reverse=True)
    if len(theta) < 2 or len(set(theta)) != len(theta):
        raise DomainError("need at least two distinct means")
    total = 1.0 / fam.kl(theta[0], theta[1])
    total += sum(1.0 / fam.kl(theta[i], theta[0]) for i in range(1, len(theta)))
    return total * math.log(1.0 / (2.4 * delta))


def embed_finite_instance(means) -> tuple[PiecewiseLinearReservoir, float]:
    """Continuous embedding of a uniform finite pool under which the bucket
    lower bound reduces exactly to :func:`finite_lower_bound`.

    K distinct means become interior bucket boundaries of a piecewise-linear
    reservoir with K+1 equal-measure buckets (alpha = 1/(K+1)): b_0 = mu* =
    theta_1 and b_i = theta_i for i = 2..K, so the bucket formula evaluates
    term-for-term to the finite expression.
    """
    theta = sorted((float(x) for x in means), reverse=True)
    if len(theta) < 2 or len(set(theta)) != len(theta):
        raise DomainError("need at least two distinct means")
    k = len(theta)
    alpha = 1.0 / (k + 1)
    mid = 0.5 * (theta[0] + theta[1])
    bottom = theta[-1] - 0.5 * (theta[0] - theta[-1]) - 1e-6
    knots = [bottom] + theta[::-1][:-1] + [mid, theta[0]]
    levels = [0.0] + [i * alpha for i in range(1, k + 1)] + [1.0]
    return PiecewiseLinearReservoir(knots, levels), alpha


def good_bucket_count(res: Reservoir, alpha: float, epsilon: float) -> int:
    """Buckets lying entirely inside the closed good set: the count of i with
    b_i >= G^{-1}(1-alpha) - eps. Equals 1 at eps = 0."""
    part = res.buckets(alpha)
    thr = res.good_threshold(alpha, epsilon)
    return sum(1 for i in range(1, part.m + 1) if part.boundaries[i] >= thr)


def lower_bound_relaxed(
    res: Reservoir,
    fam: ArmFamily,
    alpha: float,
    epsilon: float,
    delta: float,
    q: int | None = None,
) -> float:
    """Epsilon-relaxed expected-sample lower bound:

        ((q-1)/d(b_1 - eps, mu* + eps)
            + sum_{i=q+1}^{m-1} 1/d(b_i, mu* + eps)) * log(1/(4 delta))

    ``q`` counts the buckets inside the epsilon-good set; it is derived from
    the partition when not supplied.
    """
    part = _checked_buckets(res, fam, alpha)
    b = part.boundaries
    mu_eps = b[0] + epsilon
    lo, hi = fam.domain
    if not lo < mu_eps < hi:
        raise DomainError(f"mu*+eps={mu_eps} outside the {fam} mean domain")
    if q is None:
        q = good_bucket_count(res, alpha, epsilon)
    if not 1 <= q <= part.m:
        raise DomainError(f"q={q} must lie in [1, m={part.m}]")
    if q >= part.m:
        logger.warning(
            "relaxed lower bound: q=%d equals the bucket count m=%d; the sum is empty",
            q,
            part.m,
        )
    total = 0.0
    if q >= 2:
        edge = b[1] - epsilon
        if not lo < edge < hi:
            raise DomainError(f"b_1-eps={edge} outside the {fam} mean domain")
        total += (q - 1) / fam.kl(edge, mu_eps)
    total += sum(1.0 / fam.kl(b[i], mu_eps) for i in range(q + 1, part.m))
    return total * math.log(1.0 / (4.0 * delta))


def complexity_term(
    source: Reservoir | BucketPartition,
    fam: ArmFamily,
    alpha: float | None = None,
    epsilon: float = 0.0,
) -> float:
    """Budget complexity term:

        H_bar = 2/eps^2 + sum_{i=2}^m 1/max(eps^2/2, d*(b_{i-1}, b_1))

    ``source`` is a reservoir (alpha required) or a precomputed partition.
    """
    if epsilon <= 0.0:
        raise DomainError("epsilon must be positive; the 2/eps^2 term is infinite")
    if isinstance(source, BucketPartition):
        part = source
    else:
        if alpha is None:
            raise DomainError("alpha required when passing a reservoir")
        part = source.buckets(alpha)
    b = part.boundaries
    floor = 0.5 * epsilon * epsilon
    total = 2.0 / (epsilon * epsilon)
    for i in range(2, part.m + 1):
        dstar = fam.chernoff_information(b[i - 1], b[1]).value
        total += 1.0 / max(floor, dstar)
    return total


def pool_complexity_term(means, fam: ArmFamily, pivot: float, epsilon: float) -> float:
    """Pool form of the complexity term: sum over arms of
    1/max(eps^2/2, d*(mean_a, pivot))."""
    if epsilon <= 0.0:
        raise DomainError("epsilon must be positive")
    floor = 0.5 * epsilon * epsilon
    total = 0.0
    for x in means:
        dstar = fam.chernoff_information(float(x), pivot).value if x != pivot else 0.0
        total += 1.0 / max(floor, dstar)
    return total


def c0_constant(gamma: float, tol: float = 1e-9) -> float:
    """Smallest C0 with C0 >= gamma*log(C0) + 1 + gamma/e, by fixed-point
    iteration from C0 = 1 + gamma/e."""
    if gamma < 1.0:
        raise DomainError(f"gamma={gamma} must be at least 1")
    c = 1.0 + gamma / math.e
    for _ in range(10_000):
        nxt = gamma * math.log(c) + 1.0 + gamma / math.e
        if abs(nxt - c) <= tol:
            return nxt
        c = nxt
    return c


def t_star(cfg: AlgoConfig, h_bar: float) -> float:
    """Explicit budget ceiling:

        12 C0(gamma) H_bar log(1/delta)
            * log(12 k1 n (log(1/delta))^gamma H_bar^gamma / delta) + n
    """
    if h_bar <= 0.0:
        raise DomainError(f"h_bar={h_bar} must be positive")
    n = cfg.init_pool_size()
    c0 = c0_constant(cfg.gamma)
    log_delta = math.log(1.0 / cfg.delta)
    inner = 12.0 * cfg.k1 * n * log_delta ** cfg.gamma * h_bar ** cfg.gamma / cfg.delta
    return 12.0 * c0 * h_bar * log_delta * math.log(inner) + n


def compare_report(
    res: Reservoir,
    fam: ArmFamily,
    alpha: float,
    epsilon: float,
    delta: float,
    gamma: float = 1.2,
    k1: float = 12.5,
) -> BoundsReport:
    """Bundle every calculator into one report, plus the shape-only
    simplified sums (their multiplicative constants are unspecified, so the
    bracketed sums and log factors are reported separately)."""
    cfg = AlgoConfig(alpha=alpha, epsilon=epsilon, delta=delta, gamma=gamma, k1=k1)
    part = _checked_buckets(res, fam, alpha)
    b = part.boundaries
    lower, terms = lower_bound(res, fam, alpha, delta, return_terms=True)
    q = good_bucket_count(res, alpha, epsilon)
    try:
        relaxed = lower_bound_relaxed(res, fam, alpha, epsilon, delta, q=q)
    except DomainError:
        relaxed = None
    h_bar = complexity_term(part, fam, epsilon=epsilon)
    lo, hi = fam.domain
    mu_eps = b[0] + epsilon
    edge = b[1] - epsilon
    if lo < mu_eps < hi and lo < edge < hi:
        lower_sum = 1.0 / fam.kl(edge, mu_eps)
        lower_sum += sum(1.0 / fam.kl(b[i], mu_eps) for i in range(3, part.m))
    else:
        lower_sum = None
    upper_sum = 4.0 / (epsilon * epsilon)
    upper_sum += sum(
        1.0 / fam.chernoff_information(b[i], b[1]).value for i in range(2, part.m)
    )
    return BoundsReport(
        alpha=alpha,
        epsilon=epsilon,
        delta=delta,
        gamma=gamma,
        k1=k1,
        n=cfg.init_pool_size(),
        m=part.m,
        q=q,
        mu_star=b[0],
        lower=lower,
        lower_relaxed=relaxed,
        h_bar=h_bar,
        t_star=t_star(cfg, h_bar),
        per_bucket_terms=terms,
        lower_sum_simplified=lower_sum,
        upper_sum_simplified=upper_sum,
        log_factor_lower=math.log(1.0 / delta),
        log_factor_upper=math.log(1.0 / delta) ** 2,
    )
