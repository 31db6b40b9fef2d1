"""Reservoir distributions over arm means.

A reservoir supplies the CDF ``G``, the generalized inverse ``G^{-1}(p) =
inf {theta : G(theta) >= p}``, inverse-transform sampling, the good-set
threshold ``G^{-1}(1 - alpha) - eps``, and (for continuous reservoirs) the
equal-measure bucket partition used by the sample-complexity bounds.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import special

from .errors import DomainError, UnsupportedPartitionError


@dataclass(frozen=True)
class BucketPartition:
    """Decreasing boundaries [b0, ..., bm]; bucket i is (b_i, b_{i-1}].

    Every bucket has reservoir measure ``alpha`` except possibly the last.
    """

    boundaries: tuple[float, ...]
    alpha: float

    @property
    def m(self) -> int:
        return len(self.boundaries) - 1


class Reservoir:
    """Base class for distributions over arm means."""

    atomic: bool = False

    def cdf(self, tau):
        """Right-continuous CDF value(s) G(tau)."""
        raise NotImplementedError

    def quantile(self, p):
        """Generalized inverse G^{-1}(p); atoms resolve by the infimum rule."""
        raise NotImplementedError

    @property
    def mu_star(self) -> float:
        """Largest possible mean, G^{-1}(1)."""
        return float(self.quantile(1.0))

    def draw_mean(self, rng: np.random.Generator, size: int | None = None):
        """i.i.d. mean draw(s) with CDF G via inverse-transform sampling."""
        u = rng.random(size)
        out = self.quantile(u)
        return float(out) if size is None else np.asarray(out, dtype=float)

    def good_threshold(self, alpha: float, epsilon: float = 0.0) -> float:
        """Lowest mean counted as (alpha, eps)-good: G^{-1}(1-alpha) - eps."""
        _check_alpha_eps(alpha, epsilon)
        return float(self.quantile(1.0 - alpha)) - epsilon

    def effective_alpha(self, alpha: float, epsilon: float = 0.0) -> float:
        """Reservoir measure of {theta >= good_threshold} (closed set)."""
        thr = self.good_threshold(alpha, epsilon)
        return self._upper_mass(thr)

    def _upper_mass(self, thr: float) -> float:
        # continuous case; atomic kinds override to count closed-set mass
        return 1.0 - float(self.cdf(thr))

    def buckets(self, alpha: float) -> BucketPartition:
        """Boundaries b_0 = mu*, b_i = G^{-1}(G(b_{i-1}) - alpha), down to
        b_m at the bottom of the support (the last bucket keeps whatever
        measure is left over)."""
        _check_alpha_eps(alpha, 0.0)
        if self.atomic:
            raise UnsupportedPartitionError(
                f"{type(self).__name__} is atomic; the bucket recurrence is ill-posed"
            )
        m = _ceil_inverse(alpha)
        bounds = [self.mu_star]
        for _ in range(1, m):
            level = float(self.cdf(bounds[-1])) - alpha
            if level <= 1e-12:
                break
            bounds.append(float(self.quantile(level)))
        bounds.append(float(self.quantile(0.0)))
        return BucketPartition(tuple(bounds), alpha)


class BetaReservoir(Reservoir):
    """Beta(a, b) law conditioned on (0, cap]: G(t) = F(min(t, cap)) / F(cap)."""

    def __init__(self, a: float, b: float, cap: float = 1.0):
        if a <= 0 or b <= 0:
            raise DomainError(f"Beta parameters must be positive, got a={a}, b={b}")
        if not 0.0 < cap <= 1.0:
            raise DomainError(f"cap={cap} must lie in (0, 1]")
        self.a = float(a)
        self.b = float(b)
        self.cap = float(cap)
        self._f_cap = float(special.betainc(self.a, self.b, self.cap))

    def cdf(self, tau):
        x = np.clip(np.asarray(tau, dtype=float), 0.0, self.cap)
        out = special.betainc(self.a, self.b, x) / self._f_cap
        return float(out) if np.isscalar(tau) else out

    def quantile(self, p):
        p_arr = np.clip(np.asarray(p, dtype=float), 0.0, 1.0)
        out = special.betaincinv(self.a, self.b, p_arr * self._f_cap)
        out = np.where(p_arr >= 1.0, self.cap, out)
        return float(out) if np.isscalar(p) else out

    @property
    def mu_star(self) -> float:
        return self.cap

    def __repr__(self) -> str:
        return f"BetaReservoir({self.a:g}, {self.b:g}, cap={self.cap:g})"


class UniformReservoir(Reservoir):
    """Uniform law on [lo, hi]."""

    def __init__(self, lo: float, hi: float):
        if not lo < hi:
            raise DomainError(f"need lo < hi, got [{lo}, {hi}]")
        self.lo = float(lo)
        self.hi = float(hi)

    def cdf(self, tau):
        out = np.clip((np.asarray(tau, dtype=float) - self.lo) / (self.hi - self.lo), 0.0, 1.0)
        return float(out) if np.isscalar(tau) else out

    def quantile(self, p):
        out = self.lo + np.clip(np.asarray(p, dtype=float), 0.0, 1.0) * (self.hi - self.lo)
        return float(out) if np.isscalar(p) else out

    @property
    def mu_star(self) -> float:
        return self.hi

    def __repr__(self) -> str:
        return f"UniformReservoir({self.lo:g}, {self.hi:g})"


class PiecewiseLinearReservoir(Reservoir):
    """Continuous law given by CDF knots: G(thetas[i]) = levels[i], linear
    in between. Levels must rise strictly from 0 to 1."""

    def __init__(self, thetas, levels):
        thetas = tuple(float(x) for x in thetas)
        levels = tuple(float(x) for x in levels)
        if len(thetas) != len(levels) or len(thetas) < 2:
            raise DomainError("need matching knot arrays of length >= 2")
        if any(x >= y for x, y in zip(thetas, thetas[1:])):
            raise DomainError("theta knots must increase strictly")
        if any(x >= y for x, y in zip(levels, levels[1:])):
            raise DomainError("level knots must increase strictly")
        if levels[0] != 0.0 or levels[-1] != 1.0:
            raise DomainError("levels must run from 0 to 1")
        self.thetas = thetas
        self.levels = levels

    def cdf(self, tau):
        out = np.interp(np.asarray(tau, dtype=float), self.thetas, self.levels)
        return float(out) if np.isscalar(tau) else out

    def quantile(self, p):
        out = np.interp(np.asarray(p, dtype=float), self.levels, self.thetas)
        return float(out) if np.isscalar(p) else out

    @property
    def mu_star(self) -> float:
        return self.thetas[-1]

    def __repr__(self) -> str:
        return f"PiecewiseLinearReservoir({len(self.thetas)} knots)"


class DiscreteReservoir(Reservoir):
    """Uniform law over a finite list of means."""

    atomic = True

    def __init__(self, means):
        means = tuple(sorted(float(x) for x in means))
        if not means:
            raise DomainError("need at least one mean")
        self.means = means

    def cdf(self, tau):
        arr = np.asarray(self.means)
        out = np.searchsorted(arr, np.asarray(tau, dtype=float), side="right") / len(arr)
        return float(out) if np.isscalar(tau) else out

    def quantile(self, p):
        k = len(self.means)
        p_arr = np.asarray(p, dtype=float)
        idx = np.clip(np.ceil(p_arr * k - 1e-12).astype(int) - 1, 0, k - 1)
        out = np.asarray(self.means)[idx]
        return float(out) if np.isscalar(p) else out

    @property
    def mu_star(self) -> float:
        return self.means[-1]

    def _upper_mass(self, thr: float) -> float:
        return sum(1 for x in self.means if x >= thr) / len(self.means)

    def __repr__(self) -> str:
        return f"DiscreteReservoir({list(self.means)})"


class DiracMixtureReservoir(Reservoir):
    """Two-atom law: mass ``weight_top`` at theta1, the rest at theta0 < theta1
    (the most-biased-coin reservoir)."""

    atomic = True

    def __init__(self, theta0: float, theta1: float, weight_top: float):
        if not theta0 < theta1:
            raise DomainError(f"need theta0 < theta1, got {theta0}, {theta1}")
        if not 0.0 < weight_top < 1.0:
            raise DomainError(f"weight_top={weight_top} must lie in (0, 1)")
        self.theta0 = float(theta0)
        self.theta1 = float(theta1)
        self.weight_top = float(weight_top)

    def cdf(self, tau):
        t = np.asarray(tau, dtype=float)
        out = np.where(t >= self.theta1, 1.0, np.where(t >= self.theta0, 1.0 - self.weight_top, 0.0))
        return float(out) if np.isscalar(tau) else out

    def quantile(self, p):
        p_arr = np.asarray(p, dtype=float)
        out = np.where(p_arr > 1.0 - self.weight_top, self.theta1, self.theta0)
        return float(out) if np.isscalar(p) else out

    @property
    def mu_star(self) -> float:
        return self.theta1

    def _upper_mass(self, thr: float) -> float:
        mass = 0.0
        if self.theta1 >= thr:
            mass += self.weight_top
        if self.theta0 >= thr:
            mass += 1.0 - self.weight_top
        return mass

    def __repr__(self) -> str:
        return f"DiracMixtureReservoir({self.theta0:g}, {self.theta1:g}, {self.weight_top:g})"


def simple_regret_bound(beta: float, c_prime: float, alpha: float, epsilon: float = 0.0) -> float:
    """High-probability simple-regret ceiling C' * alpha^(1/beta) + eps under
    the polynomial tail assumption with exponent ``beta`` and constant
    ``c_prime`` (the tail constants are instance knowledge the caller must
    supply)."""
    if beta <= 0 or c_prime <= 0:
        raise DomainError("tail constants beta and C' must be positive")
    _check_alpha_eps(alpha, epsilon)
    return c_prime * alpha ** (1.0 / beta) + epsilon


def parse_reservoir(spec: str) -> Reservoir:
    """Build a reservoir from a spec string (case-insensitive):

    ``beta:a,b[,cap]``, ``discrete:t1;t2;...``, ``dirac:t0,t1,w``,
    ``uniform:lo,hi``.
    """
    text = spec.strip().lower()
    name, sep, arg = text.partition(":")
    if not sep:
        raise ValueError(f"malformed reservoir spec {spec!r}")
    if name not in ("beta", "discrete", "dirac", "uniform"):
        raise ValueError(f"unknown reservoir kind {name!r} in {spec!r}")
    try:
        if name == "beta":
            parts = [float(x) for x in arg.split(",")]
            if len(parts) not in (2, 3):
                raise DomainError("expected a,b or a,b,cap")
            return BetaReservoir(*parts)
        if name == "discrete":
            return DiscreteReservoir(float(x) for x in arg.split(";"))
        if name == "dirac":
            t0, t1, w = (float(x) for x in arg.split(","))
            return DiracMixtureReservoir(t0, t1, w)
        lo, hi = (float(x) for x in arg.split(","))
        return UniformReservoir(lo, hi)
    except (TypeError, ValueError) as exc:
        raise ValueError(f"malformed reservoir spec {spec!r}: {exc}") from exc


def _check_alpha_eps(alpha: float, epsilon: float) -> None:
    if not 0.0 < alpha < 1.0:
        raise DomainError(f"alpha={alpha} must lie in (0, 1)")
    if epsilon < 0.0:
        raise DomainError(f"epsilon={epsilon} must be nonnegative")


def _ceil_inverse(alpha: float) -> int:
    """ceil(1/alpha) robust to the float representation of 1/alpha."""
    return int(math.ceil(1.0 / alpha - 1e-9))
