"""The two-phase (alpha,eps)-KL-LUCB agent.

Phase one queries ``n = ceil((1/alpha) * ln(2/delta))`` arms from the
reservoir and samples each once. Phase two repeatedly samples the empirical
leader and the highest-upper-bound challenger, recomputing KL confidence
intervals at exploration rate ``beta(t, delta) = log(k1 * n * t^gamma /
delta)``, until the stopping index ``B(t) = U_bhat(t) - L_ahat(t)`` falls to
``epsilon``.

Rewards are addressed by ``(seed, arm, pull)`` through a counter-based
stream (see ``_core``), so a run is a pure function of its configuration
and seed. :func:`run` executes the loop in compiled code by default; the
step-by-step operations here are the reference implementation and produce
bit-identical trajectories.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import _core
from .errors import DegeneratePoolError, DomainError
from .families import ArmFamily
from .reservoirs import Reservoir


def _useed(seed: int) -> np.uint64:
    """Normalize an arbitrary integer seed for the compiled kernels."""
    return np.uint64(int(seed) & 0xFFFFFFFFFFFFFFFF)


@dataclass(frozen=True)
class AlgoConfig:
    """Targets and exploration-rate constants.

    ``k1`` must dominate twice the tail sum of t^-gamma, i.e.
    k1 >= 2 * (1 + 1/(gamma-1)), for the confidence guarantee to hold.
    """

    alpha: float
    epsilon: float
    delta: float
    gamma: float = 1.2
    k1: float = 12.5
    max_samples: int = 10_000_000

    def __post_init__(self):
        if not 0.0 < self.alpha < 1.0:
            raise DomainError(f"alpha={self.alpha} must lie in (0, 1)")
        if self.epsilon < 0.0:
            raise DomainError(f"epsilon={self.epsilon} must be nonnegative")
        if not 0.0 < self.delta < 1.0:
            raise DomainError(f"delta={self.delta} must lie in (0, 1)")
        if self.gamma <= 1.0:
            raise DomainError(f"gamma={self.gamma} must exceed 1")
        if self.k1 < 2.0 * (1.0 + 1.0 / (self.gamma - 1.0)):
            raise DomainError(
                f"k1={self.k1} too small for gamma={self.gamma}; "
                f"need k1 >= {2.0 * (1.0 + 1.0 / (self.gamma - 1.0)):g}"
            )
        if self.max_samples < 1:
            raise DomainError("max_samples must be positive")

    def init_pool_size(self) -> int:
        """Number of arms queried up front: ceil((1/alpha) * ln(2/delta))."""
        return int(math.ceil(math.log(2.0 / self.delta) / self.alpha - 1e-9))

    def exploration_rate(self, t: int, n: int) -> float:
        """beta(t, delta) = log(k1 * n * t^gamma / delta)."""
        return math.log(self.k1 * n * float(t) ** self.gamma / self.delta)


@dataclass
class LucbState:
    """Mutable per-run state: pull counts and reward sums per queried arm,
    the round clock, and the current leader/challenger bookkeeping.

    ``means`` holds the true arm means; selection logic only ever reads
    counts and sums.
    """

    means: np.ndarray
    counts: np.ndarray
    sums: np.ndarray
    t: int
    n: int
    seed: int
    a_hat: int = -1
    b_hat: int = -1
    stop_index: float = math.inf
    lower_leader: float = math.nan
    upper_challenger: float = math.nan

    @property
    def empirical_means(self) -> np.ndarray:
        return self.sums / self.counts


@dataclass(frozen=True)
class RunRecord:
    """Outcome of one replicate."""

    seed: int
    tau: int
    recommended_mean: float
    pool_best_mean: float
    threshold: float
    success: bool
    simple_regret: float
    event_a: bool
    event_b: bool
    budget_exhausted: bool


def draw_pool(cfg: AlgoConfig, res: Reservoir, seed: int) -> np.ndarray:
    """The n queried arm means for a run seed (PCG64 stream keyed by seed)."""
    n = cfg.init_pool_size()
    rng = np.random.default_rng(int(seed) & 0xFFFFFFFFFFFFFFFF)
    return np.atleast_1d(res.draw_mean(rng, n))


def init_phase(cfg: AlgoConfig, res: Reservoir, fam: ArmFamily, seed: int) -> LucbState:
    """Query the pool and sample every arm once; B starts at infinity."""
    means = draw_pool(cfg, res, seed)
    n = means.shape[0]
    counts = np.ones(n)
    su = _useed(seed)
    sums = np.array(
        [_core.draw(fam.code, fam.param, means[a], su, a, 0) for a in range(n)]
    )
    return LucbState(means=means, counts=counts, sums=sums, t=n, n=n, seed=int(seed))


def _confidence_bounds(state: LucbState, cfg: AlgoConfig, fam: ArmFamily):
    """Current (L_a, U_a) for every arm at the live exploration rate."""
    beta = cfg.exploration_rate(state.t, state.n)
    phat = state.empirical_means
    upper = np.array(
        [_core.upper_conf(fam.code, fam.param, phat[a], state.counts[a], beta) for a in range(state.n)]
    )
    lower = np.array(
        [_core.lower_conf(fam.code, fam.param, phat[a], state.counts[a], beta) for a in range(state.n)]
    )
    return lower, upper


def select_pair(state: LucbState, cfg: AlgoConfig, fam: ArmFamily) -> tuple[int, int]:
    """Leader = empirical-mean argmax; challenger = upper-bound argmax among
    the rest. Ties break to the lowest arm index."""
    if state.n < 2:
        raise DegeneratePoolError(
            "pool has a single arm; recommend it immediately"
        )
    beta = cfg.exploration_rate(state.t, state.n)
    phat = state.empirical_means
    a_hat = int(np.argmax(phat))
    upper = np.array(
        [_core.upper_conf(fam.code, fam.param, phat[a], state.counts[a], beta) for a in range(state.n)]
    )
    upper[a_hat] = -math.inf
    b_hat = int(np.argmax(upper))
    return a_hat, b_hat


def _refresh(state: LucbState, cfg: AlgoConfig, fam: ArmFamily) -> None:
    """Recompute leader, challenger and stopping index at the current t."""
    a_hat, b_hat = select_pair(state, cfg, fam)
    beta = cfg.exploration_rate(state.t, state.n)
    phat = state.empirical_means
    state.a_hat = a_hat
    state.b_hat = b_hat
    state.lower_leader = _core.lower_conf(
        fam.code, fam.param, phat[a_hat], state.counts[a_hat], beta
    )
    state.upper_challenger = _core.upper_conf(
        fam.code, fam.param, phat[b_hat], state.counts[b_hat], beta
    )
    state.stop_index = state.upper_challenger - state.lower_leader


def step(state: LucbState, cfg: AlgoConfig, fam: ArmFamily) -> LucbState:
    """Sample the current leader/challenger pair once each, advance the
    clock by two, and refresh bounds and the stopping index at the new t."""
    if state.a_hat < 0:
        _refresh(state, cfg, fam)
    for a in (state.a_hat, state.b_hat):
        z = _core.draw(fam.code, fam.param, state.means[a], _useed(state.seed), a, int(state.counts[a]))
        state.counts[a] += 1.0
        state.sums[a] += z
    state.t += 2
    _refresh(state, cfg, fam)
    return state


def _make_record(
    cfg: AlgoConfig,
    res: Reservoir,
    seed: int,
    means: np.ndarray,
    tau: int,
    rec_mean: float,
    exhausted: bool,
) -> RunRecord:
    threshold = res.good_threshold(cfg.alpha, cfg.epsilon)
    pool_best = float(np.max(means))
    mu_star = res.mu_star
    return RunRecord(
        seed=int(seed),
        tau=int(tau),
        recommended_mean=float(rec_mean),
        pool_best_mean=pool_best,
        threshold=float(threshold),
        success=bool(rec_mean >= threshold),
        simple_regret=float(mu_star - rec_mean),
        event_a=bool(pool_best > float(res.quantile(1.0 - cfg.alpha))),
        event_b=bool(rec_mean >= pool_best - cfg.epsilon),
        budget_exhausted=bool(exhausted),
    )


def run(
    cfg: AlgoConfig,
    res: Reservoir,
    fam: ArmFamily,
    seed: int,
    use_kernel: bool = True,
) -> RunRecord:
    """One full run: initialization, LUCB loop, recommendation.

    The compiled loop and the step-by-step reference path consume the same
    reward stream and produce identical records.
    """
    if use_kernel:
        means = draw_pool(cfg, res, seed)
        tau, rec, exhausted, _, _, _ = _core.lucb_loop(
            fam.code,
            fam.param,
            means,
            cfg.epsilon,
            cfg.delta,
            cfg.gamma,
            cfg.k1,
            cfg.max_samples,
            _useed(seed),
        )
        return _make_record(cfg, res, seed, means, tau, means[rec], exhausted)
    record, _ = run_with_state(cfg, res, fam, seed)
    return record


def run_with_state(
    cfg: AlgoConfig,
    res: Reservoir,
    fam: ArmFamily,
    seed: int,
) -> tuple[RunRecord, LucbState]:
    """Reference path composing init_phase / select_pair / step; returns the
    final state alongside the record for inspection."""
    state = init_phase(cfg, res, fam, seed)
    exhausted = False
    if state.n >= 2:
        _refresh(state, cfg, fam)
        while state.stop_index > cfg.epsilon:
            if state.t + 2 > cfg.max_samples:
                exhausted = True
                break
            step(state, cfg, fam)
    rec = state.a_hat if state.a_hat >= 0 else 0
    record = _make_record(
        cfg, res, seed, state.means, state.t, float(state.means[rec]), exhausted
    )
    return record, state
