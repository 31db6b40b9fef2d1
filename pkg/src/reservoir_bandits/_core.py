"""Compiled scalar kernels: hashing, reward draws, KL inversions, run loop.

Everything in this module is numba-jitted and operates on a family *code*
plus one numeric parameter instead of family objects, so that the full
sampling loop runs in machine code. The public classes in ``families``
and ``algorithm`` wrap these kernels and add validation.

Reward draws are counter-based: the value of pull ``k`` of arm ``a`` under
run seed ``s`` is a pure function of ``(s, a, k)`` (a chained splitmix64
finalizer mixes the three). This makes every run bit-reproducible from its
seed regardless of execution order, which the experiment harness relies on
for parallel/serial equality.
"""

from __future__ import annotations

import math

import numpy as np
from numba import njit

BERNOULLI = 0
GAUSSIAN = 1
POISSON = 2
EXPONENTIAL = 3

# slots separate independent uniforms needed for a single draw
_SLOT_MAIN = 0
_SLOT_AUX = 1

_GOLD = np.uint64(0x9E3779B97F4A7C15)


@njit(cache=True)
def mix64(x):
    """splitmix64 finalizer; the fixed 64-bit mixer used everywhere."""
    z = np.uint64(x) + _GOLD
    z = (z ^ (z >> np.uint64(30))) * np.uint64(0xBF58476D1CE4E5B9)
    z = (z ^ (z >> np.uint64(27))) * np.uint64(0x94D049BB133111EB)
    return z ^ (z >> np.uint64(31))


@njit(cache=True)
def child_seed(master, index):
    """Derive the stream seed of replicate ``index`` from a master seed."""
    return mix64(np.uint64(master) + _GOLD * np.uint64(index + 1))


@njit(cache=True)
def unit(seed, arm, pull, slot):
    """Uniform in (0, 1) addressed by (seed, arm, pull, slot)."""
    h = mix64(np.uint64(seed) + _GOLD * np.uint64(arm + 1))
    h = mix64(h + _GOLD * np.uint64(pull + 1))
    h = mix64(h + _GOLD * np.uint64(slot + 1))
    return (float(h >> np.uint64(11)) + 0.5) * (1.0 / 9007199254740992.0)


@njit(cache=True)
def kl(code, param, x, y):
    """KL divergence d(x, y) between same-family distributions with means
    x and y. Boundary conventions (Bernoulli): d(0,y) = -log(1-y),
    d(1,y) = -log(y); equal means always give 0."""
    if x == y:
        return 0.0
    if code == BERNOULLI:
        if y <= 0.0 or y >= 1.0:
            return math.inf
        if x <= 0.0:
            return -math.log1p(-y)
        if x >= 1.0:
            return -math.log(y)
        return x * math.log(x / y) + (1.0 - x) * math.log((1.0 - x) / (1.0 - y))
    elif code == GAUSSIAN:
        d = x - y
        return d * d / (2.0 * param)
    elif code == POISSON:
        if y <= 0.0:
            return math.inf
        if x <= 0.0:
            return y
        return y - x + x * math.log(x / y)
    else:  # EXPONENTIAL
        if x <= 0.0 or y <= 0.0:
            return math.inf
        r = x / y
        return r - 1.0 - math.log(r)


@njit(cache=True)
def upper_cap(code, param, phat, n, beta):
    """Cheap upper bound on the KL upper-confidence limit.

    Uses quadratic minorizations of the divergence (Pinsker for Bernoulli,
    d(p,q) >= (q-p)^2/(2q) for Poisson, >= (1-p/q)^2/2 for Exponential), so
    the true limit never exceeds the returned value.
    """
    if beta <= 0.0:
        return phat
    s = beta / n
    if code == BERNOULLI:
        if phat >= 1.0:
            return 1.0
        c = phat + math.sqrt(0.5 * s)
        # second bound from kl(p,q) >= p log p + (1-p) log((1-p)/(1-q));
        # stays strictly below 1, which keeps the challenger screen sharp
        if phat > 0.0:
            c2 = 1.0 - (1.0 - phat) * math.exp(-(s - phat * math.log(phat)) / (1.0 - phat))
        else:
            c2 = -math.expm1(-s)
        if c2 < c:
            c = c2
        return 1.0 if c > 1.0 else c
    elif code == GAUSSIAN:
        return phat + math.sqrt(2.0 * param * s)
    elif code == POISSON:
        b = phat + s
        return b + math.sqrt(b * b - phat * phat)
    else:  # EXPONENTIAL
        r = math.sqrt(2.0 * s)
        if r >= 1.0:
            return math.inf
        return phat / (1.0 - r)


@njit(cache=True)
def _bisect_up(code, param, phat, n, beta, hi):
    """Largest feasible mean in [phat, hi]; hi must violate the constraint
    (or sit on it). Relative stop keeps the residual small even where the
    divergence is log-steep."""
    lo = phat
    for _ in range(200):
        if hi - lo <= 1e-13 * abs(hi) + 1e-300:
            break
        mid = 0.5 * (lo + hi)
        if n * kl(code, param, phat, mid) <= beta:
            lo = mid
        else:
            hi = mid
    return lo


@njit(cache=True)
def lower_conf(code, param, phat, n, beta):
    """Smallest mean l <= phat with n * d(phat, l) <= beta.

    The positive-domain families are solved by geometric bisection: the
    crossing can sit many orders of magnitude below phat, so the search
    needs relative (not absolute) resolution.
    """
    if beta <= 0.0:
        return phat
    s = beta / n
    if code == GAUSSIAN:
        return phat - math.sqrt(2.0 * param * s)
    if phat <= 0.0:
        return 0.0
    if code == BERNOULLI and phat >= 1.0:
        return math.exp(-s)  # solve -log(l) = beta/n
    # quadratic-minorant start point; violates the constraint when positive
    if code == BERNOULLI:
        lo = phat - math.sqrt(0.5 * s)
    elif code == POISSON:
        lo = phat - math.sqrt(2.0 * phat * s)
    else:  # EXPONENTIAL
        b = 1.0 + s
        lo = phat / (b + math.sqrt(b * b - 1.0))
    if lo <= 0.0:
        lo = 0.25 * phat
        while lo > 1e-300 and n * kl(code, param, phat, lo) <= beta:
            lo *= 0.25
        if lo <= 1e-300:
            return lo  # crossing below the representable range
    hi = phat
    for _ in range(200):
        if hi - lo <= 1e-13 * hi:
            break
        mid = math.sqrt(lo * hi)
        if n * kl(code, param, phat, mid) <= beta:
            hi = mid
        else:
            lo = mid
    return hi


@njit(cache=True)
def upper_conf(code, param, phat, n, beta):
    """Largest mean u >= phat with n * d(phat, u) <= beta."""
    if beta <= 0.0:
        return phat
    if code == BERNOULLI:
        if phat >= 1.0:
            return 1.0
        if phat <= 0.0:
            return -math.expm1(-beta / n)  # solve -log(1-u) = beta/n
        # solve on the complement scale, where floats resolve the crossing:
        # kl(p, 1-w) = kl(1-p, w), so U = 1 - lower_conf(1-p)
        return 1.0 - lower_conf(BERNOULLI, param, 1.0 - phat, n, beta)
    elif code == GAUSSIAN:
        return phat + math.sqrt(2.0 * param * beta / n)
    elif code == POISSON:
        if phat <= 0.0:
            return beta / n  # d(0, u) = u
        return _bisect_up(code, param, phat, n, beta, upper_cap(code, param, phat, n, beta))
    else:  # EXPONENTIAL
        if phat <= 0.0:
            return 0.0  # d(0, u) is infinite for every u > 0
        hi = upper_cap(code, param, phat, n, beta)
        if not math.isfinite(hi):
            hi = phat * 2.0
            while n * kl(code, param, phat, hi) <= beta:
                hi *= 2.0
        return _bisect_up(code, param, phat, n, beta, hi)


@njit(cache=True)
def poisson_icdf(lam, u):
    """Smallest k with P(Poisson(lam) <= k) >= u."""
    if lam < 30.0:
        p = math.exp(-lam)
        c = p
        j = 0
        while c < u and j < 100000:
            j += 1
            p *= lam / j
            c += p
        return float(j)
    m = int(lam)
    w = int(12.0 * math.sqrt(lam)) + 60
    lo = m - w if m - w > 0 else 0
    p = math.exp(lo * math.log(lam) - lam - math.lgamma(lo + 1.0))
    c = p
    j = lo
    while c < u and j < m + w:
        j += 1
        p *= lam / j
        c += p
    return float(j)


@njit(cache=True)
def draw(code, param, theta, seed, arm, pull):
    """One reward from the family distribution with mean theta, addressed
    by (seed, arm, pull)."""
    u = unit(seed, arm, pull, _SLOT_MAIN)
    if code == BERNOULLI:
        return 1.0 if u < theta else 0.0
    elif code == GAUSSIAN:
        v = unit(seed, arm, pull, _SLOT_AUX)
        z = math.sqrt(-2.0 * math.log(u)) * math.cos(2.0 * math.pi * v)
        return theta + math.sqrt(param) * z
    elif code == POISSON:
        return poisson_icdf(theta, u)
    else:  # EXPONENTIAL
        return -theta * math.log(u)


@njit(cache=True)
def best_empirical(counts, sums):
    """argmax of the empirical means, ties to the lowest index."""
    best = -math.inf
    best_a = 0
    for a in range(counts.shape[0]):
        p = sums[a] / counts[a]
        if p > best:
            best = p
            best_a = a
    return best_a


@njit(cache=True)
def challenger(code, param, counts, sums, beta, skip):
    """argmax over a != skip of the upper confidence limits; ties to the
    lowest index. Returns (index, limit).

    Arms sharing a pull count are ordered by empirical mean (the limit is
    nondecreasing in it at fixed count), so only each count-group's top
    mean -- or the runner-up where the group top is ``skip`` -- needs an
    exact inversion. Remaining candidates are screened by ``upper_cap``.
    """
    n_arms = counts.shape[0]
    order = np.argsort(counts)
    cand = np.empty(n_arms, dtype=np.int64)
    n_cand = 0
    i = 0
    while i < n_arms:
        j = i
        while j + 1 < n_arms and counts[order[j + 1]] == counts[order[i]]:
            j += 1
        top = -1
        top_p = -math.inf
        second = -1
        second_p = -math.inf
        for idx in range(i, j + 1):
            a = order[idx]
            p = sums[a] / counts[a]
            if p > top_p or (p == top_p and (top == -1 or a < top)):
                second = top
                second_p = top_p
                top = a
                top_p = p
            elif p > second_p or (p == second_p and (second == -1 or a < second)):
                second = a
                second_p = p
        if top == skip:
            top = second
        if top >= 0:
            cand[n_cand] = top
            n_cand += 1
        i = j + 1
    caps = np.empty(n_cand)
    for idx in range(n_cand):
        a = cand[idx]
        caps[idx] = upper_cap(code, param, sums[a] / counts[a], counts[a], beta)
    corder = np.argsort(-caps)
    best = -math.inf
    best_a = -1
    for idx in range(n_cand):
        ci = corder[idx]
        if caps[ci] < best:
            break
        a = cand[ci]
        u = upper_conf(code, param, sums[a] / counts[a], counts[a], beta)
        if u > best or (u == best and a < best_a):
            best = u
            best_a = a
    return best_a, best


@njit(cache=True)
def lucb_loop(code, param, means, epsilon, delta, gamma, k1, max_samples, seed):
    """Full (alpha,eps)-KL-LUCB run on a fixed pool of queried arms.

    ``means`` are the true means of the pool (already drawn from the
    reservoir); each arm is sampled once during initialization, then the
    leader/challenger pair is sampled until the stopping index
    B(t) = U_bhat(t) - L_ahat(t) drops to ``epsilon`` or the budget runs
    out. Returns (tau, recommended index, budget_exhausted, L_ahat,
    U_bhat, pull counts).
    """
    n = means.shape[0]
    counts = np.zeros(n)
    sums = np.zeros(n)
    for a in range(n):
        sums[a] = draw(code, param, means[a], seed, a, 0)
        counts[a] = 1.0
    t = n
    if n < 2:
        return t, 0, False, math.nan, math.nan, counts
    while True:
        beta = math.log(k1 * n * t ** gamma / delta)
        ahat = best_empirical(counts, sums)
        l_a = lower_conf(code, param, sums[ahat] / counts[ahat], counts[ahat], beta)
        bhat, u_b = challenger(code, param, counts, sums, beta, ahat)
        if u_b - l_a <= epsilon:
            return t, ahat, False, l_a, u_b, counts
        if t + 2 > max_samples:
            return t, ahat, True, l_a, u_b, counts
        z = draw(code, param, means[ahat], seed, ahat, int(counts[ahat]))
        counts[ahat] += 1.0
        sums[ahat] += z
        z = draw(code, param, means[bhat], seed, bhat, int(counts[bhat]))
        counts[bhat] += 1.0
        sums[bhat] += z
        t += 2
