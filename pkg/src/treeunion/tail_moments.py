"""Moments and upper tails of the spanning-tree count of G(n, m).

Two routes to ``E[X^k]``: the tuple identity, which weights the law of the
k-tree overlap ``M`` by falling-factorial ratios, and direct sampling of
``X^k`` over random graphs. Both stay in the log domain.

The identity's weights grow roughly like ``(1/p_m)^a``, so plain sampling of
``M`` misses the outcomes that carry the sum once ``k >= 3``. The tilted
sampler draws tree ``j`` with weight ``r`` on edges already used by trees
``1..j-1``; the tilts multiply to ``r^M`` and the exact likelihood ratio
``prod Z_j / (N^(k-1) r^M)`` keeps the estimate of the law unbiased.
"""
from __future__ import annotations

import math
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
from numba import njit
from scipy.special import logsumexp

from ._rng import MASK64, _derive
from .graph import _gnm_choice, _pairs, pair_count
from .poisson_limit import EmpiricalDist, OutOfRegimeError, shard_bounds
from .tree_count import PIVOT_FLOOR, ZERO, LogValue, cayley_log_count, cholesky_logdet
from .tree_sample import _wilson_dense

DEFAULT_DELTA = 0.1


@dataclass(frozen=True)
class GnmParams:
    n: int
    m: int

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("n must be >= 1")
        if not 0 <= self.m <= pair_count(self.n):
            raise ValueError(f"m must lie in [0, {pair_count(self.n)}]")

    @classmethod
    def from_density(cls, n: int, p_m: float) -> "GnmParams":
        return cls(n, int(round(p_m * pair_count(n))))

    @property
    def pairs(self) -> int:
        return pair_count(self.n)

    @property
    def p_m(self) -> float:
        return self.m / self.pairs

    def in_lemma_regime(self, delta: float = DEFAULT_DELTA) -> bool:
        if not 0 < delta < 0.5:
            raise ValueError("delta must lie in (0, 1/2)")
        return delta * self.n ** 2 <= self.m <= (1 - delta) * self.n ** 2


@dataclass(frozen=True)
class MomentReport:
    """Both estimates of ``E[X^k]`` with standard errors in log units."""

    n: int
    m: int
    k: int
    via_ma: LogValue
    direct: LogValue
    se_via_ma: float
    se_direct: float

    def __post_init__(self):
        if self.k < 1:
            raise ValueError("k must be >= 1")

    @property
    def z(self) -> float:
        """Gap between the two log estimates in combined standard errors."""
        gap = abs(self.via_ma.log - self.direct.log)
        if gap == 0:
            return 0.0
        se = math.hypot(self.se_via_ma, self.se_direct)
        return gap / se if se > 0 else math.inf


def falling_factorial_log(big_n: int, ell: int) -> LogValue:
    """``log (N)_l = sum_{i<l} log(N - i)``."""
    if ell < 0:
        raise ValueError("l must be >= 0")
    if ell > big_n:
        raise ValueError(f"l={ell} exceeds N={big_n}")
    if ell == 0:
        return LogValue(0.0)
    terms = np.log(np.arange(big_n - ell + 1, big_n + 1, dtype=np.float64))
    return LogValue(math.fsum(terms.tolist()))


def falling_factorial_estimate(big_n: int, ell: int, check: bool = True) -> LogValue:
    """``l log N - l(l-1)/(2N)``; valid while ``l**3 <= N**2``."""
    if ell < 0 or big_n < 1:
        raise ValueError("need N >= 1 and l >= 0")
    if check and ell ** 3 > big_n ** 2:
        raise OutOfRegimeError(f"l={ell} too large for N={big_n} (l^3 > N^2)")
    return LogValue(ell * math.log(big_n) - ell * (ell - 1) / (2 * big_n))


def _log_ratio(m: int, pairs: int, ell: int) -> float:
    """``log[(m)_l / (pairs)_l]``, ``-inf`` when ``l > m``."""
    if ell > m:
        return -math.inf
    if ell == 0:
        return 0.0
    # one compensated sum so shared factors cancel exactly
    num = np.log(np.arange(m - ell + 1, m + 1, dtype=np.float64))
    den = np.log(np.arange(pairs - ell + 1, pairs + 1, dtype=np.float64))
    return math.fsum(num.tolist() + (-den).tolist())


def expected_count_gnm(params: GnmParams) -> LogValue:
    """Exact ``E X = n^(n-2) (m)_(n-1) / (C(n,2))_(n-1)``."""
    n, m = params.n, params.m
    if n == 1:
        return LogValue(0.0)
    lr = _log_ratio(m, params.pairs, n - 1)
    if lr == -math.inf:
        return ZERO
    return LogValue(math.fsum([cayley_log_count(n).log, lr]))


def expected_count_gnm_asymptotic(params: GnmParams) -> LogValue:
    p = params.p_m
    if p <= 0:
        raise ValueError("p_m must be positive")
    n = params.n
    return LogValue(cayley_log_count(n).log + (n - 1) * math.log(p) - (1 - p) / p)


@dataclass(frozen=True)
class TiltedMnSample:
    """Overlap draws ``M_t`` with log likelihood ratios against uniform tuples.

    ``log_rho`` is zero for plain sampling. ``sum_t 1[M_t = a] rho_t / T``
    is an unbiased estimate of ``P[M = a]``.
    """

    n: int
    k: int
    tilt: float
    m_values: np.ndarray
    log_rho: np.ndarray

    def __post_init__(self):
        if self.m_values.shape != self.log_rho.shape or self.m_values.ndim != 1:
            raise ValueError("m_values and log_rho must be 1-d arrays of equal length")
        if self.m_values.size == 0:
            raise ValueError("empty sample")

    @property
    def trials(self) -> int:
        return int(self.m_values.size)

    def law(self) -> dict:
        """Importance-weighted estimate of ``P[M = a]`` for each observed ``a``."""
        out = {}
        for a in np.unique(self.m_values).tolist():
            sel = self.log_rho[self.m_values == a]
            out[a] = float(math.exp(logsumexp(sel) - math.log(self.trials)))
        return out


def default_tilt(params: GnmParams, k: int) -> float:
    """Weight ratio ``w(a+1)/w(a)`` of the identity at ``a = k(k-1)``, floored at 1."""
    big_l = k * (params.n - 1)
    a = min(k * (k - 1), (k - 1) * (params.n - 1))
    ell = big_l - a
    if ell < 1 or ell > params.m:
        return 1.0
    return max(1.0, (params.pairs - ell + 1) / (params.m - ell + 1))


@njit(cache=True, nogil=True)
def _tilted_mn_batch(n, k, tilt, log_n_trees, seed, start, stop, floor, out_m, out_logrho):
    w = np.empty((n, n))
    used = np.empty((n, n), dtype=np.bool_)
    rowsum = np.empty(n)
    lap = np.empty((n - 1, n - 1))
    parent = np.empty(n, dtype=np.int64)
    nxt = np.empty(n, dtype=np.int64)
    in_tree = np.empty(n, dtype=np.bool_)
    state = np.empty(1, dtype=np.uint64)
    log_tilt = np.log(tilt)
    for t in range(start, stop):
        tseed = _derive(seed, np.uint64(t))
        w[:, :] = 1.0
        used[:, :] = False
        for v in range(n):
            w[v, v] = 0.0
            rowsum[v] = n - 1.0
        logrho = 0.0
        union = 0
        for j in range(k):
            if j > 0:
                # weighted tree count Z_j: Laplacian of w with vertex 0 dropped
                for a in range(1, n):
                    for b in range(1, n):
                        lap[a - 1, b - 1] = -w[a, b]
                    lap[a - 1, a - 1] = rowsum[a]
                logrho += cholesky_logdet(lap, floor) - log_n_trees
            state[0] = _derive(tseed, np.uint64(j))
            _wilson_dense(w, rowsum, n, state, parent, nxt, in_tree)
            for v in range(1, n):
                u = parent[v]
                if not used[u, v]:
                    used[u, v] = True
                    used[v, u] = True
                    union += 1
                    w[u, v] = tilt
                    w[v, u] = tilt
                    rowsum[u] += tilt - 1.0
                    rowsum[v] += tilt - 1.0
        mval = k * (n - 1) - union
        out_m[t - start] = mval
        out_logrho[t - start] = logrho - mval * log_tilt


def tilted_mn_samples(n: int, k: int, trials: int, seed: int, tilt: float,
                      shards: int = 1) -> TiltedMnSample:
    """Overlap of ``k`` trees of ``K_n``, tree ``j`` tilted by ``tilt`` on used edges.

    Trial ``t`` uses stream ``derive_seed(seed, t)`` and tree ``j`` stream
    ``derive_seed(trial_seed, j)``, so shards do not change the result.
    """
    if n < 2 or k < 1 or trials < 1:
        raise ValueError("need n >= 2, k >= 1, trials >= 1")
    if not tilt >= 1.0:
        raise ValueError("tilt must be >= 1")
    s = np.uint64(seed & MASK64)
    log_nt = cayley_log_count(n).log

    def run(bound):
        lo, hi = bound
        m_out = np.empty(hi - lo, dtype=np.int64)
        r_out = np.empty(hi - lo)
        _tilted_mn_batch(n, k, float(tilt), log_nt, s, lo, hi, PIVOT_FLOOR, m_out, r_out)
        return m_out, r_out

    bounds = shard_bounds(trials, shards)
    if len(bounds) == 1:
        parts = [run(bounds[0])]
    else:
        with ThreadPoolExecutor(max_workers=len(bounds)) as pool:
            parts = list(pool.map(run, bounds))
    return TiltedMnSample(n, k, float(tilt), np.concatenate([p[0] for p in parts]),
                          np.concatenate([p[1] for p in parts]))


def kth_moment_via_ma(params: GnmParams, k: int, mn_dist, with_se: bool = False):
    """``E[X^k]`` from the overlap law of k uniform trees of ``K_n``.

    Each tuple with overlap ``a`` survives in G(n, m) with probability
    ``w(a) = (m)_(L-a) / (C(n,2))_(L-a)``, ``L = k(n-1)``. The estimate is
    ``N^k sum_a P[M = a] w(a)`` with the law taken from ``mn_dist``: an
    ``EmpiricalDist`` (plain or exact counts) or a ``TiltedMnSample``. With
    ``with_se`` also returns the delta-method standard error of the log.
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    if isinstance(mn_dist, TiltedMnSample):
        if mn_dist.n != params.n or mn_dist.k != k:
            raise ValueError("tilted sample drawn for a different (n, k)")
        outcomes = mn_dist.m_values
        logp = mn_dist.log_rho - math.log(mn_dist.trials)
        trials = mn_dist.trials
    else:
        outcomes = np.array(sorted(mn_dist.counts), dtype=np.int64)
        counts = np.array([mn_dist.counts[a] for a in outcomes], dtype=np.float64)
        logp = np.log(counts) - math.log(mn_dist.trials)
        trials = mn_dist.trials
    if len(outcomes) and outcomes.max() > (k - 1) * (params.n - 1):
        raise ValueError("overlap law inconsistent with (n, k)")
    logw = _ma_weights(params, k, outcomes)
    finite = np.isfinite(logw)
    log_mean = float(logsumexp(logw[finite] + logp[finite])) if finite.any() else -math.inf
    est = ZERO if log_mean == -math.inf else LogValue(k * cayley_log_count(params.n).log + log_mean)
    if not with_se:
        return est
    return est, _log_mean_se(logw, logp, trials, per_draw=isinstance(mn_dist, TiltedMnSample))


def _ma_weights(params: GnmParams, k: int, outcomes) -> np.ndarray:
    total = (params.n - 1) * k
    cache = {}
    out = np.empty(len(outcomes))
    for i, a in enumerate(np.asarray(outcomes).tolist()):
        if a not in cache:
            cache[a] = _log_ratio(params.m, params.pairs, total - a)
        out[i] = cache[a]
    return out


def _log_mean_se(logw, logp, trials, per_draw: bool = False) -> float:
    """Delta-method SE of ``log(sample mean)`` for a weighted sample in logs.

    Grouped input: ``logp`` holds ``log(count_a / T)``. Per-draw input:
    ``logp`` holds ``log(rho_t / T)`` and the draw value is ``w_t rho_t``.
    """
    finite = np.isfinite(logw)
    if not finite.any():
        return 0.0
    lw, lp = logw[finite], logp[finite]
    log_m1 = logsumexp(lw + lp)
    if per_draw:
        log_m2 = logsumexp(2 * (lw + lp)) + math.log(trials)
    else:
        log_m2 = logsumexp(2 * lw + lp)
    rel_var = max(math.exp(log_m2 - 2 * log_m1) - 1.0, 0.0)
    return math.sqrt(rel_var / trials)


@njit(cache=True, nogil=True)
def _gnm_logx_batch(n, m, pi, pj, seed, start, stop, floor, out):
    c = pi.shape[0]
    scratch = np.empty(c, dtype=np.int64)
    lap = np.empty((n - 1, n - 1))
    state = np.empty(1, dtype=np.uint64)
    for t in range(start, stop):
        state[0] = _derive(seed, np.uint64(t))
        chosen = _gnm_choice(c, m, state, scratch)
        lap[:, :] = 0.0
        for s in range(m):
            a = pi[chosen[s]] - 1
            b = pj[chosen[s]] - 1
            # vertex 0 is grounded: its row and column are dropped
            if a >= 0:
                lap[a, a] += 1.0
                lap[a, b] -= 1.0
                lap[b, a] -= 1.0
            lap[b, b] += 1.0
        out[t - start] = cholesky_logdet(lap, floor)


def gnm_log_counts(params: GnmParams, trials: int, seed: int, shards: int = 1) -> np.ndarray:
    """``log X`` for ``trials`` draws of G(n, m); ``-inf`` marks disconnected draws.

    Trial ``t`` is the graph ``gen_gnm(n, m, derive_seed(seed, t))``.
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    n, m = params.n, params.m
    if n == 1:
        return np.zeros(trials)
    pairs = _pairs(n)
    pi, pj = np.ascontiguousarray(pairs[:, 0]), np.ascontiguousarray(pairs[:, 1])
    s = np.uint64(seed & MASK64)

    def run(bound):
        lo, hi = bound
        out = np.empty(hi - lo)
        _gnm_logx_batch(n, m, pi, pj, s, lo, hi, PIVOT_FLOOR, out)
        return out

    bounds = shard_bounds(trials, shards)
    if len(bounds) == 1:
        return run(bounds[0])
    with ThreadPoolExecutor(max_workers=len(bounds)) as pool:
        return np.concatenate(list(pool.map(run, bounds)))


def log_moment_from_logs(logx: np.ndarray, k: int) -> tuple[LogValue, float]:
    """``log mean(X^k)`` and its delta-method SE from an array of ``log X``."""
    kx = k * np.asarray(logx, dtype=np.float64)
    finite = np.isfinite(kx)
    if not finite.any():
        return ZERO, 0.0
    t = len(kx)
    log_m1 = logsumexp(kx[finite]) - math.log(t)
    log_m2 = logsumexp(2 * kx[finite]) - math.log(t)
    rel_var = max(math.exp(log_m2 - 2 * log_m1) - 1.0, 0.0)
    return LogValue(float(log_m1)), math.sqrt(rel_var / t)


def kth_moment_direct_mc(params: GnmParams, k: int, trials: int, seed: int,
                         shards: int = 1, with_se: bool = False):
    if k < 1:
        raise ValueError("k must be >= 1")
    est, se = log_moment_from_logs(gnm_log_counts(params, trials, seed, shards), k)
    return (est, se) if with_se else est


def moment_ratio_bound_check(params: GnmParams, k: int, report: MomentReport,
                             delta: float = DEFAULT_DELTA, strict: bool = True,
                             use: str = "direct") -> float:
    """Per-k constant ``C_hat = exp[(log E^[X^k] - k log E X) / k]``.

    Out-of-regime ``m`` raises with ``strict``; otherwise it only warns.
    """
    if not params.in_lemma_regime(delta):
        msg = f"m={params.m} outside [{delta}n^2, {1 - delta}n^2] for n={params.n}"
        if strict:
            raise OutOfRegimeError(msg)
        warnings.warn(msg, stacklevel=2)
    est = report.direct if use == "direct" else report.via_ma
    mean = expected_count_gnm(params)
    return math.exp((est.log - k * mean.log) / k)


def markov_tail_bound(c: float, big_k: float, k: int) -> float:
    """``(C/K)^k``: Markov applied to ``X^k`` given ``E X^k <= C^k (E X)^k``."""
    if k < 1:
        raise ValueError("k must be >= 1")
    if c <= 0:
        raise ValueError("C must be positive")
    if big_k <= c:
        raise ValueError("K must exceed C for a nontrivial bound")
    return (c / big_k) ** k


def lemma_tail_bound(t: float, n: int) -> tuple[float, int, float]:
    """Tail bound with ``K = C e^t`` and ``k = ceil(log n)``.

    Returns ``(n^-t, k, K/C)``. The Markov value ``exp(-t k)`` never exceeds
    ``n^-t``.
    """
    if n < 2 or t < 0:
        raise ValueError("need n >= 2 and t >= 0")
    k = max(1, math.ceil(math.log(n)))
    return n ** (-t), k, math.exp(t)


def moment_report(params: GnmParams, k: int, mn_dist: EmpiricalDist, trials: int,
                  seed: int, shards: int = 1) -> MomentReport:
    via, se_via = kth_moment_via_ma(params, k, mn_dist, with_se=True)
    direct, se_dir = kth_moment_direct_mc(params, k, trials, seed, shards, with_se=True)
    return MomentReport(params.n, params.m, k, via, direct, se_via, se_dir)
