"""Log spanning-tree counts along nested G(n, p) restrictions of one G(N, p).

Along a geometric grid we record the normalized edge count ``E*`` and the
normalized log count ``(log X - mu_n) / sigma``; the latter tracks ``E*`` up
to a bounded residual, which is how the iterated-logarithm scaling is
inherited from the edge count.
"""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from numba import njit

from ._rng import MASK64, _derive, derive_seed
from .graph import CoupledGraphSource, Graph, _gnp_mask, _pairs, coupled_restrict, pair_count
from .poisson_limit import shard_bounds
from .tree_count import PIVOT_FLOOR, cholesky_logdet, matrix_tree_log_count

LIL_MIN_N = 16


def _open_unit(p: float) -> None:
    if not 0.0 < p < 1.0:
        raise ValueError(f"p must lie in (0, 1), got {p}")


def mu_n(n: int, p: float) -> float:
    """``log(p^(n-1) n^(n-2))``, which is also ``log E X_n`` for G(n, p)."""
    _open_unit(p)
    if n < 2:
        raise ValueError("n must be >= 2")
    return (n - 1) * math.log(p) + (n - 2) * math.log(n)


def sigma(p: float) -> float:
    _open_unit(p)
    return math.sqrt(2 * (1 - p) / p)


def edge_zscore(g: Graph, p: float) -> float:
    _open_unit(p)
    c = pair_count(g.n)
    return (g.m - c * p) / math.sqrt(c * p * (1 - p))


def lil_statistic(log_x: float, n: int, p: float) -> float:
    """``(log X - mu_n) / (sigma sqrt(2 log log n))``; needs ``n >= 16``."""
    if n < LIL_MIN_N:
        raise ValueError(f"n must be >= {LIL_MIN_N}")
    return (log_x - mu_n(n, p)) / (sigma(p) * math.sqrt(2 * math.log(math.log(n))))


def geometric_grid(base: int, n_min: int, n_max: int) -> list[int]:
    """Distinct ``ceil(base^j)`` values inside ``[n_min, n_max]``."""
    if base < 2:
        raise ValueError("grid base must be an integer > 1")
    out = []
    j = 0
    while True:
        v = math.ceil(base ** j)
        if v > n_max:
            break
        if v >= n_min and (not out or v != out[-1]):
            out.append(v)
        j += 1
    return out


@dataclass(frozen=True)
class LilConfig:
    p: float
    grid_base: int = 2
    n_min: int = 16
    n_max: int = 1024

    def __post_init__(self):
        _open_unit(self.p)
        if self.n_min < LIL_MIN_N:
            raise ValueError(f"n_min must be >= {LIL_MIN_N} so that log log n > 0")
        if self.n_max < self.n_min:
            raise ValueError("n_max < n_min")
        if not self.grid:
            raise ValueError("grid is empty")

    @property
    def sigma(self) -> float:
        return sigma(self.p)

    @property
    def grid(self) -> list[int]:
        return geometric_grid(self.grid_base, self.n_min, self.n_max)


@dataclass(frozen=True)
class TrajectoryPoint:
    source_seed: int
    n: int
    edge_count: int
    e_star: float
    log_x: float  # -inf when the restriction is disconnected
    mu: float
    lil_stat: float  # nan when undefined
    residual: float  # nan when undefined

    @property
    def defined(self) -> bool:
        return math.isfinite(self.log_x)

    @property
    def normalized_log(self) -> float:
        return self.residual + self.e_star

    def as_row(self) -> dict:
        return {
            "source_seed": self.source_seed,
            "n": self.n,
            "edge_count": self.edge_count,
            "e_star": self.e_star,
            "log_x": self.log_x if self.defined else None,
            "mu": self.mu,
            "lil_stat": self.lil_stat if self.defined else None,
            "residual": self.residual if self.defined else None,
        }


def trajectory(source: CoupledGraphSource, config: LilConfig) -> list[TrajectoryPoint]:
    if source.p != config.p:
        raise ValueError("source and config disagree on p")
    sig = config.sigma
    full = coupled_restrict(source, config.grid[-1])
    out = []
    for n in config.grid:
        g = full.induced(n)
        log_x = matrix_tree_log_count(g).log
        mu = mu_n(n, config.p)
        e_star = edge_zscore(g, config.p)
        if math.isfinite(log_x):
            lil = lil_statistic(log_x, n, config.p)
            resid = (log_x - mu) / sig - e_star
        else:
            lil = resid = math.nan
        out.append(TrajectoryPoint(source.seed, n, g.m, e_star, log_x, mu, lil, resid))
    return out


def source_seeds(seed: int, sources: int) -> list[int]:
    return [derive_seed(seed, s) for s in range(sources)]


def trajectories(seed: int, sources: int, config: LilConfig, workers: int = 1) -> list[list[TrajectoryPoint]]:
    srcs = [CoupledGraphSource(s, config.p) for s in source_seeds(seed, sources)]
    if workers <= 1:
        return [trajectory(s, config) for s in srcs]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(lambda s: trajectory(s, config), srcs))


@dataclass(frozen=True)
class LilSummary:
    maxima: list  # per trajectory, nan when no defined tail point
    n_tail: int
    quantiles: dict = field(default_factory=dict)


def lil_supremum_report(trajs: list[list[TrajectoryPoint]], n_tail: int = LIL_MIN_N) -> LilSummary:
    """Max of the LIL statistic over ``n >= n_tail`` per trajectory."""
    if not trajs:
        raise ValueError("need at least one trajectory")
    maxima = []
    for tr in trajs:
        vals = [pt.lil_stat for pt in tr if pt.n >= n_tail and pt.defined]
        maxima.append(max(vals) if vals else math.nan)
    arr = np.array([v for v in maxima if not math.isnan(v)])
    q = {}
    if arr.size:
        for name, level in (("min", 0.0), ("q25", 0.25), ("median", 0.5), ("q75", 0.75), ("max", 1.0)):
            q[name] = float(np.quantile(arr, level))
    return LilSummary(maxima, n_tail, q)


def tracking_correlation(trajs, n_from: int = 64) -> float:
    """Pooled correlation of ``(log X - mu)/sigma`` with ``E*`` for ``n >= n_from``."""
    pts = [pt for tr in trajs for pt in tr if pt.n >= n_from and pt.defined]
    if len(pts) < 3:
        return math.nan
    x = np.array([pt.normalized_log for pt in pts])
    y = np.array([pt.e_star for pt in pts])
    return float(np.corrcoef(x, y)[0, 1])


def residual_band(trajs) -> dict:
    """Band of residuals over all defined points, and spread by grid half."""
    pts = [pt for tr in trajs for pt in tr if pt.defined]
    if not pts:
        return {"max_abs": math.nan, "low_half_std": math.nan, "high_half_std": math.nan}
    grid = sorted({pt.n for pt in pts})
    cut = grid[(len(grid) - 1) // 2]
    low = np.array([pt.residual for pt in pts if pt.n <= cut])
    high = np.array([pt.residual for pt in pts if pt.n > cut])
    return {
        "max_abs": float(max(abs(pt.residual) for pt in pts)),
        "min": float(min(pt.residual for pt in pts)),
        "max": float(max(pt.residual for pt in pts)),
        "split_n": cut,
        "low_half_std": float(low.std()) if low.size > 1 else math.nan,
        "high_half_std": float(high.std()) if high.size > 1 else math.nan,
    }


@njit(cache=True, nogil=True)
def _gnp_logx_batch(n, p, pi, pj, seed, start, stop, floor, out, dropped):
    lap = np.empty((n - 1, n - 1))
    state = np.empty(1, dtype=np.uint64)
    for t in range(start, stop):
        state[0] = _derive(seed, np.uint64(t))
        mask = _gnp_mask(n, p, state)
        lap[:, :] = 0.0
        for s in range(mask.shape[0]):
            if mask[s]:
                a = pi[s] - 1
                b = pj[s] - 1
                if a >= 0:
                    lap[a, a] += 1.0
                    lap[a, b] -= 1.0
                    lap[b, a] -= 1.0
                lap[b, b] += 1.0
        out[t - start] = cholesky_logdet(lap, floor)
        dropped[t - start] = not np.isfinite(out[t - start])


def gnp_log_counts(n: int, p: float, trials: int, seed: int, shards: int = 1) -> np.ndarray:
    """``log X`` for ``trials`` draws ``gen_gnp(n, p, derive_seed(seed, t))``."""
    pairs = _pairs(n)
    pi, pj = np.ascontiguousarray(pairs[:, 0]), np.ascontiguousarray(pairs[:, 1])
    s = np.uint64(seed & MASK64)

    def run(bound):
        lo, hi = bound
        out = np.empty(hi - lo)
        dropped = np.empty(hi - lo, dtype=np.bool_)
        _gnp_logx_batch(n, float(p), pi, pj, s, lo, hi, PIVOT_FLOOR, out, dropped)
        return out

    bounds = shard_bounds(trials, shards)
    if len(bounds) == 1:
        return run(bounds[0])
    with ThreadPoolExecutor(max_workers=len(bounds)) as pool:
        return np.concatenate(list(pool.map(run, bounds)))


@dataclass(frozen=True)
class CltSample:
    values: np.ndarray
    dropped: int


def janson_clt_sample(n: int, p: float, trials: int, seed: int, shards: int = 1) -> CltSample:
    """Draws of ``sqrt(p) (log X_n - mu_n + (1-p)/p)``; disconnected draws are dropped."""
    _open_unit(p)
    if n < LIL_MIN_N:
        raise ValueError(f"n must be >= {LIL_MIN_N}")
    if trials < 1:
        raise ValueError("trials must be >= 1")
    logx = gnp_log_counts(n, p, trials, seed, shards)
    ok = np.isfinite(logx)
    vals = math.sqrt(p) * (logx[ok] - mu_n(n, p) + (1 - p) / p)
    return CltSample(vals, int((~ok).sum()))
