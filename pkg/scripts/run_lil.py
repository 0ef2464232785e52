"""Coupled trajectories of the normalized log tree count of G(n, p), plus the CLT variance check."""
import argparse
import json
from dataclasses import asdict, dataclass

from treeunion.lil import (LilConfig, janson_clt_sample, lil_supremum_report, residual_band,
                           tracking_correlation, trajectories)


@dataclass
class LilRun:
    p: float = 0.5
    grid_base: int = 2
    n_min: int = 16
    n_max: int = 1024
    sources: int = 20
    seed: int = 3
    clt_sizes: tuple = (32, 64, 128)
    clt_trials: int = 2000
    workers: int = 1


def run(cfg: LilRun) -> dict:
    lc = LilConfig(cfg.p, cfg.grid_base, cfg.n_min, cfg.n_max)
    trajs = trajectories(cfg.seed, cfg.sources, lc, workers=cfg.workers)
    summary = lil_supremum_report(trajs)
    clt = {}
    for n in cfg.clt_sizes:
        sample = janson_clt_sample(n, cfg.p, cfg.clt_trials, cfg.seed + n, cfg.workers)
        clt[n] = {"variance": float(sample.values.var(ddof=1)), "mean": float(sample.values.mean()),
                  "dropped": sample.dropped, "target_variance": 2 * (1 - cfg.p)}
    return {
        "config": asdict(cfg),
        "grid": lc.grid,
        "residual_band": residual_band(trajs),
        "correlation_n_ge_64": tracking_correlation(trajs, 64),
        "tail_maxima_quantiles": summary.quantiles,
        "clt": clt,
    }


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--p", type=float, default=0.5)
    ap.add_argument("--grid-base", type=int, default=2)
    ap.add_argument("--n-min", type=int, default=16)
    ap.add_argument("--n-max", type=int, default=1024)
    ap.add_argument("--sources", type=int, default=20)
    ap.add_argument("--seed", type=int, default=3)
    ap.add_argument("--clt-sizes", type=int, nargs="+", default=[32, 64, 128])
    ap.add_argument("--clt-trials", type=int, default=2000)
    ap.add_argument("--workers", type=int, default=1)
    a = ap.parse_args()
    cfg = LilRun(a.p, a.grid_base, a.n_min, a.n_max, a.sources, a.seed, tuple(a.clt_sizes),
                 a.clt_trials, a.workers)
    print(json.dumps(run(cfg), indent=2))


if __name__ == "__main__":
    main()
