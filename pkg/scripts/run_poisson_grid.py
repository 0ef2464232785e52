"""TV distance between the k-tree overlap law on K_n and Po(k(k-1)) over a grid of n."""
import argparse
import csv
import sys
from dataclasses import dataclass

from treeunion.graph import make_complete
from treeunion.poisson_limit import PoissonParams, mn_distribution, tv_distance, tv_noise_floor


@dataclass
class GridConfig:
    k: int = 2
    sizes: tuple = (50, 100, 200, 400)
    trials: int = 100_000
    seed: int = 500
    shards: int = 1


def run(cfg: GridConfig):
    params = PoissonParams.for_trees(cfg.k)
    for n in cfg.sizes:
        emp = mn_distribution(make_complete(n), cfg.k, cfg.trials, cfg.seed + n, cfg.shards)
        yield {"n": n, "k": cfg.k, "trials": cfg.trials, "tv": tv_distance(emp, params),
               "noise_floor": tv_noise_floor(emp), "mean": emp.mean(), "mean_se": emp.mean_se()}


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--k", type=int, default=2)
    ap.add_argument("--sizes", type=int, nargs="+", default=[50, 100, 200, 400])
    ap.add_argument("--trials", type=int, default=100_000)
    ap.add_argument("--seed", type=int, default=500)
    ap.add_argument("--shards", type=int, default=1)
    a = ap.parse_args()
    cfg = GridConfig(a.k, tuple(a.sizes), a.trials, a.seed, a.shards)
    writer = None
    for row in run(cfg):
        if writer is None:
            writer = csv.DictWriter(sys.stdout, fieldnames=list(row), lineterminator="\n")
            writer.writeheader()
        writer.writerow({k: f"{v:.6g}" if isinstance(v, float) else v for k, v in row.items()})
        sys.stdout.flush()


if __name__ == "__main__":
    main()
