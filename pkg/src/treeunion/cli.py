"""Command-line front end: seeded experiment runs with JSON or CSV reports.

Vertices are numbered ``0..n-1``. Every randomized subcommand needs an
explicit ``--seed``; identical arguments give byte-identical reports unless
``--timing`` is requested.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
import time
from dataclasses import asdict, dataclass, field
from typing import Optional

from . import __version__
from ._rng import derive_seed
from .electrical import (NoPathError, edge_inclusion_probability, effective_resistance,
                         two_path_inclusion_bound)
from .graph import (Graph, gen_gnm, gen_gnp, make_complete, make_cycle, make_path,
                    norm_edge, pair_count)
from .lil import (LilConfig, lil_supremum_report, residual_band, source_seeds,
                  tracking_correlation, trajectories)
from .poisson_limit import (AlphaRegime, EmpiricalDist, OutOfRegimeError, PoissonParams,
                            exact_mn_law, l1_distance, mn_distribution, report_rows,
                            shard_bounds, tv_distance, tv_noise_floor)
from .tail_moments import (DEFAULT_DELTA, GnmParams, MomentReport, default_tilt,
                           expected_count_gnm, gnm_log_counts, kth_moment_via_ma,
                           log_moment_from_logs, markov_tail_bound, moment_ratio_bound_check,
                           tilted_mn_samples)
from .tree_count import cayley_log_count, grimmett_log_bound, matrix_tree_log_count
from .tree_sample import sample_k_trees

SIG_DIGITS = 12
EXACT_LAW_MAX_TUPLES = 200_000


class UsageError(Exception):
    pass


@dataclass
class RunConfig:
    command: str
    n: Optional[int] = None
    k: Optional[int] = None
    p: Optional[float] = None
    m: Optional[int] = None
    trials: Optional[int] = None
    shards: int = 1
    seed: Optional[int] = None
    alpha: Optional[float] = None
    grid_base: Optional[int] = None
    n_min: Optional[int] = None
    n_max: Optional[int] = None
    sources: Optional[int] = None
    n_tail: Optional[int] = None
    slack_constant: Optional[float] = None
    delta: Optional[float] = None
    complete: Optional[int] = None
    cycle: Optional[int] = None
    path: Optional[int] = None
    gnp: Optional[list] = None
    gnm: Optional[list] = None
    file: Optional[str] = None
    edge: Optional[list] = None
    asserts: dict = field(default_factory=dict)
    format: str = "json"
    output: Optional[str] = None
    timing: bool = False


def fmt_float(x):
    if isinstance(x, bool) or not isinstance(x, float):
        return x
    if math.isnan(x) or math.isinf(x):
        return None
    return float(f"{x:.{SIG_DIGITS}g}")


def canon(obj):
    """Round floats to fixed significant digits, recursively."""
    if isinstance(obj, dict):
        return {str(k): canon(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [canon(v) for v in obj]
    if hasattr(obj, "item") and not isinstance(obj, (str, bytes)):
        obj = obj.item()  # numpy scalar
    return fmt_float(obj)


def render(report: dict, fmt: str) -> str:
    report = canon(report)
    if fmt == "json":
        return json.dumps(report, indent=2, sort_keys=False) + "\n"
    rows = report.get("rows", [])
    buf = io.StringIO()
    if rows:
        writer = csv.DictWriter(buf, fieldnames=list(rows[0]), lineterminator="\n")
        writer.writeheader()
        for r in rows:
            writer.writerow({k: ("" if v is None else v) for k, v in r.items()})
    return buf.getvalue()


def _need(cfg: RunConfig, *names):
    missing = [nm for nm in names if getattr(cfg, nm) is None]
    if missing:
        raise UsageError(f"{cfg.command}: missing --{', --'.join(m.replace('_', '-') for m in missing)}")


def _positive(cfg: RunConfig, *names):
    for nm in names:
        v = getattr(cfg, nm)
        if v is not None and v < 1:
            raise UsageError(f"--{nm.replace('_', '-')} must be >= 1")


def load_graph(cfg: RunConfig) -> tuple[Graph, str]:
    chosen = [nm for nm in ("complete", "cycle", "path", "gnp", "gnm", "file") if getattr(cfg, nm) is not None]
    if len(chosen) != 1:
        raise UsageError("specify exactly one of --complete, --cycle, --path, --gnp, --gnm, --file")
    kind = chosen[0]
    try:
        if kind == "complete":
            return make_complete(cfg.complete), kind
        if kind == "cycle":
            return make_cycle(cfg.cycle), kind
        if kind == "path":
            return make_path(cfg.path), kind
        if kind == "file":
            with open(cfg.file) as fh:
                return Graph.loads(fh.read()), kind
        _need(cfg, "seed")
        if kind == "gnp":
            return gen_gnp(cfg.gnp[0], cfg.gnp[1], cfg.seed), kind
        return gen_gnm(cfg.gnm[0], cfg.gnm[1], cfg.seed), kind
    except ValueError as exc:
        raise UsageError(str(exc)) from exc


def shard_info(cfg: RunConfig, trials: int) -> list[dict]:
    return [{"index": i, "start": lo, "stop": hi, "first_stream_seed": derive_seed(cfg.seed, lo)}
            for i, (lo, hi) in enumerate(shard_bounds(trials, cfg.shards))]


def check(name: str, passed: bool, value, limit) -> dict:
    return {"name": name, "passed": bool(passed), "value": value, "limit": limit}


def cmd_tv_poisson(cfg: RunConfig) -> dict:
    _need(cfg, "n", "k", "trials", "seed")
    _positive(cfg, "n", "k", "trials", "shards")
    alpha = 0.09 if cfg.alpha is None else cfg.alpha
    c = 1.0 if cfg.slack_constant is None else cfg.slack_constant
    try:
        regime = AlphaRegime(alpha, cfg.n, cfg.k, c)
    except OutOfRegimeError as exc:
        raise UsageError(str(exc)) from exc
    emp = mn_distribution(make_complete(cfg.n), cfg.k, cfg.trials, cfg.seed, cfg.shards)
    params = PoissonParams.for_trees(cfg.k)
    tv = tv_distance(emp, params)
    results = {
        "lambda": params.lam,
        "tv": tv,
        "l1": l1_distance(emp, params),
        "tv_noise_floor": tv_noise_floor(emp),
        "mean": emp.mean(),
        "mean_se": emp.mean_se(),
        "a_threshold": regime.a_threshold,
        "k_within_regime": regime.k_within,
        "claim2_slack": regime.default_slack(),
    }
    checks = []
    if "tv_max" in cfg.asserts:
        checks.append(check("tv_max", tv < cfg.asserts["tv_max"], tv, cfg.asserts["tv_max"]))
    return {"results": results, "rows": report_rows(emp, cfg.k, regime),
            "shards": shard_info(cfg, cfg.trials), "assertions": checks}


def cmd_count(cfg: RunConfig) -> dict:
    g, kind = load_graph(cfg)
    lc = matrix_tree_log_count(g)
    results = {
        "n": g.n,
        "m": g.m,
        "connected": g.is_connected(),
        "zero": lc.is_zero,
        "log_count": None if lc.is_zero else lc.log,
        "cayley_log_count": cayley_log_count(g.n).log if kind == "complete" else None,
        "grimmett_log_bound": None,
    }
    if g.n >= 2:
        gb = grimmett_log_bound(g.n, g.m)
        results["grimmett_log_bound"] = None if gb.is_zero else gb.log
    return {"results": results, "rows": [results], "assertions": []}


def cmd_resistance(cfg: RunConfig) -> dict:
    g, _ = load_graph(cfg)
    _need(cfg, "edge")
    a, b = int(cfg.edge[0]), int(cfg.edge[1])
    try:
        r = effective_resistance(g, a, b)
    except NoPathError as exc:
        return {"results": {"error": str(exc)}, "rows": [], "assertions": [],
                "exit_code": 1}
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    is_edge = g.has_edge(a, b)
    results = {
        "edge": list(norm_edge(a, b)),
        "is_edge": is_edge,
        "effective_resistance": r,
        "inclusion_probability": edge_inclusion_probability(g, (a, b)) if is_edge and g.is_connected() else None,
        "two_path_bound": two_path_inclusion_bound(g, (a, b)) if is_edge else None,
    }
    return {"results": results, "rows": [results], "assertions": []}


def _ma_law(params: GnmParams, k: int, trials: int, seed: int, shards: int):
    n = params.n
    n_trees = n ** (n - 2) if n >= 2 else 1
    if k == 1:
        return EmpiricalDist({0: 1}, 1), "exact", 1.0
    if n_trees ** k <= EXACT_LAW_MAX_TUPLES:
        return exact_mn_law(make_complete(n), k), "exact", 1.0
    tilt = default_tilt(params, k)
    return tilted_mn_samples(n, k, trials, derive_seed(seed, 1), tilt, shards), "tilted-monte-carlo", tilt


def cmd_moments(cfg: RunConfig) -> dict:
    _need(cfg, "n", "m", "k", "trials", "seed")
    _positive(cfg, "n", "k", "trials", "shards")
    delta = DEFAULT_DELTA if cfg.delta is None else cfg.delta
    try:
        params = GnmParams(cfg.n, cfg.m)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    if not params.in_lemma_regime(delta):
        raise UsageError(f"m={cfg.m} outside the regime [{delta} n^2, {1 - delta} n^2]")
    law, law_kind, tilt = _ma_law(params, cfg.k, cfg.trials, cfg.seed, cfg.shards)
    via, se_via = kth_moment_via_ma(params, cfg.k, law, with_se=True)
    if law_kind == "exact":
        se_via = 0.0
    logx = gnm_log_counts(params, cfg.trials, derive_seed(cfg.seed, 0), cfg.shards)
    direct, se_dir = log_moment_from_logs(logx, cfg.k)
    rep = MomentReport(cfg.n, cfg.m, cfg.k, via, direct, se_via, se_dir)
    c_hat = moment_ratio_bound_check(params, cfg.k, rep, delta)
    mean = expected_count_gnm(params)

    # Markov tail at k_tail = ceil(log n), K = 2 C_hat(k_tail)
    k_tail = max(1, math.ceil(math.log(cfg.n)))
    tail_est, _ = log_moment_from_logs(logx, k_tail)
    c_tail = math.exp((tail_est.log - k_tail * mean.log) / k_tail)
    big_k = 2 * c_tail
    bound = markov_tail_bound(c_tail, big_k, k_tail)
    freq = float((logx >= mean.log + math.log(big_k)).mean())
    results = {
        "log_mean_exact": mean.log,
        "via_ma": via.log,
        "via_ma_se": se_via,
        "via_ma_law": law_kind,
        "via_ma_tilt": tilt,
        "direct": direct.log,
        "direct_se": se_dir,
        "z": rep.z,
        "c_hat": c_hat,
        "markov": {"k": k_tail, "c_hat": c_tail, "K": big_k, "bound": bound,
                   "empirical_freq": freq,
                   "se": math.sqrt(max(freq * (1 - freq), 0.0) / len(logx))},
    }
    row = {"n": cfg.n, "m": cfg.m, "k": cfg.k, "via_ma": via.log, "direct": direct.log,
           "via_ma_se": se_via, "direct_se": se_dir, "c_hat": c_hat}
    checks = []
    if "agreement" in cfg.asserts:
        checks.append(check("agreement", rep.z <= cfg.asserts["agreement"], rep.z, cfg.asserts["agreement"]))
    return {"results": results, "rows": [row], "shards": shard_info(cfg, cfg.trials), "assertions": checks}


def cmd_lil(cfg: RunConfig) -> dict:
    _need(cfg, "p", "seed")
    try:
        lc = LilConfig(cfg.p, cfg.grid_base or 2, cfg.n_min or 16, cfg.n_max or 1024)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    sources = cfg.sources or 1
    trajs = trajectories(cfg.seed, sources, lc, workers=cfg.shards)
    summary = lil_supremum_report(trajs, cfg.n_tail or lc.n_min)
    band = residual_band(trajs)
    corr = tracking_correlation(trajs, 64)
    results = {
        "grid": lc.grid,
        "sigma": lc.sigma,
        "source_seeds": source_seeds(cfg.seed, sources),
        "correlation_n_ge_64": corr,
        "residual_band": band,
        "tail_maxima": summary.maxima,
        "tail_maxima_quantiles": summary.quantiles,
        "n_tail": summary.n_tail,
    }
    checks = []
    if "band" in cfg.asserts:
        checks.append(check("band", band["max_abs"] <= cfg.asserts["band"], band["max_abs"], cfg.asserts["band"]))
    if "correlation" in cfg.asserts:
        checks.append(check("correlation", corr > cfg.asserts["correlation"], corr, cfg.asserts["correlation"]))
    rows = [pt.as_row() for tr in trajs for pt in tr]
    return {"results": results, "rows": rows, "assertions": checks}


def cmd_sample(cfg: RunConfig) -> dict:
    g, _ = load_graph(cfg)
    _need(cfg, "seed")
    k = cfg.k or 1
    if not g.is_connected():
        return {"results": {"error": "graph is disconnected"}, "rows": [], "assertions": [], "exit_code": 1}
    trees = sample_k_trees(g, k, cfg.seed)
    rows = [{"tree": i, "a": a, "b": b} for i, t in enumerate(trees) for a, b in sorted(t.edges)]
    return {"results": {"n": g.n, "k": k}, "rows": rows, "assertions": []}


def cmd_selftest(cfg: RunConfig) -> dict:
    from .selftest import run_selftest
    checks = run_selftest(seed=cfg.seed if cfg.seed is not None else 0)
    return {"results": {}, "rows": checks, "assertions": checks}


COMMANDS = {
    "tv-poisson": cmd_tv_poisson,
    "count": cmd_count,
    "resistance": cmd_resistance,
    "moments": cmd_moments,
    "lil": cmd_lil,
    "sample": cmd_sample,
    "selftest": cmd_selftest,
}


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="treeunion", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True)

    def common(sp):
        sp.add_argument("--seed", type=int)
        sp.add_argument("--shards", type=int, default=1)
        sp.add_argument("--format", choices=("json", "csv"), default="json")
        sp.add_argument("--output", "-o")
        sp.add_argument("--timing", action="store_true", help="embed wall-clock seconds (breaks byte-determinism)")

    def graph_source(sp):
        sp.add_argument("--complete", type=int, metavar="N")
        sp.add_argument("--cycle", type=int, metavar="N")
        sp.add_argument("--path", type=int, metavar="N")
        sp.add_argument("--gnp", nargs=2, metavar=("N", "P"))
        sp.add_argument("--gnm", nargs=2, metavar=("N", "M"))
        sp.add_argument("--file", metavar="PATH", help="graph dump: 'n m' header then 'a b' lines")

    sp = sub.add_parser("tv-poisson", help="law of the k-tree overlap on K_n versus Po(k(k-1))")
    common(sp)
    sp.add_argument("--n", type=int)
    sp.add_argument("--k", type=int)
    sp.add_argument("--trials", type=int)
    sp.add_argument("--alpha", type=float)
    sp.add_argument("--slack-constant", type=float)
    sp.add_argument("--assert-tv-max", type=float)

    sp = sub.add_parser("count", help="spanning-tree log count with Cayley and Grimmett references")
    common(sp)
    graph_source(sp)

    sp = sub.add_parser("resistance", help="effective resistance and tree-inclusion probability")
    common(sp)
    graph_source(sp)
    sp.add_argument("--edge", nargs=2, type=int, metavar=("A", "B"))

    sp = sub.add_parser("moments", help="k-th moment of the tree count of G(n, m), two ways")
    common(sp)
    sp.add_argument("--n", type=int)
    sp.add_argument("--m", type=int)
    sp.add_argument("--k", type=int)
    sp.add_argument("--trials", type=int)
    sp.add_argument("--delta", type=float)
    sp.add_argument("--assert-agreement", type=float, metavar="Z")

    sp = sub.add_parser("lil", help="coupled trajectories of the normalized log tree count")
    common(sp)
    sp.add_argument("--p", type=float)
    sp.add_argument("--grid-base", type=int)
    sp.add_argument("--n-min", type=int)
    sp.add_argument("--n-max", type=int)
    sp.add_argument("--sources", type=int)
    sp.add_argument("--n-tail", type=int)
    sp.add_argument("--assert-band", type=float)
    sp.add_argument("--assert-correlation", type=float)

    sp = sub.add_parser("sample", help="dump k uniform spanning trees")
    common(sp)
    graph_source(sp)
    sp.add_argument("--k", type=int)

    sp = sub.add_parser("selftest", help="run the small oracle suites")
    common(sp)
    return ap


def config_from_args(ns: argparse.Namespace) -> RunConfig:
    d = vars(ns).copy()
    asserts = {}
    for key in list(d):
        if key.startswith("assert_"):
            v = d.pop(key)
            if v is not None:
                asserts[key[len("assert_"):]] = v
    if d.get("gnp") is not None:
        d["gnp"] = [int(d["gnp"][0]), float(d["gnp"][1])]
    if d.get("gnm") is not None:
        d["gnm"] = [int(d["gnm"][0]), int(d["gnm"][1])]
    fields = RunConfig.__dataclass_fields__
    cfg = RunConfig(**{k: v for k, v in d.items() if k in fields})
    cfg.asserts = asserts
    return cfg


def run(cfg: RunConfig) -> tuple[str, int]:
    t0 = time.perf_counter()
    out = COMMANDS[cfg.command](cfg)
    report = {
        "tool": "treeunion",
        "version": __version__,
        "command": cfg.command,
        "config": asdict(cfg),
    }
    report.update({k: v for k, v in out.items() if k != "exit_code"})
    if cfg.timing:
        report["wall_clock_seconds"] = time.perf_counter() - t0
    code = out.get("exit_code", 0)
    if not all(c["passed"] for c in out.get("assertions", [])):
        code = 1
    return render(report, cfg.format), code


def main(argv=None) -> int:
    parser = build_parser()
    ns = parser.parse_args(argv)
    cfg = config_from_args(ns)
    try:
        text, code = run(cfg)
    except UsageError as exc:
        parser.error(str(exc))  # exits with status 2
    if cfg.output:
        with open(cfg.output, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return code


if __name__ == "__main__":
    sys.exit(main())
