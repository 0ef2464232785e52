import json
import math
import subprocess
import sys

import pytest

from treeunion.cli import main
from treeunion.graph import make_cycle

# one small, fast configuration per subcommand
CONFIGS = {
    "tv-poisson": ["tv-poisson", "--n", "20", "--k", "2", "--trials", "3000", "--seed", "7"],
    "count": ["count", "--gnp", "12", "0.4", "--seed", "3"],
    "resistance": ["resistance", "--gnm", "8", "20", "--seed", "5", "--edge", "0", "1"],
    "moments": ["moments", "--n", "12", "--m", "33", "--k", "2", "--trials", "2000", "--seed", "9"],
    "lil": ["lil", "--p", "0.5", "--n-min", "16", "--n-max", "64", "--sources", "3", "--seed", "3"],
    "sample": ["sample", "--complete", "6", "--k", "3", "--seed", "1"],
    "selftest": ["selftest", "--seed", "0"],
}


def run_cli(argv, tmp_path, name="out"):
    out = tmp_path / f"{name}.txt"
    code = main(argv + ["--output", str(out)])
    return code, out.read_bytes()


def report(argv, tmp_path):
    code, data = run_cli(argv, tmp_path)
    return code, json.loads(data)


@pytest.mark.parametrize("name", sorted(CONFIGS))
def test_byte_determinism(name, tmp_path):
    c1, a = run_cli(CONFIGS[name], tmp_path)
    c2, b = run_cli(CONFIGS[name], tmp_path)
    assert c1 == c2 == 0
    assert a == b


def test_count_examples(tmp_path):
    _, rep = report(["count", "--complete", "4"], tmp_path)
    assert rep["results"]["log_count"] == pytest.approx(math.log(16))
    _, rep = report(["count", "--gnm", "4", "5", "--seed", "1"], tmp_path)
    assert rep["results"]["log_count"] == pytest.approx(math.log(8))
    _, rep = report(["count", "--gnp", "10", "0.0", "--seed", "1"], tmp_path)
    assert rep["results"]["log_count"] is None and rep["results"]["zero"] is True


def test_report_header(tmp_path):
    _, rep = report(CONFIGS["moments"], tmp_path)
    assert rep["tool"] == "treeunion" and "version" in rep
    assert rep["config"]["n"] == 12 and rep["config"]["seed"] == 9
    assert rep["shards"][0]["start"] == 0
    assert "wall_clock_seconds" not in rep
    _, rep = report(CONFIGS["count"] + ["--timing"], tmp_path)
    assert rep["wall_clock_seconds"] >= 0


def test_resistance_examples(tmp_path):
    _, rep = report(["resistance", "--complete", "4", "--edge", "0", "1"], tmp_path)
    r = rep["results"]
    assert (r["effective_resistance"], r["inclusion_probability"], r["two_path_bound"]) == pytest.approx((0.5, 0.5, 0.5))
    _, rep = report(["resistance", "--cycle", "4", "--edge", "0", "1"], tmp_path)
    r = rep["results"]
    assert (r["effective_resistance"], r["inclusion_probability"], r["two_path_bound"]) == pytest.approx((0.75, 0.75, 1.0))
    _, rep = report(["resistance", "--path", "5", "--edge", "1", "2"], tmp_path)
    assert rep["results"]["inclusion_probability"] == pytest.approx(1.0)


def test_resistance_from_dump_file(tmp_path):
    f = tmp_path / "c5.txt"
    f.write_text(make_cycle(5).dumps())
    _, rep = report(["resistance", "--file", str(f), "--edge", "0", "1"], tmp_path)
    assert rep["results"]["inclusion_probability"] == pytest.approx(0.8)


def test_resistance_disconnected_fails(tmp_path):
    f = tmp_path / "split.txt"
    f.write_text("4 2\n0 1\n2 3\n")
    code, rep = report(["resistance", "--file", str(f), "--edge", "0", "2"], tmp_path)
    assert code == 1 and "error" in rep["results"]


def test_tv_poisson_examples(tmp_path):
    _, rep = report(["tv-poisson", "--n", "3", "--k", "2", "--trials", "100000", "--seed", "7"], tmp_path)
    pmf1 = next(r["pmf"] for r in rep["rows"] if r["a"] == 1)
    assert abs(pmf1 - 2 / 3) <= 4 * math.sqrt(2 / 9 / 1e5)
    _, rep = report(["tv-poisson", "--n", "9", "--k", "1", "--trials", "500", "--seed", "7"], tmp_path)
    assert rep["results"]["tv"] == 0.0


def test_moments_examples(tmp_path):
    _, rep = report(["moments", "--n", "3", "--m", "2", "--k", "2", "--trials", "1000", "--seed", "1"], tmp_path)
    assert rep["results"]["via_ma"] == pytest.approx(0.0, abs=1e-12)
    assert rep["results"]["direct"] == pytest.approx(0.0, abs=1e-12)
    _, rep = report(["moments", "--n", "12", "--m", "33", "--k", "1", "--trials", "200", "--seed", "1"], tmp_path)
    assert rep["results"]["via_ma"] == pytest.approx(rep["results"]["log_mean_exact"], abs=1e-9)


def test_lil_examples(tmp_path):
    _, rep = report(["lil", "--p", "0.5", "--n-min", "32", "--n-max", "32", "--seed", "2"], tmp_path)
    assert len(rep["rows"]) == 1
    assert rep["results"]["tail_maxima"] == [rep["rows"][0]["lil_stat"]]


def test_csv_projection(tmp_path):
    _, data = run_cli(["resistance", "--cycle", "4", "--edge", "0", "1", "--format", "csv"], tmp_path)
    lines = data.decode().splitlines()
    assert len(lines) >= 2 and "," in lines[0]


@pytest.mark.parametrize("argv", [
    ["tv-poisson", "--n", "10", "--k", "2", "--trials", "100"],
    ["tv-poisson", "--n", "10", "--k", "0", "--trials", "100", "--seed", "1"],
    ["count"],
    ["count", "--complete", "4", "--cycle", "4"],
    ["count", "--gnp", "10", "0.5"],
    ["moments", "--n", "30", "--m", "60", "--k", "2", "--trials", "10", "--seed", "1"],
    ["lil", "--p", "1.0", "--seed", "1"],
    ["lil", "--p", "0.5", "--n-min", "8", "--seed", "1"],
    ["nonsense"],
])
def test_usage_errors_exit_2(argv, capsys):
    with pytest.raises(SystemExit) as exc:
        main(argv)
    assert exc.value.code == 2


def test_assertion_exit_codes(tmp_path):
    base = ["tv-poisson", "--n", "30", "--k", "2", "--trials", "5000", "--seed", "4"]
    code, rep = report(base + ["--assert-tv-max", "0.5"], tmp_path)
    assert code == 0 and rep["assertions"][0]["passed"]
    code, rep = report(base + ["--assert-tv-max", "1e-9"], tmp_path)
    assert code == 1 and not rep["assertions"][0]["passed"]
    lil = CONFIGS["lil"]
    assert report(lil + ["--assert-band", "5", "--assert-correlation", "0.5"], tmp_path)[0] == 0
    assert report(lil + ["--assert-band", "1e-6"], tmp_path)[0] == 1


@pytest.mark.parametrize("name", ["tv-poisson", "moments", "lil"])
def test_shards_do_not_change_statistics(name, tmp_path):
    _, one = report(CONFIGS[name] + ["--shards", "1"], tmp_path)
    _, eight = report(CONFIGS[name] + ["--shards", "8"], tmp_path)
    assert one["results"] == eight["results"]
    assert one["rows"] == eight["rows"]


def test_selftest_passes(tmp_path):
    code, rep = report(["selftest", "--seed", "0"], tmp_path)
    assert code == 0 and all(c["passed"] for c in rep["assertions"])


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "treeunion", "count", "--complete", "5"],
                          capture_output=True, text=True, check=True)
    assert json.loads(proc.stdout)["results"]["log_count"] == pytest.approx(3 * math.log(5))
