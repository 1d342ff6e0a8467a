import csv
import io
import json
import subprocess
import sys

import numpy as np
import pytest

from tukeydp.cli import main, run_cell
from tukeydp.presets import preset_points
from tukeydp.randcore import ParameterError


def run(argv, capsys):
    code = main(argv)
    out, err = capsys.readouterr()
    return code, out, err


def data_rows(text):
    return list(csv.DictReader(io.StringIO("\n".join(text.splitlines()[1:]))))


@pytest.fixture
def line_csv(tmp_path):
    p = tmp_path / "x.csv"
    p.write_text("1\n2\n3\n")
    return p


def test_estimate_boxem_1d(line_csv, capsys):
    code, out, _ = run(["estimate", str(line_csv), "-R", "5", "--seed", "1"], capsys)
    res = json.loads(out)
    assert code == 0 and res["outcome"] == "estimate"
    assert len(res["estimate"]) == 1 and -5 <= res["estimate"][0] <= 5
    assert set(res) >= {"outcome", "estimate", "level", "h_tilde", "params", "engine", "seed"}


def test_estimate_is_seed_reproducible(line_csv, capsys):
    a = run(["estimate", str(line_csv), "--seed", "9"], capsys)[1]
    b = run(["estimate", str(line_csv), "--seed", "9"], capsys)[1]
    assert a == b


def test_estimate_seed_from_environment(line_csv, capsys, monkeypatch):
    monkeypatch.setenv("TUKEY_DP_SEED", "21")
    a = run(["estimate", str(line_csv)], capsys)[1]
    b = run(["estimate", str(line_csv), "--seed", "21"], capsys)[1]
    assert a == b


def test_estimate_missing_file(tmp_path, capsys):
    code, _, err = run(["estimate", str(tmp_path / "none.csv")], capsys)
    assert code == 2 and "cannot read" in err


def test_estimate_malformed_csv_reports_line(tmp_path, capsys):
    p = tmp_path / "bad.csv"
    p.write_text("1,2\n3,4\n5\n")
    code, _, err = run(["estimate", str(p)], capsys)
    assert code == 2 and "line 3" in err


def test_estimate_rem_fail_exit_code(tmp_path, capsys):
    g = np.random.default_rng(0)
    x = np.r_[np.zeros((5, 2)), np.full((5, 2), 100.0)] + 1e-3 * g.normal(size=(10, 2))
    p = tmp_path / "deg.csv"
    np.savetxt(p, x, delimiter=",")
    code, out, _ = run(["estimate", str(p), "--mechanism", "rem", "--seed", "2"], capsys)
    res = json.loads(out)
    assert code == 3 and res["outcome"] == "FAIL" and res["estimate"] == []


def test_estimate_gauss_and_out_file(tmp_path, capsys):
    p = tmp_path / "x.csv"
    np.savetxt(p, np.random.default_rng(1).normal(size=(30, 2)), delimiter=",")
    out = tmp_path / "o.json"
    code, stdout, _ = run(["estimate", str(p), "--mechanism", "gauss", "--seed", "3",
                           "--out", str(out)], capsys)
    assert code == 0 and stdout == ""
    assert len(json.loads(out.read_text())["estimate"]) == 2


def test_quantile_em_needs_univariate(tmp_path, capsys):
    p = tmp_path / "x.csv"
    np.savetxt(p, np.ones((4, 2)), delimiter=",")
    assert run(["estimate", str(p), "--mechanism", "quantile-em"], capsys)[0] == 2


def test_unknown_flag_and_subcommand(capsys):
    assert run_exit(["estimate", "x.csv", "--bogus"], capsys) == 2
    assert run_exit(["frobnicate"], capsys) == 2
    assert run_exit(["experiment", "fig99"], capsys) == 2


def run_exit(argv, capsys):
    with pytest.raises(SystemExit) as exc:
        main(argv)
    capsys.readouterr()
    return exc.value.code


def test_account_exact_and_approx(capsys):
    code, out, _ = run(["account", "--mode", "exact", "--eps", "1", "--delta", "1e-6"], capsys)
    res = json.loads(out)
    assert code == 0
    s = res["split"]
    assert 2 * s["eps_p"] + s["eps_e"] == 1.0
    assert res["total"]["conditioning"] == {"eps": 1.0, "delta": 1e-6}
    res = json.loads(run(["account"], capsys)[1])
    assert res["total"]["conditioning"]["eps"] == pytest.approx(1.0, rel=1e-12)
    assert res["total"]["closed"]["delta"] == pytest.approx(1e-6, rel=1e-12)
    res = json.loads(run(["account", "--eta", "0", "--tau", "0", "--beta", "0", "--zeta", "0"],
                         capsys)[1])
    assert res["total"]["closed"]["eps"] == pytest.approx(2 / 6 + 0.4)


def test_infeasible_preset_combination(capsys):
    code, _, err = run(["experiment", "fig7", "--depth", "exact"], capsys)
    assert code == 2 and "exact depth" in err


def test_fig4_grid():
    pts = preset_points("fig4")
    grid = {(x, c.mechanism) for _, x, c in pts}
    assert grid == {(R, m) for R in (10.0, 1e2, 1e4, 1e6, 1e8, 1e10) for m in ("boxem", "rem", "gauss")}
    assert all(c.n == 1000 and c.d == 2 and c.k == 30 for _, _, c in pts)


def test_fig5_grid():
    pts = preset_points("fig5")
    ks = [x for _, x, c in pts if c.depth == "random"]
    assert ks == [2**i for i in range(9)]
    assert {c.depth for _, _, c in pts} == {"random", "exact", "axis"}
    assert all(c.n == 200 and c.d == 2 and c.trials == 200 for _, _, c in pts)


def test_univariate_grid_crosses_1300():
    ns = sorted({x for _, x, _ in preset_points("univariate")})
    assert ns[0] < 800 and ns[-1] > 2000


def test_preset_overrides():
    pts = preset_points("fig3", trials=2, depth="random", eps=0.5)
    assert all(c.trials == 2 and c.eps == 0.5 for _, _, c in pts)
    assert all(c.depth == "random" for _, _, c in pts if c.mechanism != "gauss")
    with pytest.raises(ParameterError):
        preset_points("fig3", color="red")


def test_experiment_csv_reproducible(tmp_path, capsys):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    for p in (a, b):
        code, _, _ = run(["experiment", "univariate", "--trials", "3", "--seed", "4", "--quiet",
                          "--out", str(p)], capsys)
        assert code == 0
    assert a.read_bytes() == b.read_bytes()
    text = a.read_text(encoding="utf-8")
    assert text.splitlines()[0].startswith("# tukey-dp v") and "preset=univariate" in text
    rows = data_rows(text)
    agg = [r for r in rows if r["tag"] == "AGG"]
    assert {r["mechanism"] for r in agg} == {"quantile-em", "gauss", "empirical"}
    assert b"\r\n" not in a.read_bytes()


def test_bench_cell_and_timeout(capsys):
    code, out, _ = run(["bench", "--n", "50", "--d", "2", "--depth", "random", "--seed", "5"], capsys)
    rows = data_rows(out)
    assert code == 0 and out.startswith("# tukey-dp v")
    assert 0 < float(rows[0]["seconds"]) <= 30
    code, out, _ = run(["bench", "--n", "400", "--d", "2", "--timeout", "0.01", "--seed", "5"],
                       capsys)
    assert data_rows(out)[0]["seconds"] == "-"


def test_bench_time_grows_with_n():
    kw = {"boxem": dict(eps=1.0, R=10.0, depth="random", k=30, engine="exact",
                        samples_per_level=10_000, steps=None)}
    med = []
    for n in (50, 400):
        times = [run_cell("boxem", n, 2, kw, 6, 60)[0] for _ in range(3)]
        med.append(np.median(times))
    assert med[1] >= med[0] / 2


def test_module_entry_point(line_csv):
    r = subprocess.run([sys.executable, "-m", "tukeydp", "estimate", str(line_csv), "--seed", "1"],
                       capture_output=True, text=True)
    assert r.returncode == 0 and json.loads(r.stdout)["outcome"] == "estimate"
