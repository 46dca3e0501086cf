import json
import math
import os
import subprocess

import pytest

import heavytail as ht


def test_tail_model_and_normalizer():
    pareto = ht.TailModel.from_name("pareto2")
    assert pareto.H(0.0) == pytest.approx(2 * math.log(math.exp(0.5) + 1))
    assert ht.solve_Dn([1.0] * 100, ht.TailModel.from_name("constant")).D == 10.0
    assert ht.solve_Dn([1.0] * 100, pareto).D == pytest.approx(25.4416491690181, abs=1e-6)
    with pytest.raises(ValueError):
        ht.TailModel.from_name("cauchy")


def test_coefficients_and_windows():
    assert ht.fractional_coeffs(0.25, 3) == [1.0, 0.25, 0.15625]
    w = ht.window_sums(ht.CoefficientSpec.explicit([1.0, 1.0]), 2, ht.TailModel.from_name("pareto2"))
    assert w.origin == -1
    assert w.entries == [1.0, 2.0, 1.0]
    with pytest.raises(ValueError):
        ht.CoefficientSpec.regvar(1.2)


def test_weighted_sum_and_linear_process():
    xi = ht.InnovationStream(ht.TailModel.from_name("pareto2"), seed=3).draw(50)
    s = ht.weighted_sum([1.0] * 50, xi, D=2.0)
    assert s.S == pytest.approx(sum(xi))
    assert s.T_self == pytest.approx(sum(xi) / math.sqrt(sum(x * x for x in xi)))
    plan = ht.LinearProcessPlan(ht.CoefficientSpec.explicit([1.0, 1.0]), 2,
                                ht.TailModel.from_name("pareto2"))
    z = [0.7, -1.3, 2.9]
    assert plan.path(z) == pytest.approx([z[1] + z[2], z[0] + z[1]])
    assert plan.statistics(z).S == pytest.approx(z[0] + 2 * z[1] + z[2])


def test_goodness_of_fit():
    assert ht.ks_critical_95(400) == pytest.approx(1.36 / 20)
    assert ht.ks_normal([0.0]) == pytest.approx(0.5)
    with pytest.raises(ValueError):
        ht.ks_normal([])


def test_experiment_runs_and_is_deterministic(tmp_path):
    cfg = {"model": "pareto2", "weights": {"type": "equal"}, "n": [200], "replications": 50,
           "seed": 4, "normalizer": "self",
           "output": {"dir": str(tmp_path), "prefix": "smoke"}}
    a = ht.run_experiment(cfg, threads=1)
    b = ht.run_experiment(cfg, threads=2)
    assert a == b
    assert a["results"][0]["n"] == 200
    paths = ht.write_outputs(cfg)
    assert sorted(os.path.basename(p) for p in paths) == ["smoke_n200.csv", "smoke_report.json"]
    with pytest.raises(ht.ConfigError):
        ht.run_experiment({"n": 10, "unknown": 1})


def _cli():
    exe = os.environ.get("HEAVYTAIL_CLI")
    if not exe:
        pytest.skip("HEAVYTAIL_CLI not set")
    return exe


def test_cli_exit_codes(tmp_path):
    exe = _cli()
    ok = subprocess.run([exe, "coeffs", "fractional", "d=0.25", "--count", "3"],
                        capture_output=True, text=True)
    assert ok.returncode == 0
    assert ok.stdout.split() == ["1", "0.25", "0.15625"]
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({"n": 10, "replications": 0}))
    assert subprocess.run([exe, "run", str(bad)], capture_output=True).returncode == 1
    assert subprocess.run([exe, "run", str(tmp_path / "missing.json")],
                          capture_output=True).returncode == 1
    assert subprocess.run([exe, "frobnicate"], capture_output=True).returncode == 1
