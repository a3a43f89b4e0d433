import json

import pytest

from gpgfill.bench.cli import main
from gpgfill.bench.experiments import (
    ExperimentConfig,
    aggregate,
    aggregate_csv,
    read_rows,
    run_experiment,
)
from gpgfill.model import ConfigurationError


def _small(**kw):
    cfg = {
        "experiment": "custom",
        "sweep_param": "T",
        "sweep": [20, 100, 400],
        "policies": ["order-size-f-priority", "pure-greedy", "myopic"],
        "replications": 3,
        "base": {"K": 2, "regime": "time-varying"},
    }
    cfg.update(kw)
    return ExperimentConfig.from_dict(cfg)


def test_runs_are_byte_identical_without_timing(tmp_path):
    a = run_experiment(_small(out_dir=str(tmp_path / "a"), timing=False))
    b = run_experiment(_small(out_dir=str(tmp_path / "b"), timing=False))
    assert a.rows_path.read_bytes() == b.rows_path.read_bytes()
    assert a.aggregate_path.read_bytes() == b.aggregate_path.read_bytes()
    assert b"wall_time" not in a.rows_path.read_bytes()
    assert a.rows_path.read_bytes().count(b"\r\n") == 1 + 3 * 3 * 3


def test_aggregate_recomputes_from_row_file(tmp_path):
    res = run_experiment(_small(out_dir=str(tmp_path)))
    again = aggregate_csv(aggregate(read_rows(res.rows_path)))
    assert again == res.aggregate_path.read_bytes().decode()


def test_workers_do_not_change_results(tmp_path):
    one = run_experiment(_small(out_dir=str(tmp_path / "1"), timing=False, sweep=[20, 40], replications=2))
    two = run_experiment(_small(out_dir=str(tmp_path / "2"), timing=False, sweep=[20, 40], replications=2,
                                workers=2))
    assert one.rows_path.read_bytes() == two.rows_path.read_bytes()


def test_failing_policy_keeps_sweep_going():
    # the LP baseline refuses time-varying costs; the other policy still runs
    res = run_experiment(_small(policies=["ipfc", "pure-greedy"], sweep=[20, 40], replications=2))
    statuses = {(r["policy"], r["status"].split(":")[0]) for r in res.rows}
    assert statuses == {("ipfc", "error"), ("pure-greedy", "ok")}
    assert res.failures == 4
    by_policy = {a["policy"]: a for a in res.aggregate}
    assert by_policy["ipfc"]["count"] == 0 and by_policy["ipfc"]["mean_cost"] == ""


def test_horizon_sweep_cost_grows():
    res = run_experiment(_small())
    for policy in ("order-size-f-priority", "pure-greedy", "myopic"):
        means = [a["mean_cost"] for a in res.aggregate if a["policy"] == policy]
        assert means == sorted(means) and len(means) == 3


def test_preset_resolution():
    cfg = ExperimentConfig(experiment="fdc-sweep-invariant").resolved()
    assert cfg.sweep_param == "K" and cfg.sweep == [3, 5, 7]
    assert cfg.base["T"] == 500
    full = ExperimentConfig(experiment="horizon-sweep-varying", full_scale=True).resolved()
    assert full.sweep[-1] == 2000 and full.base["K"] == 5


@pytest.mark.parametrize(
    "change",
    [
        {"sweep": [40, 20]},
        {"sweep": [20, 20]},
        {"replications": 0},
        {"sweep_param": "colour"},
        {"policies": ["cheapest"]},
        {"base": {"widgets": 3}},
        {"experiment": "unknown"},
    ],
)
def test_bad_configs(change):
    with pytest.raises(ConfigurationError):
        _small(**change).resolved()


def test_custom_needs_sweep():
    with pytest.raises(ConfigurationError):
        ExperimentConfig(experiment="custom").resolved()


def test_stress_rows():
    res = run_experiment(ExperimentConfig(experiment="stress", sweep=[50.0, 100.0], replications=1))
    costs = {(r["sweep_value"], r["policy"]): r["cost"] for r in res.rows}
    # the gate fires only when the opening order is large enough
    assert costs[(100.0, "order-size-f-priority")] == costs[(100.0, "myopic")]
    assert all(r["status"] == "ok" for r in res.rows)


def test_bounds_grid_rows():
    res = run_experiment(ExperimentConfig(experiment="bounds-grid", sweep=[500], replications=1))
    worst = {r["policy"]: r["cost"] for r in res.rows}
    assert worst["multi-varying"] <= 6.473
    assert worst["single-varying"] <= 19.828


# ------------------------------------------------------------------ CLI

def test_cli_run_and_exit_codes(tmp_path, capsys):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"sweep_param": "T", "sweep": [20], "policies": ["pure-greedy"], "base": {"K": 2}}))
    assert main(["run", "--experiment", "custom", "--config", str(cfg), "--out", str(tmp_path / "o"),
                 "--replications", "1", "--no-timing"]) == 0
    assert (tmp_path / "o" / "custom-rows.csv").exists()
    cfg.write_text("{broken")
    assert main(["run", "--experiment", "custom", "--config", str(cfg), "--out", str(tmp_path / "o")]) == 2
    assert main(["run", "--experiment", "custom", "--out", str(tmp_path / "o")]) == 2
    assert main(["opt", "--instance", str(tmp_path / "missing.json")]) == 2


def test_cli_gen_and_opt(tmp_path, capsys):
    out = tmp_path / "dep.json"
    assert main(["gen", "--family", "greedy-depletion", "--params", '{"M": 2}', "--out", str(out)]) == 0
    capsys.readouterr()
    assert main(["opt", "--instance", str(out)]) == 0
    assert json.loads(capsys.readouterr().out)["opt_cost"] == 3.0
    assert main(["opt", "--instance", str(out), "--max-states", "1"]) == 2
    assert main(["gen", "--family", "stress", "--params", "[1]", "--out", str(out)]) == 2


def test_cli_multi_member_family(tmp_path):
    assert main(["gen", "--family", "fixed-cost-pair", "--out", str(tmp_path / "pair.json")]) == 0
    assert sorted(p.name for p in tmp_path.iterdir()) == ["pair-first.json", "pair-second.json"]


def test_cli_accept_pass_and_fail(tmp_path, capsys):
    report = tmp_path / "r.json"
    assert main(["accept", "--suite", "greedy-depletion", "--report", str(report)]) == 0
    assert json.loads(report.read_text())[0]["passed"] is True
    assert "[PASS]  1 greedy-depletion" in capsys.readouterr().out
    # the stress construction never gets past the gate threshold, so this suite fails
    assert main(["accept", "--suite", "stress"]) == 1
