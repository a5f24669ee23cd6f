import csv
import json

import pytest

from schedsim import cli, experiments


def run(argv):
    return cli.main(argv)


def read_csv(path):
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


def test_run_all_algorithms(tmp_path):
    out = tmp_path / "r.csv"
    assert run(["run", "--scenario", "exp2", "--algo", "ps,bs,gs", "--out", str(out)]) == 0
    rows = read_csv(out)
    assert len(rows) == 7 * 3
    assert list(rows[0]) == [f.name for f in cli.fields(cli.OutputRecord)]


def test_run_bs_exp1_converges(tmp_path):
    out = tmp_path / "r.csv"
    assert run(["run", "--scenario", "exp1", "--algo", "bs", "--out", str(out)]) == 0
    rows = read_csv(out)
    assert len(rows) == 7 and all(r["converged"] == "True" for r in rows)


def test_run_is_byte_identical(tmp_path):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    for p in (a, b):
        assert run(["run", "--scenario", "exp1", "--algo", "ps,bs", "--out", str(p)]) == 0
    assert a.read_bytes() == b.read_bytes()


def test_missing_config_exits_2(tmp_path):
    out = tmp_path / "r.csv"
    assert run(["run", "--config", str(tmp_path / "none.json"), "--out", str(out)]) == 2
    assert not out.exists()


def test_malformed_config_exits_2(tmp_path):
    cfg = tmp_path / "bad.json"
    cfg.write_text("{not json")
    assert run(["run", "--config", str(cfg)]) == 2


def test_infeasible_config_exits_3(tmp_path):
    cfg = tmp_path / "hot.json"
    cfg.write_text(json.dumps({"nodes": [{"mu": 1.0}], "schedulers": [{"phi": 3.0}], "rho": 0.5}))
    out = tmp_path / "r.csv"
    assert run(["run", "--config", str(cfg), "--out", str(out)]) == 3
    assert not out.exists()


def test_config_file_round_trip(tmp_path):
    cfg = tmp_path / "exp2.json"
    cfg.write_text(json.dumps(experiments.scenario_to_dict(experiments.builtin_scenarios()["exp2"])))
    out = tmp_path / "r.jsonl"
    assert run(["run", "--config", str(cfg), "--algo", "bs", "--format", "jsonl", "--out", str(out)]) == 0
    lines = [json.loads(s) for s in out.read_text().splitlines()]
    assert len(lines) == 7 and lines[0]["algorithm"] == "BS"


def test_non_convergence_exit_4(tmp_path):
    doc = experiments.scenario_to_dict(experiments.builtin_scenarios()["exp1"])
    doc["solver"]["max_cycle"] = 1
    doc["solver"]["eps"] = 1e-14
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps(doc))
    out = tmp_path / "r.csv"
    assert run(["run", "--config", str(cfg), "--algo", "gs", "--out", str(out)]) == 4
    assert len(read_csv(out)) == 7


def test_sweep_from_to_steps(tmp_path):
    out = tmp_path / "s.csv"
    argv = ["sweep", "--scenario", "exp2", "--algo", "bs", "--param", "load",
            "--from", "0.1", "--to", "0.9", "--steps", "9", "--out", str(out)]
    assert run(argv) == 0
    values = sorted({float(r["sweep_value"]) for r in read_csv(out)})
    assert values == [0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9]


def test_sweep_bandwidth_values(tmp_path):
    out = tmp_path / "s.csv"
    argv = ["sweep", "--algo", "bs", "--param", "bandwidth", "--values", "100,500,1024",
            "--out", str(out), "--jobs", "2"]
    assert run(argv) == 0
    rows = read_csv(out)
    assert [float(v) for v in dict.fromkeys(r["sweep_value"] for r in rows)] == [100, 500, 1024]


@pytest.mark.parametrize("extra", [["--values", ""], ["--values", ",,"], []])
def test_sweep_without_values_exits_2(extra):
    assert run(["sweep", "--param", "load", *extra]) == 2


def test_unknown_scenario_exits_2():
    assert run(["run", "--scenario", "exp9"]) == 2


def test_validate_queue(tmp_path):
    a, b = tmp_path / "a.txt", tmp_path / "b.txt"
    for p in (a, b):
        assert run(["validate-queue", "--lambda", "0.5", "--mu", "1", "--kind", "exponential",
                    "--num-jobs", "1000000", "--seed", "0", "--out", str(p)]) == 0
    assert a.read_bytes() == b.read_bytes()
    fields = dict(line.split(" ", 1) for line in a.read_text().splitlines())
    assert abs(float(fields["z_score"])) <= 3
    assert float(fields["analytic_mean"]) == 2.0


def test_validate_queue_unstable_exits_3():
    assert run(["validate-queue", "--lambda", "1", "--mu", "1"]) == 3


def test_list_scenarios(capsys):
    assert run(["list-scenarios"]) == 0
    out = capsys.readouterr().out
    assert "exp1" in out and "exp2" in out
