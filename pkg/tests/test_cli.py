import json
import time

import pytest

from solerlab import cli
from solerlab.reports import Report, ResultCache


def run_json(args, tmp_path, name="out.json"):
    out = tmp_path / name
    code = cli.run(list(args) + ["--output", str(out)])
    return code, (Report.from_json(out.read_text()) if out.exists() else None)


SMOKE = [
    ("ground-state", "--k", "1.5"),
    ("nls-spectrum", "--k", "1"),
    ("resonance", "--k", "1"),
    ("kn-scan", "--n", "2", "--k-lo", "0.55", "--k-hi", "0.7"),
    ("soliton", "--k", "1", "--omega", "0.99"),
    ("charge-curve", "--k", "1", "--omega-list", "0.99,0.992,0.994,0.996,0.998"),
    ("dirac-spectrum", "--k", "1", "--omega", "0.99"),
    ("track", "--k", "3", "--omega-list", "0.995,0.998,0.999"),
    ("char-roots", "--family", "quadratic"),
    ("char-roots", "--family", "S0", "--k", "1.5"),
    ("resolvent-probe",),
    ("verify-all", "--only", "2"),
]


@pytest.mark.parametrize("args", SMOKE, ids=lambda a: "-".join(a[:1] + a[2:3]))
def test_every_command_runs_quickly(args, tmp_path):
    t0 = time.perf_counter()
    code, rep = run_json(args, tmp_path)
    assert code == 0
    assert time.perf_counter() - t0 < 60
    assert rep.command == args[0] and rep.schema_version
    assert rep.results


def test_csv_curve_is_written(tmp_path):
    csv_path = tmp_path / "u.csv"
    code = cli.run(["ground-state", "--k", "2", "--csv", str(csv_path),
                    "--output", str(tmp_path / "o.json")])
    assert code == 0
    assert csv_path.read_text().splitlines()[0] == "r,u_k"


def test_second_run_is_a_cache_hit(tmp_path, caplog):
    args = ["soliton", "--k", "2", "--omega", "0.99", "--cache-dir", str(tmp_path / "c")]
    _, first = run_json(args, tmp_path, "a.json")
    with caplog.at_level("INFO", logger="solerlab"):
        _, second = run_json(args + ["--verbose"], tmp_path, "b.json")
    assert "cache hit" in caplog.text
    assert second.deterministic_json() == first.deterministic_json()


def test_deleting_the_cache_reproduces_results(tmp_path):
    import shutil
    cache_dir = tmp_path / "c"
    args = ["ground-state", "--k", "1.5", "--cache-dir", str(cache_dir)]
    _, first = run_json(args, tmp_path, "a.json")
    shutil.rmtree(cache_dir)
    _, second = run_json(args, tmp_path, "b.json")
    assert second.results == first.results


def test_no_cache_leaves_no_entries(tmp_path):
    cache_dir = tmp_path / "c"
    run_json(["ground-state", "--no-cache", "--cache-dir", str(cache_dir)], tmp_path)
    assert not cache_dir.exists() or not list(cache_dir.rglob("*.json"))


def test_config_file_and_flag_precedence(tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("k = 2.0  # exponent\nm = 1.0\n")
    _, rep = run_json(["ground-state", "--config", str(cfg)], tmp_path, "a.json")
    assert rep.inputs["k"] == 2.0
    _, rep = run_json(["ground-state", "--config", str(cfg), "--k", "1.5"], tmp_path, "b.json")
    assert rep.inputs["k"] == 1.5


def test_unknown_config_key_is_an_input_error(tmp_path):
    cfg = tmp_path / "bad.cfg"
    cfg.write_text("kappa = 1\n")
    assert cli.run(["ground-state", "--config", str(cfg)]) == 2


@pytest.mark.parametrize("args", [
    ["soliton", "--omega", "1.2"],
    ["soliton", "--omega", "nan"],
    ["ground-state", "--k", "-1"],
    ["soliton", "--k", "2", "--K", "1"],
])
def test_invalid_inputs_exit_with_code_two(args, tmp_path):
    assert cli.run(args + ["--output", str(tmp_path / "o.json")]) == 2


def test_unknown_flag_is_rejected():
    assert cli.run(["ground-state", "--bogus", "1"]) == 2


def test_solver_failure_exits_with_code_three(tmp_path):
    # no sign change of the counting function inside the bracket
    assert cli.run(["kn-scan", "--n", "2", "--k-lo", "0.8", "--k-hi", "0.9",
                    "--output", str(tmp_path / "o.json")]) == 3


def test_report_on_stdout_is_json(capsys):
    assert cli.run(["ground-state", "--k", "1"]) == 0
    data = json.loads(capsys.readouterr().out)
    assert data["command"] == "ground-state" and "timings" in data


def test_cache_key_ignores_output_options(tmp_path):
    base = cli.RunConfig("ground-state", k=1.5).validate()
    other = cli.RunConfig("ground-state", k=1.5, output="x.json", csv="y.csv",
                          no_cache=True).validate()
    assert base.cache_key() == other.cache_key()
    assert base.cache_key() != cli.RunConfig("ground-state", k=1.6).validate().cache_key()


def test_verify_all_is_never_cached(tmp_path):
    cache_dir = tmp_path / "c"
    run_json(["verify-all", "--only", "2", "--cache-dir", str(cache_dir)], tmp_path)
    assert not cache_dir.exists() or not list(cache_dir.rglob("*.json"))
