import json

import pytest

from regretopt import cli, lp, regret
from regretopt.model import save_instance
from regretopt.scalarization import FRONT_HEADER
from regretopt.synthetic import TOY_SUITE


@pytest.fixture(scope="module")
def toy_path(tmp_path_factory):
    path = tmp_path_factory.mktemp("inst") / "toy.json"
    save_instance(TOY_SUITE[0].instance(), path)
    return str(path)


def run_cli(capsys, *argv):
    code = cli.main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_solve_zero_regret_summary(capsys, toy_path, tmp_path):
    cert = tmp_path / "cert.json"
    code, out, _ = run_cli(capsys, "solve", "--instance", toy_path, "--alpha", "0", "--cap-t", "60",
                           "--comparator", "carbon-capped", "--free", "e,g", "--out", str(cert))
    assert code == 0
    assert "regret bounds  [0.00, 0.00]" in out.replace("-0.00", "0.00")
    doc = json.loads(cert.read_text())
    assert abs(doc["upper_bound"]) <= 1e-4
    # design table in abbreviation-table order
    names = [line.split()[0] for line in out.split("design:")[1].strip().splitlines()]
    assert names == ["AWHP", "CS", "C-Dummy", "GB", "H-Dummy", "HS"]


def test_default_epsilon_echoed(capsys, toy_path):
    code, out, _ = run_cli(capsys, "solve", "--instance", toy_path, "--alpha", "0.2", "--free", "e,g")
    assert code == 0
    assert "epsilon        100 EUR" in out


def test_missing_file(capsys, tmp_path):
    missing = tmp_path / "nope.json"
    code, _, err = run_cli(capsys, "solve", "--instance", str(missing))
    assert code == 2
    assert str(missing) in err


def test_invalid_json_and_schema(capsys, tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    assert run_cli(capsys, "validate", "--instance", str(bad))[0] == 2
    bad.write_text(json.dumps({"steps_per_day": 2}))
    code, _, err = run_cli(capsys, "validate", "--instance", str(bad))
    assert code == 2 and "schema" in err


def test_validate_reports_errors(capsys, tmp_path):
    inst = TOY_SUITE[0].instance()
    inst = inst.replace(devices=inst.devices[:-1])
    path = tmp_path / "nodummy.json"
    save_instance(inst, path)
    code, out, _ = run_cli(capsys, "validate", "--instance", str(path))
    assert code == 2 and "no cooling dummy" in out


def test_bad_arguments(capsys, toy_path):
    assert run_cli(capsys, "solve", "--instance", toy_path, "--alpha", "1.5")[0] == 2
    assert run_cli(capsys, "solve", "--instance", toy_path, "--cap-kg", "-3")[0] == 2
    assert run_cli(capsys, "solve", "--instance", toy_path, "--eps", "0")[0] == 2
    assert run_cli(capsys, "solve", "--instance", toy_path, "--free", "e,zz")[0] == 2
    with pytest.raises(SystemExit) as exc:
        cli.main(["solve"])
    assert exc.value.code == 2


def test_nonconverged_exit(capsys, toy_path):
    code, out, _ = run_cli(capsys, "solve", "--instance", toy_path, "--alpha", "0.5", "--free", "e,g",
                           "--algorithm", "cg", "--eps", "1e-9", "--max-iter", "1")
    assert code == 3
    assert "iteration_limit" in out or "stalled" in out


def test_solver_failure_exit(capsys, toy_path, monkeypatch):
    def boom(*a, **k):
        raise lp.NumericalBreakdown("singular basis")

    monkeypatch.setattr(regret, "run", boom)
    code, _, err = run_cli(capsys, "solve", "--instance", toy_path)
    assert code == 4 and "singular basis" in err


def test_sweep_rows_units_and_determinism(capsys, toy_path, tmp_path):
    out1, out2 = tmp_path / "a.csv", tmp_path / "b.csv"
    args = ["sweep", "--instance", toy_path, "--alphas", "0.1,0.2,0.3", "--caps-t", "20,40,60",
            "--free", "e,g", "--eps", "1", "--no-timing"]
    assert run_cli(capsys, *args, "--out", str(out1))[0] == 0
    assert run_cli(capsys, *args, "--out", str(out2))[0] == 0
    text = out1.read_text()
    assert text == out2.read_text()
    lines = text.splitlines()
    assert lines[0].split(",") == list(FRONT_HEADER)
    assert len(lines) == 10
    assert [ln.split(",")[1] for ln in lines[1:4]] == ["20000", "40000", "60000"]


def test_benchmark_empty_grid(capsys, tmp_path):
    out = tmp_path / "bench.csv"
    code, _, _ = run_cli(capsys, "benchmark", "--alphas", "", "--out", str(out))
    assert code == 0
    assert len(out.read_text().splitlines()) == 1


def test_benchmark_small_grid(capsys, tmp_path):
    out = tmp_path / "bench.csv"
    code, table, _ = run_cli(capsys, "benchmark", "--sizes", "1x1", "--alphas", "0.3", "--caps-t", "30",
                             "--out", str(out))
    assert code == 0
    assert "#iterations ratio" in table and "|U|=1, n=1" in table
    assert len(out.read_text().splitlines()) == 2


def test_mincarbon_and_oracle(capsys, toy_path, tmp_path):
    code, out, _ = run_cli(capsys, "mincarbon", "--instance", toy_path)
    assert code == 0 and "kg" in out
    res = tmp_path / "oracle.json"
    code, out, _ = run_cli(capsys, "oracle", "--instance", toy_path, "--alpha", "0.3", "--free", "e,g",
                           "--grid-n", "5", "--out", str(res))
    assert code == 0
    assert json.loads(res.read_text())["grid_n"] == 5


def test_cluster(capsys, tmp_path):
    csv_path = tmp_path / "prof.csv"
    rows = ["day,step,heat_kwh,cold_kwh"]
    for d in range(6):
        for t in range(2):
            rows.append(f"d{d},{t},{40 if d < 3 else 5},{2 if d < 3 else 30}")
    csv_path.write_text("\n".join(rows) + "\n")
    out = tmp_path / "days.json"
    code, _, _ = run_cli(capsys, "cluster", "--profiles", str(csv_path), "-k", "2", "--out", str(out))
    assert code == 0
    days = json.loads(out.read_text())["days"]
    assert len(days) == 2 and sum(d["weight"] for d in days) == 365.0
    assert run_cli(capsys, "cluster", "--profiles", str(csv_path), "-k", "9")[0] == 2
    assert run_cli(capsys, "cluster", "--profiles", str(tmp_path / "x.csv"), "-k", "1")[0] == 2


def test_synth_round_trip(capsys, tmp_path):
    out = tmp_path / "s.json"
    assert run_cli(capsys, "synth", "--toy", "biomass", "--out", str(out))[0] == 0
    assert run_cli(capsys, "validate", "--instance", str(out))[0] == 0
    assert run_cli(capsys, "synth", "--toy", "nope", "--out", str(out))[0] == 2
