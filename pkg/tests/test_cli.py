import csv

import pytest

from mimpac.cli import main

TINY_CONFIG = """
p = 5
sparsity_true = 2
n_grid = 40, 80, 120
seeds = 0, 1, 2
chain_steps = 60
burn_in = 20
n_eval = 500
"""


@pytest.fixture
def config(tmp_path):
    path = tmp_path / "tiny.cfg"
    path.write_text(TINY_CONFIG)
    return str(path)


def test_simulate_writes_dataset(tmp_path, config):
    out = tmp_path / "data.csv"
    assert main(["simulate", "--config", config, "--seed", "3", "--n", "25", "--out", str(out)]) == 0
    rows = list(csv.reader(out.open()))
    assert rows[0] == ["x1", "x2", "x3", "x4", "x5", "y"]
    assert len(rows) == 26


def test_fit_on_synthetic_and_on_file(tmp_path, config, capsys):
    assert main(["fit", "--config", config, "--n", "50"]) == 0
    text = capsys.readouterr().out
    for key in ("d_hat", "sparsity_hat", "M_hat", "empirical_risk", "excess_risk"):
        assert key in text
    data = tmp_path / "data.csv"
    main(["simulate", "--config", config, "--n", "30", "--out", str(data)])
    assert main(["fit", "--config", config, "--data", str(data)]) == 0
    assert "excess_risk" not in capsys.readouterr().out


def test_experiment_and_rate(tmp_path, config, capsys):
    out = tmp_path / "grid.csv"
    assert main(["--threads", "2", "experiment", "--config", config, "--out", str(out)]) == 0
    assert len(out.read_text().splitlines()) == 1 + 9
    assert main(["rate", str(out)]) == 0
    assert capsys.readouterr().out.startswith("slope = ")


def test_global_flags_before_subcommand_are_kept(tmp_path, config):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    main(["--seed", "7", "simulate", "--config", config, "--n", "5", "--out", str(a)])
    main(["simulate", "--config", config, "--seed", "7", "--n", "5", "--out", str(b)])
    assert a.read_text() == b.read_text()


def test_check_subset(tmp_path):
    out = tmp_path / "checks.csv"
    assert main(["check", "--only", "structural_mass,cardinality", "--out", str(out)]) == 0
    rows = list(csv.DictReader(out.open()))
    assert {r["status"] for r in rows} == {"pass"}
    assert any("1/721" in r["note"] for r in rows)
    assert any(r["check"] == "cardinality_exception_N1_d2_M0" for r in rows)


def test_errors_exit_with_one(tmp_path, capsys):
    assert main(["rate", str(tmp_path / "missing.csv")]) == 1
    bad = tmp_path / "bad.cfg"
    bad.write_text("unknown_key = 1\n")
    assert main(["experiment", "--config", str(bad)]) == 1
    assert main(["check", "--only", "nonsense"]) == 1
    assert "error" in capsys.readouterr().err
