import csv
import subprocess
import sys

import pytest

from srtf.cli import main


def run(*args):
    return main([str(a) for a in args])


@pytest.fixture(scope="module")
def dataset(tmp_path_factory):
    d = tmp_path_factory.mktemp("cli")
    path = d / "train.csv"
    assert run("gen", "--fn", "local-osc", "--n", 1500, "--seed", 3, "--out", path) == 0
    return d, path


def test_gen_is_reproducible(tmp_path):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    for out in (a, b):
        assert run("gen", "--fn", "franke", "--sampler", "uniform", "--n", 200, "--dim", 3,
                   "--seed", 5, "--out", out) == 0
    assert a.read_bytes() == b.read_bytes()


def test_gen_box_and_header(tmp_path):
    out = tmp_path / "h.csv"
    assert run("gen", "--fn", "quad-saddle", "--n", 20, "--box=-7,7", "--header", "--out", out) == 0
    rows = [r for r in out.read_text().splitlines() if not r.startswith("#")]
    assert rows[0] == "x1,x2,f"
    assert all(-7 <= float(v) <= 7 for r in rows[1:] for v in r.split(",")[:2])


def test_fit_threads_byte_identical(dataset):
    d, data = dataset
    m1, m8 = d / "t1.model", d / "t8.model"
    assert run("fit", "--data", data, "--seed", 2, "--threads", 1, "--model", m1) == 0
    assert run("fit", "--data", data, "--seed", 2, "--threads", 8, "--model", m8) == 0
    assert m1.read_bytes() == m8.read_bytes()


def test_forest_threads_byte_identical(dataset):
    d, data = dataset
    m1, m8 = d / "f1.model", d / "f8.model"
    assert run("fit", "--data", data, "--trees", 3, "--threads", 1, "--model", m1) == 0
    assert run("fit", "--data", data, "--trees", 3, "--threads", 8, "--model", m8) == 0
    assert m1.read_bytes() == m8.read_bytes()


def test_fit_predict_report(dataset, capsys):
    d, data = dataset
    model, rep, pred = d / "m.model", d / "m.json", d / "pred.csv"
    assert run("fit", "--data", data, "--omega1", 100, "--omega3", 1e-3, "--model", model, "--report", rep) == 0
    assert rep.exists()
    test = d / "test.csv"
    assert run("gen", "--fn", "local-osc", "--sampler", "uniform", "--n", 300, "--seed", 9, "--out", test) == 0
    capsys.readouterr()
    assert run("predict", "--model", model, "--data", test, "--out", pred) == 0
    assert "RMAE" in capsys.readouterr().out
    with pred.open() as fh:
        rows = list(csv.DictReader(fh))
    assert len(rows) == 300 and set(rows[0]) == {"x1", "x2", "prediction", "truth", "error"}
    assert run("report", "--model", model) == 0
    assert "insufficient regions:" in capsys.readouterr().out


def test_exit_codes(dataset, tmp_path):
    d, data = dataset
    assert run("fit", "--data", tmp_path / "missing.csv", "--model", tmp_path / "x") == 1
    with pytest.raises(SystemExit) as exc:
        run("fit", "--bogus")
    assert exc.value.code == 1
    assert run("fit", "--data", data, "--omega2", 1, "--omega2-factor", 1, "--model", tmp_path / "x") == 1
    dup = tmp_path / "dup.csv"
    dup.write_text("0,0,1\n0,0,2\n1,1,3\n")
    assert run("fit", "--data", dup, "--model", tmp_path / "x") == 2
    model = d / "v.model"
    assert run("fit", "--data", data, "--model", model) == 0
    bad = tmp_path / "v999.model"
    bad.write_text(model.read_text().replace('"version": 1,', '"version": 999,', 1))
    assert run("report", "--model", bad) == 2
    cut = tmp_path / "cut.model"
    cut.write_text(model.read_text()[:500])
    assert run("predict", "--model", cut, "--data", data, "--out", tmp_path / "p.csv") == 2


def test_bench_fig2(tmp_path):
    out = tmp_path / "fig2.csv"
    assert run("bench", "--suite", "fig2", "--out", out) == 0
    with out.open() as fh:
        rows = list(csv.DictReader(fh))
    assert int(rows[0]["nodes"]) == 1
    assert float(rows[0]["train_rae"]) <= 0.01
    assert (tmp_path / "fig2_grid.csv").exists() or any(p.name.startswith("fig2_") for p in tmp_path.iterdir())


def test_console_entry_point(tmp_path):
    res = subprocess.run([sys.executable, "-m", "srtf.cli", "--help"], capture_output=True, text=True)
    assert res.returncode == 0 and "bench" in res.stdout
