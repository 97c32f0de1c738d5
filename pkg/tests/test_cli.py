import json

import pytest

from mimcs import cli

from conftest import FAST, PIMA_PATH, toy


@pytest.fixture
def toy_csv(tmp_path):
    m = toy()
    lines = [",".join(repr(float(v)) for v in row) + f",{1 if lab > 0 else 0}" for row, lab in zip(m.X, m.y)]
    path = tmp_path / "toy.csv"
    path.write_text("\n".join(lines) + "\n")
    return path


@pytest.fixture
def fast_cfg(tmp_path):
    path = tmp_path / "cfg.json"
    path.write_text(json.dumps(FAST))
    return path


def run(argv, capsys):
    code = cli.main([str(a) for a in argv])
    out, err = capsys.readouterr()
    return code, out, err


def test_stats(tmp_path, capsys):
    code, out, _ = run(["stats", "--input", PIMA_PATH, "--out", tmp_path], capsys)
    assert code == 0
    assert "120.9" in out and "846" in out
    doc = json.loads((tmp_path / "stats.json").read_text())
    rows = doc["features"]
    assert doc["n_rows"] == 768 and len(rows) == 8 and rows[4]["max"] == 846.0


def test_stats_with_header(tmp_path, capsys):
    path = tmp_path / "h.csv"
    path.write_text("preg,plas,pres,skin,insu,mass,pedi,age,class\n" + PIMA_PATH.read_text())
    code, out, _ = run(["stats", "--input", path, "--out", tmp_path], capsys)
    assert code == 0
    assert json.loads((tmp_path / "stats.json").read_text())["n_rows"] == 768


@pytest.mark.parametrize("content,needle", [("", "no data rows"), ("1,2,3\n", "line 1"), ("1,2,3,4,5,6,7,8,2\n", "label")])
def test_bad_input_exit_2(tmp_path, capsys, content, needle):
    path = tmp_path / "bad.csv"
    path.write_text(content)
    code, _, err = run(["stats", "--input", path], capsys)
    assert code == 2
    assert needle in err


def test_missing_input_exit_2(tmp_path, capsys):
    assert run(["stats", "--input", tmp_path / "nope.csv"], capsys)[0] == 2
    assert run(["stats"], capsys)[0] == 2


def test_config_errors_exit_1(tmp_path, capsys, toy_csv):
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({"C_bounds": [200, 0.001]}))
    code, _, err = run(["tune", "--input", toy_csv, "--config", bad], capsys)
    assert code == 1 and "C_bounds" in err
    bad.write_text(json.dumps({"colour": "blue"}))
    code, _, err = run(["tune", "--input", toy_csv, "--config", bad], capsys)
    assert code == 1 and "colour" in err
    bad.write_text(json.dumps({**FAST, "budget": 5}))
    assert run(["tune", "--input", toy_csv, "--config", bad], capsys)[0] == 1
    assert run(["cv", "--input", toy_csv, "--threads", "0"], capsys)[0] == 1


def test_stage_failure_exit_3(tmp_path, capsys, fast_cfg):
    rows = [",".join(["1"] * 8) + ",1", ",".join(["1"] * 8) + ",0"] * 20
    path = tmp_path / "const.csv"
    path.write_text("\n".join(rows) + "\n")
    code, _, err = run(["train", "--input", path, "--config", fast_cfg], capsys)
    assert code == 3 and "standardize" in err


def test_pca_and_weights(tmp_path, capsys, toy_csv):
    code, out, _ = run(["pca", "--input", toy_csv, "--out", tmp_path], capsys)
    assert code == 0 and "explained variance ratio" in out
    doc = json.loads((tmp_path / "pca.json").read_text())
    assert len(doc["pca"]["eigenvalues"]) == 4
    code, out, _ = run(["weights", "--input", toy_csv, "--out", tmp_path, "--components", 3], capsys)
    assert code == 0
    w = json.loads((tmp_path / "weights.json").read_text())
    assert len(w["features"]) == 3
    assert abs(sum(r["alpha"] for r in w["features"]) - 1) < 1e-12


def test_tune_deterministic(tmp_path, capsys, toy_csv, fast_cfg):
    a, b = tmp_path / "a", tmp_path / "b"
    assert run(["tune", "--input", toy_csv, "--config", fast_cfg, "--out", a], capsys)[0] == 0
    assert run(["tune", "--input", toy_csv, "--config", fast_cfg, "--out", b], capsys)[0] == 0
    assert (a / "tune.json").read_text() == (b / "tune.json").read_text()
    trace = (a / "trace.csv").read_text().splitlines()
    assert int(trace[-1].split(",")[1]) <= FAST["budget"]
    assert json.loads((a / "tune.json").read_text())["n_train"] == 80


def test_train_then_predict(tmp_path, capsys, toy_csv, fast_cfg):
    assert run(["train", "--input", toy_csv, "--config", fast_cfg, "--out", tmp_path], capsys)[0] == 0
    bundle = tmp_path / "bundle.json"
    code, out, _ = run(["predict", "--model", bundle, "--input", toy_csv, "--out", tmp_path], capsys)
    assert code == 0
    lines = out.splitlines()
    assert lines[0] == "label,decision_value" and len(lines) == 101
    assert (tmp_path / "predictions.csv").read_text() == out
    unlabeled = tmp_path / "u.csv"
    unlabeled.write_text("\n".join(l.rsplit(",", 1)[0] for l in toy_csv.read_text().splitlines()[:5]) + "\n")
    code, out2, _ = run(["predict", "--model", bundle, "--input", unlabeled], capsys)
    assert code == 0 and out2.splitlines()[1:] == lines[1:6]


def test_predict_bundle_errors(tmp_path, capsys, toy_csv):
    bad = tmp_path / "b.json"
    bad.write_text(json.dumps({"schema": "mimcs-bundle/0"}))
    code, _, err = run(["predict", "--model", bad, "--input", toy_csv], capsys)
    assert code == 4 and "schema" in err
    assert run(["predict", "--model", tmp_path / "none.json", "--input", toy_csv], capsys)[0] == 2


def test_cv_outputs_thread_invariant(tmp_path, capsys, toy_csv, fast_cfg):
    a, b = tmp_path / "a", tmp_path / "b"
    assert run(["cv", "--input", toy_csv, "--config", fast_cfg, "--out", a], capsys)[0] == 0
    assert run(["cv", "--input", toy_csv, "--config", fast_cfg, "--out", b, "--threads", 4], capsys)[0] == 0
    for name in ("report.json", "report.txt", "bundle_fold0.json", "trace_fold3.csv"):
        assert (a / name).read_bytes() == (b / name).read_bytes()
    rep = json.loads((a / "report.json").read_text())
    assert len(rep["folds"]) == FAST["folds"]


def test_cv_holdout(tmp_path, capsys, toy_csv, fast_cfg):
    code, out, _ = run(["cv", "--holdout", "--input", toy_csv, "--config", fast_cfg, "--out", tmp_path], capsys)
    assert code == 0 and "test split, 20 samples" in out


def test_print_config(capsys, fast_cfg):
    code, out, _ = run(["print-config", "--config", fast_cfg, "--seed", 9, "--kernel-variant", "squared"], capsys)
    doc = json.loads(out)
    assert code == 0 and doc["seed"] == 9 and doc["kernel_variant"] == "squared" and doc["budget"] == 40
