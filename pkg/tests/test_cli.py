import csv
import json
import subprocess
import sys

import pytest

from support import locate_dataset
from unfis.cli import main


@pytest.fixture(scope="module")
def iris_csv(tmp_path_factory):
    return str(locate_dataset("iris", tmp_path_factory.mktemp("cli-data")))


def rows(path):
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


@pytest.fixture(scope="module")
def trained(iris_csv, tmp_path_factory):
    out = tmp_path_factory.mktemp("train")
    assert main(["train", "--dataset", iris_csv, "--out", str(out)]) == 0
    return out


def test_train_writes_model_and_history(trained):
    history = rows(trained / "history.csv")
    assert len(history) == 100
    assert {r["optimizer"] for r in history} == {"gqlm"}
    doc = json.loads((trained / "model.json").read_text())
    assert doc["R"] == 2 and doc["n"] == 4 and doc["C"] == 3
    assert (trained / "rules.txt").read_text().startswith("Rule 1:")


def test_snapshot_pins_the_run(trained, iris_csv):
    snap = json.loads((trained / "snapshot.json").read_text())
    assert snap["config"]["damping"] == 1000.0 and snap["config"]["iterations"] == 100
    assert snap["flags"]["seed"] == 0 and len(snap["dataset_sha256"]) == 64
    assert len(snap["schema_sha256"]) == 64 and snap["version"]


def test_eval_and_inspect_a_saved_model(trained, iris_csv, capsys):
    assert main(["eval", "--model", str(trained / "model.json"), "--dataset", iris_csv]) == 0
    assert "accuracy" in capsys.readouterr().out
    assert main(["inspect", "--model", str(trained / "model.json")]) == 0
    assert "THEN" in capsys.readouterr().out
    assert main(["inspect", "--model", str(trained / "model.json"), "--json"]) == 0
    assert json.loads(capsys.readouterr().out)["format"] == "unfis-rules"
    assert main(["inspect", "--dataset", iris_csv]) == 0
    assert "k-means initialization" in capsys.readouterr().out


def test_same_seed_reproduces_the_model(trained, iris_csv, tmp_path):
    assert main(["train", "--dataset", iris_csv, "--out", str(tmp_path)]) == 0
    assert (tmp_path / "model.json").read_bytes() == (trained / "model.json").read_bytes()


def test_sgd_is_recorded(iris_csv, tmp_path):
    assert main(["train", "--dataset", iris_csv, "--optimizer", "sgd", "--iters", "3", "--out", str(tmp_path)]) == 0
    assert {r["optimizer"] for r in rows(tmp_path / "history.csv")} == {"sgd"}


def test_bad_schema_exits_with_ingestion_code(iris_csv, tmp_path, capsys):
    code = main(["train", "--dataset", iris_csv, "--schema", str(tmp_path / "none.ini"), "--out", str(tmp_path)])
    assert code == 3
    assert capsys.readouterr().err.startswith("unfis: error[ingestion]:")


def test_unknown_optimizer_flag_is_rejected(iris_csv):
    with pytest.raises(SystemExit) as info:
        main(["train", "--dataset", iris_csv, "--optimizer", "adam"])
    assert info.value.code == 2
    assert main(["compare-optim", "--dataset", iris_csv, "--optimizers", "gqlm,adam", "--reps", "1"]) == 2


def test_unknown_flag_is_rejected(iris_csv):
    with pytest.raises(SystemExit):
        main(["train", "--dataset", iris_csv, "--bogus"])


def test_experiment_with_fnn(iris_csv, tmp_path):
    argv = ["experiment", "--dataset", iris_csv, "--reps", "2", "--iters", "5", "--with-fnn", "--out", str(tmp_path)]
    assert main(argv) == 0
    summary = rows(tmp_path / "summary.csv")
    assert [r["method"] for r in summary] == ["UNFIS", "FNN"]
    assert len(rows(tmp_path / "repetitions.csv")) == 4
    assert "+/-" in (tmp_path / "summary.txt").read_text()


def test_compare_optim_has_one_row_per_optimizer(iris_csv, tmp_path):
    argv = ["compare-optim", "--dataset", iris_csv, "--reps", "1", "--iters", "2", "--out", str(tmp_path)]
    assert main(argv) == 0
    assert [r["method"] for r in rows(tmp_path / "compare.csv")] == ["gqlm", "lm", "sgd", "momentum"]


def test_gradcheck_passes(iris_csv, tmp_path):
    assert main(["gradcheck", "--dataset", iris_csv, "--out", str(tmp_path)]) == 0
    assert {r["verdict"] for r in rows(tmp_path / "gradcheck.csv")} == {"pass"}
    assert main(["gradcheck", "--dataset", iris_csv, "--fnn"]) == 0


def test_environment_overrides_defaults(iris_csv, tmp_path, monkeypatch):
    monkeypatch.setenv("UNFIS_ITERS", "4")
    monkeypatch.setenv("UNFIS_RULES", "3")
    assert main(["train", "--dataset", iris_csv, "--out", str(tmp_path)]) == 0
    assert len(rows(tmp_path / "history.csv")) == 4
    assert json.loads((tmp_path / "model.json").read_text())["R"] == 3
    snap = json.loads((tmp_path / "snapshot.json").read_text())
    assert snap["environment"]["UNFIS_ITERS"] == "4"
    # an explicit flag wins
    assert main(["train", "--dataset", iris_csv, "--iters", "2", "--out", str(tmp_path)]) == 0
    assert len(rows(tmp_path / "history.csv")) == 2


def test_console_script_entry_point(iris_csv, tmp_path):
    proc = subprocess.run(
        [sys.executable, "-m", "unfis", "train", "--dataset", iris_csv, "--iters", "1", "--out", str(tmp_path)],
        capture_output=True, text=True,
    )
    assert proc.returncode == 0, proc.stderr
    assert "test accuracy" in proc.stdout
