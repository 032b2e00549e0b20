import csv
import os

import pytest

from genemut.pipeline.cli import main

pytestmark = pytest.mark.filterwarnings("ignore::genemut.objective.UndefinedMetricWarning")

SMALL = ["--num-slides", "30", "--K", "6", "--C", "2", "--d", "6", "--num-groups", "1",
         "--patches-min", "2", "--patches-max", "4"]
RUN = ["--d", "6", "--epochs", "1", "--fold-subset", "0", "--folds", "3"]


def tree(path):
    out = {}
    for root, _, files in os.walk(path):
        for f in files:
            p = os.path.join(root, f)
            out[os.path.relpath(p, path)] = open(p, "rb").read()
    return out


@pytest.fixture(scope="module")
def data_dir(tmp_path_factory):
    d = tmp_path_factory.mktemp("cli") / "ds"
    assert main(["gen-data", "--out", str(d), "--seed", "7", *SMALL]) == 0
    return d


def test_gen_data_twice_identical(data_dir, tmp_path):
    assert main(["gen-data", "--out", str(tmp_path / "again"), "--seed", "7", *SMALL]) == 0
    assert tree(data_dir) == tree(tmp_path / "again")


def test_gen_data_config_file(tmp_path):
    cfg = tmp_path / "gen.cfg"
    cfg.write_text("seed=7\nnum_slides=30\nK=6\nC=2\nd=6\nnum_groups=1\npatches_min=2\npatches_max=4\n")
    assert main(["gen-data", "--out", str(tmp_path / "ds"), "--config", str(cfg)]) == 0


def test_train_loss_flag_changes_summary_not_folds(data_dir, tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    assert main(["train", "--dataset", str(data_dir), "--out", str(a), *RUN]) == 0
    assert main(["train", "--dataset", str(data_dir), "--out", str(b), *RUN, "--loss", "bce"]) == 0
    assert (a / "folds.csv").read_bytes() == (b / "folds.csv").read_bytes()
    assert (a / "summary.csv").read_bytes() != (b / "summary.csv").read_bytes()
    for name in ("summary.csv", "metrics.csv", "loss.csv", "run_config.txt", "checkpoints/fold0.ckpt"):
        assert (a / name).exists()


def test_eval_and_export_attention(data_dir, tmp_path):
    run = tmp_path / "run"
    assert main(["train", "--dataset", str(data_dir), "--out", str(run), *RUN]) == 0
    assert main(["eval", "--run", str(run)]) == 0
    assert (run / "eval" / "summary.csv").read_bytes() == (run / "summary.csv").read_bytes()
    assert main(["export-attention", "--run", str(run), "--fold", "0", "--slides", "S00,S01"]) == 0
    rows = list(csv.reader(open(run / "attention" / "S00.csv")))
    assert rows[0][0] == "gene_id" and len(rows) == 7
    assert main(["export-attention", "--run", str(run), "--slides", "NOPE"]) == 1


def test_build_graph(data_dir, tmp_path):
    assert main(["build-graph", "--dataset", str(data_dir), "--out", str(tmp_path / "g"), "--d", "6",
                 "--fold", "0"]) == 0
    assert {"G.ten", "delta.ten", "E_adj.ten", "E_con.ten", "genes.txt"} <= set(os.listdir(tmp_path / "g"))


def test_ablate(data_dir, tmp_path):
    assert main(["ablate", "--dataset", str(data_dir), "--out", str(tmp_path), "--axes", "loss", *RUN]) == 0
    assert (tmp_path / "ablation.csv").exists()


def test_unknown_flag_prints_usage_and_exits_1(capsys):
    assert main(["train", "--bogus", "1"]) == 1
    assert "usage:" in capsys.readouterr().err


def test_invalid_value_exits_1(data_dir, tmp_path):
    assert main(["train", "--dataset", str(data_dir), "--out", str(tmp_path), "--loss", "nope"]) == 1
    assert main(["gen-data", "--out", str(tmp_path / "x"), "--rho", "0.05"]) == 1


def test_runtime_error_exits_2(tmp_path):
    assert main(["train", "--dataset", str(tmp_path / "missing"), "--out", str(tmp_path / "r")]) == 2


def test_check_passes(capsys):
    assert main(["check"]) == 0
    assert capsys.readouterr().out.count("PASS") == 8


def test_check_failure_exits_nonzero(monkeypatch):
    import genemut.pipeline.checks as checks
    monkeypatch.setattr(checks, "ALL_CHECKS", (lambda: ("broken", False, "forced"),))
    assert main(["check"]) == 1
