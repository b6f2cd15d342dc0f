"""Subcommand round-trips, configuration precedence, and exit codes."""

import json
import shutil
import subprocess

import numpy as np
import pytest

from lepl import data
from lepl.cli import main
from lepl.theory import TheoryParams, sample_complexity

FAST = ["--steps", "8", "--epochs", "25"]


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


@pytest.fixture(scope="module")
def synth_dir(tmp_path_factory):
    d = tmp_path_factory.mktemp("bench")
    code = main([
        "synth", "--out-dir", str(d), "--n-train", "40", "--n-val", "20",
        "--n-test", "15", "--classes", "4", "--dim", "6", "--seed", "3",
    ])
    assert code == 0
    return d


class TestSynth:
    def test_writes_all_seven_files(self, capsys, tmp_path):
        code, out, err = run(
            capsys, "synth", "--out-dir", str(tmp_path), "--n-train", "12",
            "--n-val", "8", "--n-test", "5", "--classes", "3", "--dim", "4",
        )
        assert code == 0 and err == ""
        assert out.startswith("synth ok ")
        names = {p.name for p in tmp_path.iterdir()}
        assert names == {
            "train_features.txt", "train_labels.txt", "train_true_labels.txt",
            "val_features.txt", "val_labels.txt", "test_features.txt", "test_labels.txt",
        }
        assert data.load_features(tmp_path / "train_features.txt").n == 12
        assert data.load_labels(tmp_path / "train_labels.txt", "partial").C == 3

    def test_missing_out_dir_is_exit_2(self, capsys):
        code, out, err = run(capsys, "synth")
        assert code == 2
        assert "--out-dir" in err


class TestAggregate:
    def test_majority_votes_written_as_full_labels(self, capsys, tmp_path):
        votes = np.zeros((2, 3, 2), dtype=np.int8)
        votes[0, :, 0] = (1, 1, 0)  # 2 of 3 -> majority
        votes[1, :, 1] = (1, 0, 0)  # minority -> fallback positive on last class
        tensor = data.AnnotationTensor(votes)
        vp = tmp_path / "votes.txt"
        data.write_votes(tensor, vp)
        op = tmp_path / "full.txt"
        code, out, _ = run(capsys, "aggregate", "--votes", str(vp), "--out", str(op))
        assert code == 0
        assert out.startswith("aggregate ok ")
        full = data.load_labels(op, "full")
        assert full.values.tolist() == [[1, 0], [0, 1]]


class TestStageChain:
    def test_enhance_pseudo_train_evaluate(self, capsys, synth_dir, tmp_path):
        soft = tmp_path / "soft.txt"
        code, out, _ = run(
            capsys, "enhance", "--features", str(synth_dir / "train_features.txt"),
            "--labels", str(synth_dir / "train_labels.txt"), "--out", str(soft),
            "--steps", "8",
        )
        assert code == 0 and out.startswith("enhance ok ")

        pseudo = tmp_path / "pseudo.txt"
        code, out, _ = run(
            capsys, "pseudo", "--soft", str(soft),
            "--observed", str(synth_dir / "train_labels.txt"),
            "--val-labels", str(synth_dir / "val_labels.txt"), "--out", str(pseudo),
        )
        assert code == 0 and out.startswith("pseudo ok ")

        cooc = tmp_path / "cooc.txt"
        code, out, _ = run(
            capsys, "graph", "--val-labels", str(synth_dir / "val_labels.txt"),
            "--out", str(cooc), "--normalized", "true",
        )
        assert code == 0 and out.startswith("graph ok ")
        from lepl.graph import load_cooccurrence

        assert load_cooccurrence(cooc).C == 4

        preds = tmp_path / "preds.txt"
        code, out, _ = run(
            capsys, "train", "--features", str(synth_dir / "train_features.txt"),
            "--targets", str(pseudo), "--val-labels", str(synth_dir / "val_labels.txt"),
            "--predict-features", str(synth_dir / "test_features.txt"),
            "--out-predictions", str(preds), "--epochs", "25",
        )
        assert code == 0 and out.startswith("train ok ")

        code, out, _ = run(
            capsys, "evaluate", "--predictions", str(preds),
            "--labels", str(synth_dir / "test_labels.txt"),
            "--out-json", str(tmp_path / "report.json"),
        )
        assert code == 0 and out.startswith("evaluate ok ")
        rep = json.loads((tmp_path / "report.json").read_text())
        assert set(rep) == {"map", "lrl", "coverage_error", "one_error", "hamming_risk"}

    def test_train_without_gcn(self, capsys, synth_dir, tmp_path):
        soft = tmp_path / "soft.txt"
        run(capsys, "enhance", "--features", str(synth_dir / "train_features.txt"),
            "--labels", str(synth_dir / "train_labels.txt"), "--out", str(soft), "--steps", "5")
        pseudo = tmp_path / "pseudo.txt"
        run(capsys, "pseudo", "--soft", str(soft),
            "--observed", str(synth_dir / "train_labels.txt"),
            "--val-labels", str(synth_dir / "val_labels.txt"), "--out", str(pseudo))
        preds = tmp_path / "preds.txt"
        code, out, _ = run(
            capsys, "train", "--features", str(synth_dir / "train_features.txt"),
            "--targets", str(pseudo), "--val-labels", str(synth_dir / "val_labels.txt"),
            "--predict-features", str(synth_dir / "test_features.txt"),
            "--out-predictions", str(preds), "--epochs", "25",
            "--ablation", "enhancement,prior_pseudo",
        )
        assert code == 0 and out.startswith("train ok ")


class TestPipeline:
    def test_outputs_and_bit_identical_rerun(self, capsys, synth_dir, tmp_path):
        out1 = tmp_path / "run1"
        out2 = tmp_path / "run2"
        for out_dir in (out1, out2):
            code, out, _ = run(
                capsys, "pipeline", "--data-dir", str(synth_dir),
                "--out-dir", str(out_dir), *FAST, "--seed", "5",
            )
            assert code == 0 and out.startswith("pipeline ok ")
        for name in ("predictions.txt", "report.txt", "report.json"):
            assert (out1 / name).read_bytes() == (out2 / name).read_bytes()

    def test_flags_equal_config_file(self, capsys, synth_dir, tmp_path):
        cfg = tmp_path / "run.cfg"
        cfg.write_text("# fast settings\nsteps = 8\nepochs = 25\nseed = 5\n")
        by_cfg = tmp_path / "by_cfg"
        by_flag = tmp_path / "by_flag"
        code, _, _ = run(
            capsys, "pipeline", "--data-dir", str(synth_dir),
            "--out-dir", str(by_cfg), "--config", str(cfg),
        )
        assert code == 0
        code, _, _ = run(
            capsys, "pipeline", "--data-dir", str(synth_dir),
            "--out-dir", str(by_flag), *FAST, "--seed", "5",
        )
        assert code == 0
        assert (by_cfg / "predictions.txt").read_bytes() == (by_flag / "predictions.txt").read_bytes()

    def test_ablation_none_runs(self, capsys, synth_dir, tmp_path):
        code, out, _ = run(
            capsys, "pipeline", "--data-dir", str(synth_dir),
            "--out-dir", str(tmp_path / "o"), *FAST, "--ablation", "none",
        )
        assert code == 0 and out.startswith("pipeline ok ")

    def test_missing_split_file_is_exit_2(self, capsys, synth_dir, tmp_path):
        broken = tmp_path / "broken"
        shutil.copytree(synth_dir, broken)
        (broken / "val_labels.txt").unlink()
        code, _, err = run(
            capsys, "pipeline", "--data-dir", str(broken), "--out-dir", str(tmp_path / "o"), *FAST,
        )
        assert code == 2
        assert "val_labels.txt" in err


class TestTheoryCommands:
    def test_n0_defaults_print_frozen_value(self, capsys):
        code, out, _ = run(capsys, "theory", "n0")
        assert code == 0
        assert "n0=2451.7150184226807" in out

    def test_flag_beats_config_beats_default(self, capsys, tmp_path):
        cfg = tmp_path / "t.cfg"
        cfg.write_text("xi = 0.5\n")
        base = dict(d_H=10, epsilon=0.1, delta=0.05, C=5)

        code, out, _ = run(capsys, "theory", "n0", "--config", str(cfg))
        assert code == 0
        want = sample_complexity(TheoryParams(xi=0.5, **base))
        assert f"n0={data.format_float(want)}" in out

        code, out, _ = run(capsys, "theory", "n0", "--config", str(cfg), "--xi", "0.2")
        assert code == 0
        want = sample_complexity(TheoryParams(xi=0.2, **base))
        assert f"n0={data.format_float(want)}" in out

    def test_out_of_range_xi_is_exit_2(self, capsys):
        code, _, err = run(capsys, "theory", "n0", "--xi", "1.0")
        assert code == 2
        assert "xi" in err

    def test_compare_writes_table_and_json(self, capsys, tmp_path):
        table = tmp_path / "table.txt"
        js = tmp_path / "cmp.json"
        code, out, _ = run(
            capsys, "theory", "compare", "--seeds", "0,1",
            "--n-train", "40", "--n-val", "20", "--n-test", "15",
            "--classes", "4", "--dim", "6", *FAST,
            "--out-table", str(table), "--out-json", str(js),
        )
        assert code == 0 and out.startswith("theory-compare ok ")
        lines = table.read_text().splitlines()
        assert lines[0].split() == [
            "seed", "risk_pseudo", "risk_single", "xi_pseudo", "xi_single", "pseudo_wins",
        ]
        assert len(lines) == 3
        payload = json.loads(js.read_text())
        assert payload["seeds"] == [0, 1]
        wins_from_table = sum(int(line.split()[-1]) for line in lines[1:])
        assert payload["wins_pseudo"] == wins_from_table

    def test_bad_seed_list_is_exit_2(self, capsys):
        for bad in ("x", "", "5-2"):
            code, _, err = run(capsys, "theory", "compare", "--seeds", bad)
            assert code == 2, bad


class TestErrorPaths:
    def test_unknown_config_key_is_exit_2(self, capsys, tmp_path):
        cfg = tmp_path / "bad.cfg"
        cfg.write_text("not_a_key = 3\n")
        code, _, err = run(capsys, "theory", "n0", "--config", str(cfg))
        assert code == 2
        assert "not_a_key" in err

    def test_unparseable_flag_is_exit_2(self, capsys, tmp_path):
        code, _, err = run(
            capsys, "enhance", "--features", "x", "--labels", "y",
            "--out", str(tmp_path / "o"), "--steps", "abc",
        )
        assert code == 2
        assert "steps" in err

    def test_missing_input_path_is_exit_2(self, capsys, tmp_path):
        code, _, err = run(
            capsys, "enhance", "--features", str(tmp_path / "nope.txt"),
            "--labels", str(tmp_path / "nope2.txt"), "--out", str(tmp_path / "o"),
        )
        assert code == 2
        assert "does not exist" in err

    def test_malformed_file_is_exit_3(self, capsys, tmp_path):
        bad = tmp_path / "preds.txt"
        bad.write_text("#lepl-predictions v1 n=1 c=2\n0.5\n")
        labels = tmp_path / "labels.txt"
        labels.write_text("#lepl-labels v1 n=1 c=2 kind=full\n1 0\n")
        code, _, err = run(capsys, "evaluate", "--predictions", str(bad), "--labels", str(labels))
        assert code == 3
        assert "preds.txt" in err

    def test_evaluate_count_mismatch_names_both(self, capsys, tmp_path):
        preds = tmp_path / "preds.txt"
        preds.write_text("#lepl-predictions v1 n=2 c=2\n0.5 0.5\n0.5 0.5\n")
        labels = tmp_path / "labels.txt"
        labels.write_text("#lepl-labels v1 n=1 c=2 kind=full\n1 0\n")
        code, _, err = run(capsys, "evaluate", "--predictions", str(preds), "--labels", str(labels))
        assert code == 3
        assert "n=2" in err and "n=1" in err

    def test_library_value_error_is_exit_4(self, capsys, tmp_path):
        soft = tmp_path / "soft.txt"
        soft.write_text("#lepl-softlabels v1 n=1 c=2\n0.5 0.5\n")
        observed = tmp_path / "obs.txt"
        observed.write_text(
            "#lepl-labels v1 n=2 c=2 kind=partial\n1 0\n0 1\n"
        )
        val = tmp_path / "val.txt"
        val.write_text("#lepl-labels v1 n=2 c=2 kind=full\n1 0\n0 1\n")
        code, _, err = run(
            capsys, "pseudo", "--soft", str(soft), "--observed", str(observed),
            "--val-labels", str(val), "--out", str(tmp_path / "o"),
        )
        assert code == 4
        assert "error" in err

    def test_no_subcommand_is_exit_2(self, capsys):
        code, _, _ = run(capsys)
        assert code == 2


class TestInstalledEntryPoint:
    def test_console_script_runs(self):
        exe = shutil.which("lepl")
        assert exe, "console script should be on PATH after editable install"
        proc = subprocess.run([exe, "theory", "n0"], capture_output=True, text=True)
        assert proc.returncode == 0
        assert proc.stdout.startswith("theory-n0 ok ")
