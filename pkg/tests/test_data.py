"""Data types, file formats, majority voting, and the synthetic benchmark."""

import numpy as np
import pytest

from lepl import data
from lepl.data import (
    AnnotationTensor,
    FeatureMatrix,
    FormatError,
    LabelMatrix,
    SynthConfig,
    load_features,
    load_labels,
    load_votes,
    majority_vote,
    synth_generate,
    write_features,
    write_labels,
    write_votes,
)


class TestTypes:
    def test_feature_matrix_rejects_non_finite(self):
        with pytest.raises(ValueError, match="non-finite"):
            FeatureMatrix(np.array([[1.0, np.nan]]))

    def test_feature_matrix_rejects_empty(self):
        with pytest.raises(ValueError):
            FeatureMatrix(np.zeros((0, 3)))

    def test_partial_labels_reject_multiple_positives(self):
        with pytest.raises(ValueError, match="exactly one positive"):
            LabelMatrix(np.array([[1, 1, 0]]), "partial")

    def test_partial_labels_reject_zero_positives(self):
        with pytest.raises(ValueError, match="exactly one positive"):
            LabelMatrix(np.array([[0, 0, 0]]), "partial")

    def test_full_labels_reject_empty_rows(self):
        with pytest.raises(ValueError, match="at least one positive"):
            LabelMatrix(np.array([[1, 0], [0, 0]]), "full")

    def test_pseudo_labels_allow_any_rows(self):
        m = LabelMatrix(np.array([[0, 0], [1, 1]]), "pseudo")
        assert m.values.sum() == 2

    def test_labels_reject_out_of_alphabet(self):
        with pytest.raises(ValueError, match="0 or 1"):
            LabelMatrix(np.array([[2, 0]]), "pseudo")

    def test_values_are_immutable(self):
        m = FeatureMatrix(np.ones((2, 2)))
        with pytest.raises(ValueError):
            m.values[0, 0] = 5.0


class TestFeatureFiles:
    def test_round_trip_bit_exact(self, tmp_path):
        rng = np.random.default_rng(0)
        # include awkward magnitudes and signed zero
        vals = np.concatenate(
            [rng.standard_normal((5, 3)) * 10.0 ** rng.integers(-8, 8, (5, 3)), [[-0.0, 0.1, 1e-300]]]
        )
        m = FeatureMatrix(vals)
        p = tmp_path / "f.txt"
        write_features(m, p)
        back = load_features(p)
        assert back.values.tobytes() == m.values.tobytes()

    def test_header_declares_shape(self, tmp_path):
        p = tmp_path / "f.txt"
        write_features(FeatureMatrix(np.zeros((2, 3))), p)
        assert p.read_text().splitlines()[0] == "#lepl-features v1 n=2 d=3"

    def test_lf_line_endings(self, tmp_path):
        p = tmp_path / "f.txt"
        write_features(FeatureMatrix(np.zeros((2, 3))), p)
        raw = p.read_bytes()
        assert b"\r" not in raw
        assert raw.endswith(b"\n")

    def test_malformed_header(self, tmp_path):
        p = tmp_path / "f.txt"
        p.write_text("#lepl-features v2 n=1 d=1\n0.0\n")
        with pytest.raises(FormatError) as err:
            load_features(p)
        assert err.value.line == 1

    def test_row_count_mismatch(self, tmp_path):
        p = tmp_path / "f.txt"
        p.write_text("#lepl-features v1 n=3 d=1\n0.0\n1.0\n")
        with pytest.raises(FormatError, match="row-count mismatch"):
            load_features(p)

    def test_non_numeric_token_names_line(self, tmp_path):
        p = tmp_path / "f.txt"
        p.write_text("#lepl-features v1 n=2 d=2\n0.0 1.0\n0.0 abc\n")
        with pytest.raises(FormatError, match="non-numeric") as err:
            load_features(p)
        assert err.value.line == 3

    def test_nan_token_is_non_finite_error(self, tmp_path):
        p = tmp_path / "f.txt"
        p.write_text("#lepl-features v1 n=1 d=2\nNaN 1.0\n")
        with pytest.raises(FormatError, match="non-finite") as err:
            load_features(p)
        assert err.value.line == 2

    def test_wrong_width_row(self, tmp_path):
        p = tmp_path / "f.txt"
        p.write_text("#lepl-features v1 n=1 d=3\n1.0 2.0\n")
        with pytest.raises(FormatError, match="expected 3 values"):
            load_features(p)


class TestLabelFiles:
    def test_round_trip(self, tmp_path):
        m = LabelMatrix(np.array([[1, 0, 0], [0, 0, 1]]), "partial")
        p = tmp_path / "l.txt"
        write_labels(m, p)
        back = load_labels(p, "partial")
        assert np.array_equal(back.values, m.values)
        assert back.kind == "partial"

    def test_kind_mismatch_is_error(self, tmp_path):
        m = LabelMatrix(np.array([[1, 0], [0, 1]]), "partial")
        p = tmp_path / "l.txt"
        write_labels(m, p)
        with pytest.raises(FormatError, match="kind mismatch"):
            load_labels(p, "full")

    def test_partial_row_invariant_checked_with_line(self, tmp_path):
        p = tmp_path / "l.txt"
        p.write_text("#lepl-labels v1 n=2 c=3 kind=partial\n1 0 0\n1 1 0\n")
        with pytest.raises(FormatError, match="exactly one positive") as err:
            load_labels(p, "partial")
        assert err.value.line == 3

    def test_entry_outside_alphabet(self, tmp_path):
        p = tmp_path / "l.txt"
        p.write_text("#lepl-labels v1 n=1 c=2 kind=full\n1 2\n")
        with pytest.raises(FormatError, match="outside"):
            load_labels(p, "full")

    def test_pseudo_kind_supported(self, tmp_path):
        m = LabelMatrix(np.array([[0, 0], [1, 1]]), "pseudo")
        p = tmp_path / "l.txt"
        write_labels(m, p)
        back = load_labels(p, "pseudo")
        assert np.array_equal(back.values, m.values)


class TestVoteFiles:
    def test_round_trip_grouped_by_instance(self, tmp_path):
        rng = np.random.default_rng(3)
        t = AnnotationTensor(rng.integers(0, 2, (4, 3, 5)))
        p = tmp_path / "v.txt"
        write_votes(t, p)
        lines = p.read_text().splitlines()
        assert lines[0] == "#lepl-votes v1 n=4 c=5 a=3"
        assert len(lines) == 1 + 4 * 3
        back = load_votes(p)
        assert np.array_equal(back.votes, t.votes)


class TestMajorityVote:
    def test_worked_example(self):
        # three annotators over three classes: strict majority keeps a class
        # only when two or more of the three marked it
        votes = np.array([[[1, 0, 0], [1, 1, 0], [0, 1, 1]]])
        out = majority_vote(AnnotationTensor(votes))
        assert out.kind == "full"
        assert np.array_equal(out.values, [[1, 1, 0]])

    def test_strict_majority_boundary(self):
        # 5 of 10 is not a majority; 6 of 10 is
        five = np.zeros((1, 10, 1), dtype=int)
        five[0, :5, 0] = 1
        six = np.zeros((1, 10, 2), dtype=int)
        six[0, :6, 0] = 1
        assert majority_vote(AnnotationTensor(six)).values[0, 0] == 1
        # the five-vote class loses and the row falls back to the catch-all
        out = majority_vote(AnnotationTensor(five))
        assert np.array_equal(out.values, [[1]])  # C=1: catch-all is the class itself

    def test_no_majority_falls_back_to_last_class(self):
        votes = np.zeros((1, 3, 4), dtype=int)
        votes[0, 0, 0] = 1  # one lone vote, no majority anywhere
        out = majority_vote(AnnotationTensor(votes))
        assert np.array_equal(out.values, [[0, 0, 0, 1]])

    def test_annotator_permutation_invariance(self):
        rng = np.random.default_rng(11)
        votes = rng.integers(0, 2, (6, 5, 4))
        base = majority_vote(AnnotationTensor(votes))
        for _ in range(5):
            perm = rng.permutation(5)
            shuffled = majority_vote(AnnotationTensor(votes[:, perm]))
            assert np.array_equal(shuffled.values, base.values)

    def test_output_rows_never_empty(self):
        rng = np.random.default_rng(12)
        for _ in range(20):
            votes = rng.integers(0, 2, (8, 3, 5))
            out = majority_vote(AnnotationTensor(votes))
            assert (out.values.sum(axis=1) >= 1).all()


class TestSynth:
    def test_shapes_and_kinds(self):
        cfg = SynthConfig(n_train=40, n_val=15, n_test=12, C=5, d=7, max_active=2, seed=1)
        s = synth_generate(cfg)
        assert s.train_x.values.shape == (40, 7)
        assert s.train_partial.kind == "partial"
        assert s.train_true.kind == "full"
        assert s.val_full.values.shape == (15, 5)
        assert s.test_x.values.shape == (12, 7)

    def test_bit_identical_for_same_seed(self):
        cfg = SynthConfig(n_train=30, n_val=10, n_test=10, C=4, d=6, max_active=3, seed=9)
        a = synth_generate(cfg)
        b = synth_generate(cfg)
        assert a.train_x.values.tobytes() == b.train_x.values.tobytes()
        assert np.array_equal(a.train_partial.values, b.train_partial.values)
        assert a.test_x.values.tobytes() == b.test_x.values.tobytes()

    def test_seed_changes_output(self):
        cfg = SynthConfig(n_train=30, n_val=10, n_test=10, C=4, d=6, max_active=3, seed=9)
        other = synth_generate(SynthConfig(n_train=30, n_val=10, n_test=10, C=4, d=6, max_active=3, seed=10))
        assert synth_generate(cfg).train_x.values.tobytes() != other.train_x.values.tobytes()

    def test_observed_label_is_active(self):
        s = synth_generate(SynthConfig(n_train=50, n_val=10, n_test=10, C=6, d=8, max_active=3, seed=2))
        # the single observed positive must be among the true actives
        assert (s.train_true.values[s.train_partial.values == 1] == 1).all()

    def test_active_counts_bounded(self):
        s = synth_generate(SynthConfig(n_train=50, n_val=20, n_test=20, C=6, d=8, max_active=3, seed=3))
        for m in (s.train_true, s.val_full, s.test_full):
            rows = m.values.sum(axis=1)
            assert rows.min() >= 1 and rows.max() <= 3

    def test_every_class_prior_strictly_inside_unit_interval(self):
        # frozen property of the documented configuration
        cfg = SynthConfig(n_train=100, n_val=20, n_test=20, C=4, d=16, max_active=2, seed=7)
        s = synth_generate(cfg)
        counts = s.train_true.values.sum(axis=0)
        assert (counts > 0).all() and (counts < 100).all()

    def test_zero_noise_single_active_observed_equals_truth(self):
        cfg = SynthConfig(n_train=25, n_val=10, n_test=10, C=5, d=6, max_active=1, noise_sigma=0.0, seed=4)
        s = synth_generate(cfg)
        assert np.array_equal(s.train_partial.values, s.train_true.values)

    def test_max_active_must_fit_class_count(self):
        with pytest.raises(ValueError, match="max_active"):
            SynthConfig(C=3, max_active=4)
