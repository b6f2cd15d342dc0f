"""Ranking metrics against frozen examples and brute-force oracles."""

import numpy as np
import pytest

from lepl.metrics import (
    MetricsReport,
    coverage_error,
    evaluate,
    hamming_risk,
    label_ranking_loss,
    mean_average_precision,
    one_error,
    rank_of,
)

import oracles


def random_case(rng, allow_ties=True):
    n = int(rng.integers(1, 21))
    c = int(rng.integers(2, 9))
    scores = rng.random((n, c))
    if allow_ties and rng.random() < 0.7:
        # quantize hard to force plenty of exact ties
        scores = np.round(scores * 4) / 4
    truth = (rng.random((n, c)) < 0.4).astype(int)
    # keep the metrics defined: at least one positive somewhere, and at
    # least one instance with both a positive and a negative
    truth[0, 0] = 1
    truth[0, -1] = 0
    return scores, truth


class TestRankOf:
    def test_tie_resolves_by_ascending_index(self):
        assert rank_of(np.array([0.5, 0.5, 0.1]), 1) == 2

    def test_basic_descending(self):
        assert rank_of(np.array([0.1, 0.9, 0.5]), 1) == 1
        assert rank_of(np.array([0.1, 0.9, 0.5]), 0) == 3

    def test_matches_pair_counting_oracle(self):
        rng = np.random.default_rng(101)
        for _ in range(200):
            c = int(rng.integers(1, 12))
            s = np.round(rng.random(c) * 3) / 3
            j = int(rng.integers(0, c))
            assert rank_of(s, j) == oracles.rank_oracle(s, j)

    def test_ranks_are_a_permutation(self):
        rng = np.random.default_rng(7)
        s = np.round(rng.random(9) * 2) / 2
        ranks = sorted(rank_of(s, j) for j in range(9))
        assert ranks == list(range(1, 10))


class TestWorkedExamples:
    def test_average_precision_single_class(self):
        # one class, scores (0.9, 0.8, 0.1), positives at instances 0 and 2:
        # precisions 1/1 and 2/3, AP = 5/6
        scores = np.array([[0.9], [0.8], [0.1]])
        truth = np.array([[1], [0], [1]])
        assert mean_average_precision(scores, truth) == pytest.approx(5.0 / 6.0, abs=1e-12)

    def test_ranking_loss_single_pair_violations(self):
        # scores (0.2, 0.8, 0.5), positive {0}: both pairs are violations
        scores = np.array([[0.2, 0.8, 0.5]])
        truth = np.array([[1, 0, 0]])
        assert label_ranking_loss(scores, truth) == 1.0

    def test_constant_scores_count_ties_as_violations(self):
        scores = np.full((4, 3), 0.5)
        truth = np.zeros((4, 3), dtype=int)
        truth[:, 1] = 1
        assert label_ranking_loss(scores, truth) == 1.0

    def test_coverage_single_positive_ranked_last(self):
        c = 15
        scores = np.linspace(1.0, 0.1, c)[None, :]
        truth = np.zeros((1, c), dtype=int)
        truth[0, -1] = 1  # the lowest-scored class is the only positive
        assert coverage_error(scores, truth) == float(c)

    def test_one_error_half_the_instances_miss(self):
        scores = np.array([[0.9, 0.1], [0.2, 0.7]])
        truth = np.array([[1, 0], [1, 0]])
        assert one_error(scores, truth) == 0.5

    def test_one_error_tie_goes_to_lowest_index(self):
        scores = np.array([[0.5, 0.5]])
        assert one_error(scores, np.array([[1, 0]])) == 0.0
        assert one_error(scores, np.array([[0, 1]])) == 1.0

    def test_hamming_risk_one_mismatch_of_four(self):
        pred = np.array([[1, 0], [0, 1]])
        truth = np.array([[1, 0], [1, 1]])
        assert hamming_risk(pred, truth) == 0.25

    def test_hamming_binarization_tie_promotes_to_one(self):
        scores = np.array([[0.5, 0.49999]])
        truth = np.array([[1, 0]])
        assert hamming_risk(scores, truth) == 0.0
        assert hamming_risk(scores, np.array([[0, 1]])) == 1.0


class TestPerfectPredictor:
    def test_truth_as_scores_is_perfect(self):
        rng = np.random.default_rng(5)
        for _ in range(25):
            n = int(rng.integers(2, 15))
            c = int(rng.integers(2, 8))
            truth = (rng.random((n, c)) < 0.4).astype(int)
            truth[:, 0] |= truth.sum(axis=1) == 0  # no empty rows
            keep_mixed = truth.sum(axis=1) < c
            if not keep_mixed.any():
                truth[0, -1] = 0
            scores = truth.astype(float)
            assert mean_average_precision(scores, truth) == 1.0
            assert label_ranking_loss(scores, truth) == 0.0
            assert one_error(scores, truth) == 0.0
            sizes = truth.sum(axis=1)
            expected_cov = sizes[sizes >= 1].mean()
            assert coverage_error(scores, truth) == pytest.approx(expected_cov, abs=0)
            assert hamming_risk(scores, truth) == 0.0


class TestOracleEquivalence:
    def test_two_hundred_random_cases_agree_exactly(self):
        rng = np.random.default_rng(2024)
        for _ in range(200):
            scores, truth = random_case(rng)
            assert mean_average_precision(scores, truth) == oracles.map_oracle(scores, truth)
            assert label_ranking_loss(scores, truth) == oracles.lrl_oracle(scores, truth)
            assert coverage_error(scores, truth) == oracles.coverage_oracle(scores, truth)
            assert one_error(scores, truth) == oracles.one_error_oracle(scores, truth)
            binary = oracles.binarize_oracle(scores)
            assert hamming_risk(scores, truth) == oracles.hamming_oracle(binary, truth)


class TestInvariances:
    def test_strictly_increasing_transform_preserves_rank_metrics(self):
        rng = np.random.default_rng(77)
        for _ in range(20):
            scores, truth = random_case(rng)
            warped = scores**3 + scores
            assert mean_average_precision(scores, truth) == mean_average_precision(warped, truth)
            assert label_ranking_loss(scores, truth) == label_ranking_loss(warped, truth)
            assert coverage_error(scores, truth) == coverage_error(warped, truth)
            assert one_error(scores, truth) == one_error(warped, truth)

    def test_instance_permutation_equivariance(self):
        rng = np.random.default_rng(78)
        scores, truth = random_case(rng)
        perm = rng.permutation(scores.shape[0])
        # fsum reductions make the means exactly permutation invariant
        assert label_ranking_loss(scores, truth) == label_ranking_loss(scores[perm], truth[perm])
        assert coverage_error(scores, truth) == coverage_error(scores[perm], truth[perm])
        assert one_error(scores, truth) == one_error(scores[perm], truth[perm])
        assert hamming_risk(scores, truth) == hamming_risk(scores[perm], truth[perm])

    def test_class_permutation_of_map(self):
        rng = np.random.default_rng(79)
        scores, truth = random_case(rng, allow_ties=False)
        perm = rng.permutation(scores.shape[1])
        assert mean_average_precision(scores, truth) == mean_average_precision(
            scores[:, perm], truth[:, perm]
        )


class TestSkipsAndErrors:
    def test_lrl_skips_all_positive_and_all_negative_rows(self):
        scores = np.array([[0.9, 0.1], [0.5, 0.4], [0.3, 0.2]])
        truth = np.array([[1, 1], [0, 0], [1, 0]])
        only_counted = label_ranking_loss(scores[2:], truth[2:])
        assert label_ranking_loss(scores, truth) == only_counted

    def test_coverage_skips_zero_positive_rows(self):
        scores = np.array([[0.9, 0.1], [0.5, 0.4]])
        truth = np.array([[0, 0], [0, 1]])
        assert coverage_error(scores, truth) == 2.0

    def test_all_rows_skipped_is_an_error(self):
        scores = np.array([[0.9, 0.1]])
        with pytest.raises(ValueError, match="skipped"):
            label_ranking_loss(scores, np.array([[1, 1]]))
        with pytest.raises(ValueError, match="skipped"):
            coverage_error(scores, np.array([[0, 0]]))
        with pytest.raises(ValueError, match="skipped"):
            one_error(scores, np.array([[0, 0]]))

    def test_no_positives_anywhere_map_error(self):
        with pytest.raises(ValueError, match="no positives"):
            mean_average_precision(np.array([[0.5, 0.5]]), np.array([[0, 0]]))

    def test_shape_mismatch_names_both(self):
        with pytest.raises(ValueError, match="mismatch"):
            mean_average_precision(np.zeros((2, 3)), np.ones((2, 2), dtype=int))


class TestReport:
    def test_report_validates_ranges(self):
        with pytest.raises(ValueError, match="map"):
            MetricsReport(map=1.2, lrl=0.0, coverage_error=1.0, one_error=0.0, hamming_risk=0.0)
        with pytest.raises(ValueError, match="coverage_error"):
            MetricsReport(map=0.5, lrl=0.0, coverage_error=0.5, one_error=0.0, hamming_risk=0.0)

    def test_evaluate_bundles_all_five(self):
        rng = np.random.default_rng(42)
        scores, truth = random_case(rng)
        rep = evaluate(scores, truth)
        assert rep.map == mean_average_precision(scores, truth)
        assert rep.hamming_risk == hamming_risk(scores, truth)
        assert set(rep.as_dict()) == {"map", "lrl", "coverage_error", "one_error", "hamming_risk"}
