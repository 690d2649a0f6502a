# test_evaluation.py
import math

import numpy as np
import pytest

from src.pitchcore import evaluation
from src.pitchcore.errors import AlignmentError, InsufficientDataError, UndefinedCorrelationError
from src.pitchcore.evaluation import (
    GROSS_ERROR_THRESHOLD,
    ContourPair,
    evaluate,
    evaluate_methods,
    pearson_r,
    relative_error,
    sigma_e,
    sigma_e_standard,
)
from src.pitchcore.tracker import PitchContour


def contour(pitches, step=5.0, start=0.0):
    return PitchContour.from_pairs((start + i * step, p) for i, p in enumerate(pitches))


def pair(truth, estimate):
    return ContourPair.align(contour(truth), contour(estimate))


def test_relative_error_examples():
    np.testing.assert_array_equal(relative_error(pair([200, 200], [200, 200])), [0.0, 0.0])
    np.testing.assert_allclose(relative_error(pair([200], [180])), [0.1])
    aligned = pair([100, None, 100], [90, 50, 110])
    np.testing.assert_allclose(relative_error(aligned), [0.1, -0.1])
    assert aligned.length == 2
    assert aligned.excluded == 1


def test_zero_truth_and_unvoiced_estimates_are_excluded():
    aligned = pair([0, 120, 130, 140], [100, None, 130, 150])
    assert aligned.length == 2
    np.testing.assert_array_equal(aligned.truth_hz, [130.0, 140.0])


def test_nothing_to_compare():
    with pytest.raises(InsufficientDataError):
        relative_error(pair([None, None], [100, 100]))


def test_sigma_e_examples():
    assert sigma_e([0.1, -0.1]) == pytest.approx(math.sqrt(0.02), abs=1e-12)
    assert sigma_e([0.1, -0.1]) == pytest.approx(0.1414213562373095, abs=1e-12)
    assert sigma_e([0.0, 0.0, 0.0]) == 0.0
    for c in (0.3, -0.05, 0.25):
        assert sigma_e([c, c]) == pytest.approx(abs(c), abs=1e-12)
        assert sigma_e_standard([c, c]) == pytest.approx(0.0, abs=1e-15)
    with pytest.raises(InsufficientDataError):
        sigma_e([0.1])


def test_sigma_e_is_permutation_invariant(rng):
    errors = rng.normal(0, 0.1, 100)
    assert sigma_e(errors) == pytest.approx(sigma_e(rng.permutation(errors)), rel=1e-12)


def test_sigma_e_with_zero_mean():
    errors = np.array([0.2, -0.1, -0.1, 0.3, -0.3])
    assert sigma_e(errors) == pytest.approx(math.sqrt(np.sum(errors ** 2) / 4), rel=1e-12)


def test_pearson_r_examples():
    x = [110, 120, 135, 150, 170]
    assert pearson_r(pair(x, x)) == pytest.approx(1.0, abs=1e-12)
    assert pearson_r(pair(x, [400 - v for v in x])) == pytest.approx(-1.0, abs=1e-12)
    with pytest.raises(UndefinedCorrelationError):
        pearson_r(pair([200, 200, 200], x[:3]))


def test_evaluate_perfect_estimate():
    report = evaluate(pair([100, 120, 140], [100, 120, 140]))
    assert report.mean_error == 0.0
    assert report.sigma_e_paper == 0.0
    assert report.pearson_r == pytest.approx(1.0)
    assert not report.gross_error_flag
    assert report.length == 3


def test_evaluate_constant_error_and_undefined_correlation():
    report = evaluate(pair([200] * 4, [180] * 4))
    assert report.mean_error == pytest.approx(0.1)
    # Literal formula: 4/3 * 0.01 - 0.01
    assert report.sigma_e_paper == pytest.approx(math.sqrt(0.01 / 3), rel=1e-9)
    assert report.pearson_r is None
    assert report.as_dict()["L_e"] == 4


def test_gross_error_flag_is_strictly_above_threshold(monkeypatch):
    assert evaluate(pair([100, 100], [75, 75])).gross_error_flag
    assert not evaluate(pair([100, 110, 120], [90, 99, 108])).gross_error_flag
    monkeypatch.setattr(evaluation, "sigma_e", lambda errors: GROSS_ERROR_THRESHOLD)
    assert not evaluate(pair([100, 110, 120], [90, 99, 108])).gross_error_flag


def test_evaluate_matches_single_pass_reference(rng):
    truth = rng.uniform(80, 300, 1000)
    estimate = truth * (1 + rng.normal(0, 0.05, 1000))
    report = evaluate(pair(truth.tolist(), estimate.tolist()))

    sum_e = sum_e2 = 0.0
    for p, q in zip(truth, estimate):
        e = (p - q) / p
        sum_e += e
        sum_e2 += e * e
    mean = sum_e / 1000
    assert report.mean_error == pytest.approx(mean, rel=1e-12, abs=1e-14)
    assert report.sigma_e_paper == pytest.approx(math.sqrt(sum_e2 / 999 - mean * mean), rel=1e-12)
    assert report.pearson_r == pytest.approx(np.corrcoef(truth, estimate)[0, 1], rel=1e-12)


def test_alignment_within_half_a_hop():
    truth = contour([100, 110, 120], step=10.0)
    estimate = contour([101, 111, 121], step=10.0, start=4.0)
    aligned = ContourPair.align(truth, estimate)
    np.testing.assert_array_equal(aligned.estimate_hz, [101.0, 111.0, 121.0])
    with pytest.raises(AlignmentError):
        ContourPair.align(truth, contour([101, 111, 121], step=10.0, start=6.0))
    with pytest.raises(InsufficientDataError):
        ContourPair.align(truth, PitchContour(()))


def test_evaluate_methods_reports_each_estimate():
    truth = contour([200] * 5)
    reports = evaluate_methods(truth, {"asmdf": contour([200, 200, 200, 200, 190]), "amdf": contour([180] * 5)})
    assert list(reports) == ["asmdf", "amdf"]
    assert reports["amdf"].mean_error == pytest.approx(0.1)
    assert reports["asmdf"].pearson_r is None
