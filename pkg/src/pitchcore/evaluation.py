# pitchcore/evaluation.py
"""
Error analysis of an estimated pitch contour against a reference contour.

Relative error e(i) = (P(i) - P_est(i)) / P(i) is computed over the aligned
frames where both contours are voiced and the reference is non-zero. Its
spread is reported with

    sigma_e = sqrt( 1/(L_e - 1) * sum e(i)^2 - mean(e)^2 )

taken literally (not the textbook unbiased standard deviation, which is
reported alongside), and a contour whose sigma_e exceeds 20% is flagged as a
gross-error contour.
"""
import logging
import math
from dataclasses import dataclass
from typing import Dict, Mapping, Optional, Sequence

import numpy as np

from .errors import AlignmentError, InsufficientDataError, UndefinedCorrelationError
from .tracker import PitchContour

logger = logging.getLogger("PitchCore")

GROSS_ERROR_THRESHOLD = 0.20

# Used only when neither contour has two entries to infer a hop from.
_EXACT_TIME_TOLERANCE_MS = 1e-6


@dataclass(frozen=True, eq=False)
class ContourPair:
    """
    Truth and estimate reduced to the aligned, mutually voiced frames.

    `truth_hz` and `estimate_hz` have equal length L_e; `excluded` counts the
    aligned frames dropped because either side is unvoiced or the truth is 0.
    """
    truth: PitchContour
    estimate: PitchContour
    truth_hz: np.ndarray
    estimate_hz: np.ndarray
    excluded: int

    @property
    def length(self) -> int:
        return int(self.truth_hz.size)

    @classmethod
    def align(cls, truth: PitchContour, estimate: PitchContour) -> "ContourPair":
        """
        Matches every truth entry to the nearest estimate entry in time.
        A match farther than half a hop away raises AlignmentError.
        """
        if len(truth) == 0 or len(estimate) == 0:
            raise InsufficientDataError("Cannot align an empty contour.")

        truth_times = truth.times_ms
        estimate_times = estimate.times_ms
        step = truth.step_ms() or estimate.step_ms()
        tolerance = step / 2.0 if step else _EXACT_TIME_TOLERANCE_MS

        # estimate_times is strictly increasing, so a neighbour search suffices.
        right = np.clip(np.searchsorted(estimate_times, truth_times), 1, max(1, estimate_times.size - 1))
        left = right - 1
        if estimate_times.size == 1:
            nearest = np.zeros(truth_times.size, dtype=int)
        else:
            closer_left = np.abs(estimate_times[left] - truth_times) <= np.abs(estimate_times[right] - truth_times)
            nearest = np.where(closer_left, left, right)
        offsets = np.abs(estimate_times[nearest] - truth_times)
        if np.any(offsets > tolerance):
            worst = int(np.argmax(offsets))
            raise AlignmentError(
                f"Truth frame at {truth_times[worst]:.3f} ms has no estimate within "
                f"{tolerance:.3f} ms (nearest is {offsets[worst]:.3f} ms away)."
            )

        truth_hz = truth.pitches_hz
        estimate_hz = estimate.pitches_hz[nearest]
        keep = ~np.isnan(truth_hz) & ~np.isnan(estimate_hz) & (truth_hz != 0)
        return cls(truth, estimate, truth_hz[keep], estimate_hz[keep], int(truth_hz.size - keep.sum()))


@dataclass(frozen=True)
class EvalReport:
    mean_error: float
    sigma_e_paper: float
    sigma_e_standard: float
    pearson_r: Optional[float]  # None when a sequence is constant
    gross_error_flag: bool
    length: int

    def as_dict(self) -> Dict[str, object]:
        return {
            "mean_error": self.mean_error,
            "sigma_e_paper": self.sigma_e_paper,
            "sigma_e_standard": self.sigma_e_standard,
            "pearson_r": self.pearson_r,
            "gross_error_flag": self.gross_error_flag,
            "L_e": self.length,
        }


def relative_error(pair: ContourPair) -> np.ndarray:
    """e(i) = (P(i) - P_est(i)) / P(i) over the included frames."""
    if pair.length == 0:
        raise InsufficientDataError("No mutually voiced frames to compare.")
    return (pair.truth_hz - pair.estimate_hz) / pair.truth_hz


def sigma_e(errors: Sequence[float]) -> float:
    """The spread statistic as literally defined; a negative radicand clamps to 0."""
    e = np.asarray(errors, dtype=np.float64)
    length = e.size
    if length < 2:
        raise InsufficientDataError(f"sigma_e needs at least 2 errors, got {length}.")
    mean = e.sum() / length
    radicand = float((e * e).sum() / (length - 1) - mean * mean)
    return math.sqrt(max(0.0, radicand))


def sigma_e_standard(errors: Sequence[float]) -> float:
    e = np.asarray(errors, dtype=np.float64)
    if e.size < 2:
        raise InsufficientDataError(f"A standard deviation needs at least 2 values, got {e.size}.")
    return float(np.std(e, ddof=1))


def _pearson(x: np.ndarray, y: np.ndarray) -> float:
    if x.size < 2:
        raise InsufficientDataError("Correlation needs at least 2 pairs.")
    if np.all(x == x[0]) or np.all(y == y[0]):
        raise UndefinedCorrelationError("Correlation is undefined for a constant sequence.")
    dx = x - x.mean()
    dy = y - y.mean()
    r = float((dx * dy).sum() / math.sqrt(float((dx * dx).sum()) * float((dy * dy).sum())))
    return min(1.0, max(-1.0, r))


def pearson_r(pair: ContourPair) -> float:
    return _pearson(pair.truth_hz, pair.estimate_hz)


def evaluate(pair: ContourPair) -> EvalReport:
    errors = relative_error(pair)
    spread = sigma_e(errors)
    try:
        r: Optional[float] = pearson_r(pair)
    except UndefinedCorrelationError:
        logger.info("Correlation undefined: a contour is constant over the compared frames.")
        r = None
    return EvalReport(
        mean_error=float(errors.sum() / errors.size),
        sigma_e_paper=spread,
        sigma_e_standard=sigma_e_standard(errors),
        pearson_r=r,
        gross_error_flag=spread > GROSS_ERROR_THRESHOLD,
        length=int(errors.size),
    )


def evaluate_methods(truth: PitchContour, estimates: Mapping[str, PitchContour]) -> Dict[str, EvalReport]:
    """Evaluates several estimated contours against one truth, each aligned on its own."""
    reports = {}
    for name, estimate in estimates.items():
        reports[name] = evaluate(ContourPair.align(truth, estimate))
        logger.info("Evaluated %s: sigma_e=%.4f over %d frames.", name,
                    reports[name].sigma_e_paper, reports[name].length)
    return reports
