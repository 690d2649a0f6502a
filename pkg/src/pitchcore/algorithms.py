# pitchcore/algorithms.py
"""
Lag-domain periodicity measures and period picking.

Three measures are computed over a frame y = (y_1, ..., y_n) for trial periods k:

* autocovariance / autocorrelation
      r(k)   = 1/(n-k) * sum_{i=1}^{n-k} (y_i - mean)(y_{i+k} - mean)
      rho(k) = r(k) / r(0)
* AMDF
      D(k)   = 1/(n-k) * sum_{j=1}^{n-k} |y_{j+k} - y_j|
* ASMDF
      g(k)   = 1/q_k * sum over residue classes mod k with >= 2 members of
               the class's sample variance (denominator m-1)

ASMDF and AMDF dip at period multiples, autocorrelation peaks there.
"""
import logging
from collections import Counter
from dataclasses import dataclass
from enum import Enum
from typing import Callable, Dict, List, Optional

import numpy as np

from .errors import DomainError, UndefinedMeasureError
from .signal_core import Frame, LagRange, lag_to_freq

logger = logging.getLogger("PitchCore")

# Relative tolerance (of a curve's value range) under which two lag values tie.
TIE_RTOL = 1e-9


class MeasureKind(str, Enum):
    ASMDF = "asmdf"
    AMDF = "amdf"
    AUTOCORRELATION = "autocorr"
    AMDF_APPROX = "amdf_approx"

    @property
    def minimizing(self) -> bool:
        """Whether periods show up as dips (True) or peaks (False)."""
        return self is not MeasureKind.AUTOCORRELATION

    @classmethod
    def parse(cls, name: str) -> "MeasureKind":
        aliases = {"autocorrelation": cls.AUTOCORRELATION, "acf": cls.AUTOCORRELATION}
        key = name.strip().lower()
        if key in aliases:
            return aliases[key]
        try:
            return cls(key)
        except ValueError:
            raise DomainError(f"Unknown measure '{name}'.") from None


# The three methods compared side by side.
CORE_MEASURES = (MeasureKind.ASMDF, MeasureKind.AMDF, MeasureKind.AUTOCORRELATION)


class PickerKind(str, Enum):
    GLOBAL_MIN = "global"
    FIRST_DIP = "dip1"
    SECOND_DIP = "dip2"

    @classmethod
    def parse(cls, name: str) -> "PickerKind":
        try:
            return cls(name.strip().lower())
        except ValueError:
            raise DomainError(f"Unknown picker '{name}'. Use global, dip1 or dip2.") from None


@dataclass(frozen=True)
class PickerStrategy:
    """
    How a period is read off a lag curve.

    `dip_threshold` (alpha) applies to the dip strategies: a local extremum
    qualifies when its normalized depth is at least alpha, depth being 1 at the
    curve's best value and 0 at its worst.
    """
    kind: PickerKind = PickerKind.GLOBAL_MIN
    dip_threshold: float = 0.5

    def __post_init__(self):
        if not 0 < self.dip_threshold <= 1:
            raise DomainError(f"dip_threshold must lie in (0, 1], got {self.dip_threshold}.")


class OpCounter:
    """Tallies the floating add/sub/mul/div/abs/sqrt operations done by the kernels."""

    KINDS = ("add", "sub", "mul", "div", "abs", "sqrt")

    def __init__(self):
        self.counts: Counter = Counter()

    def add(self, **ops: int) -> None:
        for kind, count in ops.items():
            if kind not in self.KINDS:
                raise KeyError(f"Unknown operation kind '{kind}'.")
            if count > 0:
                self.counts[kind] += int(count)

    @property
    def total(self) -> int:
        return sum(self.counts.values())

    def reset(self) -> None:
        self.counts.clear()


def _check_lag(n: int, k: int, lowest: int) -> None:
    if k < lowest or k > n - 1:
        raise DomainError(f"Lag {k} outside [{lowest}, {n - 1}] for a frame of {n} samples.")


def _is_constant(y: np.ndarray) -> bool:
    return bool(np.all(y == y[0]))


def _centered(y: np.ndarray, counter: Optional[OpCounter]) -> np.ndarray:
    n = y.size
    if counter is not None:
        counter.add(add=n - 1, div=1, sub=n)
    return y - y.sum() / n


def _lagged_product_mean(centered: np.ndarray, k: int, counter: Optional[OpCounter]) -> float:
    n = centered.size
    if counter is not None:
        counter.add(mul=n - k, add=n - k - 1, div=1)
    return float(np.sum(centered[:n - k] * centered[k:]) / (n - k))


# ────────────────────────────────────────────────────────────
# Autocovariance / autocorrelation

def autocovariance(frame: Frame, k: int, counter: Optional[OpCounter] = None) -> float:
    y = frame.samples
    _check_lag(y.size, k, 0)
    if _is_constant(y):
        return 0.0
    return _lagged_product_mean(_centered(y, counter), k, counter)


def autocorrelation(frame: Frame, k: int, counter: Optional[OpCounter] = None) -> float:
    """
    rho(k) = r(k) / r(0), clamped to [-1, 1].

    With the 1/(n-k) divisor |r(k)| can exceed r(0) on short or sparse frames;
    the clamp keeps the measure inside its nominal range.
    """
    y = frame.samples
    _check_lag(y.size, k, 0)
    if _is_constant(y):
        raise UndefinedMeasureError("Autocorrelation is undefined for a constant frame (r(0) = 0).")
    if k == 0:
        return 1.0
    centered = _centered(y, counter)
    r0 = _lagged_product_mean(centered, 0, counter)
    rk = _lagged_product_mean(centered, k, counter)
    if counter is not None:
        counter.add(div=1)
    return float(np.clip(rk / r0, -1.0, 1.0))


# ────────────────────────────────────────────────────────────
# AMDF

def amdf(frame: Frame, k: int, counter: Optional[OpCounter] = None) -> float:
    y = frame.samples
    n = y.size
    _check_lag(n, k, 1)
    if counter is not None:
        counter.add(sub=n - k, abs=n - k, add=n - k - 1, div=1)
    return float(np.sum(np.abs(y[k:] - y[:n - k])) / (n - k))


def amdf_approx(frame: Frame, k: int, counter: Optional[OpCounter] = None) -> float:
    """The autocovariance stand-in for AMDF: sqrt(2 * (r(0) - r(k)))."""
    y = frame.samples
    _check_lag(y.size, k, 1)
    if _is_constant(y):
        return 0.0
    centered = _centered(y, counter)
    r0 = _lagged_product_mean(centered, 0, counter)
    rk = _lagged_product_mean(centered, k, counter)
    if counter is not None:
        counter.add(sub=1, mul=1, sqrt=1)
    return float(np.sqrt(max(0.0, 2.0 * (r0 - rk))))


# ────────────────────────────────────────────────────────────
# ASMDF

def residue_classes(frame: Frame, k: int) -> List[np.ndarray]:
    """
    The k downsampled subsets y_{i,k}: samples whose indices agree mod k,
    each in index order. Class i and class i+k are the same set, so each
    residue appears once.
    """
    y = frame.samples
    _check_lag(y.size, k, 1)
    return [y[r::k] for r in range(k)]


def _class_sizes(n: int, k: int) -> np.ndarray:
    return n // k + (np.arange(k) < n % k)


def asmdf_g(frame: Frame, k: int, counter: Optional[OpCounter] = None) -> float:
    """g(k): mean sample variance over the residue classes with at least two members."""
    y = frame.samples
    n = y.size
    _check_lag(n, k, 1)

    sizes = _class_sizes(n, k)
    usable = sizes >= 2
    q = int(np.count_nonzero(usable))
    if q == 0:
        raise UndefinedMeasureError(f"No residue class of lag {k} has two members.")

    # Column c of the zero-padded (rows x k) matrix holds residue class c.
    rows = -(-n // k)
    padded = np.zeros(rows * k)
    padded[:n] = y
    table = padded.reshape(rows, k)
    members = np.arange(rows)[:, None] < sizes[None, :]

    means = table.sum(axis=0) / sizes
    deviations = np.where(members, table - means, 0.0)
    variances = (deviations * deviations).sum(axis=0)[usable] / (sizes[usable] - 1)

    if counter is not None:
        m = sizes[usable]
        counter.add(
            add=int(np.sum(2 * (m - 1))) + q - 1,
            sub=int(np.sum(m)),
            mul=int(np.sum(m)),
            div=2 * q + 1,
        )
    return float(variances.sum() / q)


def asmdf_pairsum(frame: Frame, k: int, counter: Optional[OpCounter] = None) -> float:
    """
    g(k) through pairs: 1/(2|C_k|) * sum over ordered pairs (i, j), i != j,
    k | (i - j), of (y_i - y_j)^2.

    Equal to asmdf_g whenever k divides n.
    """
    y = frame.samples
    n = y.size
    _check_lag(n, k, 1)

    squared_sum = 0.0
    pair_count = 0
    for d in range(k, n, k):
        diffs = y[d:] - y[:n - d]
        squared_sum += float(np.sum(diffs * diffs))
        pair_count += n - d
        if counter is not None:
            counter.add(sub=n - d, mul=n - d, add=n - d)
    if pair_count == 0:
        raise UndefinedMeasureError(f"C_k is empty for lag {k}.")
    if counter is not None:
        counter.add(mul=1, div=1)
    # Ordered pairs double both the sum and |C_k|.
    return squared_sum / (2.0 * pair_count)


MEASURE_FUNCTIONS: Dict[MeasureKind, Callable[[Frame, int, Optional[OpCounter]], float]] = {
    MeasureKind.ASMDF: asmdf_g,
    MeasureKind.AMDF: amdf,
    MeasureKind.AUTOCORRELATION: autocorrelation,
    MeasureKind.AMDF_APPROX: amdf_approx,
}


# ────────────────────────────────────────────────────────────
# Lag curves

@dataclass(frozen=True, eq=False)
class LagCurve:
    """
    A measure evaluated over k_min..k_max. Undefined lags hold NaN and are
    False in `defined_mask`; they are never filled in.
    """
    k_min: int
    values: np.ndarray
    measure_kind: MeasureKind
    defined_mask: np.ndarray

    def __post_init__(self):
        if self.values.shape != self.defined_mask.shape:
            raise DomainError("values and defined_mask must have the same length.")

    @property
    def k_max(self) -> int:
        return self.k_min + self.values.size - 1

    @property
    def lags(self) -> np.ndarray:
        return np.arange(self.k_min, self.k_max + 1)

    def value_at(self, k: int) -> Optional[float]:
        index = k - self.k_min
        if not 0 <= index < self.values.size:
            raise DomainError(f"Lag {k} outside curve range [{self.k_min}, {self.k_max}].")
        return float(self.values[index]) if self.defined_mask[index] else None

    @property
    def any_defined(self) -> bool:
        return bool(self.defined_mask.any())


def _correlation_curve(frame: Frame, lags: np.ndarray, measure: MeasureKind,
                       counter: Optional[OpCounter]) -> np.ndarray:
    """Autocorrelation and the AMDF approximation share one centering and one r(0)."""
    y = frame.samples
    if _is_constant(y):
        if measure is MeasureKind.AUTOCORRELATION:
            return np.full(lags.size, np.nan)
        return np.zeros(lags.size)
    centered = _centered(y, counter)
    r0 = _lagged_product_mean(centered, 0, counter)
    values = np.empty(lags.size)
    for index, k in enumerate(lags):
        rk = _lagged_product_mean(centered, int(k), counter)
        if measure is MeasureKind.AUTOCORRELATION:
            values[index] = min(1.0, max(-1.0, rk / r0))
            if counter is not None:
                counter.add(div=1)
        else:
            values[index] = np.sqrt(max(0.0, 2.0 * (r0 - rk)))
            if counter is not None:
                counter.add(sub=1, mul=1, sqrt=1)
    return values


def lag_curve(frame: Frame, lag_range: LagRange, measure: MeasureKind,
              counter: Optional[OpCounter] = None, strict: bool = True) -> LagCurve:
    """
    Evaluates `measure` at every lag of `lag_range`.

    With strict=True a curve with no defined lag raises UndefinedMeasureError;
    strict=False returns it fully masked instead (used for CSV export).
    """
    lag_range.validate_for(len(frame))
    lags = lag_range.lags()

    if measure in (MeasureKind.AUTOCORRELATION, MeasureKind.AMDF_APPROX):
        values = _correlation_curve(frame, lags, measure, counter)
    else:
        kernel = MEASURE_FUNCTIONS[measure]
        values = np.empty(lags.size)
        for index, k in enumerate(lags):
            try:
                values[index] = kernel(frame, int(k), counter)
            except UndefinedMeasureError:
                values[index] = np.nan

    defined = ~np.isnan(values)
    if strict and not defined.any():
        raise UndefinedMeasureError(
            f"{measure.value} is undefined at every lag in [{lag_range.k_min}, {lag_range.k_max}]."
        )
    values.setflags(write=False)
    defined.setflags(write=False)
    return LagCurve(lag_range.k_min, values, measure, defined)


# ────────────────────────────────────────────────────────────
# Period picking

def _oriented(curve: LagCurve) -> np.ndarray:
    """Values flipped so that smaller is always better; NaN where undefined."""
    return curve.values if curve.measure_kind.minimizing else -curve.values


def _local_extrema(score: np.ndarray, defined: np.ndarray) -> List[int]:
    """
    Indices strictly below their left neighbour and not above their right one;
    a flat run counts once, at its leftmost index, when the value after it rises.
    Range ends and lags next to undefined ones never qualify.
    """
    found = []
    size = score.size
    index = 1
    while index < size - 1:
        if not (defined[index - 1] and defined[index]) or not score[index] < score[index - 1]:
            index += 1
            continue
        end = index
        while end + 1 < size and defined[end + 1] and score[end + 1] == score[index]:
            end += 1
        if end + 1 < size and defined[end + 1] and score[end + 1] > score[index]:
            found.append(index)
        index = end + 1
    return found


def find_dips(curve: LagCurve, strategy: PickerStrategy) -> List[int]:
    """
    All qualifying dips (peaks, for autocorrelation) in increasing k.

    A local extremum qualifies when its normalized depth reaches the
    strategy's dip_threshold. A flat curve has none.
    """
    if not curve.any_defined:
        return []
    score = _oriented(curve)
    defined = curve.defined_mask
    best = float(np.min(score[defined]))
    worst = float(np.max(score[defined]))
    spread = worst - best
    if spread <= 0:
        return []
    dips = []
    for index in _local_extrema(score, defined):
        depth = (worst - score[index]) / spread
        if depth >= strategy.dip_threshold - TIE_RTOL:
            dips.append(curve.k_min + index)
    return dips


def pick_period(curve: LagCurve, strategy: PickerStrategy = PickerStrategy()) -> Optional[int]:
    """
    The lag read off the curve, or None when no estimate exists.

    GLOBAL_MIN takes the best defined value (lowest dip, highest
    autocorrelation peak); values within TIE_RTOL of the curve's spread tie
    and resolve to the smallest k.
    """
    if not curve.any_defined:
        return None

    if strategy.kind is PickerKind.GLOBAL_MIN:
        score = _oriented(curve)
        defined = curve.defined_mask
        best = float(np.min(score[defined]))
        spread = float(np.max(score[defined])) - best
        tied = defined & (score <= best + TIE_RTOL * spread)
        return curve.k_min + int(np.flatnonzero(tied)[0])

    dips = find_dips(curve, strategy)
    wanted = 0 if strategy.kind is PickerKind.FIRST_DIP else 1
    if len(dips) <= wanted:
        return None
    return dips[wanted]


def estimate_pitch(frame: Frame, lag_range: LagRange, measure: MeasureKind,
                   strategy: PickerStrategy = PickerStrategy()) -> Optional[float]:
    """Pitch in Hz for one frame, or None (no estimate)."""
    try:
        curve = lag_curve(frame, lag_range, measure)
    except UndefinedMeasureError as exc:
        logger.debug("No estimate for frame at %d: %s", frame.start_index, exc)
        return None
    k = pick_period(curve, strategy)
    if k is None:
        return None
    return lag_to_freq(k, frame.sample_rate_hz)
