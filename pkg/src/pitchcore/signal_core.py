# pitchcore/signal_core.py
"""
Foundational types: sampled signals, analysis frames, lag ranges and the
framing iterator the tracker walks a signal with.
"""
import math
from dataclasses import dataclass
from typing import Dict, Iterator, List, Optional, Tuple

import numpy as np

from .errors import DomainError, EmptyInputError

# Typical fundamental-frequency ranges in Hz.
PITCH_BANDS: Dict[str, Tuple[float, float]] = {
    "male": (80.0, 200.0),
    "female": (150.0, 350.0),
    "speech": (50.0, 500.0),
}

DEFAULT_F_MIN_PITCH = 50.0
DEFAULT_F_MAX_PITCH = 500.0


def _frozen_array(values) -> np.ndarray:
    array = np.array(values, dtype=np.float64)
    array.setflags(write=False)
    return array


@dataclass(frozen=True, eq=False)
class Signal:
    """An immutable sampled waveform. `sample_rate_hz` is the original rate f0."""
    samples: np.ndarray
    sample_rate_hz: float

    def __post_init__(self):
        samples = _frozen_array(self.samples)
        if samples.ndim != 1 or samples.size == 0:
            raise EmptyInputError("A signal needs a non-empty, one-dimensional sample sequence.")
        if not np.all(np.isfinite(samples)):
            raise DomainError("Signal samples must be finite.")
        if not self.sample_rate_hz > 0:
            raise DomainError(f"Sample rate must be positive, got {self.sample_rate_hz}.")
        object.__setattr__(self, "samples", samples)
        object.__setattr__(self, "sample_rate_hz", float(self.sample_rate_hz))

    def __len__(self) -> int:
        return int(self.samples.size)

    @property
    def duration_ms(self) -> float:
        return len(self) / self.sample_rate_hz * 1000.0

    def scaled(self, gain: float, offset: float = 0.0) -> "Signal":
        """Returns gain*y + offset at the same sample rate."""
        return Signal(gain * self.samples + offset, self.sample_rate_hz)


@dataclass(frozen=True, eq=False)
class Frame:
    """
    A contiguous window of a parent Signal.

    `samples` is a read-only view into the parent, so frames never copy.
    """
    samples: np.ndarray
    start_index: int
    sample_rate_hz: float

    def __post_init__(self):
        samples = np.asarray(self.samples, dtype=np.float64)
        if samples.ndim != 1 or samples.size < 2:
            raise DomainError("A frame needs at least two samples.")
        if self.start_index < 0:
            raise DomainError("Frame start index cannot be negative.")
        if samples.flags.writeable:
            samples = samples.view()
            samples.setflags(write=False)
        object.__setattr__(self, "samples", samples)

    @classmethod
    def of(cls, signal: Signal, start_index: int, length: int) -> "Frame":
        if start_index < 0 or start_index + length > len(signal):
            raise DomainError(
                f"Frame [{start_index}, {start_index + length}) exceeds signal length {len(signal)}."
            )
        return cls(signal.samples[start_index:start_index + length], start_index, signal.sample_rate_hz)

    @classmethod
    def from_values(cls, values, sample_rate_hz: float = 1.0) -> "Frame":
        """A free-standing frame, handy for analysing a bare array."""
        return cls(_frozen_array(values), 0, sample_rate_hz)

    def __len__(self) -> int:
        return int(self.samples.size)

    @property
    def start_time_ms(self) -> float:
        return self.start_index / self.sample_rate_hz * 1000.0


def max_lag_for(n: int) -> int:
    """Largest admissible lag for a frame of n samples: floor((n+1)/2) - 2."""
    return (n + 1) // 2 - 2


@dataclass(frozen=True)
class LagRange:
    """Inclusive range of trial periods k_min..k_max, in samples."""
    k_min: int
    k_max: int

    def __post_init__(self):
        if self.k_min < 1:
            raise DomainError(f"k_min must be at least 1, got {self.k_min}.")
        if self.k_min > self.k_max:
            raise DomainError(f"Empty lag range [{self.k_min}, {self.k_max}].")

    def __len__(self) -> int:
        return self.k_max - self.k_min + 1

    def lags(self) -> np.ndarray:
        return np.arange(self.k_min, self.k_max + 1)

    def validate_for(self, n: int) -> None:
        limit = max_lag_for(n)
        if self.k_max > limit:
            raise DomainError(
                f"k_max={self.k_max} exceeds floor((n+1)/2)-2={limit} for a frame of {n} samples."
            )

    @classmethod
    def from_pitch_band(cls, sample_rate_hz: float, n: int,
                        f_min_pitch: float = DEFAULT_F_MIN_PITCH,
                        f_max_pitch: float = DEFAULT_F_MAX_PITCH,
                        k0: int = 1) -> "LagRange":
        """
        Lag range covering a pitch band for frames of n samples:
        k_min = max(k0, ceil(f0/f_max)), k_max = min(floor(f0/f_min), floor((n+1)/2)-2).
        """
        validate_pitch_band(f_min_pitch, f_max_pitch, sample_rate_hz)
        k_min = max(k0, math.ceil(sample_rate_hz / f_max_pitch))
        k_max = min(math.floor(sample_rate_hz / f_min_pitch), max_lag_for(n))
        if k_min > k_max:
            raise DomainError(
                f"Pitch band [{f_min_pitch}, {f_max_pitch}] Hz maps to no lag for "
                f"window {n} at {sample_rate_hz} Hz."
            )
        return cls(k_min, k_max)


def validate_pitch_band(f_min_pitch: float, f_max_pitch: float, sample_rate_hz: float) -> None:
    if not 0 < f_min_pitch < f_max_pitch < sample_rate_hz / 2:
        raise DomainError(
            f"Pitch band must satisfy 0 < fmin < fmax < {sample_rate_hz / 2:g} Hz, "
            f"got [{f_min_pitch}, {f_max_pitch}]."
        )


def resolve_pitch_band(name: str) -> Tuple[float, float]:
    try:
        return PITCH_BANDS[name.lower()]
    except KeyError:
        raise DomainError(f"Unknown pitch band '{name}'. Known bands: {', '.join(PITCH_BANDS)}.") from None


@dataclass(frozen=True)
class FramingConfig:
    window_size: int = 400
    hop: Optional[int] = None

    def __post_init__(self):
        if self.window_size < 2:
            raise DomainError(f"Window size must be at least 2, got {self.window_size}.")
        if self.hop is None:
            object.__setattr__(self, "hop", max(1, self.window_size // 4))
        if self.hop < 1:
            raise DomainError(f"Hop must be at least 1, got {self.hop}.")


def frame_count(signal_length: int, config: FramingConfig) -> int:
    if config.window_size > signal_length:
        return 0
    return (signal_length - config.window_size) // config.hop + 1


def frame_iter(signal: Signal, config: FramingConfig) -> Iterator[Frame]:
    """
    Frames starting at 0, hop, 2*hop, ... each exactly window_size long.
    Trailing samples that cannot fill a window are dropped.
    """
    if config.window_size > len(signal):
        raise EmptyInputError(
            f"Window of {config.window_size} samples is longer than the signal ({len(signal)} samples)."
        )
    count = frame_count(len(signal), config)

    def _frames() -> Iterator[Frame]:
        for j in range(count):
            yield Frame.of(signal, j * config.hop, config.window_size)

    return _frames()


def frames_of(signal: Signal, config: FramingConfig) -> List[Frame]:
    return list(frame_iter(signal, config))


def lag_to_freq(k: int, sample_rate_hz: float) -> float:
    """f(k) = f0 / k."""
    if k < 1:
        raise DomainError(f"Lag must be a positive integer, got {k}.")
    if not sample_rate_hz > 0:
        raise DomainError(f"Sample rate must be positive, got {sample_rate_hz}.")
    return sample_rate_hz / k
