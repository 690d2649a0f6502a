# pitchcore/tracker.py
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from typing import Any, Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np

from .algorithms import (
    CORE_MEASURES,
    MeasureKind,
    PickerKind,
    PickerStrategy,
    estimate_pitch,
)
from .errors import DomainError, PitchCoreError
from .signal_core import (
    DEFAULT_F_MAX_PITCH,
    DEFAULT_F_MIN_PITCH,
    Frame,
    FramingConfig,
    LagRange,
    Signal,
    frame_count,
    frame_iter,
    resolve_pitch_band,
    validate_pitch_band,
)
from .signals import signals

# Marker for frames without a pitch estimate. Never 0 Hz.
UNVOICED = None


@dataclass(frozen=True)
class PitchBand:
    f_min_pitch: float = DEFAULT_F_MIN_PITCH
    f_max_pitch: float = DEFAULT_F_MAX_PITCH

    def __post_init__(self):
        if not 0 < self.f_min_pitch < self.f_max_pitch:
            raise DomainError(
                f"Pitch band needs 0 < fmin < fmax, got [{self.f_min_pitch}, {self.f_max_pitch}]."
            )

    def contains(self, pitch_hz: float) -> bool:
        return self.f_min_pitch <= pitch_hz <= self.f_max_pitch


@dataclass(frozen=True)
class TrackerConfig:
    """
    Everything track() needs besides the signal.

    An explicit `lag_range` overrides the lags derived from `band`; the band
    still bounds the pitches a contour may report.
    """
    framing: FramingConfig = FramingConfig(window_size=400, hop=55)
    band: PitchBand = PitchBand()
    lag_range: Optional[LagRange] = None
    measure: MeasureKind = MeasureKind.ASMDF
    picker: PickerStrategy = PickerStrategy()
    energy_gate: float = 0.0
    workers: int = 1

    def __post_init__(self):
        if self.energy_gate < 0:
            raise DomainError(f"energy_gate cannot be negative, got {self.energy_gate}.")
        if self.workers < 1:
            raise DomainError(f"workers must be at least 1, got {self.workers}.")

    def resolve_lag_range(self, sample_rate_hz: float) -> LagRange:
        validate_pitch_band(self.band.f_min_pitch, self.band.f_max_pitch, sample_rate_hz)
        window = self.framing.window_size
        if self.lag_range is not None:
            self.lag_range.validate_for(window)
            return self.lag_range
        return LagRange.from_pitch_band(
            sample_rate_hz, window, self.band.f_min_pitch, self.band.f_max_pitch
        )

    @classmethod
    def from_config(cls, config: Dict[str, Any], **overrides: Any) -> "TrackerConfig":
        """Builds a TrackerConfig from a loaded configuration dictionary."""
        values = {**config, **{k: v for k, v in overrides.items() if v is not None}}
        f_min, f_max = values["f_min_pitch"], values["f_max_pitch"]
        if values.get("pitch_band"):
            f_min, f_max = resolve_pitch_band(values["pitch_band"])
        hop = values.get("hop")
        lag_range = None
        if values.get("k_min") is not None or values.get("k_max") is not None:
            if values.get("k_min") is None or values.get("k_max") is None:
                raise DomainError("An explicit lag range needs both k_min and k_max.")
            lag_range = LagRange(int(values["k_min"]), int(values["k_max"]))
        return cls(
            framing=FramingConfig(int(values["window_size"]), None if hop is None else int(hop)),
            band=PitchBand(float(f_min), float(f_max)),
            lag_range=lag_range,
            measure=MeasureKind.parse(values["method"]),
            picker=PickerStrategy(PickerKind.parse(values["picker"]), float(values["dip_threshold"])),
            energy_gate=float(values["energy_gate"]),
            workers=int(values["workers"]),
        )


@dataclass(frozen=True)
class ContourEntry:
    time_ms: float
    pitch_hz: Optional[float]

    @property
    def voiced(self) -> bool:
        return self.pitch_hz is not UNVOICED


@dataclass(frozen=True)
class PitchContour:
    """Time-stamped pitch estimates; pitch_hz is UNVOICED (None) where no estimate exists."""
    entries: Tuple[ContourEntry, ...]
    source: Optional[MeasureKind] = None
    config: Optional[TrackerConfig] = None

    def __post_init__(self):
        object.__setattr__(self, "entries", tuple(self.entries))
        times = [entry.time_ms for entry in self.entries]
        if any(later <= earlier for earlier, later in zip(times, times[1:])):
            raise DomainError("Contour times must be strictly increasing.")

    @classmethod
    def from_pairs(cls, pairs: Iterable[Tuple[float, Optional[float]]], **kwargs) -> "PitchContour":
        return cls(tuple(ContourEntry(float(t), None if p is None else float(p)) for t, p in pairs), **kwargs)

    def __len__(self) -> int:
        return len(self.entries)

    def __iter__(self):
        return iter(self.entries)

    @property
    def times_ms(self) -> np.ndarray:
        return np.array([entry.time_ms for entry in self.entries], dtype=np.float64)

    @property
    def pitches_hz(self) -> np.ndarray:
        """Pitches as floats with NaN for unvoiced entries."""
        return np.array(
            [np.nan if entry.pitch_hz is None else entry.pitch_hz for entry in self.entries],
            dtype=np.float64,
        )

    @property
    def voiced_count(self) -> int:
        return sum(1 for entry in self.entries if entry.voiced)

    def step_ms(self) -> Optional[float]:
        """Median spacing between entries, or None for fewer than two entries."""
        if len(self.entries) < 2:
            return None
        return float(np.median(np.diff(self.times_ms)))


class PitchTracker:
    """
    Frames a signal, estimates one pitch per frame and assembles the contour.
    Per-frame failures degrade to UNVOICED, they never abort a track.
    """

    def __init__(self, config: TrackerConfig):
        self.config = config
        self.logger = logging.getLogger("PitchCore")

    def run(self, signal: Signal) -> PitchContour:
        config = self.config
        lag_range = config.resolve_lag_range(signal.sample_rate_hz)
        frames = frame_iter(signal, config.framing)
        total = frame_count(len(signal), config.framing)
        self.logger.info(
            "Tracking %d frames with %s (lags %d-%d, picker %s).",
            total, config.measure.value, lag_range.k_min, lag_range.k_max, config.picker.kind.value,
        )

        pitches: List[Optional[float]] = []
        starts: List[int] = []
        if config.workers > 1:
            frame_list = list(frames)
            with ThreadPoolExecutor(max_workers=config.workers, thread_name_prefix="PitchCoreFrame") as pool:
                results = pool.map(lambda frame: self._estimate_frame(frame, lag_range), frame_list)
                for frame, pitch in zip(frame_list, results):
                    self._collect(frame, pitch, starts, pitches, total)
        else:
            for frame in frames:
                self._collect(frame, self._estimate_frame(frame, lag_range), starts, pitches, total)

        to_ms = 1000.0 / signal.sample_rate_hz
        contour = PitchContour(
            tuple(ContourEntry(start * to_ms, pitch) for start, pitch in zip(starts, pitches)),
            source=config.measure,
            config=config,
        )
        voiced = contour.voiced_count
        self.logger.info("Tracking complete: %d of %d frames voiced.", voiced, total)
        signals.track_finished.emit(config.measure.value, voiced)
        return contour

    def _collect(self, frame: Frame, pitch: Optional[float], starts: List[int],
                 pitches: List[Optional[float]], total: int) -> None:
        starts.append(frame.start_index)
        pitches.append(pitch)
        signals.frame_tracked.emit(len(starts), total)

    def _estimate_frame(self, frame: Frame, lag_range: LagRange) -> Optional[float]:
        config = self.config
        y = frame.samples
        if np.all(y == y[0]):
            self.logger.debug("Frame at %d is constant; unvoiced.", frame.start_index)
            return UNVOICED
        if config.energy_gate > 0 and float(np.mean(y * y)) <= config.energy_gate:
            self.logger.debug("Frame at %d below energy gate; unvoiced.", frame.start_index)
            return UNVOICED
        try:
            pitch = estimate_pitch(frame, lag_range, config.measure, config.picker)
        except PitchCoreError as exc:
            self.logger.warning("Frame at %d failed (%s); marked unvoiced.", frame.start_index, exc)
            return UNVOICED
        if pitch is None or not config.band.contains(pitch):
            return UNVOICED
        return pitch


def track(signal: Signal, config: TrackerConfig) -> PitchContour:
    return PitchTracker(config).run(signal)


def track_all_methods(signal: Signal, config: TrackerConfig,
                      measures: Sequence[MeasureKind] = CORE_MEASURES) -> Dict[MeasureKind, PitchContour]:
    """Runs track once per measure over identical framing, so contours are index-aligned."""
    return {measure: track(signal, replace(config, measure=measure)) for measure in measures}
