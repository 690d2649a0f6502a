# pitchcore/signal_io.py
"""
Getting signals in and results out: synthetic test signals, 16-bit PCM WAV,
and the CSV files (contours, lag curves, method comparisons, reports).
"""
import logging
import struct
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Dict, List, Mapping, Optional, Sequence, Tuple, Union

import numpy as np

from .algorithms import LagCurve, MeasureKind
from .errors import (
    AlignmentError,
    ContourParseError,
    DomainError,
    MalformedFileError,
    UnsupportedFormatError,
)
from .evaluation import EvalReport
from .signal_core import Signal
from .tracker import ContourEntry, PitchContour
from .utils import PathLike, atomic_write_bytes, atomic_write_text

logger = logging.getLogger("PitchCore")

UNVOICED_TOKEN = "unvoiced"
CONTOUR_HEADER = "time_ms,pitch_hz"
LAGCURVE_HEADER = "k,asmdf,amdf,autocorr"
COMPARISON_HEADER = "time_ms,asmdf_hz,amdf_hz,autocorr_hz"

PCM_FORMAT = 1
PCM_SCALE = 32768.0
# Largest positive sample a 16-bit PCM code holds; the negative end is -1.0.
PCM_FULL_SCALE = 32767 / PCM_SCALE


# ────────────────────────────────────────────────────────────
# Synthetic signals

class Shape(str, Enum):
    SIN = "sin"
    COS = "cos"


@dataclass(frozen=True)
class SynthComponent:
    amplitude: float
    frequency_hz: float
    phase: float = 0.0
    shape: Shape = Shape.SIN


@dataclass(frozen=True)
class NoiseSpec:
    """Additive white Gaussian noise with standard deviation `std`."""
    std: float = 0.0
    seed: int = 0


@dataclass(frozen=True)
class SynthSpec:
    """
    y_n = sum_j a_j * trig(2*pi*f_j*n/f0 + phi_j) + noise, n = 0 .. length-1.
    A single harmonic series is just components at f_j = j * f_p.
    """
    components: Tuple[SynthComponent, ...]
    sample_rate_hz: float
    length: int
    noise: NoiseSpec = field(default_factory=NoiseSpec)

    def validate(self) -> None:
        if not self.sample_rate_hz > 0:
            raise DomainError(f"Sample rate must be positive, got {self.sample_rate_hz}.")
        if self.length < 2:
            raise DomainError(f"A synthetic signal needs at least 2 samples, got {self.length}.")
        if self.noise.std < 0:
            raise DomainError(f"Noise std cannot be negative, got {self.noise.std}.")
        nyquist = self.sample_rate_hz / 2
        for component in self.components:
            if not 0 <= component.frequency_hz < nyquist:
                raise DomainError(
                    f"Component at {component.frequency_hz:g} Hz is not below the Nyquist "
                    f"frequency {nyquist:g} Hz."
                )


def synth(spec: SynthSpec) -> Signal:
    """
    Realizes a SynthSpec. Phases are computed from (n*f mod f0), so a
    component whose period f0/f is a whole number of samples repeats exactly.
    """
    spec.validate()
    n = np.arange(spec.length, dtype=np.float64)
    y = np.zeros(spec.length)
    for component in spec.components:
        cycles = np.mod(n * component.frequency_hz, spec.sample_rate_hz) / spec.sample_rate_hz
        angle = 2.0 * np.pi * cycles + component.phase
        wave = np.sin(angle) if component.shape is Shape.SIN else np.cos(angle)
        y += component.amplitude * wave
    if spec.noise.std > 0:
        rng = np.random.default_rng(spec.noise.seed)
        y += rng.normal(0.0, spec.noise.std, spec.length)
    return Signal(y, spec.sample_rate_hz)


def _exp1() -> SynthSpec:
    # sin(2*pi*n/55), n = 0..11000, at 11000 Hz
    return SynthSpec((SynthComponent(1.0, 11000.0 / 55, shape=Shape.SIN),), 11000.0, 11001)


def _exp2() -> SynthSpec:
    # 0.47*sin(2*pi*n/55) + 0.59*cos(5*pi*n/56), n = 0..5500, at 5500 Hz
    rate = 5500.0
    return SynthSpec(
        (
            SynthComponent(0.47, rate / 55, shape=Shape.SIN),
            SynthComponent(0.59, rate * 5 / 112, shape=Shape.COS),
        ),
        rate,
        5501,
    )


SYNTH_PRESETS = {"exp1": _exp1, "exp2": _exp2}


def preset(name: str) -> SynthSpec:
    try:
        return SYNTH_PRESETS[name.lower()]()
    except KeyError:
        raise DomainError(f"Unknown preset '{name}'. Known presets: {', '.join(SYNTH_PRESETS)}.") from None


# ────────────────────────────────────────────────────────────
# WAV

def _read_exact(data: bytes, offset: int, size: int, what: str) -> bytes:
    if offset + size > len(data):
        raise MalformedFileError(f"Truncated {what}: needs {size} bytes at offset {offset}.")
    return data[offset:offset + size]


def decode_wav(data: bytes) -> Signal:
    """Decodes 16-bit PCM RIFF/WAVE bytes; stereo is averaged to mono."""
    header = _read_exact(data, 0, 12, "RIFF header")
    riff, _, wave = struct.unpack("<4sI4s", header)
    if riff != b"RIFF" or wave != b"WAVE":
        raise MalformedFileError("Not a RIFF/WAVE file.")

    fmt: Optional[Tuple[int, int, int, int, int, int]] = None
    pcm: Optional[bytes] = None
    offset = 12
    while offset + 8 <= len(data):
        chunk_id, chunk_size = struct.unpack("<4sI", data[offset:offset + 8])
        body = _read_exact(data, offset + 8, chunk_size, f"'{chunk_id.decode('latin-1')}' chunk")
        if chunk_id == b"fmt ":
            if chunk_size < 16:
                raise MalformedFileError(f"fmt chunk too short ({chunk_size} bytes).")
            fmt = struct.unpack("<HHIIHH", body[:16])
        elif chunk_id == b"data":
            pcm = body
        offset += 8 + chunk_size + (chunk_size & 1)
        if fmt is not None and pcm is not None:
            break

    if fmt is None:
        raise MalformedFileError("Missing fmt chunk.")
    if pcm is None:
        raise MalformedFileError("Missing data chunk.")

    audio_format, channels, sample_rate, _, block_align, bits = fmt
    if audio_format != PCM_FORMAT:
        raise UnsupportedFormatError("audio_format", audio_format)
    if bits != 16:
        raise UnsupportedFormatError("bits_per_sample", bits)
    if channels not in (1, 2):
        raise UnsupportedFormatError("channels", channels)
    if block_align != 2 * channels:
        raise MalformedFileError(f"block_align {block_align} does not match {channels} channel(s) of 16 bits.")
    if not pcm:
        raise MalformedFileError("data chunk holds no samples.")
    if len(pcm) % block_align:
        raise MalformedFileError(f"data chunk of {len(pcm)} bytes is not a whole number of frames.")
    if sample_rate == 0:
        raise MalformedFileError("Sample rate is 0.")

    frames = np.frombuffer(pcm, dtype="<i2").astype(np.float64).reshape(-1, channels)
    mono = frames.mean(axis=1) if channels == 2 else frames[:, 0]
    return Signal(mono / PCM_SCALE, float(sample_rate))


def read_wav(path: PathLike) -> Signal:
    data = Path(path).read_bytes()
    signal = decode_wav(data)
    logger.info("Read %s: %d samples at %g Hz (%.1f ms).", path, len(signal), signal.sample_rate_hz,
                signal.duration_ms)
    return signal


def encode_wav(signal: Signal) -> bytes:
    """
    16-bit PCM mono; samples are scaled by 32768 and rounded.

    A signal outside the 16-bit range is first rescaled so its peak lands on
    32767/32768, with a warning, rather than clipped. Pitch is unaffected by
    the gain.
    """
    rate = int(round(signal.sample_rate_hz))
    samples = signal.samples
    if samples.max() > PCM_FULL_SCALE or samples.min() < -1.0:
        peak = float(np.max(np.abs(samples)))
        gain = PCM_FULL_SCALE / peak
        logger.warning("Signal peaks at %.6f, above 16-bit full scale; rescaling by %.6f.", peak, gain)
        samples = samples * gain
    pcm = np.clip(np.round(samples * PCM_SCALE), -32768, 32767).astype("<i2").tobytes()
    fmt = struct.pack("<HHIIHH", PCM_FORMAT, 1, rate, rate * 2, 2, 16)
    body = b"WAVE" + struct.pack("<4sI", b"fmt ", len(fmt)) + fmt + struct.pack("<4sI", b"data", len(pcm)) + pcm
    if len(pcm) & 1:
        body += b"\x00"
    return struct.pack("<4sI", b"RIFF", len(body)) + body


def write_wav(signal: Signal, path: PathLike) -> None:
    atomic_write_bytes(path, encode_wav(signal))
    logger.info("Wrote %s: %d samples at %g Hz.", path, len(signal), signal.sample_rate_hz)


# ────────────────────────────────────────────────────────────
# Contour CSV

def _format_pitch(pitch: Optional[float]) -> str:
    return UNVOICED_TOKEN if pitch is None else format(pitch, ".6g")


def format_contour_csv(contour: PitchContour) -> str:
    lines = [CONTOUR_HEADER]
    lines += [f"{entry.time_ms:.3f},{_format_pitch(entry.pitch_hz)}" for entry in contour]
    return "\n".join(lines) + "\n"


def write_contour_csv(contour: PitchContour, path: PathLike) -> None:
    atomic_write_text(path, format_contour_csv(contour))
    logger.info("Wrote contour of %d entries to %s.", len(contour), path)


def parse_contour_csv(text: str) -> PitchContour:
    lines = text.splitlines()
    if not lines or lines[0].strip() != CONTOUR_HEADER:
        raise ContourParseError(1, f"expected header '{CONTOUR_HEADER}'")
    entries: List[ContourEntry] = []
    for line_number, line in enumerate(lines[1:], start=2):
        if not line.strip():
            continue
        fields = line.strip().split(",")
        if len(fields) != 2:
            raise ContourParseError(line_number, f"expected 2 fields, got {len(fields)}")
        try:
            time_ms = float(fields[0])
        except ValueError:
            raise ContourParseError(line_number, f"bad time value '{fields[0]}'") from None
        token = fields[1].strip()
        if token.lower() == UNVOICED_TOKEN:
            pitch = None
        else:
            try:
                pitch = float(token)
            except ValueError:
                raise ContourParseError(line_number, f"bad pitch value '{token}'") from None
            if not np.isfinite(pitch) or pitch < 0:
                raise ContourParseError(line_number, f"pitch must be a finite non-negative number, got '{token}'")
        if not np.isfinite(time_ms):
            raise ContourParseError(line_number, f"bad time value '{fields[0]}'")
        if entries and time_ms <= entries[-1].time_ms:
            raise ContourParseError(line_number, "times must be strictly increasing")
        entries.append(ContourEntry(time_ms, pitch))
    return PitchContour(tuple(entries))


def read_contour_csv(path: PathLike) -> PitchContour:
    return parse_contour_csv(Path(path).read_text(encoding="utf-8"))


# ────────────────────────────────────────────────────────────
# Lag curves and method comparisons

def _format_value(value: float) -> str:
    return "nan" if np.isnan(value) else format(float(value), ".17g")


def format_lagcurve_csv(curves: Union[Sequence[LagCurve], Mapping[MeasureKind, LagCurve]]) -> str:
    """One row per lag with the ASMDF, AMDF and autocorrelation values side by side."""
    listed = list(curves.values()) if isinstance(curves, Mapping) else list(curves)
    by_kind: Dict[MeasureKind, LagCurve] = {curve.measure_kind: curve for curve in listed}
    columns = [MeasureKind.ASMDF, MeasureKind.AMDF, MeasureKind.AUTOCORRELATION]
    missing = [kind.value for kind in columns if kind not in by_kind]
    if missing:
        raise AlignmentError(f"Missing lag curve(s): {', '.join(missing)}.")
    ranges = {(by_kind[kind].k_min, by_kind[kind].k_max) for kind in columns}
    if len(ranges) != 1:
        raise AlignmentError(f"Lag curves cover different ranges: {sorted(ranges)}.")

    reference = by_kind[MeasureKind.ASMDF]
    lines = [LAGCURVE_HEADER]
    for index, k in enumerate(reference.lags):
        cells = [_format_value(by_kind[kind].values[index]) for kind in columns]
        lines.append(f"{k}," + ",".join(cells))
    return "\n".join(lines) + "\n"


def write_lagcurve_csv(curves: Union[Sequence[LagCurve], Mapping[MeasureKind, LagCurve]], path: PathLike) -> None:
    atomic_write_text(path, format_lagcurve_csv(curves))


def format_comparison_csv(contours: Mapping[MeasureKind, PitchContour]) -> str:
    columns = [MeasureKind.ASMDF, MeasureKind.AMDF, MeasureKind.AUTOCORRELATION]
    lengths = {len(contours[kind]) for kind in columns}
    if len(lengths) != 1:
        raise AlignmentError("Contours to compare must have the same number of entries.")
    reference = contours[MeasureKind.ASMDF]
    lines = [COMPARISON_HEADER]
    for index, entry in enumerate(reference.entries):
        cells = [_format_pitch(contours[kind].entries[index].pitch_hz) for kind in columns]
        lines.append(f"{entry.time_ms:.3f}," + ",".join(cells))
    return "\n".join(lines) + "\n"


# ────────────────────────────────────────────────────────────
# Evaluation reports

REPORT_FIELDS = ("mean_error", "sigma_e_paper", "sigma_e_standard", "pearson_r", "gross_error_flag", "L_e")


def _format_report_value(value) -> str:
    if value is None:
        return "undefined"
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return format(value, ".10g")
    return str(value)


def format_report(reports: Mapping[str, EvalReport]) -> str:
    """`key,value` rows for a single report, one row per method otherwise."""
    if len(reports) == 1:
        (report,) = reports.values()
        rows = ["key,value"]
        rows += [f"{key},{_format_report_value(value)}" for key, value in report.as_dict().items()]
        return "\n".join(rows) + "\n"
    rows = ["method," + ",".join(REPORT_FIELDS)]
    for name, report in reports.items():
        values = report.as_dict()
        rows.append(name + "," + ",".join(_format_report_value(values[key]) for key in REPORT_FIELDS))
    return "\n".join(rows) + "\n"


def write_report(reports: Mapping[str, EvalReport], path: PathLike) -> None:
    atomic_write_text(path, format_report(reports))
