# conftest.py
import logging
import struct

import numpy as np
import pytest

from src.pitchcore.signal_core import Frame, Signal
from src.pitchcore.signal_io import preset, synth


@pytest.fixture(autouse=True)
def _quiet_logger():
    """Keeps the application logger from leaking handlers between tests."""
    logger = logging.getLogger("PitchCore")
    yield
    logger.handlers.clear()


@pytest.fixture(scope="session")
def exp1_signal() -> Signal:
    return synth(preset("exp1"))


@pytest.fixture(scope="session")
def exp2_signal() -> Signal:
    return synth(preset("exp2"))


@pytest.fixture
def sine55_frame() -> Frame:
    """sin(2*pi*n/55), n = 0..439, sampled at 11000 Hz."""
    n = np.arange(440)
    return Frame.from_values(np.sin(2 * np.pi * (n % 55) / 55), 11000.0)


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(20240611)


def wav_bytes(samples, sample_rate=8000, channels=1, audio_format=1, bits=16) -> bytes:
    """A RIFF/WAVE byte string built field by field."""
    data = struct.pack(f"<{len(samples)}h", *samples) if bits == 16 else bytes(samples)
    block_align = channels * bits // 8
    fmt = struct.pack("<HHIIHH", audio_format, channels, sample_rate, sample_rate * block_align, block_align, bits)
    body = b"WAVE" + b"fmt " + struct.pack("<I", len(fmt)) + fmt + b"data" + struct.pack("<I", len(data)) + data
    return b"RIFF" + struct.pack("<I", len(body)) + body


@pytest.fixture
def make_wav():
    return wav_bytes
