# pitchcore/signals.py
from PySide6.QtCore import QObject, Signal


class PitchCoreSignals(QObject):
    log_message = Signal(str)
    frame_tracked = Signal(int, int)          # frames done, frames total
    track_finished = Signal(str, int)         # measure, voiced frame count
    bench_point = Signal(int, str, object, float)  # n, method, ops, seconds


signals = PitchCoreSignals()
