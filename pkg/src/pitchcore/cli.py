# pitchcore/cli.py
import argparse
import logging
import sys
from pathlib import Path
from typing import Any, Dict, Final, List, Optional, Sequence, Tuple

from . import __version__
from .algorithms import CORE_MEASURES, MeasureKind, PickerKind, PickerStrategy, find_dips, lag_curve
from .bench import fit_slopes, format_bench_csv, run_bench
from .config_manager import ConfigManager
from .errors import (
    AlignmentError,
    ConfigError,
    ContourParseError,
    DomainError,
    EmptyInputError,
    InsufficientDataError,
    MalformedFileError,
    PitchCoreError,
    UnsupportedFormatError,
)
from .evaluation import evaluate_methods
from .logger import setup_logger
from .signal_core import Frame, FramingConfig, LagRange, frame_count
from .signal_io import (
    NoiseSpec,
    Shape,
    SynthComponent,
    SynthSpec,
    format_comparison_csv,
    format_contour_csv,
    format_lagcurve_csv,
    format_report,
    preset,
    read_contour_csv,
    read_wav,
    synth,
    write_wav,
)
from .signals import signals
from .tracker import TrackerConfig, track, track_all_methods
from .utils import atomic_write_text

# ────────────────────────────────────────────────────────────
# Exit codes shared with main.py.
EXIT_SUCCESS: Final[int] = 0
EXIT_UNKNOWN_ERROR: Final[int] = 1
EXIT_USAGE: Final[int] = 2
EXIT_IO: Final[int] = 3
EXIT_ALIGNMENT: Final[int] = 4

logger = logging.getLogger("PitchCore")


# ────────────────────────────────────────────────────────────
# Argument parsing

def _int_list(text: str) -> List[int]:
    try:
        return [int(part) for part in text.split(",") if part.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got '{text}'") from None


def _component(text: str) -> List[float]:
    """FREQ[:AMPLITUDE[:PHASE]]"""
    try:
        values = [float(part) for part in text.split(":")]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected FREQ[:AMP[:PHASE]], got '{text}'") from None
    if not 1 <= len(values) <= 3:
        raise argparse.ArgumentTypeError(f"expected FREQ[:AMP[:PHASE]], got '{text}'")
    return values


def _add_framing_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--window", type=int, help="window size in samples (default from config: 400)")
    parser.add_argument("--hop", type=int, help="hop in samples (default from config: 55)")


def _add_tracking_flags(parser: argparse.ArgumentParser) -> None:
    _add_framing_flags(parser)
    parser.add_argument("--fmin", type=float, help="lowest pitch in Hz (default 50)")
    parser.add_argument("--fmax", type=float, help="highest pitch in Hz (default 500)")
    parser.add_argument("--band", help="named pitch band: male, female or speech (overrides fmin/fmax)")
    parser.add_argument("--picker", choices=[kind.value for kind in PickerKind], help="period picker (default global)")
    parser.add_argument("--alpha", type=float, help="dip threshold in (0, 1] for dip pickers (default 0.5)")
    parser.add_argument("--energy-gate", type=float, dest="energy_gate",
                        help="mark frames with mean square amplitude at or below this as unvoiced")
    parser.add_argument("--workers", type=int, help="frames evaluated in parallel (default 1)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="pitchcore", description="Time-domain pitch tracking toolkit.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("--config", help="configuration file (default config/config.json)")
    commands = parser.add_subparsers(dest="command", required=True)

    p = commands.add_parser("synth", help="write a synthetic test signal as WAV")
    p.add_argument("--preset", help="exp1 or exp2")
    p.add_argument("--sine", type=_component, action="append", default=[], metavar="FREQ[:AMP[:PHASE]]")
    p.add_argument("--cosine", type=_component, action="append", default=[], metavar="FREQ[:AMP[:PHASE]]")
    p.add_argument("--rate", type=float, default=11000.0, help="sample rate in Hz")
    p.add_argument("--length", type=int, help="samples (default: one second plus one sample)")
    p.add_argument("--noise", type=float, default=0.0, help="white Gaussian noise std")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)

    p = commands.add_parser("track", help="pitch contour of a WAV file")
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--method", choices=[kind.value for kind in MeasureKind])
    _add_tracking_flags(p)
    p.add_argument("--out")

    p = commands.add_parser("compare", help="ASMDF, AMDF and autocorrelation contours side by side")
    p.add_argument("--in", dest="input", required=True)
    _add_tracking_flags(p)
    p.add_argument("--out")

    p = commands.add_parser("eval", help="error analysis of estimated contours against a truth contour")
    p.add_argument("--truth", required=True)
    p.add_argument("--est", action="append", required=True, metavar="[NAME=]CSV")
    p.add_argument("--out")

    p = commands.add_parser("curve", help="the three lag curves of one frame")
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--frame-index", type=int, dest="frame_index", required=True)
    _add_framing_flags(p)
    p.add_argument("--kmin", type=int)
    p.add_argument("--kmax", type=int)
    p.add_argument("--alpha", type=float, help="dip threshold used for the dip report (default 0.5)")
    p.add_argument("--out")

    p = commands.add_parser("bench", help="operation-count and timing benchmark of the lag sweeps")
    p.add_argument("--sizes", type=_int_list, help="comma-separated window sizes")
    p.add_argument("--reps", type=int)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out")
    return parser


# ────────────────────────────────────────────────────────────
# Commands

def _emit(text: str, out: Optional[str]) -> None:
    if out:
        atomic_write_text(out, text)
        signals.log_message.emit(f"Wrote {out}")
    else:
        sys.stdout.write(text)


def _tracker_config(args: argparse.Namespace, config: Dict[str, Any], method: Optional[str] = None) -> TrackerConfig:
    return TrackerConfig.from_config(
        config,
        window_size=args.window,
        hop=args.hop,
        f_min_pitch=args.fmin,
        f_max_pitch=args.fmax,
        pitch_band=args.band,
        method=method,
        picker=args.picker,
        dip_threshold=args.alpha,
        energy_gate=args.energy_gate,
        workers=args.workers,
    )


def cmd_synth(args: argparse.Namespace, config: Dict[str, Any]) -> int:
    if args.preset:
        if args.sine or args.cosine:
            raise DomainError("--preset cannot be combined with --sine/--cosine.")
        spec = preset(args.preset)
    else:
        components = []
        for shape, given in ((Shape.SIN, args.sine), (Shape.COS, args.cosine)):
            for values in given:
                frequency, amplitude, phase = (values + [1.0, 0.0][len(values) - 1:])[:3]
                components.append(SynthComponent(amplitude, frequency, phase, shape))
        if not components and args.noise <= 0:
            raise DomainError("Nothing to synthesize: give --preset, --sine, --cosine or --noise.")
        length = args.length if args.length is not None else int(args.rate) + 1
        spec = SynthSpec(tuple(components), args.rate, length, NoiseSpec(args.noise, args.seed))
    write_wav(synth(spec), args.out)
    signals.log_message.emit(f"Wrote {args.out}")
    return EXIT_SUCCESS


def cmd_track(args: argparse.Namespace, config: Dict[str, Any]) -> int:
    signal = read_wav(args.input)
    contour = track(signal, _tracker_config(args, config, method=args.method))
    _emit(format_contour_csv(contour), args.out)
    return EXIT_SUCCESS


def cmd_compare(args: argparse.Namespace, config: Dict[str, Any]) -> int:
    signal = read_wav(args.input)
    contours = track_all_methods(signal, _tracker_config(args, config))
    _emit(format_comparison_csv(contours), args.out)
    return EXIT_SUCCESS


def _estimate_name(spec: str, taken: Dict[str, Any]) -> Tuple[str, str]:
    if "=" in spec:
        name, path = spec.split("=", 1)
    else:
        name, path = Path(spec).stem, spec
    base, suffix = name, 2
    while name in taken:
        name, suffix = f"{base}{suffix}", suffix + 1
    return name, path


def cmd_eval(args: argparse.Namespace, config: Dict[str, Any]) -> int:
    truth = read_contour_csv(args.truth)
    estimates: Dict[str, Any] = {}
    for spec in args.est:
        name, path = _estimate_name(spec, estimates)
        estimates[name] = read_contour_csv(path)
    reports = evaluate_methods(truth, estimates)
    for name, report in reports.items():
        if report.gross_error_flag:
            logger.warning("%s: sigma_e %.4f exceeds the 20%% gross-error threshold.", name, report.sigma_e_paper)
    _emit(format_report(reports), args.out)
    return EXIT_SUCCESS


def cmd_curve(args: argparse.Namespace, config: Dict[str, Any]) -> int:
    signal = read_wav(args.input)
    hop = args.hop if args.hop is not None else config["hop"]
    framing = FramingConfig(args.window or int(config["window_size"]), None if hop is None else int(hop))
    count = frame_count(len(signal), framing)
    if count == 0:
        raise EmptyInputError(f"Window of {framing.window_size} samples is longer than the signal.")
    if not 0 <= args.frame_index < count:
        raise DomainError(f"Frame index {args.frame_index} outside [0, {count - 1}].")
    frame = Frame.of(signal, args.frame_index * framing.hop, framing.window_size)

    k_min, k_max = args.kmin, args.kmax
    if k_min is None or k_max is None:
        tracker_config = TrackerConfig.from_config(config, window_size=framing.window_size, hop=framing.hop)
        derived = tracker_config.resolve_lag_range(signal.sample_rate_hz)
        k_min = derived.k_min if k_min is None else k_min
        k_max = derived.k_max if k_max is None else k_max
    lag_range = LagRange(k_min, k_max)
    lag_range.validate_for(len(frame))

    strategy = PickerStrategy(PickerKind.FIRST_DIP, args.alpha if args.alpha is not None else float(config["dip_threshold"]))
    curves = {measure: lag_curve(frame, lag_range, measure, strict=False) for measure in CORE_MEASURES}
    for measure, curve in curves.items():
        dips = find_dips(curve, strategy)
        logger.info("Frame %d %s: first qualifying extrema at k=%s.", args.frame_index, measure.value, dips[:2])
    _emit(format_lagcurve_csv(curves), args.out)
    return EXIT_SUCCESS


def cmd_bench(args: argparse.Namespace, config: Dict[str, Any]) -> int:
    sizes = args.sizes if args.sizes is not None else list(config["bench_sizes"])
    reps = args.reps if args.reps is not None else int(config["bench_reps"])
    points = run_bench(sizes, reps=reps, seed=args.seed)
    _emit(format_bench_csv(points), args.out)
    op_slopes = fit_slopes(points, "ops")
    time_slopes = fit_slopes(points, "seconds")
    stream = sys.stdout if args.out else sys.stderr
    for measure, slope in op_slopes.items():
        print(f"slope {measure.value}: ops {slope:.3f}, seconds {time_slopes[measure]:.3f}", file=stream)
    return EXIT_SUCCESS


COMMANDS = {
    "synth": cmd_synth,
    "track": cmd_track,
    "compare": cmd_compare,
    "eval": cmd_eval,
    "curve": cmd_curve,
    "bench": cmd_bench,
}


# ────────────────────────────────────────────────────────────

def _log_message(text: str) -> None:
    logger.info(text)


def _log_progress(done: int, total: int) -> None:
    if done == total or done % 50 == 0:
        logger.debug("Tracked %d/%d frames.", done, total)


def exit_code_for(exc: BaseException) -> int:
    if isinstance(exc, (AlignmentError, InsufficientDataError)):
        return EXIT_ALIGNMENT
    if isinstance(exc, (OSError, UnsupportedFormatError, MalformedFileError, ContourParseError)):
        return EXIT_IO
    if isinstance(exc, (PitchCoreError, ValueError)):
        return EXIT_USAGE
    return EXIT_UNKNOWN_ERROR


def run(argv: Optional[Sequence[str]] = None) -> int:
    """Parses arguments, runs one command and returns its exit code."""
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)

    try:
        config = ConfigManager(args.config).load_config()
    except (FileNotFoundError, ValueError) as exc:
        logger.critical("Configuration error: %s", exc)
        return exit_code_for(ConfigError(str(exc)))
    setup_logger(config["log_level"], config["log_file"])

    signals.log_message.connect(_log_message)
    signals.frame_tracked.connect(_log_progress)
    try:
        return COMMANDS[args.command](args, config)
    except Exception as exc:
        code = exit_code_for(exc)
        if code == EXIT_UNKNOWN_ERROR:
            logger.critical("Unexpected error in '%s': %s", args.command, exc, exc_info=True)
        else:
            logger.error("%s failed: %s", args.command, exc)
        return code
    finally:
        signals.log_message.disconnect(_log_message)
        signals.frame_tracked.disconnect(_log_progress)
