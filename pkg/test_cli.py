# test_cli.py
import json
import os
import stat

import pytest

from src.pitchcore.cli import (
    EXIT_ALIGNMENT,
    EXIT_IO,
    EXIT_SUCCESS,
    EXIT_USAGE,
    run,
)
from src.pitchcore.config_manager import DEFAULT_CONFIG
from src.pitchcore.signal_io import read_contour_csv, read_wav


@pytest.fixture(scope="module")
def exp1_wav(tmp_path_factory):
    path = tmp_path_factory.mktemp("wav") / "exp1.wav"
    assert run(["synth", "--preset", "exp1", "--out", str(path)]) == EXIT_SUCCESS
    return path


@pytest.fixture(scope="module")
def exp2_wav(tmp_path_factory):
    path = tmp_path_factory.mktemp("wav") / "exp2.wav"
    assert run(["synth", "--preset", "exp2", "--out", str(path)]) == EXIT_SUCCESS
    return path


@pytest.fixture
def silent_wav(tmp_path):
    path = tmp_path / "silent.wav"
    assert run(["synth", "--noise", "0.0", "--sine", "100:0", "--rate", "8000", "--out", str(path)]) == EXIT_SUCCESS
    return path


def write_csv(path, rows):
    path.write_text("time_ms,pitch_hz\n" + "".join(f"{t},{p}\n" for t, p in rows), encoding="utf-8")
    return str(path)


# ────────────────────────────────────────────────────────────
# synth

def test_synth_presets(exp1_wav, exp2_wav):
    one, two = read_wav(exp1_wav), read_wav(exp2_wav)
    assert (len(one), one.sample_rate_hz) == (11001, 11000.0)
    assert (len(two), two.sample_rate_hz) == (5501, 5500.0)


def test_synth_custom_components(tmp_path):
    path = tmp_path / "mix.wav"
    code = run(["synth", "--sine", "200:0.5", "--cosine", "300:0.25:0.1", "--rate", "8000",
                "--length", "800", "--out", str(path)])
    assert code == EXIT_SUCCESS
    assert len(read_wav(path)) == 800


def test_synth_above_nyquist_is_a_usage_error(tmp_path):
    assert run(["synth", "--sine", "200", "--rate", "100", "--out", str(tmp_path / "c.wav")]) == EXIT_USAGE
    assert not (tmp_path / "c.wav").exists()


def test_bad_flags_are_usage_errors(exp1_wav):
    assert run(["track", "--in", str(exp1_wav), "--picker", "best"]) == EXIT_USAGE
    assert run(["track", "--in", str(exp1_wav), "--band", "soprano"]) == EXIT_USAGE
    assert run(["track", "--in", str(exp1_wav), "--alpha", "2"]) == EXIT_USAGE
    assert run([]) == EXIT_USAGE


# ────────────────────────────────────────────────────────────
# track / compare

def test_track_exp1(exp1_wav, tmp_path):
    out = tmp_path / "track.csv"
    assert run(["track", "--in", str(exp1_wav), "--method", "asmdf", "--out", str(out)]) == EXIT_SUCCESS
    contour = read_contour_csv(out)
    assert len(contour) == 193
    assert {entry.pitch_hz for entry in contour} == {200.0}


def test_track_exp2_first_dip(exp2_wav, tmp_path):
    out = tmp_path / "track.csv"
    assert run(["track", "--in", str(exp2_wav), "--picker", "dip1", "--out", str(out)]) == EXIT_SUCCESS
    assert {entry.pitch_hz for entry in read_contour_csv(out)} == {250.0}


def test_track_prints_to_stdout(exp2_wav, capsys):
    assert run(["track", "--in", str(exp2_wav), "--picker", "dip1", "--workers", "2"]) == EXIT_SUCCESS
    lines = capsys.readouterr().out.splitlines()
    assert lines[0] == "time_ms,pitch_hz"
    assert len(lines) == 94
    assert lines[1] == "0.000,250"


def test_track_silence_is_all_unvoiced(silent_wav, tmp_path):
    out = tmp_path / "silent.csv"
    assert run(["track", "--in", str(silent_wav), "--out", str(out)]) == EXIT_SUCCESS
    contour = read_contour_csv(out)
    assert len(contour) > 0 and contour.voiced_count == 0


def test_track_missing_input_is_an_io_error(tmp_path):
    assert run(["track", "--in", str(tmp_path / "nope.wav")]) == EXIT_IO


def test_track_rejects_non_wav_input(tmp_path):
    path = tmp_path / "text.wav"
    path.write_text("not audio", encoding="utf-8")
    assert run(["track", "--in", str(path)]) == EXIT_IO


def test_compare_exp1_columns_agree(exp1_wav, tmp_path):
    out = tmp_path / "compare.csv"
    assert run(["compare", "--in", str(exp1_wav), "--out", str(out)]) == EXIT_SUCCESS
    lines = out.read_text(encoding="utf-8").splitlines()
    assert lines[0] == "time_ms,asmdf_hz,amdf_hz,autocorr_hz"
    assert len(lines) == 194
    assert all(line.split(",")[1:] == ["200", "200", "200"] for line in lines[1:])


def test_compare_exp2_asmdf_matches_autocorrelation(exp2_wav, tmp_path):
    out = tmp_path / "compare.csv"
    assert run(["compare", "--in", str(exp2_wav), "--picker", "dip1", "--out", str(out)]) == EXIT_SUCCESS
    rows = [line.split(",") for line in out.read_text(encoding="utf-8").splitlines()[1:]]
    assert all(row[1] == row[3] for row in rows)


def test_compare_silence_with_energy_gate(silent_wav, tmp_path):
    out = tmp_path / "compare.csv"
    assert run(["compare", "--in", str(silent_wav), "--energy-gate", "1e-6", "--out", str(out)]) == EXIT_SUCCESS
    rows = [line.split(",")[1:] for line in out.read_text(encoding="utf-8").splitlines()[1:]]
    assert rows and all(row == ["unvoiced"] * 3 for row in rows)


# ────────────────────────────────────────────────────────────
# eval

def test_eval_identical_contours(tmp_path, capsys):
    truth = write_csv(tmp_path / "truth.csv", [(0, 100), (5, 120), (10, 140)])
    assert run(["eval", "--truth", truth, "--est", truth]) == EXIT_SUCCESS
    report = dict(line.split(",") for line in capsys.readouterr().out.splitlines()[1:])
    assert float(report["sigma_e_paper"]) == 0.0
    assert float(report["pearson_r"]) == pytest.approx(1.0)
    assert report["gross_error_flag"] == "false"
    assert report["L_e"] == "3"


def test_eval_constant_offset(tmp_path):
    truth = write_csv(tmp_path / "truth.csv", [(0, 200), (5, 200), (10, 200)])
    estimate = write_csv(tmp_path / "est.csv", [(0, 180), (5, 180), (10, 180)])
    out = tmp_path / "report.csv"
    assert run(["eval", "--truth", truth, "--est", estimate, "--out", str(out)]) == EXIT_SUCCESS
    report = dict(line.split(",") for line in out.read_text(encoding="utf-8").splitlines()[1:])
    assert float(report["mean_error"]) == pytest.approx(0.1)
    # 3 * 0.01 / 2 - 0.01
    assert float(report["sigma_e_paper"]) == pytest.approx(0.005 ** 0.5)
    assert report["pearson_r"] == "undefined"


def test_eval_constant_truth_against_varying_estimate(tmp_path, capsys):
    truth = write_csv(tmp_path / "truth.csv", [(0, 200), (5, 200), (10, 200)])
    estimate = write_csv(tmp_path / "est.csv", [(0, 190), (5, 200), (10, 215)])
    assert run(["eval", "--truth", truth, "--est", estimate]) == EXIT_SUCCESS
    report = dict(line.split(",") for line in capsys.readouterr().out.splitlines()[1:])
    assert report["pearson_r"] == "undefined"
    assert set(report) == {"mean_error", "sigma_e_paper", "sigma_e_standard", "pearson_r", "gross_error_flag", "L_e"}


def test_eval_several_methods(tmp_path, capsys):
    truth = write_csv(tmp_path / "truth.csv", [(0, 100), (5, 120), (10, 140)])
    near = write_csv(tmp_path / "near.csv", [(0, 101), (5, 119), (10, 141)])
    far = write_csv(tmp_path / "far.csv", [(0, 50), (5, 130), (10, 260)])
    assert run(["eval", "--truth", truth, "--est", f"asmdf={near}", "--est", f"amdf={far}"]) == EXIT_SUCCESS
    lines = capsys.readouterr().out.splitlines()
    assert lines[0].startswith("method,mean_error")
    assert [line.split(",")[0] for line in lines[1:]] == ["asmdf", "amdf"]
    assert lines[1].split(",")[5] == "false"
    assert lines[2].split(",")[5] == "true"


def test_eval_misaligned_contours(tmp_path):
    truth = write_csv(tmp_path / "truth.csv", [(0, 100), (5, 120), (10, 140)])
    estimate = write_csv(tmp_path / "est.csv", [(100, 100), (105, 120), (110, 140)])
    assert run(["eval", "--truth", truth, "--est", estimate]) == EXIT_ALIGNMENT


def test_eval_malformed_truth(tmp_path):
    truth = tmp_path / "truth.csv"
    truth.write_text("time_ms,pitch_hz\nabc,200\n", encoding="utf-8")
    assert run(["eval", "--truth", str(truth), "--est", str(truth)]) == EXIT_IO


# ────────────────────────────────────────────────────────────
# curve

def _curve_table(path):
    rows = [line.split(",") for line in path.read_text(encoding="utf-8").splitlines()[1:]]
    return {int(row[0]): [float(cell) for cell in row[1:]] for row in rows}


def test_curve_exp1_frame_100(exp1_wav, tmp_path):
    out = tmp_path / "curve.csv"
    args = ["curve", "--in", str(exp1_wav), "--frame-index", "100", "--kmin", "20", "--kmax", "120", "--out", str(out)]
    assert run(args) == EXIT_SUCCESS
    table = _curve_table(out)
    assert sorted(table) == list(range(20, 121))
    assert table[55][0] < 1e-10
    assert table[55][0] <= min(values[0] for values in table.values()) + 1e-12
    assert table[55][2] == max(values[2] for values in table.values())


def test_curve_exp2_frame_100_logs_first_dips(exp2_wav, tmp_path, caplog):
    out = tmp_path / "curve.csv"
    with caplog.at_level("INFO", logger="PitchCore"):
        code = run(["curve", "--in", str(exp2_wav), "--frame-index", "100", "--hop", "50", "--out", str(out)])
    assert code == EXIT_SUCCESS
    assert "asmdf: first qualifying extrema at k=[22, 45]" in caplog.text
    assert "autocorr: first qualifying extrema at k=[22, 46]" in caplog.text
    table = _curve_table(out)
    assert min(table) == 11 and max(table) == 110


def test_curve_argument_errors(exp1_wav, exp2_wav):
    assert run(["curve", "--in", str(exp1_wav), "--frame-index", "100", "--kmin", "20", "--kmax", "199"]) == EXIT_USAGE
    assert run(["curve", "--in", str(exp2_wav), "--frame-index", "100"]) == EXIT_USAGE
    assert run(["curve", "--in", str(exp1_wav), "--frame-index", "-1"]) == EXIT_USAGE


# ────────────────────────────────────────────────────────────
# bench and configuration

def test_bench_needs_three_sizes():
    assert run(["bench", "--sizes", "256,512"]) == EXIT_USAGE
    assert run(["bench", "--sizes", "256,x"]) == EXIT_USAGE


def test_bench_writes_csv_and_prints_slopes(tmp_path, capsys):
    out = tmp_path / "bench.csv"
    assert run(["bench", "--sizes", "64,128,256", "--reps", "1", "--out", str(out)]) == EXIT_SUCCESS
    lines = out.read_text(encoding="utf-8").splitlines()
    assert lines[0] == "n,method,ops,seconds"
    assert len(lines) == 10
    printed = capsys.readouterr().out
    for method in ("asmdf", "amdf", "autocorr"):
        assert f"slope {method}: ops" in printed


def test_config_file_supplies_defaults(exp1_wav, tmp_path):
    config = tmp_path / "config.json"
    config.write_text(json.dumps({**DEFAULT_CONFIG, "hop": 110, "method": "AMDF"}), encoding="utf-8")
    out = tmp_path / "track.csv"
    assert run(["--config", str(config), "track", "--in", str(exp1_wav), "--out", str(out)]) == EXIT_SUCCESS
    contour = read_contour_csv(out)
    assert len(contour) == 97
    assert contour.step_ms() == pytest.approx(10.0)


def test_bad_or_missing_config_file(exp1_wav, tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({"window_size": 1}), encoding="utf-8")
    assert run(["--config", str(bad), "track", "--in", str(exp1_wav)]) == EXIT_USAGE
    assert run(["--config", str(tmp_path / "none.json"), "track", "--in", str(exp1_wav)]) == EXIT_USAGE


@pytest.mark.parametrize(
    "content",
    [
        "[1, 2, 3]",
        json.dumps({"window_size": None}),
        json.dumps({"bench_sizes": None}),
        json.dumps({"log_file": 5}),
        "{not json",
    ],
)
def test_malformed_config_values_are_usage_errors(exp1_wav, tmp_path, content):
    config = tmp_path / "config.json"
    config.write_text(content, encoding="utf-8")
    assert run(["--config", str(config), "track", "--in", str(exp1_wav)]) == EXIT_USAGE


def test_null_hop_falls_back_to_a_quarter_window(exp1_wav, tmp_path):
    config = tmp_path / "config.json"
    config.write_text(json.dumps({"hop": None}), encoding="utf-8")
    out = tmp_path / "track.csv"
    assert run(["--config", str(config), "track", "--in", str(exp1_wav), "--out", str(out)]) == EXIT_SUCCESS
    contour = read_contour_csv(out)
    assert len(contour) == (11001 - 400) // 100 + 1
    assert contour.step_ms() == pytest.approx(100 / 11.0, abs=1e-3)


def test_empty_wav_is_an_io_error(tmp_path, make_wav):
    path = tmp_path / "empty.wav"
    path.write_bytes(make_wav([]))
    assert run(["track", "--in", str(path)]) == EXIT_IO


@pytest.mark.skipif(os.name != "posix", reason="POSIX file modes")
def test_outputs_are_not_owner_only(exp1_wav, tmp_path):
    previous = os.umask(0o022)
    try:
        wav = tmp_path / "exp1.wav"
        csv = tmp_path / "track.csv"
        assert run(["synth", "--preset", "exp1", "--out", str(wav)]) == EXIT_SUCCESS
        assert run(["track", "--in", str(exp1_wav), "--out", str(csv)]) == EXIT_SUCCESS
    finally:
        os.umask(previous)
    assert stat.S_IMODE(wav.stat().st_mode) == 0o644
    assert stat.S_IMODE(csv.stat().st_mode) == 0o644
