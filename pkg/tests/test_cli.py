import json
import struct
import subprocess
import sys

import numpy as np
import pytest
from scipy.io import wavfile

from bwe.cli import main
from bwe.pipeline import enhance, rtf_report
from bwe.refiner import CrossoverSpec
from bwe.resample import Sinc, resample
from bwe.signal import Waveform, rfft
from bwe.vocoder import VocoderConfig, init_random, save_weights
from bwe.wavio import WavFormatError, read_wav, write_wav

from conftest import SR, sine


def write(path, samples, rate):
    wavfile.write(path, rate, np.asarray(samples, dtype=np.float32))
    return path


def write_pcm24(path, samples, rate):
    ints = np.round(np.clip(samples, -1, 1) * (2**23 - 1)).astype(np.int32)
    raw = b"".join(int(v).to_bytes(3, "little", signed=True) for v in ints)
    fmt = struct.pack("<HHIIHH", 1, 1, rate, rate * 3, 3, 24)
    body = b"WAVE" + b"fmt " + struct.pack("<I", len(fmt)) + fmt + b"data" + struct.pack("<I", len(raw)) + raw
    path.write_bytes(b"RIFF" + struct.pack("<I", len(body)) + body)
    return path


@pytest.fixture
def clip8k(tmp_path, rng):
    return write(tmp_path / "in8k.wav", 0.3 * rng.uniform(-1, 1, 8000), 8000)


@pytest.fixture
def clip48k(tmp_path, rng):
    return write(tmp_path / "in48k.wav", 0.3 * rng.uniform(-1, 1, SR), SR)


class TestWavIO:
    def test_float_round_trip(self, tmp_path, rng):
        w = Waveform(rng.uniform(-1, 1, 1000).astype(np.float32), 16000)
        write_wav(tmp_path / "a.wav", w)
        back = read_wav(tmp_path / "a.wav")
        assert back.sample_rate == 16000
        np.testing.assert_array_equal(back.samples, w.samples)

    def test_pcm16(self, tmp_path):
        w = Waveform(np.array([0.0, 0.5, -1.0, 1.0, 2.0]), 8000)
        write_wav(tmp_path / "a.wav", w, pcm16=True)
        rate, data = wavfile.read(tmp_path / "a.wav")
        assert data.dtype == np.int16
        np.testing.assert_array_equal(data, [0, 16384, -32767, 32767, 32767])

    def test_pcm16_rounds_half_even(self, tmp_path):
        w = Waveform(np.array([0.5, 1.5, 2.5]) / 32767, 8000)
        write_wav(tmp_path / "a.wav", w, pcm16=True)
        np.testing.assert_array_equal(wavfile.read(tmp_path / "a.wav")[1], [0, 2, 2])

    def test_pcm24(self, tmp_path):
        x = np.linspace(-0.9, 0.9, 101)
        back = read_wav(write_pcm24(tmp_path / "a.wav", x, 22050))
        assert back.sample_rate == 22050
        np.testing.assert_allclose(back.samples, x, atol=2**-22)

    def test_stereo_rejected(self, tmp_path):
        wavfile.write(tmp_path / "s.wav", SR, np.zeros((100, 2), np.float32))
        with pytest.raises(WavFormatError, match="mono"):
            read_wav(tmp_path / "s.wav")

    def test_rate_range(self, tmp_path):
        write(tmp_path / "r.wav", np.zeros(10), 96000)
        with pytest.raises(WavFormatError, match="sample rate"):
            read_wav(tmp_path / "r.wav")

    def test_garbage(self, tmp_path):
        (tmp_path / "g.wav").write_bytes(b"not a wav file at all")
        with pytest.raises(WavFormatError):
            read_wav(tmp_path / "g.wav")


class TestPipeline:
    def test_low_band_anchor_end_to_end(self, default_model, rng):
        w = Waveform(rng.uniform(-0.3, 0.3, SR), SR)
        spec = CrossoverSpec(21600, 24000)
        result = enhance(w, default_model, spec)
        y = resample(w, SR, Sinc())
        Y = rfft(y.samples, len(y))
        merged = result.merged_spectrum()
        low = merged.freqs < 21600
        assert np.array_equal(merged.bins[low], Y.bins[low])

    def test_default_crossover_from_rate(self, default_model):
        result = enhance(sine(440.0, 0.5, 16000), default_model)
        assert (result.crossover.f_start, result.crossover.f_end) == (7200, 8000)
        assert len(result.output) == 24000

    def test_rtf_arithmetic(self):
        r = rtf_report(0.02, 4.0, 1)
        assert r["rtf"] == pytest.approx(0.005)
        assert r["speed_x"] * r["rtf"] == pytest.approx(1.0, abs=1e-9)
        r32 = rtf_report(0.0102, 4.0, 32)
        assert r32["rtf"] == pytest.approx(0.0102 / (4.0 * 32))


class TestEnhance:
    def test_8k_to_48k(self, tmp_path, clip8k, capsys):
        out = tmp_path / "out.wav"
        assert main(["enhance", str(clip8k), "-o", str(out), "--seed", "3"]) == 0
        rate, data = wavfile.read(out)
        assert rate == SR and data.shape == (48000,) and data.dtype == np.float32
        err = capsys.readouterr().err
        assert "untrained" in err.lower()
        assert "3600-4000 Hz" in err

    def test_deterministic_bytes(self, tmp_path, clip8k):
        a, b = tmp_path / "a.wav", tmp_path / "b.wav"
        assert main(["enhance", str(clip8k), "-o", str(a), "--seed", "11"]) == 0
        assert main(["enhance", str(clip8k), "-o", str(b), "--seed", "11"]) == 0
        assert a.read_bytes() == b.read_bytes()

    def test_48k_low_band_preserved(self, tmp_path, clip48k):
        out = tmp_path / "out.wav"
        assert main(["enhance", str(clip48k), "-o", str(out), "--f-start", "21600", "--f-end", "24000"]) == 0
        x = read_wav(clip48k).samples
        y = read_wav(out).samples
        X, Y = rfft(x, len(x)), rfft(y, len(y))
        low = X.freqs < 21600
        # only float32 storage separates the written output from the anchor
        np.testing.assert_allclose(Y.bins[low], X.bins[low], atol=1e-3)

    def test_weights_file(self, tmp_path, clip8k, default_model):
        wpath = tmp_path / "m.bwef"
        save_weights(default_model, wpath)
        a, b = tmp_path / "a.wav", tmp_path / "b.wav"
        assert main(["enhance", str(clip8k), "-o", str(a), "--weights", str(wpath)]) == 0
        assert main(["enhance", str(clip8k), "-o", str(b), "--seed", "0"]) == 0
        assert a.read_bytes() == b.read_bytes()

    def test_output_dir_and_pcm16(self, tmp_path, clip8k):
        outdir = tmp_path / "out"
        assert main(["enhance", str(clip8k), "--output-dir", str(outdir), "--pcm16"]) == 0
        rate, data = wavfile.read(outdir / "in8k_48k.wav")
        assert rate == SR and data.dtype == np.int16

    def test_thread_counts_agree(self, tmp_path, clip8k):
        a, b = tmp_path / "a.wav", tmp_path / "b.wav"
        assert main(["enhance", str(clip8k), "-o", str(a), "--threads", "1"]) == 0
        assert main(["enhance", str(clip8k), "-o", str(b), "--threads", "3"]) == 0
        da, db = read_wav(a).samples, read_wav(b).samples
        assert np.sqrt(np.mean((da - db) ** 2)) < 1e-6

    def test_corrupt_weights_exit_2(self, tmp_path, clip8k):
        bad = tmp_path / "bad.bwef"
        bad.write_bytes(b"NOPE" + bytes(100))
        assert main(["enhance", str(clip8k), "-o", str(tmp_path / "o.wav"), "--weights", str(bad)]) == 2

    def test_numeric_failure_exit_3(self, tmp_path, clip8k):
        model = init_random(VocoderConfig(), 0)
        model.pointwise_weight[:] = 3e38
        wpath = tmp_path / "huge.bwef"
        save_weights(model, wpath)
        out = tmp_path / "o.wav"
        assert main(["enhance", str(clip8k), "-o", str(out), "--weights", str(wpath)]) == 3
        assert not out.exists()

    def test_stereo_exit_2(self, tmp_path):
        wavfile.write(tmp_path / "s.wav", 16000, np.zeros((100, 2), np.float32))
        assert main(["enhance", str(tmp_path / "s.wav"), "-o", str(tmp_path / "o.wav")]) == 2

    def test_bad_crossover_exit_1(self, tmp_path, clip8k):
        assert main(["enhance", str(clip8k), "-o", str(tmp_path / "o.wav"), "--f-start", "5000", "--f-end", "4000"]) == 1


class TestDegrade:
    def test_band_limited(self, tmp_path, clip48k):
        from scipy.signal import welch
        out = tmp_path / "d.wav"
        assert main(["degrade", str(clip48k), "-o", str(out), "--rate", "8000", "--method", "sinc"]) == 0
        y = read_wav(out)
        assert len(y) == SR and y.sample_rate == SR
        f, p = welch(y.samples, SR, nperseg=4096)
        assert 10 * np.log10(p[f > 4000].sum() / p[f < 3500].sum()) <= -40

    def test_full_rate_near_identity(self, tmp_path, clip48k):
        out = tmp_path / "d.wav"
        assert main(["degrade", str(clip48k), "-o", str(out), "--rate", "48000"]) == 0
        np.testing.assert_allclose(read_wav(out).samples, read_wav(clip48k).samples, atol=1e-6)

    def test_random_rate_deterministic(self, tmp_path, clip48k, capsys):
        a, b = tmp_path / "a.wav", tmp_path / "b.wav"
        assert main(["degrade", str(clip48k), "-o", str(a), "--rate", "random", "--seed", "7"]) == 0
        assert main(["degrade", str(clip48k), "-o", str(b), "--rate", "random", "--seed", "7"]) == 0
        assert a.read_bytes() == b.read_bytes()
        err = capsys.readouterr().err
        chosen = {int(tok) for tok in err.replace(",", " ").split() if tok.isdigit() and int(tok) in (8000, 12000, 16000)}
        assert len(chosen) == 1

    @pytest.mark.parametrize("args", [["--rate", "4000"], ["--method", "cubic"], ["--rate", "abc"],
                                      ["--quant-bits", "2", "--rate", "8000"]])
    def test_invalid_exit_1(self, tmp_path, clip48k, args):
        assert main(["degrade", str(clip48k), "-o", str(tmp_path / "d.wav"), *args]) == 1

    def test_requires_48k(self, tmp_path, clip8k):
        assert main(["degrade", str(clip8k), "-o", str(tmp_path / "d.wav"), "--rate", "8000"]) == 1


class TestEval:
    def run(self, capsys, *args):
        code = main(["eval", *map(str, args)])
        captured = capsys.readouterr()
        self.err = captured.err
        return code, captured.out

    def test_identical(self, capsys, clip48k):
        code, out = self.run(capsys, clip48k, clip48k)
        assert code == 0
        report = json.loads(out)
        assert report["lsd"] == 0.0 and report["mrstft"] == 0.0 and report["mel_l1"] == 0.0
        assert set(report) == {"file", "lsd", "mrstft", "mel_l1", "input_rate", "crossover"}

    def test_crossover_reported(self, capsys, clip48k):
        code, out = self.run(capsys, clip48k, clip48k, "--input-rate", "8000")
        report = json.loads(out)
        assert report["input_rate"] == 8000
        assert report["crossover"] == {"f_start": 3600.0, "f_end": 4000.0, "variant": "smoothstep"}

    def test_monotone_in_rate(self, capsys, tmp_path, clip48k):
        lsds = {}
        for rate in (8000, 16000):
            d = tmp_path / f"d{rate}.wav"
            assert main(["degrade", str(clip48k), "-o", str(d), "--rate", str(rate)]) == 0
            capsys.readouterr()
            _, out = self.run(capsys, clip48k, d)
            lsds[rate] = json.loads(out)["lsd"]
        assert lsds[8000] > lsds[16000]

    def test_malformed_wav(self, capsys, tmp_path, clip48k):
        bad = tmp_path / "bad.wav"
        bad.write_bytes(b"RIFF\x00\x00\x00\x00junk")
        code, out = self.run(capsys, clip48k, bad)
        assert code == 2 and out == ""

    def test_length_mismatch_warns(self, capsys, tmp_path, clip48k):
        x = read_wav(clip48k).samples
        short = write(tmp_path / "short.wav", x[:40000], SR)
        code, out = self.run(capsys, clip48k, short)
        assert code == 0 and json.loads(out)["lsd"] >= 0
        assert "trimming to 40000" in self.err

    def test_resamples_non_48k(self, capsys, tmp_path):
        a = write(tmp_path / "a.wav", sine(300.0, 1.0, 16000).samples, 16000)
        code, out = self.run(capsys, a, a)
        assert code == 0 and json.loads(out)["lsd"] == 0.0


class TestBench:
    def test_report_fields(self, capsys):
        assert main(["bench", "--duration", "0.5", "--batch", "2", "--warmup", "1", "--iters", "2", "--threads", "1"]) == 0
        captured = capsys.readouterr()
        report = json.loads(captured.out)
        assert report["rtf"] == pytest.approx(report["latency_s"] / (0.5 * 2), rel=1e-12)
        assert report["speed_x"] * report["rtf"] == pytest.approx(1.0, abs=1e-9)
        assert report["threads"] == 1 and report["untrained"] is True
        assert "untrained" in captured.err.lower()


class TestMask:
    def rows(self, capsys, *args):
        assert main(["mask", *args]) == 0
        lines = capsys.readouterr().out.splitlines()
        assert lines[0] == "frequency_hz,mask_value"
        return np.array([[float(v) for v in line.split(",")] for line in lines[1:]])

    def test_rate(self, capsys):
        rows = self.rows(capsys, "--rate", "8000")
        assert len(rows) == 1025
        assert np.all(rows[rows[:, 0] < 3600, 1] == 0.0)
        assert np.all(rows[rows[:, 0] > 4000, 1] == 1.0)

    def test_midpoint_row(self, capsys):
        # 3750 Hz and 4218.75 Hz are bins 160 and 180 at n_fft 2048; bin 170 is the midpoint
        rows = self.rows(capsys, "--f-start", "3750", "--f-end", "4218.75", "--n-fft", "2048")
        assert rows[170, 0] == 3984.375 and rows[170, 1] == 0.5

    def test_variant(self, capsys):
        rows = self.rows(capsys, "--f-start", "3000", "--f-end", "5000", "--variant", "butterworth", "--n-fft", "96")
        f_c_row = rows[rows[:, 0] == 4000.0]
        assert f_c_row[0, 1] == pytest.approx(2**-0.5)

    @pytest.mark.parametrize("args", [[], ["--f-start", "4000"], ["--f-start", "5000", "--f-end", "4000"],
                                      ["--rate", "8000", "--f-start", "100"], ["--rate", "4000"]])
    def test_invalid_exit_1(self, args):
        assert main(["mask", *args]) == 1


def test_usage_error_exit_code():
    proc = subprocess.run([sys.executable, "-m", "bwe", "frobnicate"], capture_output=True, text=True)
    assert proc.returncode == 1
    assert proc.stdout == ""


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "bwe", "mask", "--rate", "16000", "--n-fft", "8"],
                          capture_output=True, text=True)
    assert proc.returncode == 0
    assert proc.stdout.splitlines()[0] == "frequency_hz,mask_value"
