"""Acceptance suite: one test per criterion, each prints a PASS/FAIL line.

Run with `pytest -s tests/test_acceptance.py` to see the per-criterion
status lines.
"""

import io
import json
import math
import time

import numpy as np
import pytest

from conftest import naive_sample, random_scene_frames
from rvsim import cli, metrics, spikeio
from rvsim.filterbank import DOG, standard_banks, unit_bank
from rvsim.noise import NoiseConfig
from rvsim.reconstruct import ReconstructionConfig, reconstruct_sequence, tfi_frame
from rvsim.sampler import (SamplerConfig, SpikeVolume, make_config,
                           sample_sequence)
from rvsim.scenes import SceneStream, synth_scene

ALL_MODELS = ("FSM", "OneDoG", "TwoDoG", "ThreeDoG", "FourDoG",
              "OneGauss", "TwoGauss", "ThreeGauss", "FourGauss")


class _Criterion:
    def __init__(self, number, title, budget_s):
        self.number = number
        self.title = title
        self.budget = budget_s

    def __enter__(self):
        self.start = time.monotonic()
        return self

    def __exit__(self, exc_type, exc, tb):
        elapsed = time.monotonic() - self.start
        status = "PASS" if exc_type is None else "FAIL"
        print("ACCEPTANCE %2d [%s] %-38s (%.2fs / budget %ds)"
              % (self.number, status, self.title, elapsed, self.budget))
        if exc_type is None:
            assert elapsed < self.budget, (
                "criterion %d exceeded its %ds budget (%.2fs)"
                % (self.number, self.budget, elapsed))
        return False


def test_criterion_01_psnr_mse_anchor():
    with _Criterion(1, "PSNR/MSE consistency anchors", 1):
        assert metrics.psnr(129.29) == pytest.approx(27.02, abs=0.05)
        assert metrics.psnr(60.78) == pytest.approx(30.29, abs=0.05)


def test_criterion_02_fsm_equivalence():
    with _Criterion(2, "FSM == degenerate-bank RVSM_DoG", 10):
        rng = np.random.default_rng(2024)
        dog_cfg = SamplerConfig(bank=unit_bank(kind=DOG, label="dog"))
        fsm_cfg = make_config("FSM")
        for _ in range(50):
            h = int(rng.integers(4, 33))
            w = int(rng.integers(4, 33))
            T = int(rng.integers(10, 201))
            scene = SceneStream(frames=random_scene_frames(rng, T, h, w))
            v_fsm = sample_sequence(scene, fsm_cfg)
            v_dog = sample_sequence(scene, dog_cfg)
            np.testing.assert_array_equal(v_fsm.spikes, v_dog.spikes)
            assert v_fsm.thresholds == v_dog.thresholds


def test_criterion_03_exact_quantization():
    with _Criterion(3, "exact TFI quantization behavior", 1):
        scene = synth_scene("constant", 8, 8, 20, intensity=100.0)
        v = sample_sequence(scene, make_config("FSM"))
        first = [t + 1 for t in range(20) if v.spikes[t, 0, 0, 0]][0]
        assert first == 4
        assert tfi_frame(v, 8)[0, 0] == 100.0
        scene150 = synth_scene("constant", 8, 8, 20, intensity=150.0)
        v150 = sample_sequence(scene150, make_config("FSM"))
        target = 400.0 / math.ceil(400.0 / 150.0)
        assert tfi_frame(v150, 9)[0, 0] == pytest.approx(target, abs=1e-9)
        assert target == pytest.approx(400.0 / 3.0, abs=1e-12)


def test_criterion_04_threshold_tradeoff():
    with _Criterion(4, "threshold/response-time tradeoff", 1):
        for intensity in range(10, 260, 10):
            rts = [metrics.response_time(intensity, phi)
                   for phi in range(100, 1700, 100)]
            errs = [metrics.quantization_error_bound(intensity, phi)
                    for phi in range(100, 1700, 100)]
            assert rts == sorted(rts)
            assert errs == sorted(errs, reverse=True)


def test_criterion_05_constant_scene_synthesis_identity():
    with _Criterion(5, "constant-scene synthesis identity", 5):
        scene = synth_scene("constant", 64, 64, 12, intensity=100.0)
        v = sample_sequence(scene, make_config("OneGauss"))
        frames = reconstruct_sequence(v, ReconstructionConfig(clamp=False))
        interior = frames[8:, 2:-2, 2:-2]  # after the second firing epoch
        assert np.abs(interior - 100.0).max() == 0.0


def test_criterion_06_robustness_trend():
    with _Criterion(6, "noise robustness trend", 60):
        scene = synth_scene("black", 100, 100, 1000)
        i2_fsm, i2_dog, i3_rows = [], [], []
        for seed in range(10):
            nz = NoiseConfig()  # defaults, k=1
            vf = sample_sequence(scene, make_config("FSM", noise=nz, seed=seed))
            vd = sample_sequence(scene, make_config("FourDoG", noise=nz, seed=seed))
            i2_fsm.append(metrics.asas(vf))
            i2_dog.append(metrics.asas(vd))
            i3_rows.append([metrics.asass(vd, s) for s in vd.scales])
        mean_i3 = np.mean(i3_rows, axis=0)
        assert mean_i3[0] > mean_i3[1] > mean_i3[2] > mean_i3[3]
        assert np.mean(i2_dog) < np.mean(i2_fsm)


def test_criterion_07_filter_bank_invariants():
    with _Criterion(7, "filter bank invariants", 1):
        sizes = {"FSM": [(1, 1)],
                 "OneDoG": [(3, 3)], "OneGauss": [(3, 3)],
                 "TwoDoG": [(3, 3), (5, 5)], "TwoGauss": [(3, 3), (5, 5)],
                 "ThreeDoG": [(3, 3), (5, 5), (7, 7)],
                 "ThreeGauss": [(3, 3), (5, 5), (7, 7)],
                 "FourDoG": [(3, 3), (5, 5), (7, 7), (9, 9)],
                 "FourGauss": [(3, 3), (5, 5), (7, 7), (9, 9)]}
        for name in ALL_MODELS:
            bank = standard_banks(name)
            assert [k.weights.shape for k in bank.kernels] == sizes[name]
            for k in bank.kernels:
                assert abs(np.abs(k.weights).sum() - 1.0) < 1e-12


def test_criterion_08_codec_roundtrip():
    with _Criterion(8, "codec bit-exact roundtrip", 10):
        assert spikeio.pack_plane(np.zeros((2, 2), np.int8)) == b"\x00"
        assert spikeio.pack_plane(
            np.array([[1, -1], [0, 0]], np.int8)) == b"\x60"
        rng = np.random.default_rng(8)
        for _ in range(1000):
            model = ("fsm", "rvsm_dog", "rvsm_gauss")[int(rng.integers(3))]
            n = 1 if model == "fsm" else int(rng.integers(1, 5))
            T = int(rng.integers(1, 6))
            h = int(rng.integers(1, 9))
            w = int(rng.integers(1, 9))
            spikes = rng.integers(-1, 2, (T, n, h, w)).astype(np.int8)
            if model == "fsm":
                spikes = np.abs(spikes)
            v = SpikeVolume(model=model,
                            scales=tuple(0.24 + 0.1 * i for i in range(n)),
                            thresholds=tuple(float(rng.integers(100, 800))
                                             for _ in range(n)),
                            spikes=spikes, seed=int(rng.integers(0, 2 ** 63)))
            buf = io.BytesIO()
            spikeio.encode_volume(v, buf)
            back = spikeio.decode_volume(buf.getvalue())
            np.testing.assert_array_equal(back.spikes, v.spikes)
            assert (back.model, back.scales, back.thresholds, back.seed) == \
                (v.model, v.scales, v.thresholds, v.seed)


def test_criterion_09_bruteforce_oracle_equivalence():
    with _Criterion(9, "engine matches brute-force oracle", 30):
        rng = np.random.default_rng(9)
        for name in ALL_MODELS:
            scene = SceneStream(frames=random_scene_frames(rng, 50, 9, 9))
            cfg = make_config(name)
            fast = sample_sequence(scene, cfg)
            slow = naive_sample(scene, cfg)
            np.testing.assert_array_equal(fast.spikes, slow.spikes)


def test_criterion_10_end_to_end_determinism(tmp_path):
    with _Criterion(10, "end-to-end determinism", 30):
        scene_dir = tmp_path / "scene"
        cli.main(["synth", "--kind", "rotating_bar", "--height", "48",
                  "--width", "48", "--frames", "120", "--intensity", "180",
                  "--out", str(scene_dir)])
        cfg = {"model": "FourDoG", "threshold": 400.0, "seed": 77,
               "noise": {"enabled": True, "k": 1.0},
               "scene": str(scene_dir), "out": None}
        outputs = []
        reports = []
        for run, threads in (("a", 1), ("b", 1), ("c", 4)):
            spk = tmp_path / ("v_%s.spk" % run)
            cfg["out"] = str(spk)
            cfg["threads"] = threads
            cfg_path = tmp_path / ("cfg_%s.json" % run)
            cfg_path.write_text(json.dumps(cfg))
            assert cli.main(["sample", "--config", str(cfg_path)]) == 0
            recon = tmp_path / ("recon_%s" % run)
            assert cli.main(["reconstruct", "--in", str(spk),
                             "--out", str(recon), "--ref", str(scene_dir),
                             "--adjust", "match_mean"]) == 0
            report = tmp_path / ("rep_%s.txt" % run)
            assert cli.main(["evaluate", "--recon", str(recon),
                             "--ref", str(scene_dir),
                             "--report", str(report)]) == 0
            outputs.append(spk.read_bytes())
            reports.append(report.read_text())
        assert outputs[0] == outputs[1] == outputs[2]
        assert reports[0] == reports[1] == reports[2]
