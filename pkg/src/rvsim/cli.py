"""Command-line frontend: synth -> sample -> reconstruct -> evaluate,
plus a noise robustness sweep that emits a plot-ready table.

`rvsim sample` accepts either flags or a JSON config file (see
load_run_config for the schema); unknown config keys are rejected.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

import numpy as np

from . import metrics, reconstruct, spikeio
from .filterbank import BANK_NAMES, standard_banks
from .noise import NoiseConfig
from .sampler import SamplerConfig, sample_sequence
from .scenes import SCENE_KINDS, synth_scene


class ConfigError(ValueError):
    pass


_NOISE_KEYS = {"enabled", "e1", "e2", "e3", "beta1", "beta2", "beta3", "k"}
_CONFIG_KEYS = {"model", "threshold", "per_scale_threshold", "seed", "threads",
                "noise", "scene", "out"}


def load_run_config(path):
    """Parse and validate a JSON run config; returns a plain dict."""
    with open(path) as fh:
        try:
            cfg = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ConfigError("config %s is not valid JSON: %s" % (path, exc))
    if not isinstance(cfg, dict):
        raise ConfigError("config root must be an object")
    unknown = set(cfg) - _CONFIG_KEYS
    if unknown:
        raise ConfigError("unknown config keys: %s" % ", ".join(sorted(unknown)))
    if "noise" in cfg:
        if not isinstance(cfg["noise"], dict):
            raise ConfigError("noise must be an object")
        bad = set(cfg["noise"]) - _NOISE_KEYS
        if bad:
            raise ConfigError("unknown noise keys: %s" % ", ".join(sorted(bad)))
    return cfg


def _noise_from_dict(d):
    if d is None or not d.get("enabled", True):
        return None
    params = {k: v for k, v in d.items() if k != "enabled"}
    return NoiseConfig(**params)


def _default_threads():
    return int(os.environ.get("RVSIM_THREADS", "1"))


def _sampler_config(model, threshold, per_scale_threshold, noise, seed, threads):
    bank = standard_banks(model)
    return SamplerConfig(bank=bank, threshold=threshold,
                         per_scale_threshold=per_scale_threshold,
                         noise=noise, seed=seed, threads=threads)


def cmd_synth(args):
    scene = synth_scene(args.kind, args.height, args.width, args.frames,
                        intensity=args.intensity)
    spikeio.write_images(scene.frames, args.out)
    print("wrote %d frames to %s" % (scene.num_frames, args.out))
    return 0


def cmd_sample(args):
    if args.config:
        cfg = load_run_config(args.config)
        model = cfg.get("model", args.model)
        threshold = float(cfg.get("threshold", args.threshold))
        pst = cfg.get("per_scale_threshold")
        seed = int(cfg.get("seed", args.seed))
        threads = int(cfg.get("threads", args.threads))
        noise = _noise_from_dict(cfg.get("noise"))
        scene_path = cfg.get("scene", args.scene)
        out = cfg.get("out", args.out)
    else:
        model, threshold, pst = args.model, args.threshold, None
        seed, threads = args.seed, args.threads
        noise = NoiseConfig(k=args.noise_k) if args.noise else None
        scene_path, out = args.scene, args.out
    if scene_path is None:
        raise ConfigError("no scene directory given")
    if out is None:
        raise ConfigError("no output path given")
    scene = spikeio.read_scene(scene_path)
    config = _sampler_config(model, threshold, pst, noise, seed, threads)
    volume = sample_sequence(scene, config)
    nbytes = spikeio.encode_volume(volume, out)
    print("sampled %d steps (%s) -> %s (%d bytes, %d spikes)"
          % (volume.num_steps, volume.model, out, nbytes,
             int(np.abs(volume.spikes, dtype=np.int64).sum())))
    return 0


def cmd_reconstruct(args):
    volume = spikeio.decode_volume(args.input)
    reference = spikeio.read_scene(args.ref) if args.ref else None
    cfg = reconstruct.ReconstructionConfig(brightness_adjust=args.adjust,
                                           clamp=not args.no_clamp)
    frames = reconstruct.reconstruct_sequence(volume, cfg, reference=reference)
    spikeio.write_images(frames, args.out)
    print("reconstructed %d frames -> %s" % (len(frames), args.out))
    return 0


def cmd_evaluate(args):
    recon = spikeio.read_scene(args.recon)
    ref = spikeio.read_scene(args.ref)
    report = metrics.evaluate_sequences(recon.frames, ref.frames)
    text = metrics.format_metric_report(report)
    Path(args.report).write_text(text)
    if args.per_frame:
        with open(args.per_frame, "w") as fh:
            fh.write("frame,mse,psnr_db,ssim\n")
            for i, (m, p, s) in enumerate(zip(report.frame_mse, report.frame_psnr,
                                              report.frame_ssim)):
                fh.write("%d,%.9g,%.9g,%.9g\n" % (i, m, p, s))
    sys.stdout.write(text)
    return 0


def _parse_sweep(spec):
    try:
        lo, hi, n = spec.split(":")
        lo, hi, n = float(lo), float(hi), int(n)
    except ValueError:
        raise ConfigError("k-sweep must look like lo:hi:n, got %r" % (spec,))
    if n < 1 or hi < lo:
        raise ConfigError("bad k-sweep range %r" % (spec,))
    return np.linspace(lo, hi, n)


def cmd_robustness(args):
    models = [m.strip() for m in args.models.split(",")]
    ks = _parse_sweep(args.k_sweep)
    scene = synth_scene("black", args.height, args.width, args.frames)
    rows = []
    for k in ks:
        for model in models:
            for seed in range(args.seeds):
                noise = NoiseConfig(k=float(k))
                config = _sampler_config(model, args.threshold, None, noise,
                                         seed, args.threads)
                volume = sample_sequence(scene, config)
                rep = metrics.robustness_indices(volume, k=float(k))
                i3 = [rep.i3[s] for s in sorted(rep.i3)]
                i3 += [""] * (4 - len(i3))
                rows.append([("%g" % k), model, str(seed), "%.9g" % rep.i1,
                             "%.9g" % rep.i2] + ["%.9g" % v if v != "" else ""
                                                 for v in i3])
    with open(args.out, "w") as fh:
        fh.write("k,model,seed,i1_ass,i2_asas,i3_scale1,i3_scale2,i3_scale3,i3_scale4\n")
        for row in rows:
            fh.write(",".join(row) + "\n")
    print("wrote %d rows to %s" % (len(rows), args.out))
    return 0


def build_parser():
    p = argparse.ArgumentParser(prog="rvsim",
                                description="spike-camera sampling simulator")
    sub = p.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("synth", help="generate a synthetic scene directory")
    sp.add_argument("--kind", choices=SCENE_KINDS, required=True)
    sp.add_argument("--height", type=int, required=True)
    sp.add_argument("--width", type=int, required=True)
    sp.add_argument("--frames", type=int, required=True)
    sp.add_argument("--intensity", type=float, default=100.0)
    sp.add_argument("--out", required=True)
    sp.set_defaults(func=cmd_synth)

    sp = sub.add_parser("sample", help="sample a scene into a .spk volume")
    sp.add_argument("--scene", help="scene frame directory")
    sp.add_argument("--config", help="JSON run config")
    sp.add_argument("--model", default="FSM", choices=BANK_NAMES)
    sp.add_argument("--threshold", type=float, default=400.0)
    sp.add_argument("--noise", action="store_true", help="enable default noise")
    sp.add_argument("--noise-k", type=float, default=1.0)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--threads", type=int, default=_default_threads())
    sp.add_argument("--out", help="output .spk path")
    sp.set_defaults(func=cmd_sample)

    sp = sub.add_parser("reconstruct", help="reconstruct images from a .spk volume")
    sp.add_argument("--in", dest="input", required=True)
    sp.add_argument("--out", required=True)
    sp.add_argument("--ref", help="reference frames for brightness adjustment")
    sp.add_argument("--adjust", default="none",
                    choices=reconstruct.ADJUST_MODES)
    sp.add_argument("--no-clamp", action="store_true")
    sp.set_defaults(func=cmd_reconstruct)

    sp = sub.add_parser("evaluate", help="compare reconstructed frames to a reference")
    sp.add_argument("--recon", required=True)
    sp.add_argument("--ref", required=True)
    sp.add_argument("--report", required=True)
    sp.add_argument("--per-frame", help="optional per-frame CSV")
    sp.set_defaults(func=cmd_evaluate)

    sp = sub.add_parser("robustness", help="noise intensity sweep on a black scene")
    sp.add_argument("--k-sweep", required=True, help="lo:hi:n")
    sp.add_argument("--seeds", type=int, default=10)
    sp.add_argument("--models", default="FSM,FourDoG")
    sp.add_argument("--height", type=int, default=100)
    sp.add_argument("--width", type=int, default=100)
    sp.add_argument("--frames", type=int, default=1000)
    sp.add_argument("--threshold", type=float, default=400.0)
    sp.add_argument("--threads", type=int, default=_default_threads())
    sp.add_argument("--out", required=True)
    sp.set_defaults(func=cmd_robustness)
    return p


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, ValueError, OSError) as exc:
        print("error: %s" % exc, file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
