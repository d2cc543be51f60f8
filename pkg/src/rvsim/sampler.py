"""Integrate-and-fire sampling of scene streams into ternary spike volumes.

Each accumulator integrates the kernel-weighted brightness of its
receptive field and fires when the accumulation crosses the threshold;
the fovea-style per-pixel model (FSM) is the unit-kernel special case and
only fires on the positive threshold.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import cv2
import numpy as np

from .filterbank import FilterBank, border_l1_map, standard_banks, unit_bank
from .noise import NoiseConfig, realize_noise
from .scenes import SceneStream, synth_scene  # noqa: F401  (re-exported)

FSM = "fsm"
RVSM_DOG = "rvsm_dog"
RVSM_GAUSS = "rvsm_gauss"

MODELS = (FSM, RVSM_DOG, RVSM_GAUSS)

DEFAULT_THRESHOLD = 400.0

# Relative slack on the firing comparison.  Accumulations are sums of
# rounded products, so an accumulator that mathematically hits the
# threshold exactly can land a few ulps short; the slack absorbs that
# without letting genuinely sub-threshold accumulations fire.
THRESHOLD_RTOL = 1e-12


class SamplingError(ValueError):
    pass


def _model_for_bank(bank):
    return {"fsm": FSM, "dog": RVSM_DOG, "gaussian": RVSM_GAUSS}[bank.kind]


@dataclass(frozen=True)
class SamplerConfig:
    bank: FilterBank
    threshold: float = DEFAULT_THRESHOLD
    per_scale_threshold: tuple[float, ...] | None = None
    noise: NoiseConfig | None = None
    seed: int = 0
    threads: int = 1
    reset_residual: bool = False  # carry A +/- threshold instead of reset-to-0

    def __post_init__(self):
        if self.threshold <= 0:
            raise SamplingError("threshold must be positive")
        if self.per_scale_threshold is not None:
            pst = tuple(float(x) for x in self.per_scale_threshold)
            if len(pst) != self.bank.n_scales:
                raise SamplingError("per_scale_threshold must have one entry per scale")
            if any(x <= 0 for x in pst):
                raise SamplingError("per-scale thresholds must be positive")
            object.__setattr__(self, "per_scale_threshold", pst)
        if self.threads < 1:
            raise SamplingError("threads must be >= 1")

    @property
    def thresholds(self):
        if self.per_scale_threshold is not None:
            return self.per_scale_threshold
        return (float(self.threshold),) * self.bank.n_scales


@dataclass(frozen=True)
class SpikeVolume:
    """Ternary spike tensor with the metadata needed to decode it."""

    model: str
    scales: tuple[float, ...]
    thresholds: tuple[float, ...]
    spikes: np.ndarray  # (T, n_scales, H, W) int8 in {-1, 0, +1}
    noise: NoiseConfig | None = None
    seed: int = 0

    def __post_init__(self):
        if self.model not in MODELS:
            raise SamplingError("unknown model %r" % (self.model,))
        s = np.asarray(self.spikes, dtype=np.int8)
        if s.ndim != 4:
            raise SamplingError("spikes must be (T, n_scales, H, W)")
        if s.shape[1] != len(self.scales) or len(self.scales) != len(self.thresholds):
            raise SamplingError("scale/threshold metadata does not match spikes")
        if self.model == FSM and len(self.scales) != 1:
            raise SamplingError("FSM volumes have exactly one scale")
        if s.size and (np.abs(s) > 1).any():
            raise SamplingError("spike values must be ternary")
        if self.model == FSM and s.size and (s < 0).any():
            raise SamplingError("FSM volumes cannot contain negative spikes")
        s.setflags(write=False)
        object.__setattr__(self, "spikes", s)
        object.__setattr__(self, "scales", tuple(float(x) for x in self.scales))
        object.__setattr__(self, "thresholds", tuple(float(x) for x in self.thresholds))

    @property
    def num_steps(self):
        return self.spikes.shape[0]

    @property
    def height(self):
        return self.spikes.shape[2]

    @property
    def width(self):
        return self.spikes.shape[3]


class SamplingEngine:
    """Stateful stepper: feed frames, get (n_scales, H, W) spike planes.

    One engine belongs to one run; the accumulator state is mutated in
    place.  Scales are independent within a step, so they can be computed
    on a thread pool without changing the result.
    """

    def __init__(self, height, width, config, dt=1.0):
        bank = config.bank
        self.config = config
        self.model = _model_for_bank(bank)
        self.height = int(height)
        self.width = int(width)
        self.dt = float(dt)
        self.n_scales = bank.n_scales
        self._weights = [k.weights for k in bank.kernels]
        self._unit = [k.half_width == 0 and float(k.weights[0, 0]) == 1.0
                      for k in bank.kernels]
        self._denoms = [None if self._unit[s] else
                        border_l1_map(bank.kernels[s], height, width)
                        for s in range(self.n_scales)]
        self.accumulators = np.zeros((self.n_scales, height, width))
        self.t = 0
        phis = config.thresholds
        self._phis = phis
        if config.noise is not None:
            self._noise = realize_noise(config.noise, config.seed,
                                        (self.n_scales, height, width))
            self._triggers = np.stack([
                self._noise.theta[s] * phis[s] + self._noise.v_os[s]
                for s in range(self.n_scales)])
        else:
            self._noise = None
            self._triggers = np.stack([
                np.full((height, width), phis[s]) for s in range(self.n_scales)])
        self._tols = [phis[s] * THRESHOLD_RTOL for s in range(self.n_scales)]
        self._pool = (ThreadPoolExecutor(max_workers=config.threads)
                      if config.threads > 1 else None)

    def close(self):
        if self._pool is not None:
            self._pool.shutdown()
            self._pool = None

    def _step_scale(self, s, frame, out):
        if self._noise is not None:
            field = frame + self._noise.dark_plane(s, self.t)
        else:
            field = frame
        if self._unit[s]:
            contrib = field * 1.0
        else:
            contrib = cv2.filter2D(field, -1, self._weights[s],
                                   borderType=cv2.BORDER_CONSTANT)
            contrib /= self._denoms[s]
        acc = self.accumulators[s]
        acc += contrib * self.dt
        trig = self._triggers[s]
        tol = self._tols[s]
        pos = acc >= trig - tol
        if self.model == FSM:
            fired = pos
            out[s] = pos.astype(np.int8)
        else:
            neg = acc <= -(trig - tol)
            fired = pos | neg
            out[s] = pos.astype(np.int8) - neg.astype(np.int8)
        if self.config.reset_residual:
            acc[pos] -= trig[pos]
            if self.model != FSM:
                acc[neg] += trig[neg]
        else:
            acc[fired] = 0.0

    def step(self, frame):
        """Advance one sampling interval; returns int8 spike planes."""
        frame = np.asarray(frame, dtype=float)
        if frame.shape != (self.height, self.width):
            raise SamplingError("frame shape %r does not match engine (%d, %d)"
                                % (frame.shape, self.height, self.width))
        self.t += 1
        out = np.empty((self.n_scales, self.height, self.width), dtype=np.int8)
        if self._pool is None:
            for s in range(self.n_scales):
                self._step_scale(s, frame, out)
        else:
            list(self._pool.map(lambda s: self._step_scale(s, frame, out),
                                range(self.n_scales)))
        return out


def step_accumulators(engine, frame):
    """Functional alias over SamplingEngine.step."""
    return engine.step(frame)


def sample_sequence(scene, config):
    """Run the full scene through a fresh engine and collect a SpikeVolume."""
    if not isinstance(scene, SceneStream):
        scene = SceneStream(frames=np.asarray(scene, dtype=float))
    if scene.num_frames < 1:
        raise SamplingError("scene is empty")
    engine = SamplingEngine(scene.height, scene.width, config, dt=scene.dt)
    try:
        spikes = np.empty((scene.num_frames, engine.n_scales,
                           scene.height, scene.width), dtype=np.int8)
        for t in range(scene.num_frames):
            spikes[t] = engine.step(scene.frames[t])
    finally:
        engine.close()
    return SpikeVolume(model=engine.model,
                       scales=config.bank.scales,
                       thresholds=config.thresholds,
                       spikes=spikes,
                       noise=config.noise,
                       seed=config.seed)


def make_config(model_name, threshold=DEFAULT_THRESHOLD, per_scale_threshold=None,
                noise=None, seed=0, threads=1):
    """Convenience: SamplerConfig from a standard bank name."""
    bank = standard_banks(model_name)
    return SamplerConfig(bank=bank, threshold=threshold,
                         per_scale_threshold=per_scale_threshold,
                         noise=noise, seed=seed, threads=threads)
