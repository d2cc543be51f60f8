"""Sensor noise model: dark current, offset voltage and capacitor factor.

Offset voltage and the capacitor factor are fixed-pattern: drawn once per
accumulator for a run.  Dark current is temporal, redrawn every sampling
step.  All draws come from counter-based Philox streams keyed on
(seed, component, scale, t), so a field can be regenerated identically in
any order and on any number of threads.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

# Stream tags keep the three noise components on disjoint counter lanes.
_TAG_DARK = 1
_TAG_VOS = 2
_TAG_THETA = 3

_MASK64 = (1 << 64) - 1


@dataclass(frozen=True)
class NoiseConfig:
    """Gaussian noise parameters.

    e1/e2/e3 are the means of dark current, offset voltage and capacitor
    factor; beta1/beta2/beta3 the base standard deviations, all scaled by
    the intensity multiplier k.  The defaults are calibration values for
    the simulator, chosen so a black scene produces a measurable spike
    rate at k=1; they are not a property of any physical device.
    """

    e1: float = 2.0
    e2: float = 0.0
    e3: float = 1.0
    beta1: float = 20.0
    beta2: float = 20.0
    beta3: float = 0.02
    k: float = 1.0

    def __post_init__(self):
        for name in ("beta1", "beta2", "beta3", "k"):
            if getattr(self, name) < 0:
                raise ValueError("%s must be non-negative" % name)


def _stream(seed, tag, scale_index, t=0):
    # Philox advances its counter from the low word, so the stream key
    # (t, scale, component) lives in the high words to keep streams disjoint.
    bitgen = np.random.Philox(key=int(seed) & _MASK64,
                              counter=[0, int(t), int(scale_index), int(tag)])
    return np.random.Generator(bitgen)


class NoiseField:
    """Realized noise for one sampling run.

    v_os and theta are (n_scales, H, W) arrays frozen for the run; dark
    current planes are generated on demand per (scale, t).
    """

    def __init__(self, config, seed, shape):
        n_scales, height, width = shape
        if n_scales < 1 or height < 1 or width < 1:
            raise ValueError("bad noise field shape %r" % (shape,))
        self.config = config
        self.seed = int(seed)
        self.shape = (n_scales, height, width)
        k = config.k
        vos = np.empty(self.shape)
        theta = np.empty(self.shape)
        for s in range(n_scales):
            vos[s] = config.e2 + config.beta2 * k * _stream(
                seed, _TAG_VOS, s).standard_normal((height, width))
            theta[s] = config.e3 + config.beta3 * k * _stream(
                seed, _TAG_THETA, s).standard_normal((height, width))
        vos.setflags(write=False)
        theta.setflags(write=False)
        self.v_os = vos
        self.theta = theta

    def dark_plane(self, scale_index, t):
        """Dark current field for one scale at sampling step t (fresh draw)."""
        _, height, width = self.shape
        cfg = self.config
        z = _stream(self.seed, _TAG_DARK, scale_index, t).standard_normal(
            (height, width))
        return cfg.e1 + cfg.beta1 * cfg.k * z


def realize_noise(config, seed, shape):
    """Materialize the fixed-pattern fields for a (n_scales, H, W) run."""
    return NoiseField(config, seed, shape)
