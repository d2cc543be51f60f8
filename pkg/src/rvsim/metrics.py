"""Image quality metrics, noise-robustness indices and threshold analysis."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import ndimage

from . import sampler as _sampler

PEAK = 255.0

# Standard single-scale SSIM parameters: 11x11 Gaussian window, sigma 1.5.
SSIM_SIGMA = 1.5
SSIM_TRUNCATE = 3.5
SSIM_K1 = 0.01
SSIM_K2 = 0.03


class MetricError(ValueError):
    pass


def mse(a, b):
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.shape != b.shape:
        raise MetricError("shape mismatch %r vs %r" % (a.shape, b.shape))
    d = a - b
    return float(np.mean(d * d))


def psnr(mse_value):
    if mse_value < 0:
        raise MetricError("mse must be non-negative")
    if mse_value == 0:
        return math.inf
    return 10.0 * math.log10(PEAK * PEAK / mse_value)


def ssim(a, b):
    """Mean local SSIM with a Gaussian window (K1=0.01, K2=0.03, L=255)."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.shape != b.shape:
        raise MetricError("shape mismatch %r vs %r" % (a.shape, b.shape))
    radius = int(SSIM_TRUNCATE * SSIM_SIGMA + 0.5)
    win = 2 * radius + 1
    if min(a.shape) < win:
        raise MetricError("images must be at least %dx%d" % (win, win))

    def smooth(x):
        return ndimage.gaussian_filter(x, SSIM_SIGMA, truncate=SSIM_TRUNCATE)

    ux = smooth(a)
    uy = smooth(b)
    uxx = smooth(a * a)
    uyy = smooth(b * b)
    uxy = smooth(a * b)
    vx = uxx - ux * ux
    vy = uyy - uy * uy
    vxy = uxy - ux * uy
    c1 = (SSIM_K1 * PEAK) ** 2
    c2 = (SSIM_K2 * PEAK) ** 2
    s = ((2 * ux * uy + c1) * (2 * vxy + c2)) / ((ux * ux + uy * uy + c1) * (vx + vy + c2))
    pad = (win - 1) // 2
    return float(s[pad:-pad, pad:-pad].mean())


@dataclass
class MetricReport:
    """Per-frame metrics plus their sequence average."""

    frame_mse: list = field(default_factory=list)
    frame_psnr: list = field(default_factory=list)
    frame_ssim: list = field(default_factory=list)
    mse: float = math.nan
    psnr: float = math.nan
    ssim: float = math.nan
    aggregation: str = "per_frame_mean"


def evaluate_sequences(recon, reference, with_ssim=True):
    """Metrics per frame, then averaged over the sequence."""
    recon = np.asarray(recon, dtype=float)
    reference = np.asarray(reference, dtype=float)
    if recon.shape != reference.shape:
        raise MetricError("shape mismatch %r vs %r" % (recon.shape, reference.shape))
    if recon.ndim == 2:
        recon = recon[None]
        reference = reference[None]
    rep = MetricReport()
    for t in range(recon.shape[0]):
        m = mse(recon[t], reference[t])
        rep.frame_mse.append(m)
        rep.frame_psnr.append(psnr(m))
        if with_ssim:
            rep.frame_ssim.append(ssim(recon[t], reference[t]))
    rep.mse = float(np.mean(rep.frame_mse))
    rep.psnr = float(np.mean(rep.frame_psnr))
    rep.ssim = float(np.mean(rep.frame_ssim)) if with_ssim else math.nan
    return rep


def format_metric_report(report):
    lines = [
        "aggregation=%s" % report.aggregation,
        "frames=%d" % len(report.frame_mse),
        "mse=%.6f" % report.mse,
        "psnr_db=%.6f" % report.psnr,
        "ssim=%.6f" % report.ssim,
        "ssim_window=11x11_gaussian_sigma1.5_k1_0.01_k2_0.03_peak_255",
    ]
    return "\n".join(lines) + "\n"


def ass(volume):
    """Average spikes per sampling step (negative spikes count as one)."""
    if volume.num_steps < 1:
        raise MetricError("empty volume")
    return float(np.abs(volume.spikes, dtype=np.int64).sum()) / volume.num_steps


def asas(volume):
    """Average spikes per accumulator per sampling step."""
    denom = volume.width * volume.height
    if volume.model != _sampler.FSM:
        denom *= len(volume.scales)
    return ass(volume) / denom


def asass(volume, sigma):
    """Average spikes per step over accumulators of one scale.

    For the per-pixel model there is only one population, so this equals
    the total per-step rate.
    """
    if volume.model == _sampler.FSM:
        return ass(volume)
    try:
        idx = volume.scales.index(float(sigma))
    except ValueError:
        raise MetricError("sigma %r not in volume scales %r"
                          % (sigma, volume.scales))
    total = float(np.abs(volume.spikes[:, idx], dtype=np.int64).sum())
    return total / (volume.num_steps * volume.width * volume.height)


@dataclass
class RobustnessReport:
    model: str
    k: float
    num_steps: int
    height: int
    width: int
    n_scales: int
    i1: float
    i2: float
    i3: dict  # scale -> rate

    def row(self):
        cells = [self.k, self.model, self.i1, self.i2]
        cells += [self.i3[s] for s in sorted(self.i3)]
        return cells


def robustness_indices(volume, k=None):
    if k is None:
        k = volume.noise.k if volume.noise is not None else 0.0
    i3 = {s: asass(volume, s) for s in volume.scales}
    return RobustnessReport(model=volume.model, k=float(k),
                            num_steps=volume.num_steps, height=volume.height,
                            width=volume.width, n_scales=len(volume.scales),
                            i1=ass(volume), i2=asas(volume), i3=i3)


def response_time(intensity, phi):
    """Steps until the first spike on a constant scene."""
    if intensity <= 0 or phi <= 0:
        raise MetricError("intensity and phi must be positive")
    return math.ceil(phi / intensity)


def quantization_error(intensity, phi):
    """Exact TFI error on a constant scene: |phi/ceil(phi/I) - I|."""
    n = response_time(intensity, phi)
    return abs(phi / n - intensity)


def quantization_error_bound(intensity, phi):
    """Worst-case TFI error for the quantization bin of (I, phi).

    The estimate phi/n with n = ceil(phi/I) lies within I/n of the true
    intensity, and this bound shrinks as the threshold grows.
    """
    return intensity / response_time(intensity, phi)
