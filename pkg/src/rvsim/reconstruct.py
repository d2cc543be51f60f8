"""Turn spike volumes back into images.

FSM volumes use inter-spike intervals directly (TFI): the brightness of a
pixel is threshold / interval.  Receptive-field volumes track a per-scale
coefficient grid updated on every spike and synthesize frames by summing
the kernels weighted by those coefficients (an inverse transform).
"""

from __future__ import annotations

from dataclasses import dataclass

import cv2
import numpy as np

from . import sampler as _sampler
from .filterbank import (DOG, GAUSSIAN, FilterBank, KernelSpec, border_l1_map,
                         build_kernel, unit_bank)

ADJUST_MODES = ("none", "match_mean", "match_mean_std")

_EPS = 1e-12


class ReconstructionError(ValueError):
    pass


@dataclass(frozen=True)
class ReconstructionConfig:
    brightness_adjust: str = "none"
    clamp: bool = True

    def __post_init__(self):
        if self.brightness_adjust not in ADJUST_MODES:
            raise ReconstructionError("unknown brightness_adjust %r"
                                      % (self.brightness_adjust,))


def bank_for_volume(volume):
    """Rebuild the kernel bank a receptive-field volume was sampled with."""
    if volume.model == _sampler.FSM:
        return unit_bank()
    kind = DOG if volume.model == _sampler.RVSM_DOG else GAUSSIAN
    return FilterBank(kind=kind, scales=volume.scales)


def tfi_frame(volume, t):
    """Brightness estimate at step t from the two latest spikes per pixel.

    Pixels with a single spike so far use the interval from step 0;
    pixels that never spiked read 0.
    """
    if volume.model != _sampler.FSM:
        raise ReconstructionError("TFI needs an FSM volume, got %r" % (volume.model,))
    if not (0 < t <= volume.num_steps):
        raise ReconstructionError("t must be in (0, %d], got %r" % (volume.num_steps, t))
    phi = volume.thresholds[0]
    shape = (volume.height, volume.width)
    last = np.zeros(shape)
    prev = np.zeros(shape)
    count = np.zeros(shape, dtype=int)
    for step in range(1, t + 1):
        fired = volume.spikes[step - 1, 0] > 0
        prev[fired] = last[fired]
        last[fired] = step
        count[fired] += 1
    out = np.zeros(shape)
    have = count >= 1
    out[have] = phi / (last[have] - prev[have])
    return out


class CoefficientGrid:
    """Running per-(scale, pixel) estimates of the transform coefficients."""

    def __init__(self, n_scales, height, width):
        self.K = np.zeros((n_scales, height, width))
        self.last_fire = np.zeros((n_scales, height, width), dtype=int)
        self.t = 0


def update_coefficients(grid, planes, thresholds, t=None):
    """Apply one step of spikes: K <- +/- threshold / (t - t_pre) on firing."""
    planes = np.asarray(planes)
    if planes.shape != grid.K.shape:
        raise ReconstructionError("spike planes shape %r does not match grid %r"
                                  % (planes.shape, grid.K.shape))
    if t is None:
        t = grid.t + 1
    if t <= grid.t:
        raise ReconstructionError("t must increase strictly (got %r after %r)"
                                  % (t, grid.t))
    for s in range(grid.K.shape[0]):
        phi = thresholds[s]
        pos = planes[s] > 0
        neg = planes[s] < 0
        if pos.any():
            grid.K[s][pos] = phi / (t - grid.last_fire[s][pos])
            grid.last_fire[s][pos] = t
        if neg.any():
            grid.K[s][neg] = -phi / (t - grid.last_fire[s][neg])
            grid.last_fire[s][neg] = t
    grid.t = t
    return grid


def synthesize_frame(grid, bank, denoms=None):
    """Sum each coefficient plane convolved with its kernel.

    Border accumulators carry clipped re-normalized kernels, identical to
    the ones used during sampling.
    """
    n_scales, height, width = grid.K.shape
    if bank.n_scales != n_scales:
        raise ReconstructionError("bank has %d scales, grid has %d"
                                  % (bank.n_scales, n_scales))
    if denoms is None:
        denoms = [border_l1_map(k, height, width) for k in bank.kernels]
    out = np.zeros((height, width))
    for s, kernel in enumerate(bank.kernels):
        plane = grid.K[s] / denoms[s]
        if kernel.half_width == 0:
            out += plane * float(kernel.weights[0, 0])
        else:
            # kernels are centro-symmetric, so correlation == convolution
            out += cv2.filter2D(plane, -1, kernel.weights,
                                borderType=cv2.BORDER_CONSTANT)
    return out


def _adjust(frame, ref, mode):
    if mode == "match_mean":
        m = frame.mean()
        gain = ref.mean() / m if m > _EPS else 1.0
        return frame * gain
    if mode == "match_mean_std":
        m, sd = frame.mean(), frame.std()
        if sd > _EPS:
            return (frame - m) / sd * ref.std() + ref.mean()
        return frame - m + ref.mean()
    return frame


def reconstruct_sequence(volume, config=None, reference=None, bank=None):
    """Reconstruct every step of a volume; returns a (T, H, W) float array.

    Brightness adjustment needs the reference scene and exists for
    evaluation against ground truth only; it never feeds back into
    sampling or the codec.
    """
    config = config or ReconstructionConfig()
    if config.brightness_adjust != "none" and reference is None:
        raise ReconstructionError("brightness adjustment requires a reference scene")
    ref_frames = None
    if reference is not None:
        ref_frames = np.asarray(reference.frames if hasattr(reference, "frames")
                                else reference, dtype=float)
        if ref_frames.shape != (volume.num_steps, volume.height, volume.width):
            raise ReconstructionError("reference shape does not match volume")
    T, height, width = volume.num_steps, volume.height, volume.width
    out = np.empty((T, height, width))
    if volume.model == _sampler.FSM:
        phi = volume.thresholds[0]
        last = np.zeros((height, width))
        prev = np.zeros((height, width))
        count = np.zeros((height, width), dtype=int)
        for t in range(1, T + 1):
            fired = volume.spikes[t - 1, 0] > 0
            prev[fired] = last[fired]
            last[fired] = t
            count[fired] += 1
            frame = np.zeros((height, width))
            have = count >= 1
            frame[have] = phi / (last[have] - prev[have])
            out[t - 1] = frame
    else:
        bank = bank or bank_for_volume(volume)
        denoms = [border_l1_map(k, height, width) for k in bank.kernels]
        grid = CoefficientGrid(bank.n_scales, height, width)
        for t in range(1, T + 1):
            update_coefficients(grid, volume.spikes[t - 1], volume.thresholds, t=t)
            out[t - 1] = synthesize_frame(grid, bank, denoms=denoms)
    if config.brightness_adjust != "none":
        for t in range(T):
            out[t] = _adjust(out[t], ref_frames[t], config.brightness_adjust)
    if config.clamp:
        np.clip(out, 0.0, 255.0, out=out)
    return out
