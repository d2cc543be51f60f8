"""Receptive-field kernels and the scale banks used by the sampling models.

Two kernel families are supported: all-positive Gaussian profiles and
difference-of-Gaussians (DoG) band-pass profiles.  Kernels are sampled on
an integer template of half-width L (so (2L+1) x (2L+1) taps) and divided
by their L1 norm, which keeps firing thresholds comparable across scales.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import cv2
import numpy as np

GAUSSIAN = "gaussian"
DOG = "dog"

# Inner / outer standard deviations of the DoG mother profile.
DOG_INNER_SIGMA = 1.0
DOG_OUTER_SIGMA = 1.5874

# Smallest bank scale; maps to a 3x3 template and anchors template sizing.
MIN_SCALE = 0.24

# Scale sets of the standard banks, smallest first.
STANDARD_SCALES = (0.24, 0.348, 0.5046, 0.7317)

BANK_NAMES = (
    "FSM",
    "OneDoG", "TwoDoG", "ThreeDoG", "FourDoG",
    "OneGauss", "TwoGauss", "ThreeGauss", "FourGauss",
)


class KernelError(ValueError):
    """Raised for invalid kernel specs or degenerate templates."""


def gaussian_kernel_value(i, j, x0, y0, sigma):
    """2D isotropic Gaussian centered at (x0, y0), evaluated at (i, j)."""
    if sigma <= 0:
        raise KernelError("sigma must be positive, got %r" % (sigma,))
    r2 = (i - x0) ** 2 + (j - y0) ** 2
    return math.exp(-r2 / (2.0 * sigma * sigma)) / (2.0 * math.pi * sigma * sigma)


def dog_mother_value(i, j):
    """DoG mother profile: unit-scale Gaussian minus a 1.5874x wider one."""
    return (gaussian_kernel_value(i, j, 0.0, 0.0, DOG_INNER_SIGMA)
            - gaussian_kernel_value(i, j, 0.0, 0.0, DOG_OUTER_SIGMA))


def template_half_width(sigma):
    """Template half-width for a scale, anchored so sigma=0.24 gives 3x3."""
    if sigma <= 0:
        raise KernelError("sigma must be positive, got %r" % (sigma,))
    return max(1, math.ceil(sigma / MIN_SCALE))


@dataclass(frozen=True)
class KernelSpec:
    """Describes one receptive-field kernel.

    half_width 0 is the degenerate unit template (a single 1.0 tap), used
    by the fovea-style per-pixel model.  When half_width is None it is
    derived from the scale.
    """

    scale: float
    kind: str
    center: tuple[int, int] = (0, 0)
    half_width: int | None = None

    def __post_init__(self):
        if self.scale <= 0:
            raise KernelError("scale must be positive, got %r" % (self.scale,))
        if self.kind not in (GAUSSIAN, DOG):
            raise KernelError("unknown kernel kind %r" % (self.kind,))
        if self.half_width is None:
            object.__setattr__(self, "half_width", template_half_width(self.scale))
        elif self.half_width < 0:
            raise KernelError("half_width must be >= 0, got %r" % (self.half_width,))


@dataclass(frozen=True)
class Kernel:
    spec: KernelSpec
    weights: np.ndarray  # (2L+1, 2L+1), L1-normalized

    @property
    def half_width(self):
        return self.spec.half_width

    def __eq__(self, other):
        if not isinstance(other, Kernel):
            return NotImplemented
        return self.spec == other.spec and np.array_equal(self.weights, other.weights)


def build_kernel(spec):
    """Sample the mother profile on the template and L1-normalize it.

    The template is centered on spec.center; weights only depend on the
    offset from the center, so every kernel of a scale is a translate of
    the centered one.
    """
    L = spec.half_width
    if L == 0:
        weights = np.ones((1, 1))
    else:
        off = np.arange(-L, L + 1, dtype=float) / spec.scale
        di, dj = np.meshgrid(off, off, indexing="ij")
        r2 = di * di + dj * dj
        g_inner = np.exp(-r2 / (2.0 * DOG_INNER_SIGMA ** 2)) / (2.0 * math.pi * DOG_INNER_SIGMA ** 2)
        if spec.kind == GAUSSIAN:
            raw = g_inner
        else:
            g_outer = np.exp(-r2 / (2.0 * DOG_OUTER_SIGMA ** 2)) / (2.0 * math.pi * DOG_OUTER_SIGMA ** 2)
            raw = g_inner - g_outer
        l1 = float(np.abs(raw).sum())
        if l1 == 0.0:
            raise KernelError("degenerate template: all weights are zero")
        weights = raw / l1
    weights.setflags(write=False)
    return Kernel(spec=spec, weights=weights)


@dataclass(frozen=True)
class FilterBank:
    """One centered kernel per scale; off-center kernels are translates."""

    kind: str  # "fsm", "dog" or "gaussian"
    scales: tuple[float, ...]
    kernels: tuple[Kernel, ...] = field(default=None)

    def __post_init__(self):
        if len(self.scales) < 1:
            raise KernelError("a bank needs at least one scale")
        if list(self.scales) != sorted(set(self.scales)):
            raise KernelError("scales must be strictly increasing")
        if self.kernels is None:
            if self.kind not in (GAUSSIAN, DOG):
                raise KernelError("unknown bank kind %r" % (self.kind,))
            built = tuple(build_kernel(KernelSpec(scale=s, kind=self.kind))
                          for s in self.scales)
            object.__setattr__(self, "kernels", built)

    @property
    def n_scales(self):
        return len(self.scales)


def unit_bank(kind=GAUSSIAN, label="fsm"):
    """Degenerate bank with a single 1x1 unit-weight kernel."""
    k = build_kernel(KernelSpec(scale=1.0, kind=kind, half_width=0))
    return FilterBank(kind=label, scales=(1.0,), kernels=(k,))


_BANK_SPECS = {
    "fsm": None,
    "onedog": (DOG, 1),
    "twodog": (DOG, 2),
    "threedog": (DOG, 3),
    "fourdog": (DOG, 4),
    "onegauss": (GAUSSIAN, 1),
    "twogauss": (GAUSSIAN, 2),
    "threegauss": (GAUSSIAN, 3),
    "fourgauss": (GAUSSIAN, 4),
}


def standard_banks(name):
    """Build one of the named banks (FSM, OneDoG..FourDoG, OneGauss..FourGauss)."""
    key = str(name).lower().replace(" ", "").replace("_", "")
    if key not in _BANK_SPECS:
        raise KernelError("unknown bank name %r (expected one of %s)"
                          % (name, ", ".join(BANK_NAMES)))
    if key == "fsm":
        return unit_bank()
    kind, n = _BANK_SPECS[key]
    return FilterBank(kind=kind, scales=STANDARD_SCALES[:n])


def border_l1_map(kernel, height, width):
    """Per-position L1 mass of the kernel clipped to the image.

    Kernels overhanging the border are clipped and re-normalized by this
    map so that every accumulator keeps unit L1 weight.
    """
    ones = np.ones((height, width))
    absw = np.abs(kernel.weights)
    if kernel.half_width == 0:
        return ones * float(absw[0, 0])
    return cv2.filter2D(ones, -1, absw, borderType=cv2.BORDER_CONSTANT)
