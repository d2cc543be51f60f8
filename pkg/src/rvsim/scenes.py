"""Synthetic test scenes.

Stand-ins for recorded footage: small analytic scenes that are cheap to
generate and fully deterministic.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

SCENE_KINDS = ("black", "constant", "gradient", "moving_edge", "rotating_bar")


@dataclass(frozen=True)
class SceneStream:
    """Ordered brightness frames, one per sampling step.

    Brightness is in 8-bit digital units [0, 255] but stored as float64.
    dt is the sampling interval in steps (the physical interval of the
    target sensor is 1/40000 s; everything here works in steps).
    """

    frames: np.ndarray  # (T, H, W) float64
    dt: float = 1.0

    def __post_init__(self):
        f = np.asarray(self.frames, dtype=float)
        if f.ndim != 3 or f.shape[0] < 1:
            raise ValueError("frames must be a nonempty (T, H, W) array")
        if np.any(f < 0):
            raise ValueError("brightness must be non-negative")
        f.setflags(write=False)
        object.__setattr__(self, "frames", f)

    @property
    def num_frames(self):
        return self.frames.shape[0]

    @property
    def height(self):
        return self.frames.shape[1]

    @property
    def width(self):
        return self.frames.shape[2]


def synth_scene(kind, height, width, num_frames, intensity=100.0, low=0.0,
                period=50, speed=1.0, bar_width=3.0):
    """Generate a deterministic analytic scene.

    kinds:
      black        all-zero frames
      constant     every pixel at `intensity`
      gradient     static horizontal ramp from `low` to `intensity`
      moving_edge  vertical edge sweeping right at `speed` px/frame,
                   `intensity` on the left of the edge, `low` on the right
      rotating_bar bar through the center rotating with the given period
                   (frames), so frame(t + period) == frame(t)
    """
    if height < 1 or width < 1 or num_frames < 1:
        raise ValueError("scene dimensions must be positive")
    if kind not in SCENE_KINDS:
        raise ValueError("unknown scene kind %r (expected one of %s)"
                         % (kind, ", ".join(SCENE_KINDS)))
    shape = (num_frames, height, width)
    if kind == "black":
        frames = np.zeros(shape)
    elif kind == "constant":
        frames = np.full(shape, float(intensity))
    elif kind == "gradient":
        ramp = np.linspace(low, intensity, width)
        frames = np.broadcast_to(ramp, shape).copy()
    elif kind == "moving_edge":
        frames = np.empty(shape)
        cols = np.arange(width)
        for t in range(num_frames):
            edge = (t * speed) % width
            frames[t] = np.where(cols < edge, intensity, low)
    else:  # rotating_bar
        yy, xx = np.mgrid[0:height, 0:width]
        cy, cx = (height - 1) / 2.0, (width - 1) / 2.0
        yy = yy - cy
        xx = xx - cx
        frames = np.empty(shape)
        for t in range(num_frames):
            ang = 2.0 * np.pi * (t % period) / period
            # distance from the line through the center at angle `ang`
            d = np.abs(xx * np.sin(ang) - yy * np.cos(ang))
            frames[t] = np.where(d <= bar_width, intensity, low)
    return SceneStream(frames=frames)
