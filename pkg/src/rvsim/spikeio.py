"""Bit-exact spike-stream file format (.spk), scene ingestion, image output.

Layout (little-endian):
  magic "RVS1" | version u16 | model u8 | height u32 | width u32 | T u32 |
  n_scales u16 | scales n*f64 | thresholds n*f64 | noise_enabled u8 |
  noise params 7*f64 (e1 e2 e3 beta1 beta2 beta3 k) | seed u64
followed by, for each step and each scale, the H*W ternary plane packed
2 bits per value, most significant pair first (00 -> 0, 01 -> +1,
10 -> -1, 11 invalid), each plane padded to a byte boundary.
"""

from __future__ import annotations

import io
import struct
from pathlib import Path

import numpy as np
from PIL import Image

from .noise import NoiseConfig
from .sampler import FSM, RVSM_DOG, RVSM_GAUSS, SpikeVolume
from .scenes import SceneStream

MAGIC = b"RVS1"
VERSION = 1

_MODEL_CODES = {FSM: 0, RVSM_DOG: 1, RVSM_GAUSS: 2}
_MODEL_NAMES = {v: k for k, v in _MODEL_CODES.items()}

_FIXED_HEAD = struct.Struct("<4sHBIIIH")
_TAIL_FMT = "<B7dQ"

# +1 -> code 1, -1 -> code 2; index by (value & 3)
_CODE_OF = np.array([0, 1, 0, 2], dtype=np.uint8)
_VALUE_OF = np.array([0, 1, -1, 0], dtype=np.int8)


class SpikeFormatError(ValueError):
    pass


def header_size(n_scales):
    return _FIXED_HEAD.size + 16 * n_scales + struct.calcsize(_TAIL_FMT)


def plane_bytes(height, width):
    return (height * width + 3) // 4


def file_size(num_steps, n_scales, height, width):
    return header_size(n_scales) + num_steps * n_scales * plane_bytes(height, width)


def pack_plane(plane):
    """Pack one H x W ternary plane into bytes, MSB pair first."""
    flat = np.asarray(plane, dtype=np.int8).ravel()
    codes = _CODE_OF[flat & 3]
    pad = (-len(codes)) % 4
    if pad:
        codes = np.concatenate([codes, np.zeros(pad, dtype=np.uint8)])
    quads = codes.reshape(-1, 4)
    packed = (quads[:, 0] << 6) | (quads[:, 1] << 4) | (quads[:, 2] << 2) | quads[:, 3]
    return packed.astype(np.uint8).tobytes()


def unpack_plane(data, height, width):
    raw = np.frombuffer(data, dtype=np.uint8)
    if len(raw) != plane_bytes(height, width):
        raise SpikeFormatError("plane payload truncated")
    codes = np.empty((len(raw), 4), dtype=np.uint8)
    codes[:, 0] = (raw >> 6) & 3
    codes[:, 1] = (raw >> 4) & 3
    codes[:, 2] = (raw >> 2) & 3
    codes[:, 3] = raw & 3
    codes = codes.ravel()[: height * width]
    if np.any(codes == 3):
        raise SpikeFormatError("invalid spike code 11 in payload")
    return _VALUE_OF[codes].reshape(height, width)


def encode_volume(volume, sink):
    """Write a volume to a binary sink (file object or path); returns bytes written."""
    close = False
    if isinstance(sink, (str, Path)):
        sink = open(sink, "wb")
        close = True
    try:
        T, n_scales = volume.num_steps, len(volume.scales)
        head = _FIXED_HEAD.pack(MAGIC, VERSION, _MODEL_CODES[volume.model],
                                volume.height, volume.width, T, n_scales)
        sink.write(head)
        sink.write(struct.pack("<%dd" % n_scales, *volume.scales))
        sink.write(struct.pack("<%dd" % n_scales, *volume.thresholds))
        nz = volume.noise
        if nz is None:
            sink.write(struct.pack(_TAIL_FMT, 0, 0, 0, 0, 0, 0, 0, 0,
                                   volume.seed & (2 ** 64 - 1)))
        else:
            sink.write(struct.pack(_TAIL_FMT, 1, nz.e1, nz.e2, nz.e3,
                                   nz.beta1, nz.beta2, nz.beta3, nz.k,
                                   volume.seed & (2 ** 64 - 1)))
        written = header_size(n_scales)
        for t in range(T):
            for s in range(n_scales):
                payload = pack_plane(volume.spikes[t, s])
                sink.write(payload)
                written += len(payload)
        return written
    finally:
        if close:
            sink.close()


def _read_exact(source, n, what):
    data = source.read(n)
    if len(data) != n:
        raise SpikeFormatError("truncated stream while reading %s" % what)
    return data


def decode_volume(source):
    """Read a volume back; exact inverse of encode_volume."""
    close = False
    if isinstance(source, (str, Path)):
        source = open(source, "rb")
        close = True
    elif isinstance(source, (bytes, bytearray)):
        source = io.BytesIO(source)
    try:
        magic, version, model_code, height, width, T, n_scales = _FIXED_HEAD.unpack(
            _read_exact(source, _FIXED_HEAD.size, "header"))
        if magic != MAGIC:
            raise SpikeFormatError("bad magic %r" % (magic,))
        if version != VERSION:
            raise SpikeFormatError("unsupported version %d" % version)
        if model_code not in _MODEL_NAMES:
            raise SpikeFormatError("unknown model code %d" % model_code)
        if n_scales < 1:
            raise SpikeFormatError("n_scales must be >= 1")
        scales = struct.unpack("<%dd" % n_scales,
                               _read_exact(source, 8 * n_scales, "scales"))
        thresholds = struct.unpack("<%dd" % n_scales,
                                   _read_exact(source, 8 * n_scales, "thresholds"))
        tail = struct.unpack(_TAIL_FMT, _read_exact(
            source, struct.calcsize(_TAIL_FMT), "noise block"))
        noise_enabled = tail[0]
        noise = None
        if noise_enabled:
            e1, e2, e3, b1, b2, b3, k = tail[1:8]
            noise = NoiseConfig(e1=e1, e2=e2, e3=e3, beta1=b1, beta2=b2,
                                beta3=b3, k=k)
        seed = tail[8]
        nbytes = plane_bytes(height, width)
        spikes = np.empty((T, n_scales, height, width), dtype=np.int8)
        for t in range(T):
            for s in range(n_scales):
                spikes[t, s] = unpack_plane(
                    _read_exact(source, nbytes, "spike plane (t=%d, scale=%d)" % (t, s)),
                    height, width)
        model = _MODEL_NAMES[model_code]
        if model == FSM and np.any(spikes < 0):
            raise SpikeFormatError("FSM volume contains negative spikes")
        return SpikeVolume(model=model, scales=scales, thresholds=thresholds,
                           spikes=spikes, noise=noise, seed=seed)
    finally:
        if close:
            source.close()


def read_scene(path):
    """Load a directory of equally-sized 8-bit grayscale frames (lexicographic)."""
    path = Path(path)
    if not path.is_dir():
        raise SpikeFormatError("scene path %s is not a directory" % path)
    files = sorted(p for p in path.iterdir()
                   if p.suffix.lower() in (".png", ".pgm", ".bmp", ".tif", ".tiff"))
    if not files:
        raise SpikeFormatError("no image frames found in %s" % path)
    frames = []
    shape = None
    for p in files:
        try:
            img = Image.open(p).convert("L")
        except Exception as exc:
            raise SpikeFormatError("unreadable frame %s: %s" % (p, exc))
        arr = np.asarray(img, dtype=float)
        if shape is None:
            shape = arr.shape
        elif arr.shape != shape:
            raise SpikeFormatError("frame %s has size %r, expected %r"
                                   % (p.name, arr.shape, shape))
        frames.append(arr)
    return SceneStream(frames=np.stack(frames))


def write_images(frames, directory, prefix="frame"):
    """Write frames as 8-bit grayscale PNGs with zero-padded indices."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    frames = np.asarray(frames, dtype=float)
    if frames.ndim == 2:
        frames = frames[None]
    paths = []
    for i, frame in enumerate(frames):
        data = np.clip(np.rint(frame), 0, 255).astype(np.uint8)
        p = directory / ("%s_%06d.png" % (prefix, i))
        Image.fromarray(data, mode="L").save(p)
        paths.append(p)
    return paths
