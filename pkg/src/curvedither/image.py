"""Planar image containers, codeword arithmetic and the banding simulator.

Images are 4:4:4 planar Y/Cb/Cr with integer codewords held in uint16
regardless of declared bit depth.  Quantization is simulated by dropping
low bits (right shift then left shift), which thins the codeword
population and produces banding in smooth gradients.

On disk an image is three binary PGM files (P5, maxval 65535, big-endian
16-bit samples) named <stem>.y.pgm / <stem>.cb.pgm / <stem>.cr.pgm plus a
<stem>.json sidecar carrying width/height/bit_depth.
"""

from __future__ import annotations

import json
import math
import os
from dataclasses import dataclass

import numpy as np

_PLANE_SUFFIXES = (".y.pgm", ".cb.pgm", ".cr.pgm")
_PGM_MAXVAL = 65535


def _validate_bit_depth(bit_depth: int) -> None:
    if not 8 <= bit_depth <= 16:
        raise ValueError(f"bit_depth must be in 8..16, got {bit_depth}")


@dataclass(frozen=True)
class PlanarImage:
    """Immutable three-plane codeword image (Y, Cb, Cr), 4:4:4."""

    width: int
    height: int
    bit_depth: int
    planes: tuple[np.ndarray, np.ndarray, np.ndarray]

    def __post_init__(self):
        _validate_bit_depth(self.bit_depth)
        if len(self.planes) != 3:
            raise ValueError("expected exactly 3 planes (Y, Cb, Cr)")
        limit = (1 << self.bit_depth) - 1
        frozen = []
        for plane in self.planes:
            arr = np.asarray(plane)
            if arr.shape != (self.height, self.width):
                raise ValueError(
                    f"plane shape {arr.shape} != (height, width) "
                    f"({self.height}, {self.width})"
                )
            if arr.size and (int(arr.min()) < 0 or int(arr.max()) > limit):
                raise ValueError(
                    f"codewords outside [0, {limit}] for bit_depth {self.bit_depth}"
                )
            arr = arr.astype(np.uint16, copy=True)
            arr.flags.writeable = False
            frozen.append(arr)
        object.__setattr__(self, "planes", tuple(frozen))

    @property
    def y(self) -> np.ndarray:
        return self.planes[0]

    @property
    def cb(self) -> np.ndarray:
        return self.planes[1]

    @property
    def cr(self) -> np.ndarray:
        return self.planes[2]


@dataclass(frozen=True)
class HdrImage:
    """Three planes of normalized real intensities in [0, 1)."""

    width: int
    height: int
    planes: tuple[np.ndarray, np.ndarray, np.ndarray]

    def __post_init__(self):
        if len(self.planes) != 3:
            raise ValueError("expected exactly 3 planes")
        frozen = []
        for plane in self.planes:
            arr = np.asarray(plane, dtype=np.float64)
            if arr.shape != (self.height, self.width):
                raise ValueError(
                    f"plane shape {arr.shape} != (height, width) "
                    f"({self.height}, {self.width})"
                )
            if arr.size and (float(arr.min()) < 0.0 or float(arr.max()) >= 1.0):
                raise ValueError("normalized intensities must lie in [0, 1)")
            arr = arr.copy()
            arr.flags.writeable = False
            frozen.append(arr)
        object.__setattr__(self, "planes", tuple(frozen))


def quantize_plane(plane: np.ndarray, drop_bits: int, bit_depth: int) -> np.ndarray:
    """Right-shift then left-shift one plane by drop_bits."""
    if not 0 <= drop_bits < bit_depth:
        raise ValueError(
            f"drop_bits must satisfy 0 <= drop_bits < bit_depth, "
            f"got {drop_bits} for bit_depth {bit_depth}"
        )
    return ((plane >> drop_bits) << drop_bits).astype(np.uint16)


def quantize_codewords(img: PlanarImage, drop_bits: int) -> PlanarImage:
    """Simulate transmission quantization: drop then restore low bits.

    Bit depth is unchanged; the codeword population per plane shrinks to
    at most 2**(bit_depth - drop_bits) values.
    """
    planes = tuple(quantize_plane(p, drop_bits, img.bit_depth) for p in img.planes)
    return PlanarImage(img.width, img.height, img.bit_depth, planes)


def clamp_codeword(v: float, bit_depth: int) -> int:
    """Round half away from zero and clamp into the codeword range."""
    _validate_bit_depth(bit_depth)
    rounded = math.floor(v + 0.5) if v >= 0 else math.ceil(v - 0.5)
    return int(min(max(rounded, 0), (1 << bit_depth) - 1))


def clamp_plane(values: np.ndarray, bit_depth: int) -> np.ndarray:
    """Vectorized clamp_codeword; returns uint16."""
    _validate_bit_depth(bit_depth)
    rounded = np.where(values >= 0, np.floor(values + 0.5), np.ceil(values - 0.5))
    return np.clip(rounded, 0, (1 << bit_depth) - 1).astype(np.uint16)


def distinct_codewords(plane: np.ndarray) -> int:
    """Count of unique codeword values present in a plane."""
    return int(np.unique(plane).size)


def ramp_image(height: int = 64, bit_depth: int = 10) -> PlanarImage:
    """Synthetic horizontal ramp, one codeword per column, full range.

    Width is 2**bit_depth so every codeword appears exactly once per row;
    chroma planes are held at the mid codeword.
    """
    width = 1 << bit_depth
    row = np.arange(width, dtype=np.uint16)
    y = np.tile(row, (height, 1))
    mid = np.full((height, width), 1 << (bit_depth - 1), dtype=np.uint16)
    return PlanarImage(width, height, bit_depth, (y, mid, mid.copy()))


# ---------------------------------------------------------------------------
# PGM + sidecar serialization
# ---------------------------------------------------------------------------


def _atomic_write_bytes(path: str, data: bytes) -> None:
    tmp = path + ".tmp"
    with open(tmp, "wb") as fh:
        fh.write(data)
    os.replace(tmp, path)


def _atomic_write_set(files: list[tuple[str, bytes]]) -> None:
    """Stage every file to a temp name, then rename all.

    A failure while staging leaves no final path touched, so an image is
    never half-written across its plane files.
    """
    staged = []
    try:
        for path, data in files:
            tmp = path + ".tmp"
            with open(tmp, "wb") as fh:
                fh.write(data)
            staged.append((tmp, path))
    except Exception:
        for tmp, _ in staged:
            try:
                os.unlink(tmp)
            except OSError:
                pass
        raise
    for tmp, path in staged:
        os.replace(tmp, path)


def _pgm_bytes(plane: np.ndarray) -> bytes:
    h, w = plane.shape
    header = f"P5\n{w} {h}\n{_PGM_MAXVAL}\n".encode("ascii")
    return header + plane.astype(">u2").tobytes()


def _read_pgm(path: str) -> np.ndarray:
    with open(path, "rb") as fh:
        data = fh.read()

    # Tokenize the header: three whitespace-separated fields after the
    # magic, with '#' comments allowed between them.
    pos = 0

    def next_token():
        nonlocal pos
        while pos < len(data):
            c = data[pos : pos + 1]
            if c == b"#":
                nl = data.find(b"\n", pos)
                pos = len(data) if nl < 0 else nl + 1
            elif c.isspace():
                pos += 1
            else:
                break
        start = pos
        while pos < len(data) and not data[pos : pos + 1].isspace():
            pos += 1
        if start == pos:
            raise ValueError(f"{path}: truncated PGM header")
        return data[start:pos]

    magic = next_token()
    if magic != b"P5":
        raise ValueError(f"{path}: not a binary PGM (magic {magic!r})")
    width = int(next_token())
    height = int(next_token())
    maxval = int(next_token())
    if maxval != _PGM_MAXVAL:
        raise ValueError(f"{path}: expected maxval {_PGM_MAXVAL}, got {maxval}")
    pos += 1  # single whitespace byte after maxval
    expected = width * height * 2
    raster = data[pos : pos + expected]
    if len(raster) != expected:
        raise ValueError(f"{path}: raster truncated ({len(raster)}/{expected} bytes)")
    return np.frombuffer(raster, dtype=">u2").reshape(height, width).astype(np.uint16)


def save_image(img: PlanarImage, stem: str) -> None:
    """Write <stem>.y.pgm / .cb.pgm / .cr.pgm plus the <stem>.json sidecar."""
    sidecar = {"width": img.width, "height": img.height, "bit_depth": img.bit_depth}
    files = [
        (stem + suffix, _pgm_bytes(plane))
        for suffix, plane in zip(_PLANE_SUFFIXES, img.planes)
    ]
    files.append((stem + ".json", (json.dumps(sidecar) + "\n").encode("ascii")))
    _atomic_write_set(files)


def load_image(stem: str) -> PlanarImage:
    """Read the three planes and sidecar written by save_image."""
    with open(stem + ".json", "rb") as fh:
        sidecar = json.load(fh)
    width, height = int(sidecar["width"]), int(sidecar["height"])
    bit_depth = int(sidecar["bit_depth"])
    planes = []
    for suffix in _PLANE_SUFFIXES:
        plane = _read_pgm(stem + suffix)
        if plane.shape != (height, width):
            raise ValueError(
                f"{stem + suffix}: dimensions {plane.shape[::-1]} disagree "
                f"with sidecar ({width}, {height})"
            )
        planes.append(plane)
    return PlanarImage(width, height, bit_depth, tuple(planes))


def save_hdr_image(img: HdrImage, stem: str) -> None:
    """Write an HdrImage in the shared layout: bit_depth 16, floor(v*65536)."""
    planes = []
    for plane in img.planes:
        planes.append(np.floor(plane * 65536.0).astype(np.uint16))
    carrier = PlanarImage(img.width, img.height, 16, tuple(planes))
    save_image(carrier, stem)
