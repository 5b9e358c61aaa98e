"""Backward look-up table model for SDR-to-HDR inverse tone mapping.

A table maps the 1024 ten-bit SDR codewords to normalized HDR intensities
in [0, 1).  The codeword axis splits into four regions: a lower clipped
flat (Down), low-lights and mid-tones (Mid), highlights (High, above the
configurable highlight threshold) and an upper clipped flat (Up).  Slopes
of the table drive the adaptivity of the injector: the steeper the local
slope, the stronger the banding risk and the higher the transition
probability of the selected noise pattern.
"""

from __future__ import annotations

import json
import math
import os
from dataclasses import dataclass
from enum import IntEnum

import numpy as np

TABLE_SIZE = 1024
DEFAULT_HIGHLIGHT_THRESHOLD = 0.625
PROBABILITY_BINS = 10


class InvalidBlutError(ValueError):
    """Raised for tables that are not valid inverse tone maps."""


class FlatBlutError(ValueError):
    """Raised when a slope-relative quantity is requested of a flat table."""


class Region(IntEnum):
    DOWN = 0
    MID = 1
    HIGH = 2
    UP = 3


@dataclass(frozen=True)
class Blut:
    """1024-entry non-decreasing map from SDR codeword to HDR intensity."""

    entries: np.ndarray
    highlight_threshold: float = DEFAULT_HIGHLIGHT_THRESHOLD

    def __post_init__(self):
        arr = np.asarray(self.entries, dtype=np.float64)
        if arr.shape != (TABLE_SIZE,):
            raise InvalidBlutError(
                f"expected {TABLE_SIZE} entries, got shape {arr.shape}"
            )
        if not np.all(np.isfinite(arr)):
            raise InvalidBlutError("entries must be finite")
        if float(arr.min()) < 0.0 or float(arr.max()) >= 1.0:
            raise InvalidBlutError("entries must lie in [0, 1)")
        if np.any(np.diff(arr) < 0):
            raise InvalidBlutError("entries must be non-decreasing")
        if not 0.0 < self.highlight_threshold < 1.0:
            raise InvalidBlutError(
                f"highlight_threshold must be in (0, 1), got {self.highlight_threshold}"
            )
        arr = arr.copy()
        arr.flags.writeable = False
        object.__setattr__(self, "entries", arr)


@dataclass(frozen=True)
class RegionPartition:
    """Four-way split of the codeword axis.

    Down = [0, y0), Mid = [y0, yh), High = [yh, y1), Up = [y1, 1023].
    For a fully constant table the split degenerates to y0 = yh = y1 =
    1023 (everything lands in Down/Up and is never injected).
    """

    y0: int
    yh: int
    y1: int
    codes: np.ndarray  # int8 Region code per codeword

    def region(self, t: int) -> Region:
        return Region(int(self.codes[t]))


@dataclass(frozen=True)
class SlopeProfile:
    """Forward differences of a table plus their Mid+High maximum."""

    slope: np.ndarray
    max_slope: float


def partition(blut: Blut, highlight_threshold: float | None = None) -> RegionPartition:
    """Locate the flat clip regions and the highlight start.

    y0 is the last codeword of the constant prefix (0 when there is
    none), y1 the first codeword of the constant suffix (1023 when there
    is none), and yh the first codeword whose HDR intensity exceeds the
    highlight threshold, clamped into (y0, y1].
    """
    thr = blut.highlight_threshold if highlight_threshold is None else highlight_threshold
    if not 0.0 < thr < 1.0:
        raise ValueError(f"highlight_threshold must be in (0, 1), got {thr}")
    e = blut.entries

    differs_head = np.flatnonzero(e != e[0])
    if differs_head.size == 0:
        # Constant table: no injectable region exists.
        y0 = yh = y1 = TABLE_SIZE - 1
    else:
        y0 = int(differs_head[0]) - 1
        y1 = int(np.flatnonzero(e != e[-1])[-1]) + 1
        above = np.flatnonzero(e > thr)
        yh = int(above[0]) if above.size else y1
        yh = min(max(yh, y0 + 1), y1)

    codes = np.full(TABLE_SIZE, Region.MID, dtype=np.int8)
    codes[:y0] = Region.DOWN
    codes[yh:y1] = Region.HIGH
    codes[y1:] = Region.UP
    codes.flags.writeable = False
    return RegionPartition(y0=y0, yh=yh, y1=y1, codes=codes)


def slopes(blut: Blut, part: RegionPartition | None = None) -> SlopeProfile:
    """Forward-difference slope per codeword, last entry replicated.

    max_slope is taken over Mid and High of the supplied partition (the
    default partition of this table when none is given); it is 0.0 when
    those regions are empty.
    """
    if part is None:
        part = partition(blut)
    slope = np.empty(TABLE_SIZE)
    slope[:-1] = np.diff(blut.entries)
    slope[-1] = slope[-2]
    max_slope = float(slope[part.y0 : part.y1].max()) if part.y1 > part.y0 else 0.0
    slope.flags.writeable = False
    return SlopeProfile(slope=slope, max_slope=max_slope)


def probability_index(slope_t: float, max_slope: float) -> int:
    """Map a slope to a pattern index k in [0, 9].

    k = min(9, floor(10 * slope_t / max_slope)); monotone in slope_t and
    saturating so the maximum slope selects the top bin.
    """
    if max_slope <= 0.0:
        raise FlatBlutError("max_slope must be positive; flat table cannot be dithered")
    if slope_t < 0.0:
        raise ValueError(f"slope must be non-negative, got {slope_t}")
    return min(PROBABILITY_BINS - 1, int(math.floor(PROBABILITY_BINS * slope_t / max_slope)))


def apply_blut(blut: Blut, plane: np.ndarray) -> np.ndarray:
    """Look up a 10-bit codeword plane, yielding normalized HDR values."""
    return blut.entries[plane]


# ---------------------------------------------------------------------------
# Synthetic tables
# ---------------------------------------------------------------------------


def linear_blut(highlight_threshold: float = DEFAULT_HIGHLIGHT_THRESHOLD) -> Blut:
    """entries[t] = t / 1024: strictly increasing, constant slope."""
    return Blut(np.arange(TABLE_SIZE) / TABLE_SIZE, highlight_threshold)


def clipped_power_blut(
    flat_low: int = 64,
    flat_high: int = 960,
    exponent: float = 2.0,
    top: float = 0.95,
    highlight_threshold: float = DEFAULT_HIGHLIGHT_THRESHOLD,
) -> Blut:
    """SMPTE-style table: flat clipped tails around a power-law body.

    entries[t] = top * ((t - flat_low) / (flat_high - flat_low))**exponent
    for t in [flat_low, flat_high], constant outside.  exponent > 1 gives
    a strictly increasing slope over the body.
    """
    if not 0 <= flat_low < flat_high <= TABLE_SIZE - 1:
        raise ValueError("need 0 <= flat_low < flat_high <= 1023")
    t = np.arange(TABLE_SIZE, dtype=np.float64)
    x = np.clip((t - flat_low) / (flat_high - flat_low), 0.0, 1.0)
    return Blut(top * x**exponent, highlight_threshold)


# ---------------------------------------------------------------------------
# JSON serialization
# ---------------------------------------------------------------------------


def save_blut(blut: Blut, path: str) -> None:
    doc = {
        "entries": [float(v) for v in blut.entries],
        "highlight_threshold": blut.highlight_threshold,
    }
    tmp = path + ".tmp"
    with open(tmp, "w", encoding="utf-8") as fh:
        json.dump(doc, fh)
        fh.write("\n")
    os.replace(tmp, path)


def load_blut(path: str) -> Blut:
    with open(path, "r", encoding="utf-8") as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as exc:
            raise InvalidBlutError(f"{path}: not valid JSON ({exc})") from exc
    if not isinstance(doc, dict) or "entries" not in doc:
        raise InvalidBlutError(f"{path}: expected an object with an 'entries' array")
    thr = doc.get("highlight_threshold", DEFAULT_HIGHLIGHT_THRESHOLD)
    return Blut(np.asarray(doc["entries"], dtype=np.float64), float(thr))
