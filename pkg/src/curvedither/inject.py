"""Online noise injection: add gain-scaled bank noise, pixel-locally.

Each luma pixel selects a pattern purely from its own quantized codeword:
the codeword's region decides the gain (clipped Down/Up regions get
none), and the codeword's table slope, normalized by the frame's maximum
Mid+High slope, picks which of the ten transition probabilities to pull
from the bank.  The selected block is tiled toroidally with a per-frame,
per-plane deterministic offset, so output depends only on (pixel value,
position, frame index, table, bank, config) and never on neighbours.

Chroma has no table; it is dithered with a fixed bank pattern at reduced
gain, or left untouched.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping

import numpy as np

from .blut import (
    Blut,
    Region,
    RegionPartition,
    SlopeProfile,
    partition,
    probability_index,
    slopes,
)
from .image import PlanarImage, clamp_plane
from .patterns import PatternBank
from .rng import CounterRng, derive_seed

DEFAULT_REGION_GAIN: Mapping[Region, float] = {
    Region.DOWN: 0.0,
    Region.MID: 1.0,
    Region.HIGH: 1.0,
    Region.UP: 0.0,
}

# Offset-derivation tags per plane (decorrelates Y/Cb/Cr tilings).
PLANE_LUMA, PLANE_CB, PLANE_CR = 0, 1, 2


class InvalidBankError(ValueError):
    """Raised when a bank cannot serve the requested injection."""


@dataclass(frozen=True)
class ChromaPolicy:
    """Chroma treatment: k is None for off, else a fixed bank index."""

    k: int | None
    gain: float = 0.0

    def __post_init__(self):
        if self.k is not None and not 0 <= self.k <= 9:
            raise ValueError(f"chroma pattern index must be in 0..9, got {self.k}")
        if self.gain < 0.0:
            raise ValueError(f"chroma gain must be non-negative, got {self.gain}")

    @classmethod
    def off(cls) -> "ChromaPolicy":
        return cls(k=None, gain=0.0)

    @classmethod
    def fixed(cls, k: int, gain: float) -> "ChromaPolicy":
        return cls(k=k, gain=gain)


@dataclass(frozen=True)
class InjectionConfig:
    """Gains, region policy, chroma policy and the tiling schedule.

    chroma_policy None resolves to fixed(k=4, gain=0.5*gain_base), the
    bank's middle probability at half strength.
    """

    gain_base: float = 1.0
    region_gain: Mapping[Region, float] = field(
        default_factory=lambda: dict(DEFAULT_REGION_GAIN)
    )
    chroma_policy: ChromaPolicy | None = None
    frame_index: int = 0
    tile_offset_seed: int = 0

    def __post_init__(self):
        if self.gain_base < 0.0:
            raise ValueError(f"gain_base must be non-negative, got {self.gain_base}")
        for region in Region:
            if self.region_gain.get(region, 0.0) < 0.0:
                raise ValueError(f"region gain for {region.name} must be non-negative")

    def effective_chroma(self) -> ChromaPolicy:
        if self.chroma_policy is not None:
            return self.chroma_policy
        return ChromaPolicy.fixed(4, 0.5 * self.gain_base)


def select_pattern(
    t: int,
    part: RegionPartition,
    slope_profile: SlopeProfile,
    cfg: InjectionConfig,
) -> tuple[int | None, float]:
    """Pattern index and gain for one quantized luma codeword.

    Clipped regions and flat tables yield (None, 0.0): skip injection.
    """
    region = part.region(t)
    if region in (Region.DOWN, Region.UP) or slope_profile.max_slope <= 0.0:
        return None, 0.0
    k = probability_index(float(slope_profile.slope[t]), slope_profile.max_slope)
    return k, cfg.gain_base * float(cfg.region_gain.get(region, 0.0))


def _check_bank(bank: PatternBank) -> None:
    if bank.block_side < 1 or bank.variants < 1:
        raise InvalidBankError(
            f"unusable bank (block_side={bank.block_side}, variants={bank.variants})"
        )
    missing = [
        (k, v)
        for k in range(10)
        for v in range(bank.variants)
        if (k, v) not in bank.blocks
    ]
    if missing:
        raise InvalidBankError(f"bank is missing blocks {missing[:4]}")


def _tile_offsets(cfg: InjectionConfig, plane_tag: int, side: int) -> tuple[int, int]:
    """Per-frame, per-plane toroidal offset (dx, dy) into the block."""
    rng = CounterRng(derive_seed(cfg.tile_offset_seed, cfg.frame_index, plane_tag))
    dx, dy = rng.below(side, 2)
    return int(dx), int(dy)


def _tiled_noise(
    stack: np.ndarray, k_map: np.ndarray, shape: tuple[int, int], dx: int, dy: int
) -> np.ndarray:
    """Gather noise for every pixel from its selected block, tiled."""
    h, w = shape
    side = stack.shape[1]
    rows = (np.arange(h)[:, None] + dy) % side
    cols = (np.arange(w)[None, :] + dx) % side
    return stack[k_map, rows, cols]


def inject_luma(
    q_plane: np.ndarray,
    part: RegionPartition,
    slope_profile: SlopeProfile,
    bank: PatternBank,
    cfg: InjectionConfig,
    bit_depth: int = 10,
) -> np.ndarray:
    """Slope-adaptive injection of one luma plane: clamp(plane + gain*noise)."""
    _check_bank(bank)
    table_size = part.codes.size
    if q_plane.size and int(q_plane.max()) >= table_size:
        raise ValueError(
            f"codeword {int(q_plane.max())} outside the {table_size}-entry table domain"
        )

    # Per-codeword lookup tables; computed once per frame, matching
    # select_pattern exactly (min(9, floor(10*slope/max))).
    k_lut = np.full(table_size, -1, dtype=np.int16)
    gain_lut = np.zeros(table_size)
    injectable = (part.codes == Region.MID) | (part.codes == Region.HIGH)
    if slope_profile.max_slope > 0.0 and np.any(injectable):
        ratio = slope_profile.slope[injectable] / slope_profile.max_slope
        k_lut[injectable] = np.minimum(9, np.floor(10.0 * ratio)).astype(np.int16)
        mid = part.codes == Region.MID
        high = part.codes == Region.HIGH
        gain_lut[mid] = cfg.gain_base * float(cfg.region_gain.get(Region.MID, 0.0))
        gain_lut[high] = cfg.gain_base * float(cfg.region_gain.get(Region.HIGH, 0.0))

    variant = cfg.frame_index % bank.variants
    stack = bank.variant_stack(variant)
    dx, dy = _tile_offsets(cfg, PLANE_LUMA, bank.block_side)

    k_map = k_lut[q_plane]
    noise = _tiled_noise(stack, np.maximum(k_map, 0), q_plane.shape, dx, dy)
    dithered = clamp_plane(q_plane + gain_lut[q_plane] * noise, bit_depth)
    return np.where(k_map < 0, q_plane, dithered).astype(np.uint16)


def inject_chroma(
    plane: np.ndarray,
    bank: PatternBank,
    cfg: InjectionConfig,
    bit_depth: int = 10,
    plane_tag: int = PLANE_CB,
) -> np.ndarray:
    """Fixed-pattern injection of one chroma plane (no table involved)."""
    policy = cfg.effective_chroma()
    if policy.k is None:
        return plane
    _check_bank(bank)
    variant = cfg.frame_index % bank.variants
    block = bank.block(policy.k, variant).values
    dx, dy = _tile_offsets(cfg, plane_tag, bank.block_side)
    h, w = plane.shape
    side = bank.block_side
    rows = (np.arange(h)[:, None] + dy) % side
    cols = (np.arange(w)[None, :] + dx) % side
    return clamp_plane(plane + policy.gain * block[rows, cols], bit_depth)


def inject_frame(
    img: PlanarImage, blut: Blut, bank: PatternBank, cfg: InjectionConfig
) -> PlanarImage:
    """Full-frame injection: partition and slopes once, then all planes."""
    if (1 << img.bit_depth) != blut.entries.size:
        raise ValueError(
            f"bit depth {img.bit_depth} does not match the {blut.entries.size}-entry table"
        )
    part = partition(blut)
    slope_profile = slopes(blut, part)
    y = inject_luma(img.y, part, slope_profile, bank, cfg, img.bit_depth)
    cb = inject_chroma(img.cb, bank, cfg, img.bit_depth, PLANE_CB)
    cr = inject_chroma(img.cr, bank, cfg, img.bit_depth, PLANE_CR)
    return PlanarImage(img.width, img.height, img.bit_depth, (y, cb, cr))
