"""Comparator ditherers: plain i.i.d. Gaussian and low-pass filtered Gaussian.

These are the reference noise types the adaptive method is evaluated
against.  The plain variant is pixel-local like the main method; the
filtered variant deliberately is not (it stands in for the
neighborhood-style alternative), using a normalized box kernel with edge
clamping and a post-filter rescale back to the target sigma.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.ndimage import uniform_filter

from .image import clamp_plane
from .rng import CounterRng


@dataclass(frozen=True)
class BaselineConfig:
    sigma: float
    kernel_radius: int = 1
    seed: int = 0

    def __post_init__(self):
        if self.sigma < 0.0:
            raise ValueError(f"sigma must be non-negative, got {self.sigma}")
        if self.kernel_radius < 1:
            raise ValueError(f"kernel_radius must be >= 1, got {self.kernel_radius}")


def gaussian_noise_field(shape: tuple[int, int], sigma: float, seed: int) -> np.ndarray:
    """i.i.d. Normal(0, sigma) field."""
    h, w = shape
    return sigma * CounterRng(seed).normals(h * w).reshape(h, w)


def lpf_gaussian_noise_field(
    shape: tuple[int, int], sigma: float, kernel_radius: int, seed: int
) -> np.ndarray:
    """Box-filtered Gaussian field, rescaled so its std is sigma again."""
    field = gaussian_noise_field(shape, 1.0, seed)
    smooth = uniform_filter(field, size=2 * kernel_radius + 1, mode="nearest")
    std = float(smooth.std())
    if std > 0.0:
        smooth *= sigma / std
    else:
        smooth[:] = 0.0
    return smooth


def gaussian_dither(q_plane: np.ndarray, cfg: BaselineConfig, bit_depth: int = 10) -> np.ndarray:
    """D = clamp(Q + n), n i.i.d. Normal(0, sigma); identity at sigma 0."""
    if cfg.sigma == 0.0:
        return q_plane
    field = gaussian_noise_field(q_plane.shape, cfg.sigma, cfg.seed)
    return clamp_plane(q_plane + field, bit_depth)


def lpf_gaussian_dither(q_plane: np.ndarray, cfg: BaselineConfig, bit_depth: int = 10) -> np.ndarray:
    """Like gaussian_dither but with the box-filtered, rescaled field."""
    if cfg.sigma == 0.0:
        return q_plane
    field = lpf_gaussian_noise_field(q_plane.shape, cfg.sigma, cfg.kernel_radius, cfg.seed)
    return clamp_plane(q_plane + field, bit_depth)
