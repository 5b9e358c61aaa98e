#!/usr/bin/env python3
"""End-to-end debanding on a synthetic gradient, against the baselines.

Quantizes a 10-bit ramp down to 256 codewords (visible banding), then
dithers it three ways: adaptive curved noise, plain Gaussian, and
low-pass filtered Gaussian.  Banding metrics are compared at the
threshold inferred from the banded input, and the curved result is
inverse tone-mapped to a 16-bit HDR image.
"""

import os

import numpy as np

from curvedither import (
    BaselineConfig,
    HdrImage,
    InjectionConfig,
    PlanarImage,
    apply_blut,
    banding_index,
    build_bank,
    gaussian_dither,
    inject_frame,
    linear_blut,
    lpf_gaussian_dither,
    quantize_codewords,
    ramp_image,
    save_hdr_image,
    save_image,
)
from curvedither.rng import derive_seed

OUT = os.path.join(os.path.dirname(os.path.abspath(__file__)), "output")
os.makedirs(OUT, exist_ok=True)
SEED = 5

print("=== make banding ===")
ramp = ramp_image(height=64)
banded = quantize_codewords(ramp, 2)
print(f"ramp: {ramp.width}x{ramp.height}, 10-bit, one codeword per column")
print("right-shift 2 then left-shift 2 leaves 256 of 1024 codewords\n")

print("=== offline stage ===")
bank = build_bank(variants=4, master_seed=SEED)
table = linear_blut()
print(f"bank ready: {10 * bank.variants} blocks of {bank.block_side}^2\n")

print("=== online stage + baselines ===")
curved = inject_frame(banded, table, bank, InjectionConfig(tile_offset_seed=SEED))

results = {"curved": curved}
for name, dither in (("gaussian", gaussian_dither), ("lpf_gaussian", lpf_gaussian_dither)):
    planes = tuple(
        dither(plane, BaselineConfig(sigma=2.0, kernel_radius=4,
                                     seed=derive_seed(SEED, idx)), 10)
        for idx, plane in enumerate(banded.planes)
    )
    results[name] = PlanarImage(banded.width, banded.height, 10, planes)

base = banding_index(banded.y)
print(f"{'image':<14} {'distinct':>8} {'steps':>7} {'noise_power':>12}")
print(f"{'banded input':<14} {base.distinct_codewords:>8} {base.step_count:>7} "
      f"{base.noise_power:>12.3f}")
for name, img in results.items():
    r = banding_index(img.y, threshold=base.threshold, flat_tol=base.flat_tol)
    print(f"{name:<14} {r.distinct_codewords:>8} {r.step_count:>7} {r.noise_power:>12.3f}")

print("\nThe curved method restores the codeword population and removes most")
print("flat-flanked contour steps at modest noise power.\n")

print("=== export ===")
save_image(banded, os.path.join(OUT, "pipeline_banded"))
for name, img in results.items():
    save_image(img, os.path.join(OUT, f"pipeline_{name}"))
hdr = HdrImage(
    curved.width, curved.height,
    (
        apply_blut(table, curved.y),
        curved.cb.astype(np.float64) / 1024.0,
        curved.cr.astype(np.float64) / 1024.0,
    ),
)
save_hdr_image(hdr, os.path.join(OUT, "pipeline_curved_hdr"))
print(f"images written to {OUT}")
print("view the .y.pgm planes in any PGM-capable viewer")
