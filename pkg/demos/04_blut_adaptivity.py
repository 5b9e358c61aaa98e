#!/usr/bin/env python3
"""How the tone curve drives adaptivity: regions, slopes and bin choice.

A BLUT with clipped tails splits the codeword axis into Down / Mid /
High / Up; only Mid and High receive noise, and within them the local
slope (normalized per frame) picks the transition-probability bin.
"""

import numpy as np

from curvedither import (
    InjectionConfig,
    Region,
    clipped_power_blut,
    linear_blut,
    partition,
    select_pattern,
    slopes,
)
from curvedither.patterns import TRANSITION_PROBABILITIES

print("=== a clipped power-law table ===")
table = clipped_power_blut(flat_low=64, flat_high=960, exponent=2.0, top=0.95)
part = partition(table)
prof = slopes(table, part)

print(f"Y0={part.y0}  Yh={part.yh}  Y1={part.y1}  (highlight threshold "
      f"{table.highlight_threshold})")
for region in Region:
    count = int(np.sum(part.codes == region))
    print(f"  {region.name:<4}: {count:4d} codewords")
print(f"max slope over Mid+High: {prof.max_slope:.6f}\n")

print("bin selection along the codeword axis (default config):")
cfg = InjectionConfig()
for t in (70, 200, 400, 600, 800, 959):
    k, gain = select_pattern(t, part, prof, cfg)
    print(f"  codeword {t:>4}: slope {prof.slope[t]:.6f} -> bin k={k} "
          f"(p={TRANSITION_PROBABILITIES[k]:.3f}), gain {gain}")

for t in (10, 1000):
    k, gain = select_pattern(t, part, prof, cfg)
    print(f"  codeword {t:>4}: clipped region -> no injection ({k}, gain {gain})")

print("\nSteeper table slope means adjacent SDR codewords land further apart")
print("in HDR, so banding risk grows and a higher-p (longer-texture) block")
print("is chosen. A linear table has constant slope, hence one bin:")

lin = linear_blut()
lpart = partition(lin)
lprof = slopes(lin, lpart)
ks = {select_pattern(t, lpart, lprof, cfg)[0] for t in range(0, 1023)}
print(f"  linear table selects bins {sorted(ks)} everywhere")
