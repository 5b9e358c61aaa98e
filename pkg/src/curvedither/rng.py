"""Deterministic, platform-independent pseudo-random generator.

Every random quantity in this package is drawn from a counter-mode
splitmix64 stream so that noise banks, injections and demo outputs are
bit-reproducible from their seeds alone, independent of numpy's own
generator implementations.

The stream is defined as

    word(i) = mix64(seed + (i + 1) * 0x9E3779B97F4A7C15)   (mod 2**64)

where mix64 is the splitmix64 finalizer (Steele, Lea & Flood).  Uniforms
take the top 53 bits of a word; Gaussians come from the Box-Muller
transform applied to consecutive uniform pairs.  The integer stream is
exactly portable; the Gaussian transform is deterministic up to the last
ulp of the platform's log/cos/sin.
"""

from __future__ import annotations

import numpy as np

_MASK = (1 << 64) - 1
_GOLDEN = 0x9E3779B97F4A7C15
_U64 = np.uint64


def mix64(x: int) -> int:
    """splitmix64 finalizer on a plain Python integer (mod 2**64)."""
    x &= _MASK
    x = ((x ^ (x >> 30)) * 0xBF58476D1CE4E5B9) & _MASK
    x = ((x ^ (x >> 27)) * 0x94D049BB133111EB) & _MASK
    return (x ^ (x >> 31)) & _MASK


def derive_seed(*words: int) -> int:
    """Fold any number of integer words into one 64-bit sub-seed.

    Used to split a master seed into independent per-purpose streams
    (per bank block, per frame, per plane).  The chain is
    s <- mix64((s ^ mix64(w + phi)) + phi) per word, s starting at 0.
    """
    s = 0
    for w in words:
        s = mix64(((s ^ mix64((int(w) + _GOLDEN) & _MASK)) + _GOLDEN) & _MASK)
    return s


def _mix_array(x: np.ndarray) -> np.ndarray:
    x = (x ^ (x >> _U64(30))) * _U64(0xBF58476D1CE4E5B9)
    x = (x ^ (x >> _U64(27))) * _U64(0x94D049BB133111EB)
    return x ^ (x >> _U64(31))


class CounterRng:
    """Seedable random stream with vectorized draws.

    The counter advances by exactly the number of raw 64-bit words a call
    consumes, so interleaving differently sized requests never changes
    later output (word i is always mix64(seed + (i+1)*phi)).
    """

    def __init__(self, seed: int):
        self._key = _U64(int(seed) & _MASK)
        self._count = 0

    def raw(self, n: int) -> np.ndarray:
        """Next n raw uint64 words."""
        idx = np.arange(self._count + 1, self._count + n + 1, dtype=np.uint64)
        self._count += n
        return _mix_array(self._key + idx * _U64(_GOLDEN))

    def uniforms(self, n: int) -> np.ndarray:
        """n doubles uniform on [0, 1), 53-bit resolution."""
        return (self.raw(n) >> _U64(11)).astype(np.float64) * 2.0**-53

    def normals(self, n: int) -> np.ndarray:
        """n standard normal doubles via Box-Muller on uniform pairs.

        Consumes 2*ceil(n/2) raw words: the first half feed u1 (shifted
        into (0, 1] so the log is finite), the second half feed u2.
        """
        m = (n + 1) // 2
        raw = self.raw(2 * m)
        u1 = ((raw[:m] >> _U64(11)).astype(np.float64) + 1.0) * 2.0**-53
        u2 = (raw[m:] >> _U64(11)).astype(np.float64) * 2.0**-53
        r = np.sqrt(-2.0 * np.log(u1))
        out = np.empty(2 * m)
        out[0::2] = r * np.cos(2.0 * np.pi * u2)
        out[1::2] = r * np.sin(2.0 * np.pi * u2)
        return out[:n]

    def below(self, bound: int, n: int) -> np.ndarray:
        """n integers uniform on [0, bound) as floor(u * bound).

        The 53-bit uniform makes the modulo bias negligible for the small
        bounds used here (site shuffles, quadrant picks, tile offsets).
        """
        return (self.uniforms(n) * bound).astype(np.int64)
