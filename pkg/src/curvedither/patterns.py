"""Offline noise pattern construction and the serialized pattern bank.

A block is built in two steps.  First a single Markov-Gaussian sequence
is laid along concentric circles (outermost first, unit radius steps,
counter-clockwise from angle zero) and the square inscribed in the
outermost disk is kept; pixels hit more than once keep the last sample
written, pixels never hit copy their nearest assigned neighbour.  The
circular geometry already removes the horizontal/vertical stripe bias of
scanline noise, but leaves ring structure, so the block is then split
into four quadrants, tessellated with one shared set of Voronoi sites,
and every cell is refilled from a uniformly chosen co-located cell of
the four quadrants.  The result is the "curved" block.

A bank holds one curved block per (transition-probability index k,
variant index) with k spanning the ten probabilities 0.545 + 0.045*k.
Banks are generated offline once, serialized to the CMGN binary format,
and memory-loaded at boot for online injection.
"""

from __future__ import annotations

import math
import os
import struct
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .markov import MarkovParams, generate_sequence
from .rng import CounterRng, derive_seed

TRANSITION_PROBABILITIES = tuple(0.545 + 0.045 * k for k in range(10))

BANK_MAGIC = b"CMGN"
BANK_VERSION = 1
_HEADER = struct.Struct("<4sHHBBQ")
_BLOCK_HEADER = struct.Struct("<BBdQ")

# Sub-seed tags for the three independent streams a bank block consumes.
_TAG_CHAIN, _TAG_SITES, _TAG_SWAP = 1, 2, 3


class CorruptBankError(ValueError):
    """Raised when a bank file fails structural validation."""

    def __init__(self, message: str, offset: int):
        super().__init__(f"{message} (byte offset {offset})")
        self.offset = offset


@dataclass(frozen=True)
class NoiseBlock:
    """One square noise pattern in float32 codeword units."""

    side: int
    values: np.ndarray
    kind: str  # "circular" or "curved"
    p: float
    seed: int

    def __post_init__(self):
        arr = np.asarray(self.values, dtype=np.float32)
        if arr.shape != (self.side, self.side):
            raise ValueError(f"values shape {arr.shape} != ({self.side}, {self.side})")
        if not np.all(np.isfinite(arr)):
            raise ValueError("noise block contains non-finite values")
        if self.kind not in ("circular", "curved"):
            raise ValueError(f"unknown block kind {self.kind!r}")
        arr = arr.copy()
        arr.flags.writeable = False
        object.__setattr__(self, "values", arr)


@dataclass(frozen=True)
class SiteSet:
    """Distinct Voronoi site coordinates within one quadrant."""

    quadrant_side: int
    coords: np.ndarray  # (n, 2) int32 columns (x, y)

    def __post_init__(self):
        arr = np.asarray(self.coords, dtype=np.int32)
        if arr.ndim != 2 or arr.shape[1] != 2 or arr.shape[0] < 1:
            raise ValueError("coords must be a non-empty (n, 2) array")
        q = self.quadrant_side
        if int(arr.min()) < 0 or int(arr.max()) >= q:
            raise ValueError(f"site coordinates must lie in [0, {q})")
        flat = arr[:, 1].astype(np.int64) * q + arr[:, 0]
        if np.unique(flat).size != arr.shape[0]:
            raise ValueError("sites must be distinct")
        arr = arr.copy()
        arr.flags.writeable = False
        object.__setattr__(self, "coords", arr)

    def __len__(self) -> int:
        return int(self.coords.shape[0])


def random_sites(quadrant_side: int, count: int, seed: int) -> SiteSet:
    """Draw `count` distinct grid sites uniformly (partial Fisher-Yates)."""
    cells = quadrant_side * quadrant_side
    if not 1 <= count <= cells:
        raise ValueError(f"count must be in 1..{cells}, got {count}")
    rng = CounterRng(seed)
    u = rng.uniforms(count)
    pool = np.arange(cells, dtype=np.int64)
    for i in range(count):
        j = i + int(u[i] * (cells - i))
        pool[i], pool[j] = pool[j], pool[i]
    chosen = pool[:count]
    coords = np.stack([chosen % quadrant_side, chosen // quadrant_side], axis=1)
    return SiteSet(quadrant_side, coords)


# ---------------------------------------------------------------------------
# Circular rasterization
# ---------------------------------------------------------------------------


def _iround(x):
    """Round half up (deterministic across platforms, unlike banker's)."""
    return np.floor(np.asarray(x) + 0.5).astype(np.int64)


def circle_layout(block_side: int) -> list[tuple[float, int]]:
    """(radius, sample count) per circle, outermost first.

    The outermost radius is the half-diagonal block_side/sqrt(2); radii
    decrease in unit steps while positive, i.e. ceil(block_side/sqrt(2))
    circles.  Each circle takes max(1, round(2*pi*r)) samples.
    """
    if block_side < 2:
        raise ValueError(f"block_side must be >= 2, got {block_side}")
    r_max = block_side / math.sqrt(2.0)
    out = []
    for v in range(math.ceil(r_max)):
        r = r_max - v
        out.append((r, max(1, int(math.floor(2.0 * math.pi * r + 0.5)))))
    return out


def required_length(block_side: int) -> float:
    """Total sequence length needed for one circular block.

    2*pi times the sum of the circle radii of circle_layout; for block
    side 200 that is 2*pi * sum_{v=0}^{141} (200/sqrt(2) - v).
    """
    total = 0.0
    for r, _ in circle_layout(block_side):
        total += r
    return 2.0 * math.pi * total


# Window offsets for the hole-fill search, sorted by (distance^2, dy, dx);
# the lexicographic (dy, dx) order within equal distances is exactly the
# row-major scan order of the candidates around a pixel.  Only complete
# distance shells are listed (d^2 <= 16 fits inside the +/-4 box), so a
# window hit is provably the global nearest-by-(distance, scan order).
_FILL_OFFSETS = sorted(
    (dy * dy + dx * dx, dy, dx)
    for dy in range(-4, 5)
    for dx in range(-4, 5)
    if (dy, dx) != (0, 0) and dy * dy + dx * dx <= 16
)


def _fill_holes(grid: np.ndarray, mask: np.ndarray) -> None:
    """Copy each unassigned pixel from its nearest assigned pixel.

    Exact Euclidean nearest with ties broken by scan order.  Sources are
    the originally assigned pixels only, so fills never cascade.  Holes
    left by circular rasterization sit within a couple of pixels of an
    assigned one, so a fixed window covers nearly all of them; leftovers
    fall back to an exhaustive search.
    """
    side = grid.shape[0]
    hy, hx = np.nonzero(~mask)
    if hy.size == 0:
        return
    unresolved = np.ones(hy.size, dtype=bool)
    for _, dy, dx in _FILL_OFFSETS:
        ty = hy + dy
        tx = hx + dx
        candidate = unresolved & (ty >= 0) & (ty < side) & (tx >= 0) & (tx < side)
        if not candidate.any():
            continue
        idx = np.flatnonzero(candidate)
        hit = idx[mask[ty[idx], tx[idx]]]
        if hit.size:
            grid[hy[hit], hx[hit]] = grid[ty[hit], tx[hit]]
            unresolved[hit] = False
        if not unresolved.any():
            return

    # Exhaustive fallback for holes with no assigned pixel in the window.
    ay, ax = np.nonzero(mask)
    src_vals = grid[ay, ax]
    ay32 = ay.astype(np.int32)
    ax32 = ax.astype(np.int32)
    rest = np.flatnonzero(unresolved)
    chunk = max(1, 8_000_000 // max(1, ay.size))
    for i in range(0, rest.size, chunk):
        sel = rest[i : i + chunk]
        dyy = hy[sel, None].astype(np.int32) - ay32[None, :]
        dxx = hx[sel, None].astype(np.int32) - ax32[None, :]
        d2 = dyy * dyy
        d2 += dxx * dxx
        grid[hy[sel], hx[sel]] = src_vals[np.argmin(d2, axis=1)]


def rasterize_circular(block_side: int, params: MarkovParams, seed: int) -> NoiseBlock:
    """Lay one continuous chain along concentric circles and square-crop.

    Sample j of a circle with n samples sits at angle 2*pi*j/n from the
    horizontal axis, counter-clockwise in array coordinates; positions
    round half-up to pixels, later samples overwrite earlier ones, and
    arc portions outside the inscribed square are discarded.
    """
    if block_side % 2 != 0:
        raise ValueError(f"block_side must be even, got {block_side}")
    layout = circle_layout(block_side)
    total = sum(n for _, n in layout)
    values = generate_sequence(params, total, seed)

    center = (block_side - 1) / 2.0
    idx_parts, val_parts = [], []
    pos = 0
    for r, n in layout:
        theta = 2.0 * np.pi * np.arange(n) / n
        xs = _iround(center + r * np.cos(theta))
        ys = _iround(center + r * np.sin(theta))
        inside = (xs >= 0) & (xs < block_side) & (ys >= 0) & (ys < block_side)
        idx_parts.append(ys[inside] * block_side + xs[inside])
        val_parts.append(values[pos : pos + n][inside])
        pos += n

    flat_idx = np.concatenate(idx_parts)
    flat_val = np.concatenate(val_parts)
    grid = np.full(block_side * block_side, np.nan)
    # Last write wins: first occurrence in the reversed stream.
    rev_idx = flat_idx[::-1]
    uniq, first_in_rev = np.unique(rev_idx, return_index=True)
    grid[uniq] = flat_val[::-1][first_in_rev]

    mask = np.zeros(block_side * block_side, dtype=bool)
    mask[uniq] = True
    grid = grid.reshape(block_side, block_side)
    _fill_holes(grid, mask.reshape(block_side, block_side))
    return NoiseBlock(block_side, grid.astype(np.float32), "circular", params.p, seed)


# ---------------------------------------------------------------------------
# Voronoi tessellation and quadrant cell swapping
# ---------------------------------------------------------------------------


def voronoi_assign(quadrant_side: int, sites: SiteSet) -> np.ndarray:
    """Nearest-site index per pixel, ties to the lowest site index.

    Exact integer squared distances; argmin returns the first minimum, so
    the tie rule needs no special casing.
    """
    if len(sites) < 1:
        raise ValueError("at least one site required")
    if sites.quadrant_side != quadrant_side:
        raise ValueError(
            f"site set is for quadrant side {sites.quadrant_side}, not {quadrant_side}"
        )
    sx = sites.coords[:, 0].astype(np.int32)
    sy = sites.coords[:, 1].astype(np.int32)
    cell = np.empty((quadrant_side, quadrant_side), dtype=np.int32)
    xs = np.arange(quadrant_side, dtype=np.int32)
    chunk = max(1, 4_000_000 // (quadrant_side * max(1, len(sites))))
    for y0 in range(0, quadrant_side, chunk):
        ys = np.arange(y0, min(y0 + chunk, quadrant_side), dtype=np.int32)
        dy = ys[:, None, None] - sy[None, None, :]
        dx = xs[None, :, None] - sx[None, None, :]
        d2 = dy * dy + dx * dx
        cell[y0 : y0 + chunk] = np.argmin(d2, axis=2)
    return cell


def _quadrant_views(side: int):
    q = side // 2
    return (
        (slice(0, q), slice(0, q)),  # 0: top-left
        (slice(0, q), slice(q, side)),  # 1: top-right
        (slice(q, side), slice(0, q)),  # 2: bottom-left
        (slice(q, side), slice(q, side)),  # 3: bottom-right
    )


def swap_cells(values: np.ndarray, cell_map: np.ndarray, choices: np.ndarray) -> np.ndarray:
    """Refill every quadrant cell from a chosen co-located source cell.

    choices[g, c] names the source quadrant (0..3) whose cell c fills
    cell c of destination quadrant g, pixel-for-pixel at congruent
    offsets.  Quadrants are numbered TL, TR, BL, BR.
    """
    if values.ndim != 2 or values.shape[0] != values.shape[1]:
        raise ValueError(f"block values must be square, got shape {values.shape}")
    side = values.shape[0]
    if side % 2 != 0:
        raise ValueError(f"block side must be even, got {side}")
    q = side // 2
    if cell_map.shape != (q, q):
        raise ValueError(f"cell map shape {cell_map.shape} != ({q}, {q})")
    if choices.ndim != 2 or choices.shape[0] != 4 or choices.shape[1] <= int(cell_map.max()):
        raise ValueError("choices must have shape (4, n_cells) covering every cell")
    views = _quadrant_views(side)
    quads = np.stack([values[v] for v in views])
    rows = np.arange(q)[:, None]
    cols = np.arange(q)[None, :]
    out = np.empty_like(values)
    for g in range(4):
        src = choices[g][cell_map]
        out[views[g]] = quads[src, rows, cols]
    return out


def curve_block(circular: NoiseBlock, sites: SiteSet, seed: int) -> NoiseBlock:
    """Decorrelate a circular block by swapping congruent Voronoi cells.

    One tessellation is shared by all four quadrants, so co-located cells
    are congruent; each (quadrant, cell) independently copies one of its
    four co-located sources, chosen uniformly with replacement from the
    seeded stream in quadrant-major order.
    """
    if circular.side % 2 != 0:
        raise ValueError(f"block side must be even, got {circular.side}")
    q = circular.side // 2
    if sites.quadrant_side != q:
        raise ValueError(
            f"site set quadrant side {sites.quadrant_side} != block quadrant {q}"
        )
    cell_map = voronoi_assign(q, sites)
    n_cells = len(sites)
    rng = CounterRng(seed)
    choices = rng.below(4, 4 * n_cells).reshape(4, n_cells)
    curved = swap_cells(circular.values, cell_map, choices)
    return NoiseBlock(circular.side, curved, "curved", circular.p, seed)


# ---------------------------------------------------------------------------
# Pattern bank
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class PatternBank:
    """Curved blocks indexed by (probability index k, variant index)."""

    block_side: int
    probabilities: tuple[float, ...]
    variants: int
    master_seed: int
    blocks: dict[tuple[int, int], NoiseBlock]
    version: int = BANK_VERSION

    def __post_init__(self):
        if self.block_side < 1:
            raise ValueError(f"block_side must be >= 1, got {self.block_side}")
        if self.variants < 1:
            raise ValueError(f"variants must be >= 1, got {self.variants}")
        if self.probabilities != TRANSITION_PROBABILITIES:
            raise ValueError("probabilities must equal 0.545 + 0.045*k for k in 0..9")
        for k in range(10):
            for v in range(self.variants):
                block = self.blocks.get((k, v))
                if block is None:
                    raise ValueError(f"bank is missing block (k={k}, variant={v})")
                if block.side != self.block_side:
                    raise ValueError(
                        f"block (k={k}, variant={v}) side {block.side} "
                        f"!= bank block_side {self.block_side}"
                    )

    def block(self, k: int, variant: int) -> NoiseBlock:
        return self.blocks[(k, variant)]

    def variant_stack(self, variant: int) -> np.ndarray:
        """(10, side, side) float32 stack of one variant's blocks."""
        return np.stack([self.blocks[(k, variant)].values for k in range(10)])


def _build_block(
    block_side: int, site_count: int, params: MarkovParams, sub_seed: int
) -> NoiseBlock:
    circ = rasterize_circular(block_side, params, derive_seed(sub_seed, _TAG_CHAIN))
    sites = random_sites(block_side // 2, site_count, derive_seed(sub_seed, _TAG_SITES))
    curved = curve_block(circ, sites, derive_seed(sub_seed, _TAG_SWAP))
    return NoiseBlock(block_side, curved.values, "curved", params.p, sub_seed)


def build_bank(
    block_side: int = 200,
    site_count: int = 300,
    variants: int = 8,
    master_seed: int = 0,
    params_per_k: tuple[MarkovParams, ...] | None = None,
    threads: int = 1,
) -> PatternBank:
    """Generate the full (10 x variants) bank of curved blocks.

    Each block derives its chain, site and swap seeds from
    derive_seed(master_seed, k, variant), so regeneration is bit-exact
    and independent of the thread count.  params_per_k may override the
    emission means/sigmas but must keep the canonical probabilities.
    """
    if variants < 1:
        raise ValueError(f"variants must be >= 1, got {variants}")
    if params_per_k is None:
        params_per_k = tuple(MarkovParams(p=p) for p in TRANSITION_PROBABILITIES)
    if len(params_per_k) != 10 or any(
        params_per_k[k].p != TRANSITION_PROBABILITIES[k] for k in range(10)
    ):
        raise ValueError("params_per_k must carry the canonical ten probabilities")

    jobs = [(k, v) for k in range(10) for v in range(variants)]

    def make(job):
        k, v = job
        sub_seed = derive_seed(master_seed, k, v)
        return job, _build_block(block_side, site_count, params_per_k[k], sub_seed)

    blocks: dict[tuple[int, int], NoiseBlock] = {}
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            for job, block in pool.map(make, jobs):
                blocks[job] = block
    else:
        for job in jobs:
            blocks[job] = make(job)[1]

    return PatternBank(
        block_side=block_side,
        probabilities=TRANSITION_PROBABILITIES,
        variants=variants,
        master_seed=master_seed,
        blocks=blocks,
    )


def save_bank(bank: PatternBank, path: str) -> None:
    """Serialize to the CMGN v1 binary layout (little-endian, f32 values)."""
    parts = [
        _HEADER.pack(
            BANK_MAGIC, BANK_VERSION, bank.block_side, 10, bank.variants,
            bank.master_seed & 0xFFFFFFFFFFFFFFFF,
        )
    ]
    for k in range(10):
        for v in range(bank.variants):
            block = bank.blocks[(k, v)]
            parts.append(
                _BLOCK_HEADER.pack(k, v, block.p, block.seed & 0xFFFFFFFFFFFFFFFF)
            )
            parts.append(block.values.astype("<f4", copy=False).tobytes())
    tmp = path + ".tmp"
    with open(tmp, "wb") as fh:
        fh.write(b"".join(parts))
    os.replace(tmp, path)


def load_bank(path: str) -> PatternBank:
    """Parse and validate a CMGN bank file; no partial banks on failure."""
    with open(path, "rb") as fh:
        data = fh.read()
    if len(data) < _HEADER.size:
        raise CorruptBankError("file shorter than header", len(data))
    magic, version, block_side, prob_count, variants, master_seed = _HEADER.unpack_from(
        data, 0
    )
    if magic != BANK_MAGIC:
        raise CorruptBankError(f"bad magic {magic!r}, expected {BANK_MAGIC!r}", 0)
    if version != BANK_VERSION:
        raise CorruptBankError(
            f"unsupported bank version {version}, expected {BANK_VERSION}", 4
        )
    if prob_count != 10:
        raise CorruptBankError(f"probability count {prob_count} != 10", 8)
    if block_side < 1 or variants < 1:
        raise CorruptBankError(
            f"invalid dimensions (block_side={block_side}, variants={variants})", 6
        )

    values_bytes = block_side * block_side * 4
    expected = _HEADER.size + 10 * variants * (_BLOCK_HEADER.size + values_bytes)
    if len(data) < expected:
        raise CorruptBankError(
            f"truncated bank ({len(data)} of {expected} bytes)", len(data)
        )
    if len(data) > expected:
        raise CorruptBankError(f"{len(data) - expected} trailing bytes", expected)

    offset = _HEADER.size
    blocks: dict[tuple[int, int], NoiseBlock] = {}
    for k in range(10):
        for v in range(variants):
            bk, bv, p, sub_seed = _BLOCK_HEADER.unpack_from(data, offset)
            if (bk, bv) != (k, v):
                raise CorruptBankError(
                    f"block header ({bk}, {bv}) out of order, expected ({k}, {v})",
                    offset,
                )
            if p != TRANSITION_PROBABILITIES[k]:
                raise CorruptBankError(
                    f"block (k={k}) probability {p} != {TRANSITION_PROBABILITIES[k]}",
                    offset + 2,
                )
            offset += _BLOCK_HEADER.size
            raw = np.frombuffer(data, dtype="<f4", count=block_side * block_side,
                                offset=offset)
            if not np.all(np.isfinite(raw)):
                raise CorruptBankError(
                    f"block (k={k}, variant={v}) contains non-finite values", offset
                )
            values = raw.reshape(block_side, block_side).astype(np.float32)
            blocks[(k, v)] = NoiseBlock(block_side, values, "curved", p, sub_seed)
            offset += values_bytes

    return PatternBank(
        block_side=block_side,
        probabilities=TRANSITION_PROBABILITIES,
        variants=variants,
        master_seed=master_seed,
        blocks=blocks,
    )
