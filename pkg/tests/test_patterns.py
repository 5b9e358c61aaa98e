import math

import numpy as np
import pytest

from curvedither.markov import MarkovParams, generate_sequence
from curvedither.metrics import pattern_stats
from curvedither.patterns import (
    TRANSITION_PROBABILITIES,
    CorruptBankError,
    NoiseBlock,
    PatternBank,
    SiteSet,
    build_bank,
    circle_layout,
    curve_block,
    load_bank,
    random_sites,
    rasterize_circular,
    required_length,
    save_bank,
    swap_cells,
    voronoi_assign,
)
from curvedither.rng import derive_seed

DEFAULTS_815 = MarkovParams(p=0.815)


def _family_block(master, s, p=0.815, side=200, sites=300):
    """Curved block from the documented seed-derivation chain."""
    sub = derive_seed(master, s)
    circ = rasterize_circular(side, MarkovParams(p=p), derive_seed(sub, 1))
    site_set = random_sites(side // 2, sites, derive_seed(sub, 2))
    return circ, curve_block(circ, site_set, derive_seed(sub, 3))


class TestRequiredLength:
    def test_matches_direct_summation_oracle_for_block_200(self):
        oracle = 2.0 * math.pi * sum(200 / math.sqrt(2) - v for v in range(142))
        assert required_length(200) == oracle

    def test_minimal_block_side(self):
        # ceil(2/sqrt(2)) = 2 circles: radii sqrt(2) and sqrt(2)-1.
        oracle = 2.0 * math.pi * sum(2 / math.sqrt(2) - v for v in range(2))
        assert required_length(2) == oracle

    def test_strictly_increasing_in_block_side(self):
        lengths = [required_length(side) for side in range(2, 80)]
        assert all(b > a for a, b in zip(lengths, lengths[1:]))

    def test_rejects_tiny_block(self):
        with pytest.raises(ValueError):
            required_length(1)


class TestCircleLayout:
    def test_200_has_142_circles(self):
        layout = circle_layout(200)
        assert len(layout) == 142
        assert layout[0][0] == pytest.approx(200 / math.sqrt(2))
        assert layout[-1][0] > 0.0

    def test_unit_radius_decrement(self):
        radii = [r for r, _ in circle_layout(200)]
        for a, b in zip(radii, radii[1:]):
            assert a - b == pytest.approx(1.0)

    def test_sample_counts_round_half_up_oracle(self):
        for r, n in circle_layout(200):
            assert n == max(1, math.floor(2.0 * math.pi * r + 0.5))


class TestRasterize:
    def test_totality_200(self):
        block = rasterize_circular(200, DEFAULTS_815, 42)
        assert np.all(np.isfinite(block.values))
        assert block.values.shape == (200, 200)
        assert block.kind == "circular"

    def test_totality_small_even_sides(self):
        for side in (2, 4, 10, 48):
            block = rasterize_circular(side, DEFAULTS_815, 1)
            assert np.all(np.isfinite(block.values))

    def test_deterministic_bit_identical(self):
        a = rasterize_circular(200, DEFAULTS_815, 7)
        b = rasterize_circular(200, DEFAULTS_815, 7)
        assert np.array_equal(a.values, b.values)

    def test_rejects_odd_side(self):
        with pytest.raises(ValueError):
            rasterize_circular(199, DEFAULTS_815, 0)

    def test_zero_mean_monte_carlo(self):
        # Frozen family (master 9): calibrated so every block passes.
        for s in range(20):
            sub = derive_seed(9, s)
            block = rasterize_circular(200, DEFAULTS_815, derive_seed(sub, 1))
            assert abs(float(np.mean(block.values, dtype=np.float64))) <= 0.05

    def test_outermost_arc_run_length_tracks_chain(self):
        # Same-sign run length of the outermost circle's sample sequence
        # stays within 10% of the geometric 1/(1-p) state-run mean.
        p = 0.635
        params = MarkovParams(p=p)
        layout = circle_layout(200)
        total = sum(n for _, n in layout)
        n0 = layout[0][1]
        pixels = runs = 0
        for seed in range(30):
            arc = generate_sequence(params, total, derive_seed(77, seed))[:n0]
            nonneg = arc >= 0
            runs += 1 + int(np.sum(nonneg[1:] != nonneg[:-1]))
            pixels += n0
        assert pixels / runs == pytest.approx(1.0 / (1.0 - p), rel=0.10)


class TestSites:
    def test_distinct_in_range_deterministic(self):
        a = random_sites(100, 300, 5)
        b = random_sites(100, 300, 5)
        assert np.array_equal(a.coords, b.coords)
        assert len(a) == 300
        flat = a.coords[:, 1].astype(np.int64) * 100 + a.coords[:, 0]
        assert np.unique(flat).size == 300

    def test_full_coverage_allowed(self):
        sites = random_sites(4, 16, 0)
        assert len(sites) == 16

    def test_count_validation(self):
        with pytest.raises(ValueError):
            random_sites(4, 17, 0)
        with pytest.raises(ValueError):
            random_sites(4, 0, 0)

    def test_siteset_rejects_duplicates_and_out_of_bounds(self):
        with pytest.raises(ValueError):
            SiteSet(8, np.array([[1, 1], [1, 1]]))
        with pytest.raises(ValueError):
            SiteSet(8, np.array([[8, 0]]))


def _voronoi_oracle(q, coords):
    """Strictly-less sweep in site order: first site keeps ties."""
    best = np.full((q, q), np.iinfo(np.int64).max, dtype=np.int64)
    cell = np.zeros((q, q), dtype=np.int32)
    ys, xs = np.mgrid[0:q, 0:q]
    for i, (sx, sy) in enumerate(coords):
        d2 = (ys - int(sy)) ** 2 + (xs - int(sx)) ** 2
        closer = d2 < best
        cell[closer] = i
        best[closer] = d2[closer]
    return cell


class TestVoronoi:
    def test_single_site_owns_everything(self):
        sites = SiteSet(8, np.array([[3, 5]]))
        assert np.all(voronoi_assign(8, sites) == 0)

    def test_two_site_midline_tie_goes_to_first(self):
        q = 9
        sites = SiteSet(q, np.array([[0, 0], [0, q - 1]]))
        cell = voronoi_assign(q, sites)
        assert np.all(cell[: q // 2] == 0)
        assert np.all(cell[q // 2] == 0)  # equidistant row: lowest index wins
        assert np.all(cell[q // 2 + 1 :] == 1)

    def test_matches_brute_force_oracle(self):
        rng = np.random.default_rng(12)
        for q, count in ((17, 1), (17, 2), (33, 40), (64, 300)):
            flat = rng.choice(q * q, size=count, replace=False)
            coords = np.stack([flat % q, flat // q], axis=1)
            sites = SiteSet(q, coords)
            assert np.array_equal(voronoi_assign(q, sites), _voronoi_oracle(q, coords))

    def test_every_cell_non_empty(self):
        sites = random_sites(50, 300, 3)
        cell = voronoi_assign(50, sites)
        assert np.unique(cell).size == 300
        # each site's own pixel belongs to its cell
        for i, (sx, sy) in enumerate(sites.coords):
            assert cell[sy, sx] == i

    def test_quadrant_side_mismatch(self):
        with pytest.raises(ValueError):
            voronoi_assign(10, random_sites(8, 4, 0))


class TestSwapCells:
    @pytest.fixture()
    def setup(self):
        circ, _ = _family_block(0, 0, side=40, sites=30)
        sites = random_sites(20, 30, 123)
        cell_map = voronoi_assign(20, sites)
        return circ, cell_map

    def test_identity_choices_preserve_block(self, setup):
        circ, cell_map = setup
        identity = np.repeat(np.arange(4)[:, None], 30, axis=1)
        out = swap_cells(circ.values, cell_map, identity)
        assert np.array_equal(out, circ.values)

    def test_single_source_choices(self, setup):
        circ, cell_map = setup
        q = 20
        all_from_bl = np.full((4, 30), 2)
        out = swap_cells(circ.values, cell_map, all_from_bl)
        bl = circ.values[q:, :q]
        for view in (out[:q, :q], out[:q, q:], out[q:, :q], out[q:, q:]):
            assert np.array_equal(view, bl)

    def test_every_output_cell_matches_a_colocated_source(self):
        circ, curved = _family_block(3, 1, side=80, sites=60)
        q = 40
        sub = derive_seed(derive_seed(3, 1), 2)
        cell_map = voronoi_assign(q, random_sites(q, 60, sub))
        views = [
            (slice(0, q), slice(0, q)),
            (slice(0, q), slice(q, 2 * q)),
            (slice(q, 2 * q), slice(0, q)),
            (slice(q, 2 * q), slice(q, 2 * q)),
        ]
        in_quads = [circ.values[v] for v in views]
        out_quads = [curved.values[v] for v in views]
        for cell in range(60):
            sel = cell_map == cell
            for g in range(4):
                got = out_quads[g][sel]
                assert any(np.array_equal(got, src[sel]) for src in in_quads)

    def test_output_values_all_exist_in_input(self):
        circ, curved = _family_block(1, 0, side=40, sites=30)
        assert np.all(np.isin(curved.values, circ.values))

    def test_curve_deterministic(self):
        circ, _ = _family_block(2, 0, side=40, sites=30)
        sites = random_sites(20, 30, 44)
        a = curve_block(circ, sites, 55)
        b = curve_block(circ, sites, 55)
        assert np.array_equal(a.values, b.values)
        assert a.kind == "curved"

    def test_rejects_mismatched_sites(self):
        circ, _ = _family_block(0, 0, side=40, sites=30)
        with pytest.raises(ValueError):
            curve_block(circ, random_sites(10, 4, 0), 1)

    def test_swap_rejects_bad_shapes(self):
        vals = np.zeros((6, 6), dtype=np.float32)
        cell_map = np.zeros((3, 3), dtype=np.int32)
        with pytest.raises(ValueError):
            swap_cells(vals, cell_map, np.zeros((3, 1), dtype=np.int64))
        with pytest.raises(ValueError):
            swap_cells(np.zeros((5, 5), dtype=np.float32), cell_map, np.zeros((4, 1), dtype=np.int64))
        with pytest.raises(ValueError):
            swap_cells(np.zeros((6, 4), dtype=np.float32), cell_map, np.zeros((4, 1), dtype=np.int64))


class TestCurvedStatistics:
    def test_global_statistics_preserved(self):
        # Frozen family (p=0.635, master 0): swap may move the block mean
        # by at most 0.02 and the variance by at most 10%.
        for s in range(12):
            circ, curved = _family_block(0, s, p=0.635)
            cm = float(np.mean(circ.values, dtype=np.float64))
            km = float(np.mean(curved.values, dtype=np.float64))
            assert abs(km) <= abs(cm) + 0.02
            ratio = float(np.var(curved.values.astype(np.float64))) / float(
                np.var(circ.values.astype(np.float64))
            )
            assert 0.9 <= ratio <= 1.1

    def test_directionality_break_vs_row_major_noise(self):
        # Scanline Markov noise stripes along rows; curved blocks do not.
        p = 0.725
        raw = generate_sequence(MarkovParams(p=p), 1_000_000, 99).reshape(1000, 1000)
        raw_ratio = pattern_stats(raw).orientation_ratio
        for s in range(6):
            _, curved = _family_block(5, s, p=p)
            assert pattern_stats(curved).orientation_ratio < raw_ratio


class TestBank:
    def test_block_population_and_probabilities(self, small_bank):
        assert len(small_bank.blocks) == 10 * small_bank.variants
        assert small_bank.probabilities == tuple(0.545 + 0.045 * k for k in range(10))
        assert small_bank.block(6, 0).p == pytest.approx(0.815, abs=1e-12)

    def test_sub_seed_contract(self, small_bank):
        for (k, v), block in small_bank.blocks.items():
            assert block.seed == derive_seed(small_bank.master_seed, k, v)
            assert block.kind == "curved"
            assert block.p == TRANSITION_PROBABILITIES[k]

    def test_variant_stack_shape(self, small_bank):
        stack = small_bank.variant_stack(1)
        assert stack.shape == (10, 200, 200)
        assert stack.dtype == np.float32

    def test_thread_count_does_not_change_bytes(self, tmp_path):
        kwargs = dict(block_side=60, site_count=50, variants=2, master_seed=4)
        serial = build_bank(threads=1, **kwargs)
        threaded = build_bank(threads=4, **kwargs)
        p1, p2 = str(tmp_path / "a.bank"), str(tmp_path / "b.bank")
        save_bank(serial, p1)
        save_bank(threaded, p2)
        assert (tmp_path / "a.bank").read_bytes() == (tmp_path / "b.bank").read_bytes()

    def test_regeneration_is_bit_exact(self, tmp_path):
        kwargs = dict(block_side=40, site_count=30, variants=3, master_seed=21)
        p1, p2 = str(tmp_path / "a.bank"), str(tmp_path / "b.bank")
        save_bank(build_bank(**kwargs), p1)
        save_bank(build_bank(**kwargs), p2)
        assert (tmp_path / "a.bank").read_bytes() == (tmp_path / "b.bank").read_bytes()

    def test_params_must_keep_canonical_probabilities(self):
        params = tuple(MarkovParams(p=0.5) for _ in range(10))
        with pytest.raises(ValueError):
            build_bank(block_side=40, site_count=10, variants=1, params_per_k=params)

    def test_bank_requires_all_blocks(self):
        bank = build_bank(block_side=40, site_count=10, variants=1, master_seed=1)
        broken = dict(bank.blocks)
        del broken[(3, 0)]
        with pytest.raises(ValueError, match="missing"):
            PatternBank(
                block_side=40,
                probabilities=TRANSITION_PROBABILITIES,
                variants=1,
                master_seed=1,
                blocks=broken,
            )


@pytest.fixture(scope="module")
def tiny_bank():
    return build_bank(block_side=40, site_count=30, variants=2, master_seed=8)


class TestBankSerialization:
    def test_round_trip_bit_exact(self, tiny_bank, tmp_path):
        path = str(tmp_path / "bank.cmgn")
        save_bank(tiny_bank, path)
        back = load_bank(path)
        assert back.block_side == tiny_bank.block_side
        assert back.variants == tiny_bank.variants
        assert back.master_seed == tiny_bank.master_seed
        for key, block in tiny_bank.blocks.items():
            other = back.blocks[key]
            assert np.array_equal(block.values, other.values)
            assert block.p == other.p
            assert block.seed == other.seed

    def test_truncated_file_rejected_with_offset(self, tiny_bank, tmp_path):
        path = tmp_path / "bank.cmgn"
        save_bank(tiny_bank, str(path))
        raw = path.read_bytes()
        path.write_bytes(raw[: len(raw) // 2])
        with pytest.raises(CorruptBankError, match="byte offset"):
            load_bank(str(path))

    def test_bad_magic_rejected(self, tiny_bank, tmp_path):
        path = tmp_path / "bank.cmgn"
        save_bank(tiny_bank, str(path))
        raw = bytearray(path.read_bytes())
        raw[:4] = b"XXXX"
        path.write_bytes(bytes(raw))
        with pytest.raises(CorruptBankError, match="magic"):
            load_bank(str(path))

    def test_unsupported_version_named(self, tiny_bank, tmp_path):
        path = tmp_path / "bank.cmgn"
        save_bank(tiny_bank, str(path))
        raw = bytearray(path.read_bytes())
        raw[4:6] = (9).to_bytes(2, "little")
        path.write_bytes(bytes(raw))
        with pytest.raises(CorruptBankError, match="version 9"):
            load_bank(str(path))

    def test_trailing_garbage_rejected(self, tiny_bank, tmp_path):
        path = tmp_path / "bank.cmgn"
        save_bank(tiny_bank, str(path))
        path.write_bytes(path.read_bytes() + b"junk")
        with pytest.raises(CorruptBankError, match="trailing"):
            load_bank(str(path))

    def test_header_only_file_rejected(self, tmp_path):
        path = tmp_path / "tiny.cmgn"
        path.write_bytes(b"CMGN")
        with pytest.raises(CorruptBankError):
            load_bank(str(path))


def test_noise_block_rejects_non_finite():
    bad = np.zeros((4, 4), dtype=np.float32)
    bad[0, 0] = np.nan
    with pytest.raises(ValueError):
        NoiseBlock(4, bad, "circular", 0.5, 0)
