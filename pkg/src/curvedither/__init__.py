"""Adaptive debanding for quantized SDR-to-HDR conversion.

Two stages: an offline generator builds a bank of curved Markov-Gaussian
noise blocks across ten transition probabilities, and an online injector
adds bank noise to quantized images pixel-locally, with pattern choice
driven by the slope of the inverse tone-mapping table (BLUT) at each
pixel's own codeword.  No spatial neighborhood access happens at
injection time.
"""

from .baselines import (
    BaselineConfig,
    gaussian_dither,
    gaussian_noise_field,
    lpf_gaussian_dither,
    lpf_gaussian_noise_field,
)
from .blut import (
    Blut,
    FlatBlutError,
    InvalidBlutError,
    Region,
    RegionPartition,
    SlopeProfile,
    apply_blut,
    clipped_power_blut,
    linear_blut,
    load_blut,
    partition,
    probability_index,
    save_blut,
    slopes,
)
from .image import (
    HdrImage,
    PlanarImage,
    clamp_codeword,
    clamp_plane,
    distinct_codewords,
    load_image,
    quantize_codewords,
    quantize_plane,
    ramp_image,
    save_hdr_image,
    save_image,
)
from .inject import (
    ChromaPolicy,
    InjectionConfig,
    InvalidBankError,
    inject_chroma,
    inject_frame,
    inject_luma,
    select_pattern,
)
from .markov import (
    ChainState,
    MarkovParams,
    generate_chain,
    generate_sequence,
    next_state,
    sample_state,
)
from .metrics import BandingReport, PatternStats, banding_index, infer_step, pattern_stats
from .patterns import (
    BANK_MAGIC,
    BANK_VERSION,
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
from .rng import CounterRng, derive_seed, mix64

__version__ = "0.1.0"
