"""Frequency-decoded local binary pattern descriptors and a retrieval harness.

The pipeline: filter an image with one low-pass and four high-pass 3x3
kernels, compute ring-neighborhood binary codes over each filtered image,
route the aligned bits through decoders that encode cross-filter patterns,
histogram the decoder outputs, and concatenate into one normalized vector.
Color variants apply the same machinery across RGB channels. A feature store
with six distance measures and ARP/ARR/F-score/rank metrics completes the
retrieval loop.
"""

from .descriptor import (
    VARIANTS,
    FeatureVector,
    extract,
    fdlbp,
    fingerprint,
    histogram,
    normalize,
    raw_counts,
    variant_dimension,
)
from .evaluation import (
    MetricsReport,
    MetricsRow,
    anmrr,
    arp_arr,
    category_means,
    evaluate_store,
    f_score,
    nmrr,
    precision_recall,
    sweep_store,
)
from .freqdecoder import DEFAULT_SPEC, DecoderSpec, decode, omega, parse_spec
from .imgproc import (
    DEFAULT_KERNELS,
    FILTER_IDS,
    convolve3x3,
    filter_bank,
    load_image,
    load_kernels,
    pad_replicate,
    read_pgm,
    read_ppm,
    resize,
    to_grayscale,
    write_pgm,
    write_ppm,
)
from .lbp import BitPlanes, LbpConfig, lbp_bitplanes, lbp_code_map, neighbor_coords, sample
from .retrieval import (
    BuildError,
    FeatureStore,
    ManifestEntry,
    RankedList,
    StoreDimensionError,
    StoreHeaderError,
    StoreLoadError,
    StoreTruncatedError,
    build_store,
    load_manifest,
    load_store,
    rank,
    rank_vector,
    save_store,
)
from .similarity import MEASURES, distance, distances_to

__version__ = "0.1.0"
