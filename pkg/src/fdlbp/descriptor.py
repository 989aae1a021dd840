"""Histogram assembly for the full descriptor family.

Variants and their dimensions at defaults (N=8 so 256 bins per block):

    lbp        256    classical codes of the raw grayscale image
    sobel_lbp  512    codes of the two Sobel-filtered images (sv, sh)
    bof_lbp   1280    codes of all five filtered images (a, hv, d, sv, sh)
    mdlbp     2048    one decoder over the raw R, G, B channel bit planes
    fdlbp     4096    two three-input decoders over filtered-image bit planes
    fmdlbp   10240    one color decoder per filter, five filters
    cfdlbp   12288    fdlbp per color channel, concatenated

Every variant concatenates per-channel histograms of interior pixels and
normalizes once over the final vector, so each descriptor sums to 1.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field

import numpy as np

from .freqdecoder import DEFAULT_SPEC, DecoderSpec, decode
from .imgproc import DEFAULT_KERNELS, FILTER_IDS, convolve3x3, filter_bank, to_grayscale, validate_kernels
from .lbp import BitPlanes, LbpConfig, lbp_bitplanes, lbp_code_map

VARIANTS = ("lbp", "sobel_lbp", "bof_lbp", "fdlbp", "mdlbp", "cfdlbp", "fmdlbp")
COLOR_VARIANTS = frozenset({"mdlbp", "cfdlbp", "fmdlbp"})


@dataclass(frozen=True)
class FeatureVector:
    """A normalized descriptor plus the identity of the configuration that
    produced it. Vectors from different fingerprints must never be compared."""

    values: np.ndarray = field(repr=False)
    descriptor_id: str
    fingerprint: bytes

    def __len__(self) -> int:
        return self.values.size


def histogram(codes: np.ndarray, radius: int, bins: int) -> np.ndarray:
    """Count code occurrences over interior pixels (at least `radius` from
    every border). The counts sum to (rows - 2R) * (cols - 2R)."""
    codes = np.asarray(codes)
    h, w = codes.shape
    if h <= 2 * radius or w <= 2 * radius:
        raise ValueError(f"code grid {h}x{w} has no interior at radius {radius}")
    interior = codes[radius : h - radius, radius : w - radius].ravel()
    if interior.min() < 0 or interior.max() >= bins:
        raise ValueError(
            f"codes out of range [0, {bins - 1}]: min {interior.min()}, max {interior.max()}"
        )
    return np.bincount(interior, minlength=bins)


def normalize(values: np.ndarray) -> np.ndarray:
    """Scale a non-negative vector to unit sum."""
    values = np.asarray(values, dtype=np.float64)
    total = np.sum(values)
    if total <= 0.0:
        raise ValueError("cannot normalize a vector with non-positive sum")
    return values / total


def fingerprint(
    variant: str,
    config: LbpConfig,
    spec: DecoderSpec,
    kernels: dict[str, np.ndarray],
) -> bytes:
    """8-byte hash identifying (variant, ring config, decoder spec, kernel set)."""
    h = hashlib.blake2b(digest_size=8)
    h.update(f"{variant}|{config.key()}|{spec.text}|".encode("ascii"))
    for fid in FILTER_IDS:
        h.update(np.ascontiguousarray(kernels[fid], dtype=np.float64).tobytes())
    return h.digest()


def _require_gray(image: np.ndarray) -> np.ndarray:
    image = np.asarray(image, dtype=np.float64)
    if image.ndim == 3:
        return to_grayscale(image)
    if image.ndim == 2:
        return image
    raise ValueError(f"expected a 2-D or RGB image, got shape {image.shape}")


def _require_color(image: np.ndarray, variant: str) -> np.ndarray:
    image = np.asarray(image, dtype=np.float64)
    if image.ndim != 3 or image.shape[2] != 3:
        raise ValueError(f"variant {variant!r} needs an RGB image, got shape {image.shape}")
    return image


def _decoder_blocks(planes: dict[str, BitPlanes], spec: DecoderSpec, radius: int, bins: int) -> list[np.ndarray]:
    blocks = []
    for group in spec.groups:
        channels = decode([planes[fid] for fid in group])
        for zeta in range(channels.shape[0]):
            blocks.append(histogram(channels[zeta], radius, bins))
    return blocks


def _color_decoder_blocks(rgb_planes: list[BitPlanes], radius: int, bins: int) -> list[np.ndarray]:
    channels = decode(rgb_planes)
    return [histogram(channels[z], radius, bins) for z in range(channels.shape[0])]


def raw_counts(
    image: np.ndarray,
    variant: str = "fdlbp",
    config: LbpConfig | None = None,
    spec: DecoderSpec | None = None,
    kernels: dict[str, np.ndarray] | None = None,
) -> np.ndarray:
    """Concatenated pre-normalization histogram blocks for any variant.

    Each block sums to the interior pixel count, which makes this the natural
    hook for count-level verification.
    """
    if variant not in VARIANTS:
        raise ValueError(f"unknown variant {variant!r}; expected one of {VARIANTS}")
    if config is None:
        config = LbpConfig()
    if spec is None:
        spec = DEFAULT_SPEC
    if kernels is None:
        kernels = DEFAULT_KERNELS
    else:
        validate_kernels(kernels)
    bins = 2 ** config.neighbors
    radius = config.radius

    if variant in COLOR_VARIANTS:
        color = _require_color(image, variant)
        r, g, b = color[:, :, 0], color[:, :, 1], color[:, :, 2]
        if variant == "mdlbp":
            rgb_planes = [lbp_bitplanes(chan, config) for chan in (r, g, b)]
            blocks = _color_decoder_blocks(rgb_planes, radius, bins)
        elif variant == "cfdlbp":
            blocks = []
            for chan in (r, g, b):
                planes = {fid: lbp_bitplanes(img, config) for fid, img in filter_bank(chan, kernels).items()}
                blocks.extend(_decoder_blocks(planes, spec, radius, bins))
        else:  # fmdlbp: one color decoder per filter
            blocks = []
            for fid in FILTER_IDS:
                rgb_planes = [lbp_bitplanes(convolve3x3(chan, kernels[fid]), config) for chan in (r, g, b)]
                blocks.extend(_color_decoder_blocks(rgb_planes, radius, bins))
        return np.concatenate(blocks)

    gray = _require_gray(image)
    if variant == "lbp":
        codes = lbp_code_map(lbp_bitplanes(gray, config))
        blocks = [histogram(codes, radius, bins)]
    elif variant == "sobel_lbp":
        blocks = []
        for fid in ("sv", "sh"):
            codes = lbp_code_map(lbp_bitplanes(convolve3x3(gray, kernels[fid]), config))
            blocks.append(histogram(codes, radius, bins))
    elif variant == "bof_lbp":
        blocks = []
        for fid, filtered in filter_bank(gray, kernels).items():
            codes = lbp_code_map(lbp_bitplanes(filtered, config))
            blocks.append(histogram(codes, radius, bins))
    else:  # fdlbp
        planes = {fid: lbp_bitplanes(img, config) for fid, img in filter_bank(gray, kernels).items()}
        blocks = _decoder_blocks(planes, spec, radius, bins)
    return np.concatenate(blocks)


def extract(
    image: np.ndarray,
    variant: str = "fdlbp",
    config: LbpConfig | None = None,
    spec: DecoderSpec | None = None,
    kernels: dict[str, np.ndarray] | None = None,
) -> FeatureVector:
    """Compute the normalized descriptor of an image for the given variant."""
    if config is None:
        config = LbpConfig()
    if spec is None:
        spec = DEFAULT_SPEC
    counts = raw_counts(image, variant, config, spec, kernels)
    values = normalize(counts)
    values.setflags(write=False)
    fp = fingerprint(variant, config, spec, kernels if kernels is not None else DEFAULT_KERNELS)
    return FeatureVector(values=values, descriptor_id=variant, fingerprint=fp)


def fdlbp(
    image: np.ndarray,
    config: LbpConfig | None = None,
    spec: DecoderSpec | None = None,
    kernels: dict[str, np.ndarray] | None = None,
) -> FeatureVector:
    """The flagship descriptor: filter bank, bit planes, decoders, histograms."""
    return extract(image, "fdlbp", config, spec, kernels)


def variant_dimension(
    variant: str,
    config: LbpConfig | None = None,
    spec: DecoderSpec | None = None,
) -> int:
    """Descriptor length for a variant without computing anything."""
    if variant not in VARIANTS:
        raise ValueError(f"unknown variant {variant!r}; expected one of {VARIANTS}")
    if config is None:
        config = LbpConfig()
    if spec is None:
        spec = DEFAULT_SPEC
    bins = 2 ** config.neighbors
    decoder_dim = spec.n_decoders * spec.channels_per_decoder * bins
    return {
        "lbp": bins,
        "sobel_lbp": 2 * bins,
        "bof_lbp": 5 * bins,
        "mdlbp": 8 * bins,
        "fdlbp": decoder_dim,
        "cfdlbp": 3 * decoder_dim,
        "fmdlbp": 5 * 8 * bins,
    }[variant]
