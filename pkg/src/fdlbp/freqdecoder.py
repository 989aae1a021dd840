"""Decoders that fan aligned bit planes out into per-pattern code channels.

A decoder takes gamma bit planes (one per filtered image) and produces
2^gamma output code maps. For every pixel and bit position t, the gamma bits
across the inputs select exactly one output channel, which receives that
bit's binary weight 2^(t-1). Summed over t this yields one code in
[0, 2^N - 1] per pixel per channel, and the channels partition the weights:
the per-pixel channel sum is always 2^N - 1.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .imgproc import FILTER_IDS
from .lbp import BitPlanes

_GROUP_RE = re.compile(r"\(([^()]*)\)")


@dataclass(frozen=True)
class DecoderSpec:
    """An ordered set of decoders, each an ordered tuple of filter ids.

    All decoders in one spec must share the same input count gamma, which the
    descriptor dimension formula relies on.
    """

    groups: tuple[tuple[str, ...], ...]

    def __post_init__(self):
        if not self.groups:
            raise ValueError("decoder spec needs at least one decoder")
        gammas = {len(g) for g in self.groups}
        if len(gammas) != 1:
            raise ValueError(f"all decoders must have the same input count, got sizes {sorted(gammas)}")
        if min(gammas) < 1:
            raise ValueError("each decoder needs at least one input")
        for group in self.groups:
            for fid in group:
                if fid not in FILTER_IDS:
                    raise ValueError(f"unknown filter id {fid!r} in decoder spec")

    @property
    def n_decoders(self) -> int:
        return len(self.groups)

    @property
    def inputs_per_decoder(self) -> int:
        return len(self.groups[0])

    @property
    def channels_per_decoder(self) -> int:
        return 2 ** self.inputs_per_decoder

    @property
    def text(self) -> str:
        """Canonical string form, e.g. '(a,hv,d)(a,sv,sh)'."""
        return "".join("(" + ",".join(g) + ")" for g in self.groups)


def parse_spec(text: str) -> DecoderSpec:
    """Parse a decoder spec string like '(a,hv,d)(a,sv,sh)' or '(a,hv)(a,d)(a,sv)(a,sh)'."""
    stripped = re.sub(r"\s+", "", text)
    if not stripped:
        raise ValueError("empty decoder spec")
    groups = _GROUP_RE.findall(stripped)
    if _GROUP_RE.sub("", stripped):
        raise ValueError(f"malformed decoder spec {text!r}")
    parsed = []
    for group in groups:
        ids = tuple(tok for tok in group.split(",") if tok)
        if not ids:
            raise ValueError(f"empty decoder group in spec {text!r}")
        parsed.append(ids)
    return DecoderSpec(groups=tuple(parsed))


DEFAULT_SPEC = parse_spec("(a,hv,d)(a,sv,sh)")


def omega(bits: Sequence[int]) -> int:
    """Map an ordered bit tuple to its 1-based channel index.

    The first bit is the most significant: omega((b1, b2, b3)) = 4*b1 + 2*b2 + b3 + 1.
    """
    if not bits:
        raise ValueError("omega needs at least one bit")
    index = 0
    for b in bits:
        if b not in (0, 1):
            raise ValueError(f"omega inputs must be binary, got {b!r}")
        index = (index << 1) | b
    return index + 1


def decode(inputs: Sequence[BitPlanes]) -> np.ndarray:
    """Run one decoder over gamma aligned bit-plane sets.

    Returns an int64 array of shape (2^gamma, rows, cols): channel zeta-1
    holds the code map of the zeta-th output. Inputs must share grid shape
    and ring configuration.
    """
    if not inputs:
        raise ValueError("decode needs at least one input")
    first = inputs[0]
    for bp in inputs[1:]:
        if bp.planes.shape != first.planes.shape:
            raise ValueError(
                f"bit-plane shape mismatch: {bp.planes.shape} vs {first.planes.shape}"
            )
        if bp.config != first.config:
            raise ValueError(f"bit-plane config mismatch: {bp.config} vs {first.config}")
    gamma = len(inputs)
    n, h, w = first.planes.shape
    n_channels = 2 ** gamma
    codes = np.zeros((n_channels, h, w), dtype=np.int64)
    for t in range(n):
        index = np.zeros((h, w), dtype=np.int64)
        for bp in inputs:
            index = (index << 1) | bp.planes[t]
        weight = np.int64(1) << t
        for zeta in range(n_channels):
            codes[zeta] += (index == zeta) * weight
    return codes
