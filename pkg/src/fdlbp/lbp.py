"""Circular-neighborhood sampling and per-pixel N-bit binary code generation.

The t-th neighbor of pixel (i, j) sits at (i - R*sin(theta_t), j - R*cos(theta_t))
with theta_t = (t - 1) * 360/N degrees, applied literally with rows growing
downward. Neighbor values at non-integer positions are bilinearly interpolated;
coordinates within 1e-9 of the grid snap to it, so the axis-aligned neighbors
of the default 8-point ring hit grid cells exactly despite trigonometric
rounding. A neighbor >= center comparison yields bit 1 (ties included).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .imgproc import as_image

SNAP_TOL = 1e-9


@dataclass(frozen=True)
class LbpConfig:
    """Ring geometry: N evenly spaced neighbors at radius R."""

    neighbors: int = 8
    radius: int = 1

    def __post_init__(self):
        if self.neighbors < 1:
            raise ValueError(f"neighbors must be >= 1, got {self.neighbors}")
        if self.radius < 1:
            raise ValueError(f"radius must be >= 1, got {self.radius}")

    @property
    def theta(self) -> float:
        """Angular step between adjacent neighbors, in degrees."""
        return 360.0 / self.neighbors

    def key(self) -> str:
        return f"N{self.neighbors}R{self.radius}"


def neighbor_offsets(config: LbpConfig) -> list[tuple[float, float]]:
    """(row, col) offsets of the N ring neighbors relative to the center pixel."""
    offsets = []
    for t in range(1, config.neighbors + 1):
        angle = math.radians((t - 1) * config.theta)
        offsets.append((-config.radius * math.sin(angle), -config.radius * math.cos(angle)))
    return offsets


def neighbor_coords(i: float, j: float, config: LbpConfig) -> list[tuple[float, float]]:
    """Absolute (row, col) coordinates of the N neighbors of pixel (i, j)."""
    return [(i + dy, j + dx) for dy, dx in neighbor_offsets(config)]


def _snap(value: float) -> float | None:
    nearest = round(value)
    if abs(value - nearest) <= SNAP_TOL:
        return float(nearest)
    return None


def sample(image: np.ndarray, coord: tuple[float, float]) -> float:
    """Sample the image at a real-valued (row, col) coordinate.

    Coordinates whose row and column are both within 1e-9 of integers return
    the grid value exactly; anything else is bilinearly interpolated from the
    four surrounding pixels. Raises ValueError for out-of-bounds coordinates.
    """
    image = as_image(image)
    h, w = image.shape
    r, c = coord
    if not (0.0 - SNAP_TOL <= r <= h - 1 + SNAP_TOL and 0.0 - SNAP_TOL <= c <= w - 1 + SNAP_TOL):
        raise ValueError(f"sample coordinate {coord} outside image bounds {h}x{w}")
    sr, sc = _snap(r), _snap(c)
    if sr is not None and sc is not None:
        return float(image[int(sr), int(sc)])
    r0 = min(int(math.floor(r)), h - 2)
    c0 = min(int(math.floor(c)), w - 2)
    r0 = max(r0, 0)
    c0 = max(c0, 0)
    fy = r - r0
    fx = c - c0
    v00 = image[r0, c0]
    v01 = image[r0, c0 + 1]
    v10 = image[r0 + 1, c0]
    v11 = image[r0 + 1, c0 + 1]
    top = v00 + fx * (v01 - v00)
    bot = v10 + fx * (v11 - v10)
    return float(top + fy * (bot - top))


@dataclass(frozen=True)
class BitPlanes:
    """N binary planes over one image grid; bits are valid for interior pixels
    only (at least `radius` away from every border), zero elsewhere."""

    config: LbpConfig
    planes: np.ndarray = field(repr=False)  # (N, rows, cols) uint8

    @property
    def shape(self) -> tuple[int, int]:
        return self.planes.shape[1], self.planes.shape[2]


def _neighbor_values(image: np.ndarray, dy: float, dx: float, radius: int) -> np.ndarray:
    """Sampled neighbor values for every interior pixel, as an array.

    Mirrors sample(): per-pixel coordinates i+dy, j+dx, snap-to-grid when both
    coordinates land within 1e-9 of integers, lerp-form bilinear otherwise.
    """
    h, w = image.shape
    rows = np.arange(radius, h - radius, dtype=np.float64) + dy
    cols = np.arange(radius, w - radius, dtype=np.float64) + dx
    row_near = np.rint(rows)
    col_near = np.rint(cols)
    row_snaps = np.abs(rows - row_near) <= SNAP_TOL
    col_snaps = np.abs(cols - col_near) <= SNAP_TOL

    if row_snaps.all() and col_snaps.all():
        r0 = int(row_near[0])
        c0 = int(col_near[0])
        return image[r0 : r0 + rows.size, c0 : c0 + cols.size]

    r0 = np.floor(rows)
    c0 = np.floor(cols)
    np.clip(r0, 0, h - 2, out=r0)
    np.clip(c0, 0, w - 2, out=c0)
    fy = (rows - r0)[:, None]
    fx = (cols - c0)[None, :]
    ir = r0.astype(np.intp)[:, None]
    ic = c0.astype(np.intp)[None, :]
    v00 = image[ir, ic]
    v01 = image[ir, ic + 1]
    v10 = image[ir + 1, ic]
    v11 = image[ir + 1, ic + 1]
    top = v00 + fx * (v01 - v00)
    bot = v10 + fx * (v11 - v10)
    values = top + fy * (bot - top)

    if row_snaps.any() or col_snaps.any():
        # Mixed case: individual lanes that hit the grid take the exact value.
        both = row_snaps[:, None] & col_snaps[None, :]
        gr = np.clip(row_near, 0, h - 1).astype(np.intp)[:, None]
        gc = np.clip(col_near, 0, w - 1).astype(np.intp)[None, :]
        values = np.where(both, image[gr, gc], values)
    return values


def lbp_bitplanes(image: np.ndarray, config: LbpConfig | None = None) -> BitPlanes:
    """Compute the N bit planes of an image: bit t is 1 where the t-th ring
    neighbor is >= the center value.

    Bits are produced for interior pixels only; everything within `radius` of
    a border stays 0. Raises ValueError when the image is too small to have
    an interior.
    """
    if config is None:
        config = LbpConfig()
    image = as_image(image)
    h, w = image.shape
    if h <= 2 * config.radius or w <= 2 * config.radius:
        raise ValueError(
            f"image {h}x{w} too small for radius {config.radius}: no interior pixels"
        )
    center = image[config.radius : h - config.radius, config.radius : w - config.radius]
    planes = np.zeros((config.neighbors, h, w), dtype=np.uint8)
    for t, (dy, dx) in enumerate(neighbor_offsets(config)):
        nbr = _neighbor_values(image, dy, dx, config.radius)
        planes[t, config.radius : h - config.radius, config.radius : w - config.radius] = nbr >= center
    planes.setflags(write=False)
    return BitPlanes(config=config, planes=planes)


def lbp_code_map(bitplanes: BitPlanes) -> np.ndarray:
    """Classical binary-weighted code map: sum of plane t times 2^(t-1)."""
    n, h, w = bitplanes.planes.shape
    codes = np.zeros((h, w), dtype=np.int64)
    for t in range(n):
        codes += bitplanes.planes[t].astype(np.int64) << t
    return codes
