"""Image plumbing: grayscale, resize, padding, 3x3 convolution, the five-filter bank, PGM/PPM I/O.

Images are plain 2-D float64 arrays indexed (row, col); color images are
(rows, cols, 3) arrays in RGB order. Pixel values stay in whatever real range
the pipeline produces: high-pass filter outputs are signed and are never
clamped back to [0, 255].
"""

from __future__ import annotations

import io
from pathlib import Path

import numpy as np

# Filter bank ids, in the fixed order every downstream consumer relies on.
FILTER_IDS = ("a", "hv", "d", "sv", "sh")

_KERNEL_SUM_TOL = 1e-9


def _kernel(rows) -> np.ndarray:
    k = np.array(rows, dtype=np.float64)
    k.setflags(write=False)
    return k


# One brightness-preserving averaging kernel plus four zero-sum difference
# kernels (horizontal-vertical, diagonal, Sobel vertical, Sobel horizontal).
DEFAULT_KERNELS: dict[str, np.ndarray] = {
    "a": _kernel([[1.0 / 9.0] * 3] * 3),
    "hv": _kernel([[0.0, -1.0, 0.0], [-1.0, 4.0, -1.0], [0.0, -1.0, 0.0]]),
    "d": _kernel([[-1.0, 0.0, -1.0], [0.0, 4.0, 0.0], [-1.0, 0.0, -1.0]]),
    "sv": _kernel([[-1.0, 0.0, 1.0], [-2.0, 0.0, 2.0], [-1.0, 0.0, 1.0]]),
    "sh": _kernel([[-1.0, -2.0, -1.0], [0.0, 0.0, 0.0], [1.0, 2.0, 1.0]]),
}


def validate_kernels(kernels: dict[str, np.ndarray]) -> None:
    """Check a kernel set: all five ids present, 3x3, with the low-pass kernel
    summing to 1 and every high-pass kernel summing to 0."""
    missing = [k for k in FILTER_IDS if k not in kernels]
    if missing:
        raise ValueError(f"kernel set is missing filters: {missing}")
    for fid in FILTER_IDS:
        k = np.asarray(kernels[fid], dtype=np.float64)
        if k.shape != (3, 3):
            raise ValueError(f"kernel {fid!r} must be 3x3, got {k.shape}")
        total = float(k.sum())
        if fid == "a":
            if abs(total - 1.0) > _KERNEL_SUM_TOL:
                raise ValueError(f"low-pass kernel 'a' must sum to 1, sums to {total}")
        elif abs(total) > _KERNEL_SUM_TOL:
            raise ValueError(f"high-pass kernel {fid!r} must sum to 0, sums to {total}")


def load_kernels(path) -> dict[str, np.ndarray]:
    """Load a kernel-override file: five blocks of a filter id followed by nine
    coefficients, all whitespace-separated, in any block order."""
    tokens = Path(path).read_text().split()
    kernels: dict[str, np.ndarray] = {}
    pos = 0
    while pos < len(tokens):
        fid = tokens[pos]
        if fid not in FILTER_IDS:
            raise ValueError(f"unknown filter id {fid!r} in kernel file {path}")
        if fid in kernels:
            raise ValueError(f"duplicate filter id {fid!r} in kernel file {path}")
        coeffs = tokens[pos + 1 : pos + 10]
        if len(coeffs) < 9:
            raise ValueError(f"kernel {fid!r} in {path} has fewer than 9 coefficients")
        try:
            values = [float(c) for c in coeffs]
        except ValueError as exc:
            raise ValueError(f"bad coefficient for kernel {fid!r} in {path}: {exc}") from None
        kernels[fid] = _kernel(np.array(values).reshape(3, 3))
        pos += 10
    validate_kernels(kernels)
    return kernels


def as_image(data) -> np.ndarray:
    """Coerce to a 2-D float64 image array."""
    img = np.asarray(data, dtype=np.float64)
    if img.ndim != 2:
        raise ValueError(f"expected a 2-D image, got shape {img.shape}")
    return img


def as_color_image(data) -> np.ndarray:
    """Coerce to a (rows, cols, 3) float64 RGB array."""
    img = np.asarray(data, dtype=np.float64)
    if img.ndim != 3 or img.shape[2] != 3:
        raise ValueError(f"expected a (rows, cols, 3) color image, got shape {img.shape}")
    return img


def to_grayscale(color: np.ndarray) -> np.ndarray:
    """Convert an RGB image to luma with BT.601 weights.

    luma = 0.299 R + 0.587 G + 0.114 B, evaluated left to right so results are
    reproducible bit for bit.
    """
    color = as_color_image(color)
    r, g, b = color[:, :, 0], color[:, :, 1], color[:, :, 2]
    return (0.299 * r + 0.587 * g) + 0.114 * b


def resize(image: np.ndarray, target_w: int, target_h: int) -> np.ndarray:
    """Bilinear resample to target_w x target_h (half-pixel-centered sampling).

    Raises ValueError when either target dimension is < 1.
    """
    image = as_image(image)
    if target_w < 1 or target_h < 1:
        raise ValueError(f"resize target must be at least 1x1, got {target_w}x{target_h}")
    h, w = image.shape
    if (target_h, target_w) == (h, w):
        return image.copy()

    def axis_coords(n_out: int, n_in: int) -> np.ndarray:
        scale = n_in / n_out
        coords = (np.arange(n_out, dtype=np.float64) + 0.5) * scale - 0.5
        return np.clip(coords, 0.0, n_in - 1.0)

    rows = axis_coords(target_h, h)
    cols = axis_coords(target_w, w)
    r0 = np.minimum(np.floor(rows).astype(np.intp), h - 2) if h > 1 else np.zeros(target_h, np.intp)
    c0 = np.minimum(np.floor(cols).astype(np.intp), w - 2) if w > 1 else np.zeros(target_w, np.intp)
    fr = (rows - r0)[:, None]
    fc = (cols - c0)[None, :]
    r1 = np.minimum(r0 + 1, h - 1)
    c1 = np.minimum(c0 + 1, w - 1)
    v00 = image[r0[:, None], c0[None, :]]
    v01 = image[r0[:, None], c1[None, :]]
    v10 = image[r1[:, None], c0[None, :]]
    v11 = image[r1[:, None], c1[None, :]]
    top = v00 + fc * (v01 - v00)
    bot = v10 + fc * (v11 - v10)
    return top + fr * (bot - top)


def pad_replicate(image: np.ndarray, margin: int) -> np.ndarray:
    """Pad by `margin` pixels on every side, replicating the nearest edge pixel."""
    if margin < 0:
        raise ValueError(f"padding margin must be >= 0, got {margin}")
    image = as_image(image)
    if margin == 0:
        return image.copy()
    return np.pad(image, margin, mode="edge")


def convolve3x3(image: np.ndarray, kernel: np.ndarray) -> np.ndarray:
    """Same-size true 2-D convolution of an image with a 3x3 kernel.

    The image is replicate-padded by one pixel; the kernel is flipped (this is
    convolution, not correlation, which matters for the antisymmetric Sobel
    kernels). Accumulation runs in fixed row-major order over the flipped
    kernel so outputs are bit-for-bit reproducible.
    """
    image = as_image(image)
    h, w = image.shape
    if h < 3 or w < 3:
        raise ValueError(f"convolve3x3 needs an image of at least 3x3, got {h}x{w}")
    kernel = np.asarray(kernel, dtype=np.float64)
    if kernel.shape != (3, 3):
        raise ValueError(f"kernel must be 3x3, got {kernel.shape}")
    flipped = kernel[::-1, ::-1]
    padded = pad_replicate(image, 1)
    out = np.zeros((h, w), dtype=np.float64)
    for u in range(3):
        for v in range(3):
            out += flipped[u, v] * padded[u : u + h, v : v + w]
    return out


def filter_bank(image: np.ndarray, kernels: dict[str, np.ndarray] | None = None) -> dict[str, np.ndarray]:
    """Apply all five filters, returning {id: filtered image} in (a, hv, d, sv, sh) order."""
    if kernels is None:
        kernels = DEFAULT_KERNELS
    else:
        validate_kernels(kernels)
    return {fid: convolve3x3(image, kernels[fid]) for fid in FILTER_IDS}


# ---------------------------------------------------------------------------
# PGM (P5) / PPM (P6) binary 8-bit loaders and writers. Raw byte values map
# straight to reals 0-255 with no rescaling.
# ---------------------------------------------------------------------------


def _read_header_token(stream: io.BufferedIOBase) -> bytes:
    token = b""
    while True:
        ch = stream.read(1)
        if not ch:
            raise ValueError("unexpected end of file in image header")
        if ch == b"#":
            while ch not in (b"\n", b""):
                ch = stream.read(1)
            continue
        if ch.isspace():
            if token:
                return token
            continue
        token += ch


def _parse_netpbm(stream: io.BufferedIOBase, magic_wanted: bytes, channels: int) -> np.ndarray:
    magic = stream.read(2)
    if magic != magic_wanted:
        raise ValueError(f"bad magic {magic!r}, expected {magic_wanted!r}")
    width = int(_read_header_token(stream))
    height = int(_read_header_token(stream))
    maxval = int(_read_header_token(stream))
    if width < 1 or height < 1:
        raise ValueError(f"bad image dimensions {width}x{height}")
    if not 1 <= maxval <= 255:
        raise ValueError(f"only 8-bit images supported, maxval={maxval}")
    count = width * height * channels
    payload = stream.read(count)
    if len(payload) != count:
        raise ValueError(f"truncated pixel data: wanted {count} bytes, got {len(payload)}")
    data = np.frombuffer(payload, dtype=np.uint8).astype(np.float64)
    if channels == 1:
        return data.reshape(height, width)
    return data.reshape(height, width, channels)


def read_pgm(path) -> np.ndarray:
    """Read a binary (P5) 8-bit PGM file into a 2-D float64 array."""
    with open(path, "rb") as fh:
        return _parse_netpbm(fh, b"P5", 1)


def read_ppm(path) -> np.ndarray:
    """Read a binary (P6) 8-bit PPM file into a (rows, cols, 3) float64 array."""
    with open(path, "rb") as fh:
        return _parse_netpbm(fh, b"P6", 3)


def load_image(path) -> np.ndarray:
    """Load a PGM or PPM file, dispatching on the magic bytes."""
    with open(path, "rb") as fh:
        magic = fh.read(2)
    if magic == b"P5":
        return read_pgm(path)
    if magic == b"P6":
        return read_ppm(path)
    raise ValueError(f"{path}: unsupported image format (magic {magic!r}); expected P5 or P6")


def _to_bytes(image: np.ndarray) -> np.ndarray:
    return np.clip(np.rint(image), 0, 255).astype(np.uint8)


def write_pgm(path, image: np.ndarray) -> None:
    image = as_image(image)
    h, w = image.shape
    with open(path, "wb") as fh:
        fh.write(f"P5\n{w} {h}\n255\n".encode("ascii"))
        fh.write(_to_bytes(image).tobytes())


def write_ppm(path, color: np.ndarray) -> None:
    color = as_color_image(color)
    h, w, _ = color.shape
    with open(path, "wb") as fh:
        fh.write(f"P6\n{w} {h}\n255\n".encode("ascii"))
        fh.write(_to_bytes(color).tobytes())
