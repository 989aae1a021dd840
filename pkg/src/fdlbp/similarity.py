"""The six distance measures between normalized descriptor vectors."""

from __future__ import annotations

import math

import numpy as np

from .descriptor import FeatureVector

MEASURES = ("euclidean", "cosine", "emd", "l1", "d1", "chisq")


def _values(v) -> np.ndarray:
    if isinstance(v, FeatureVector):
        return np.asarray(v.values, dtype=np.float64)
    return np.asarray(v, dtype=np.float64)


def _check_pair(a, b) -> tuple[np.ndarray, np.ndarray]:
    if isinstance(a, FeatureVector) and isinstance(b, FeatureVector):
        if a.fingerprint != b.fingerprint:
            raise ValueError(
                "cannot compare descriptors with different config fingerprints "
                f"({a.descriptor_id} vs {b.descriptor_id})"
            )
    va, vb = _values(a), _values(b)
    if va.shape != vb.shape:
        raise ValueError(f"vector length mismatch: {va.size} vs {vb.size}")
    return va, vb


def euclidean(a, b) -> float:
    va, vb = _check_pair(a, b)
    d = va - vb
    return math.sqrt(float(np.sum(d * d)))


def cosine(a, b) -> float:
    """1 - cos(angle). Two zero vectors are identical (distance 0); a single
    zero vector is maximally dissimilar (distance 1)."""
    va, vb = _check_pair(a, b)
    if np.array_equal(va, vb):
        return 0.0
    na = math.sqrt(float(np.sum(va * va)))
    nb = math.sqrt(float(np.sum(vb * vb)))
    if na == 0.0 or nb == 0.0:
        return 1.0
    # rounding can push the ratio a hair past 1 for near-parallel vectors
    return max(0.0, 1.0 - float(np.dot(va, vb)) / (na * nb))


def emd(a, b, block_size: int | None = None) -> float:
    """1-D earth mover's distance: L1 between cumulative sums.

    With block_size set, the cumulative sum restarts at every block boundary
    so mass cannot flow between concatenated histogram blocks.
    """
    va, vb = _check_pair(a, b)
    diff = va - vb
    if block_size is not None:
        if block_size < 1 or diff.size % block_size != 0:
            raise ValueError(f"block_size {block_size} does not divide vector length {diff.size}")
        diff = diff.reshape(-1, block_size)
        return float(np.sum(np.abs(np.cumsum(diff, axis=1))))
    return float(np.sum(np.abs(np.cumsum(diff))))


def l1(a, b) -> float:
    va, vb = _check_pair(a, b)
    return float(np.sum(np.abs(va - vb)))


def d1(a, b) -> float:
    va, vb = _check_pair(a, b)
    return float(np.sum(np.abs(va - vb) / (1.0 + va + vb)))


def chi_square(a, b) -> float:
    """Sum of (a-b)^2 / (a+b) with empty bins (a+b = 0) contributing 0."""
    va, vb = _check_pair(a, b)
    num = (va - vb) ** 2
    den = va + vb
    terms = np.divide(num, den, out=np.zeros_like(num), where=den > 0)
    return float(np.sum(terms))


_DISPATCH = {
    "euclidean": euclidean,
    "cosine": cosine,
    "emd": emd,
    "l1": l1,
    "d1": d1,
    "chisq": chi_square,
}


def distance(a, b, measure: str = "chisq", *, emd_block_size: int | None = None) -> float:
    """Distance between two descriptors under a named measure.

    Accepts FeatureVector instances (fingerprints must match) or raw arrays
    of equal length. Measure tokens: euclidean | cosine | emd | l1 | d1 | chisq.
    """
    if measure not in _DISPATCH:
        raise ValueError(f"unknown measure {measure!r}; expected one of {MEASURES}")
    if measure == "emd":
        return emd(a, b, block_size=emd_block_size)
    return _DISPATCH[measure](a, b)


def distances_to(matrix: np.ndarray, vec: np.ndarray, measure: str = "chisq") -> np.ndarray:
    """Distances from one query vector to every row of a gallery matrix.

    Vectorized companion of distance() used by ranking; row i equals
    distance(matrix[i], vec, measure) up to float summation order.
    """
    if measure not in _DISPATCH:
        raise ValueError(f"unknown measure {measure!r}; expected one of {MEASURES}")
    m = np.asarray(matrix, dtype=np.float64)
    v = np.asarray(vec, dtype=np.float64)
    if m.ndim != 2 or m.shape[1] != v.size:
        raise ValueError(f"matrix shape {m.shape} incompatible with vector length {v.size}")
    if measure == "euclidean":
        d = m - v
        return np.sqrt(np.sum(d * d, axis=1))
    if measure == "cosine":
        norms = np.sqrt(np.sum(m * m, axis=1))
        nv = math.sqrt(float(np.sum(v * v)))
        out = np.ones(m.shape[0], dtype=np.float64)
        equal = np.all(m == v[None, :], axis=1)
        if nv == 0.0:
            out[norms == 0.0] = 0.0
            return out
        ok = norms > 0.0
        out[ok] = np.maximum(0.0, 1.0 - (m[ok] @ v) / (norms[ok] * nv))
        out[equal] = 0.0
        return out
    if measure == "emd":
        diff = np.cumsum(m - v, axis=1)
        return np.sum(np.abs(diff), axis=1)
    if measure == "l1":
        return np.sum(np.abs(m - v), axis=1)
    if measure == "d1":
        return np.sum(np.abs(m - v) / (1.0 + m + v), axis=1)
    num = (m - v) ** 2
    den = m + v
    terms = np.divide(num, den, out=np.zeros_like(num), where=den > 0)
    return np.sum(terms, axis=1)
