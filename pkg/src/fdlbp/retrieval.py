"""Gallery construction, binary persistence, and brute-force ranked retrieval.

Store file layout (all integers little-endian):

    magic           4 bytes  b"FDLB"
    format version  u32      currently 1
    fingerprint     8 bytes  descriptor config hash
    item count      u32
    dimension       u32
    per item:
        id length       u32
        id              UTF-8 bytes
        subject length  u32
        subject         UTF-8 bytes
        values          dimension x f32

Vectors are held in float32, the on-disk precision, so a save/load round
trip reproduces the file byte for byte.
"""

from __future__ import annotations

import csv
import struct
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import descriptor as _descriptor
from .freqdecoder import DEFAULT_SPEC, DecoderSpec
from .imgproc import DEFAULT_KERNELS, load_image
from .lbp import LbpConfig
from .similarity import distances_to

MAGIC = b"FDLB"
FORMAT_VERSION = 1


class StoreLoadError(Exception):
    """Base for all store-deserialization failures."""


class StoreHeaderError(StoreLoadError):
    """Magic, version, or structural header fields are wrong."""


class StoreDimensionError(StoreLoadError):
    """Declared dimensions disagree with what the caller expects."""


class StoreTruncatedError(StoreLoadError):
    """The file ends before the declared payload does."""


class BuildError(Exception):
    """Extraction failed for one or more manifest entries."""

    def __init__(self, failures: list[tuple[str, str]]):
        self.failures = failures
        lines = "; ".join(f"{item}: {reason}" for item, reason in failures)
        super().__init__(f"failed to extract {len(failures)} item(s): {lines}")


@dataclass(frozen=True)
class ManifestEntry:
    item_id: str  # path exactly as written in the manifest
    subject_id: str
    resolved_path: Path


def load_manifest(path, root=None) -> list[ManifestEntry]:
    """Read a `path,subject_id` CSV manifest.

    Relative image paths resolve against `root` (default: the manifest's
    directory). Paths must be unique and subjects non-empty.
    """
    path = Path(path)
    base = Path(root) if root is not None else path.parent
    entries: list[ManifestEntry] = []
    seen: set[str] = set()
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or [c.strip() for c in header[:2]] != ["path", "subject_id"]:
            raise ValueError(f"{path}: manifest must start with header 'path,subject_id'")
        for lineno, row in enumerate(reader, start=2):
            if not row or (len(row) == 1 and not row[0].strip()):
                continue
            if len(row) < 2:
                raise ValueError(f"{path}:{lineno}: expected 'path,subject_id'")
            item, subject = row[0].strip(), row[1].strip()
            if not subject:
                raise ValueError(f"{path}:{lineno}: empty subject id")
            if item in seen:
                raise ValueError(f"{path}:{lineno}: duplicate path {item!r}")
            seen.add(item)
            p = Path(item)
            entries.append(ManifestEntry(item, subject, p if p.is_absolute() else base / p))
    if not entries:
        raise ValueError(f"{path}: manifest has no entries")
    return entries


@dataclass
class FeatureStore:
    """Immutable gallery: one float32 descriptor per item, all sharing one
    config fingerprint."""

    fingerprint: bytes
    item_ids: list[str]
    subject_ids: list[str]
    vectors: np.ndarray = field(repr=False)  # (items, dimension) float32

    def __post_init__(self):
        if len(self.fingerprint) != 8:
            raise ValueError("fingerprint must be 8 bytes")
        n = len(self.item_ids)
        if len(self.subject_ids) != n or self.vectors.shape[0] != n:
            raise ValueError("item ids, subjects, and vectors must align")
        if len(set(self.item_ids)) != n:
            raise ValueError("item ids must be unique")

    def __len__(self) -> int:
        return len(self.item_ids)

    @property
    def dimension(self) -> int:
        return self.vectors.shape[1]

    def index_of(self, item_id: str) -> int:
        try:
            return self.item_ids.index(item_id)
        except ValueError:
            raise KeyError(f"item {item_id!r} not in store") from None

    def subject_of(self, item_id: str) -> str:
        return self.subject_ids[self.index_of(item_id)]


@dataclass(frozen=True)
class RankedList:
    """Full gallery ranking for one query: (item id, distance) ascending by
    distance, ties broken by ascending item id."""

    query_id: str
    entries: list[tuple[str, float]]


def _extract_one(args) -> tuple[int, np.ndarray | None, str | None]:
    index, path, variant, neighbors, radius, spec_text, kernel_items = args
    try:
        from .freqdecoder import parse_spec

        kernels = None
        if kernel_items is not None:
            kernels = {fid: np.array(rows) for fid, rows in kernel_items}
        image = load_image(path)
        vec = _descriptor.extract(
            image,
            variant,
            LbpConfig(neighbors=neighbors, radius=radius),
            parse_spec(spec_text),
            kernels,
        )
        return index, vec.values.astype(np.float32), None
    except Exception as exc:  # collected per item, reported together
        return index, None, str(exc)


def build_store(
    manifest: list[ManifestEntry],
    variant: str = "fdlbp",
    config: LbpConfig | None = None,
    spec: DecoderSpec | None = None,
    kernels: dict[str, np.ndarray] | None = None,
    workers: int = 1,
) -> FeatureStore:
    """Extract a descriptor for every manifest entry.

    Extraction order never affects the result; with workers > 1 the images
    are distributed over worker processes and reassembled in manifest order.
    Any unreadable or unprocessable image fails the whole build with a
    BuildError listing every offender.
    """
    if not manifest:
        raise ValueError("manifest is empty")
    if config is None:
        config = LbpConfig()
    if spec is None:
        spec = DEFAULT_SPEC
    kernel_set = kernels if kernels is not None else DEFAULT_KERNELS
    kernel_items = None
    if kernels is not None:
        kernel_items = tuple((fid, tuple(map(tuple, np.asarray(k).tolist()))) for fid, k in kernels.items())

    tasks = [
        (i, str(e.resolved_path), variant, config.neighbors, config.radius, spec.text, kernel_items)
        for i, e in enumerate(manifest)
    ]
    results: list[np.ndarray | None] = [None] * len(manifest)
    failures: list[tuple[str, str]] = []
    if workers > 1:
        chunk = max(1, len(tasks) // (workers * 4))
        with ProcessPoolExecutor(max_workers=workers) as pool:
            outcomes = pool.map(_extract_one, tasks, chunksize=chunk)
            for index, values, error in outcomes:
                if error is not None:
                    failures.append((manifest[index].item_id, error))
                else:
                    results[index] = values
    else:
        for task in tasks:
            index, values, error = _extract_one(task)
            if error is not None:
                failures.append((manifest[index].item_id, error))
            else:
                results[index] = values
    if failures:
        failures.sort(key=lambda f: f[0])
        raise BuildError(failures)

    vectors = np.stack(results)
    fp = _descriptor.fingerprint(variant, config, spec, kernel_set)
    return FeatureStore(
        fingerprint=fp,
        item_ids=[e.item_id for e in manifest],
        subject_ids=[e.subject_id for e in manifest],
        vectors=vectors,
    )


def rank(
    store: FeatureStore,
    query_id: str,
    measure: str = "chisq",
    exclude_query: bool = False,
) -> RankedList:
    """Rank every store item against a stored query by ascending distance.

    The query itself stays in the ranking (and lands first at distance 0)
    unless exclude_query is set.
    """
    qi = store.index_of(query_id)
    return rank_vector(store, store.vectors[qi], measure, query_id=query_id, exclude_query=exclude_query)


def rank_vector(
    store: FeatureStore,
    query_values: np.ndarray,
    measure: str = "chisq",
    query_id: str = "<external>",
    exclude_query: bool = False,
) -> RankedList:
    """Rank the store against an arbitrary query vector of matching dimension."""
    q = np.asarray(query_values, dtype=np.float64)
    if q.size != store.dimension:
        raise ValueError(f"query dimension {q.size} != store dimension {store.dimension}")
    dists = distances_to(store.vectors.astype(np.float64), q, measure)
    order = sorted(range(len(store)), key=lambda i: (dists[i], store.item_ids[i]))
    entries = [
        (store.item_ids[i], float(dists[i]))
        for i in order
        if not (exclude_query and store.item_ids[i] == query_id)
    ]
    return RankedList(query_id=query_id, entries=entries)


def save_store(store: FeatureStore, path) -> None:
    """Serialize a store to the documented little-endian binary layout."""
    with open(path, "wb") as fh:
        fh.write(MAGIC)
        fh.write(struct.pack("<I", FORMAT_VERSION))
        fh.write(store.fingerprint)
        fh.write(struct.pack("<II", len(store), store.dimension))
        vectors = np.ascontiguousarray(store.vectors, dtype="<f4")
        for i, (item, subject) in enumerate(zip(store.item_ids, store.subject_ids)):
            item_b = item.encode("utf-8")
            subject_b = subject.encode("utf-8")
            fh.write(struct.pack("<I", len(item_b)))
            fh.write(item_b)
            fh.write(struct.pack("<I", len(subject_b)))
            fh.write(subject_b)
            fh.write(vectors[i].tobytes())


def _read_exact(fh, count: int, what: str) -> bytes:
    data = fh.read(count)
    if len(data) != count:
        raise StoreTruncatedError(f"file ends inside {what}: wanted {count} bytes, got {len(data)}")
    return data


def load_store(path, expected_fingerprint: bytes | None = None, expected_dim: int | None = None) -> FeatureStore:
    """Load a store file, verifying magic, version, and declared layout.

    Raises StoreHeaderError for a corrupt header, StoreDimensionError when the
    declared dimension or fingerprint disagrees with the caller's expectation,
    and StoreTruncatedError when the payload ends early.
    """
    with open(path, "rb") as fh:
        header = fh.read(4)
        if len(header) < 4 or header != MAGIC:
            raise StoreHeaderError(f"{path}: bad magic {header!r}, expected {MAGIC!r}")
        raw = fh.read(4)
        if len(raw) < 4:
            raise StoreHeaderError(f"{path}: header ends before format version")
        (version,) = struct.unpack("<I", raw)
        if version != FORMAT_VERSION:
            raise StoreHeaderError(f"{path}: unsupported format version {version}")
        fp = fh.read(8)
        if len(fp) < 8:
            raise StoreHeaderError(f"{path}: header ends inside fingerprint")
        raw = fh.read(8)
        if len(raw) < 8:
            raise StoreHeaderError(f"{path}: header ends before item count / dimension")
        count, dim = struct.unpack("<II", raw)
        if expected_fingerprint is not None and fp != expected_fingerprint:
            raise StoreDimensionError(
                f"{path}: store fingerprint {fp.hex()} does not match expected {expected_fingerprint.hex()}"
            )
        if expected_dim is not None and dim != expected_dim:
            raise StoreDimensionError(f"{path}: store dimension {dim} != expected {expected_dim}")

        item_ids: list[str] = []
        subject_ids: list[str] = []
        vectors = np.empty((count, dim), dtype=np.float32)
        for i in range(count):
            (id_len,) = struct.unpack("<I", _read_exact(fh, 4, f"item {i} id length"))
            item_ids.append(_read_exact(fh, id_len, f"item {i} id").decode("utf-8"))
            (sub_len,) = struct.unpack("<I", _read_exact(fh, 4, f"item {i} subject length"))
            subject_ids.append(_read_exact(fh, sub_len, f"item {i} subject").decode("utf-8"))
            payload = _read_exact(fh, 4 * dim, f"item {i} vector")
            vectors[i] = np.frombuffer(payload, dtype="<f4")
        trailing = fh.read(1)
        if trailing:
            raise StoreHeaderError(f"{path}: trailing data after declared payload")
    return FeatureStore(fingerprint=fp, item_ids=item_ids, subject_ids=subject_ids, vectors=vectors)
