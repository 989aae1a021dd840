"""Command-line front end.

Subcommands: extract | query | evaluate | sweep | compare | bench.
Exit codes: 0 success, 1 usage error, 2 data error, 3 internal error.
"""

from __future__ import annotations

import argparse
import dataclasses
import sys
import tempfile
import time
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import descriptor, evaluation, retrieval
from .freqdecoder import parse_spec
from .imgproc import load_image, load_kernels
from .lbp import LbpConfig
from .similarity import MEASURES

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2
EXIT_INTERNAL = 3

DEFAULT_SPEC_TEXT = "(a,hv,d)(a,sv,sh)"


@dataclass
class RunConfig:
    """Flat run configuration; round-trips through key=value text."""

    variant: str = "fdlbp"
    neighbors: int = 8
    radius: int = 1
    spec: str = DEFAULT_SPEC_TEXT
    measure: str = "chisq"
    n: int = 5
    n_max: int = 10
    manifest: str = ""
    root: str = ""
    store: str = ""
    out: str = ""
    kernels: str = ""
    exclude_query: bool = False
    threads: int = 1

    def to_text(self) -> str:
        lines = []
        for f in dataclasses.fields(self):
            lines.append(f"{f.name}={getattr(self, f.name)}")
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str) -> "RunConfig":
        values: dict[str, object] = {}
        types = {f.name: f.type for f in dataclasses.fields(cls)}
        for lineno, line in enumerate(text.splitlines(), start=1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            if "=" not in line:
                raise ValueError(f"config line {lineno}: expected key=value, got {line!r}")
            key, _, raw = line.partition("=")
            key = key.strip()
            raw = raw.strip()
            if key not in types:
                raise ValueError(f"config line {lineno}: unknown key {key!r}")
            t = types[key]
            if t in (int, "int"):
                values[key] = int(raw)
            elif t in (bool, "bool"):
                values[key] = raw.lower() in ("1", "true", "yes")
            else:
                values[key] = raw
        return cls(**values)

    def save(self, path) -> None:
        Path(path).write_text(self.to_text())

    @classmethod
    def load(cls, path) -> "RunConfig":
        return cls.from_text(Path(path).read_text())


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # usage errors exit 1, not argparse's default 2
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _add_descriptor_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--variant", default="fdlbp", choices=descriptor.VARIANTS)
    p.add_argument("--neighbors", type=int, default=8)
    p.add_argument("--radius", type=int, default=1)
    p.add_argument("--spec", default=DEFAULT_SPEC_TEXT, help="decoder spec, e.g. '(a,hv,d)(a,sv,sh)'")
    p.add_argument("--kernels", default=None, help="kernel-override file (five 3x3 matrices)")


def _add_manifest_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--manifest", required=True, help="CSV manifest with header path,subject_id")
    p.add_argument("--root", default=None, help="base directory for relative manifest paths")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="fdlbp", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("extract", help="build a feature store from a manifest")
    _add_manifest_flags(p)
    _add_descriptor_flags(p)
    p.add_argument("--store", required=True, help="output store file")
    p.add_argument("--threads", type=int, default=1)

    p = sub.add_parser("query", help="rank the gallery against a query")
    p.add_argument("--store", required=True)
    p.add_argument("--id", default=None, help="query by stored item id")
    p.add_argument("--image", default=None, help="query by external image file")
    p.add_argument("--n", type=int, default=5)
    p.add_argument("--measure", default="chisq", choices=MEASURES)
    p.add_argument("--exclude-query", action="store_true")
    _add_descriptor_flags(p)

    p = sub.add_parser("evaluate", help="metric report at one cutoff")
    p.add_argument("--store", required=True)
    p.add_argument("--measure", default="chisq", choices=MEASURES)
    p.add_argument("--n", type=int, default=5)
    p.add_argument("--exclude-query", action="store_true")
    p.add_argument("--out", default=None, help="report CSV path (default stdout)")
    p.add_argument("--per-category", default=None, help="per-category CSV path")

    p = sub.add_parser("sweep", help="metric rows for every n up to n-max")
    p.add_argument("--store", required=True)
    p.add_argument("--measure", default="chisq", choices=MEASURES)
    p.add_argument("--n-max", type=int, default=10)
    p.add_argument("--exclude-query", action="store_true")
    p.add_argument("--out", default=None)

    p = sub.add_parser("compare", help="evaluate several variants on one manifest")
    _add_manifest_flags(p)
    p.add_argument("--variants", default="lbp,fdlbp", help="comma-separated variant list")
    p.add_argument("--measure", default="chisq", choices=MEASURES)
    p.add_argument("--n", type=int, default=5)
    p.add_argument("--exclude-query", action="store_true")
    p.add_argument("--neighbors", type=int, default=8)
    p.add_argument("--radius", type=int, default=1)
    p.add_argument("--spec", default=DEFAULT_SPEC_TEXT)
    p.add_argument("--kernels", default=None)
    p.add_argument("--threads", type=int, default=1)
    p.add_argument("--out", default=None)

    p = sub.add_parser("bench", help="extraction time and storage cost per variant")
    _add_manifest_flags(p)
    p.add_argument("--variants", default="fdlbp", help="comma-separated variant list")
    p.add_argument("--neighbors", type=int, default=8)
    p.add_argument("--radius", type=int, default=1)
    p.add_argument("--spec", default=DEFAULT_SPEC_TEXT)
    p.add_argument("--kernels", default=None)
    p.add_argument("--threads", type=int, default=1)
    p.add_argument("--out", default=None)

    return parser


def _descriptor_config(args) -> tuple[LbpConfig, object, dict | None]:
    config = LbpConfig(neighbors=args.neighbors, radius=args.radius)
    spec = parse_spec(args.spec)
    kernels = load_kernels(args.kernels) if getattr(args, "kernels", None) else None
    return config, spec, kernels


def _out_stream(path):
    if path is None:
        return sys.stdout, False
    return open(path, "w", encoding="utf-8"), True


def _clamp_n(n: int, available: int) -> int:
    if n > available:
        print(f"warning: clamping n from {n} to {available} (store size)", file=sys.stderr)
        return available
    return n


def _cmd_extract(args) -> int:
    config, spec, kernels = _descriptor_config(args)
    manifest = retrieval.load_manifest(args.manifest, args.root)
    store = retrieval.build_store(manifest, args.variant, config, spec, kernels, workers=args.threads)
    retrieval.save_store(store, args.store)
    print(f"wrote {args.store}: {len(store)} items, dimension {store.dimension}")
    return EXIT_OK


def _cmd_query(args) -> int:
    if (args.id is None) == (args.image is None):
        raise ValueError("query needs exactly one of --id or --image")
    store = retrieval.load_store(args.store)
    if args.id is not None:
        ranked = retrieval.rank(store, args.id, args.measure, exclude_query=args.exclude_query)
    else:
        config, spec, kernels = _descriptor_config(args)
        from .imgproc import DEFAULT_KERNELS

        fp = descriptor.fingerprint(args.variant, config, spec, kernels or DEFAULT_KERNELS)
        if fp != store.fingerprint:
            raise ValueError(
                "descriptor flags do not match the store fingerprint; "
                "pass the same --variant/--neighbors/--radius/--spec/--kernels used at extract time"
            )
        vec = descriptor.extract(load_image(args.image), args.variant, config, spec, kernels)
        ranked = retrieval.rank_vector(
            store, vec.values.astype(np.float32).astype(np.float64), args.measure, query_id=args.image
        )
    n = _clamp_n(args.n, len(ranked.entries))
    print("rank,item,subject,distance")
    for i, (item, dist) in enumerate(ranked.entries[:n], start=1):
        print(f"{i},{item},{store.subject_of(item)},{dist:.9g}")
    return EXIT_OK


def _echo(args, **extra) -> dict[str, str]:
    echo = {}
    for key in ("variant", "measure", "spec", "n", "n_max", "exclude_query"):
        if hasattr(args, key):
            echo[key] = str(getattr(args, key))
    echo.update({k: str(v) for k, v in extra.items()})
    return echo


def _cmd_evaluate(args) -> int:
    store = retrieval.load_store(args.store)
    n = _clamp_n(args.n, len(store) - (1 if args.exclude_query else 0))
    report = evaluation.evaluate_store(
        store,
        args.measure,
        n,
        exclude_query=args.exclude_query,
        config=_echo(args, store=args.store, fingerprint=store.fingerprint.hex()),
    )
    fh, close = _out_stream(args.out)
    try:
        report.write_csv(fh)
    finally:
        if close:
            fh.close()
    if args.per_category:
        with open(args.per_category, "w", encoding="utf-8") as fh:
            report.write_per_category_csv(fh)
    return EXIT_OK


def _cmd_sweep(args) -> int:
    store = retrieval.load_store(args.store)
    n_max = _clamp_n(args.n_max, len(store) - (1 if args.exclude_query else 0))
    report = evaluation.sweep_store(
        store,
        args.measure,
        n_max,
        exclude_query=args.exclude_query,
        config=_echo(args, store=args.store, fingerprint=store.fingerprint.hex()),
    )
    fh, close = _out_stream(args.out)
    try:
        report.write_csv(fh)
    finally:
        if close:
            fh.close()
    return EXIT_OK


def _cmd_compare(args) -> int:
    config = LbpConfig(neighbors=args.neighbors, radius=args.radius)
    spec = parse_spec(args.spec)
    kernels = load_kernels(args.kernels) if args.kernels else None
    manifest = retrieval.load_manifest(args.manifest, args.root)
    variants = [v.strip() for v in args.variants.split(",") if v.strip()]
    if not variants:
        raise ValueError("no variants given")
    fh, close = _out_stream(args.out)
    try:
        for key, value in _echo(args).items():
            fh.write(f"# {key}={value}\n")
        fh.write("variant,dimension,arp,arr,fscore,anmrr\n")
        for variant in variants:
            store = retrieval.build_store(manifest, variant, config, spec, kernels, workers=args.threads)
            n = _clamp_n(args.n, len(store) - (1 if args.exclude_query else 0))
            report = evaluation.evaluate_store(store, args.measure, n, exclude_query=args.exclude_query)
            row = report.rows[0]
            fh.write(
                f"{variant},{store.dimension},{100 * row.arp:.2f},{100 * row.arr:.2f},"
                f"{100 * row.fscore:.2f},{100 * row.anmrr:.2f}\n"
            )
    finally:
        if close:
            fh.close()
    return EXIT_OK


def _cmd_bench(args) -> int:
    config = LbpConfig(neighbors=args.neighbors, radius=args.radius)
    spec = parse_spec(args.spec)
    kernels = load_kernels(args.kernels) if args.kernels else None
    manifest = retrieval.load_manifest(args.manifest, args.root)
    variants = [v.strip() for v in args.variants.split(",") if v.strip()]
    if not variants:
        raise ValueError("no variants given")
    fh, close = _out_stream(args.out)
    try:
        fh.write("variant,images,seconds,images_per_sec,store_bytes\n")
        for variant in variants:
            start = time.perf_counter()
            store = retrieval.build_store(manifest, variant, config, spec, kernels, workers=args.threads)
            elapsed = time.perf_counter() - start
            with tempfile.NamedTemporaryFile(suffix=".store", delete=False) as tmp:
                tmp_path = Path(tmp.name)
            try:
                retrieval.save_store(store, tmp_path)
                size = tmp_path.stat().st_size
            finally:
                tmp_path.unlink(missing_ok=True)
            rate = len(store) / elapsed if elapsed > 0 else float("inf")
            fh.write(f"{variant},{len(store)},{elapsed:.3f},{rate:.1f},{size}\n")
    finally:
        if close:
            fh.close()
    return EXIT_OK


_COMMANDS = {
    "extract": _cmd_extract,
    "query": _cmd_query,
    "evaluate": _cmd_evaluate,
    "sweep": _cmd_sweep,
    "compare": _cmd_compare,
    "bench": _cmd_bench,
}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return _COMMANDS[args.command](args)
    except (ValueError, OSError, retrieval.StoreLoadError, retrieval.BuildError, KeyError) as exc:
        print(f"fdlbp: error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except Exception as exc:  # internal invariant violation
        print(f"fdlbp: internal error: {exc!r}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
