"""Retrieval metrics over a feature store: precision, recall, ARP, ARR,
F-score, and the normalized modified retrieval rank.

Categories are subject ids. All aggregation is two-level and unweighted:
per-query values average into per-category means, which average into the
database-wide ARP/ARR regardless of category sizes. The query image is part
of the gallery and counts among retrieved images unless explicitly excluded,
so ARP at n=1 is always 100%.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Sequence, TextIO

import numpy as np

from .retrieval import FeatureStore, RankedList
from .similarity import distances_to


@dataclass(frozen=True)
class MetricsRow:
    """One evaluation point; arp/arr/fscore/anmrr are fractions in [0, 1]."""

    n: int
    arp: float
    arr: float
    fscore: float
    anmrr: float


@dataclass
class MetricsReport:
    rows: list[MetricsRow]
    per_category: dict[str, tuple[float, float]]  # subject -> (MP, MR) at rows[-1].n
    config: dict[str, str] = field(default_factory=dict)

    def write_csv(self, fh: TextIO) -> None:
        for key, value in self.config.items():
            fh.write(f"# {key}={value}\n")
        fh.write("n,arp,arr,fscore,anmrr\n")
        for row in self.rows:
            fh.write(
                f"{row.n},{100 * row.arp:.2f},{100 * row.arr:.2f},"
                f"{100 * row.fscore:.2f},{100 * row.anmrr:.2f}\n"
            )

    def write_per_category_csv(self, fh: TextIO) -> None:
        for key, value in self.config.items():
            fh.write(f"# {key}={value}\n")
        fh.write("subject,mp,mr\n")
        for subject in sorted(self.per_category):
            mp, mr = self.per_category[subject]
            fh.write(f"{subject},{100 * mp:.2f},{100 * mr:.2f}\n")


@dataclass(frozen=True)
class _QueryRanking:
    query_index: int
    subject: str
    relevant_flags: np.ndarray  # bool, in rank order
    gt_ranks: tuple[int, ...]  # 1-based ranks of same-subject items, ascending


def _all_rankings(store: FeatureStore, measure: str, exclude_query: bool) -> list[_QueryRanking]:
    """Rank the gallery once per query; everything else derives from this."""
    ids = np.array(store.item_ids)
    id_rank = np.empty(len(store), dtype=np.intp)
    id_rank[np.argsort(ids)] = np.arange(len(store))
    gallery = store.vectors.astype(np.float64)
    subjects = np.array(store.subject_ids)
    rankings = []
    for qi in range(len(store)):
        dists = distances_to(gallery, gallery[qi], measure)
        order = np.lexsort((id_rank, dists))
        if exclude_query:
            order = order[order != qi]
        relevant = subjects[order] == subjects[qi]
        gt_ranks = tuple(int(r) + 1 for r in np.flatnonzero(relevant))
        rankings.append(_QueryRanking(qi, str(subjects[qi]), relevant, gt_ranks))
    return rankings


def precision_recall(ranked: RankedList, store: FeatureStore, n: int) -> tuple[float, float]:
    """Precision and recall of one ranked list at cutoff n.

    Correct means same subject as the query; the denominator of recall is the
    number of same-subject items present in the ranked gallery.
    """
    size = len(ranked.entries)
    if not 1 <= n <= size:
        raise ValueError(f"n must be in [1, {size}], got {n}")
    query_subject = store.subject_of(ranked.query_id)
    subjects = [store.subject_of(item) for item, _ in ranked.entries]
    correct = sum(1 for s in subjects[:n] if s == query_subject)
    total_similar = sum(1 for s in subjects if s == query_subject)
    return correct / n, correct / total_similar


def f_score(arp: float, arr: float) -> float:
    """Harmonic combination of ARP and ARR; 0 when both are 0."""
    if arp < 0 or arr < 0:
        raise ValueError("f_score inputs must be non-negative")
    if arp + arr == 0:
        return 0.0
    return 2.0 * arp * arr / (arp + arr)


def _considered_ground_truth(gt_ranks: Sequence[int], n: int) -> tuple[int, ...]:
    """The ground-truth ranks entering the rank metric at cutoff n.

    The set shrinks to its min(NG, n) best-ranked members. This is the single
    swap point for alternative cutoff conventions.
    """
    return tuple(sorted(gt_ranks)[: min(len(gt_ranks), n)])


def nmrr(considered_ranks: Sequence[int], k: int) -> float:
    """Normalized modified retrieval rank of one query.

    Ranks beyond the window k are penalized at 1.25*k. Returns 0 for a
    perfect ranking (all of the first NG ranks) and 1 when nothing relevant
    appears within the window.
    """
    ng = len(considered_ranks)
    if ng == 0:
        raise ValueError("nmrr needs at least one ground-truth rank")
    penalized = [float(r) if r <= k else 1.25 * k for r in considered_ranks]
    avr = sum(penalized) / ng
    mrr = avr - 0.5 - ng / 2.0
    denom = 1.25 * k - 0.5 - ng / 2.0
    if denom <= 0:
        return 0.0
    return mrr / denom


def _anmrr_from_rankings(rankings: list[_QueryRanking], n: int) -> float:
    considered = [_considered_ground_truth(r.gt_ranks, n) for r in rankings]
    gtm = max(len(c) for c in considered)
    total = 0.0
    for ranks in considered:
        k = min(4 * len(ranks), 2 * gtm)
        total += nmrr(ranks, k)
    return total / len(rankings)


def _category_means_from_rankings(
    rankings: list[_QueryRanking], n: int
) -> dict[str, tuple[float, float]]:
    sums: dict[str, list[float]] = {}
    for r in rankings:
        correct = int(np.count_nonzero(r.relevant_flags[:n]))
        ng = len(r.gt_ranks)
        pr = correct / n
        re = correct / ng if ng else 0.0
        bucket = sums.setdefault(r.subject, [0.0, 0.0, 0.0])
        bucket[0] += pr
        bucket[1] += re
        bucket[2] += 1.0
    return {s: (p / c, r / c) for s, (p, r, c) in sums.items()}


def category_means(
    store: FeatureStore, measure: str = "chisq", n: int = 5, exclude_query: bool = False
) -> dict[str, tuple[float, float]]:
    """Mean precision and recall per category, querying every image in turn."""
    _check_n(store, n, exclude_query)
    return _category_means_from_rankings(_all_rankings(store, measure, exclude_query), n)


def arp_arr(
    store: FeatureStore, measure: str = "chisq", n: int = 5, exclude_query: bool = False
) -> tuple[float, float]:
    """Average retrieval precision and rate: unweighted means of the
    per-category MP and MR."""
    means = category_means(store, measure, n, exclude_query)
    mps = [mp for mp, _ in means.values()]
    mrs = [mr for _, mr in means.values()]
    return sum(mps) / len(mps), sum(mrs) / len(mrs)


def anmrr(
    store: FeatureStore, measure: str = "chisq", n: int = 5, exclude_query: bool = False
) -> float:
    """Average normalized modified retrieval rank at cutoff n."""
    _check_n(store, n, exclude_query)
    return _anmrr_from_rankings(_all_rankings(store, measure, exclude_query), n)


def _check_n(store: FeatureStore, n: int, exclude_query: bool) -> None:
    size = len(store) - (1 if exclude_query else 0)
    if not 1 <= n <= size:
        raise ValueError(f"n must be in [1, {size}], got {n}")


def _rows_from_rankings(rankings: list[_QueryRanking], ns: Iterable[int]) -> list[MetricsRow]:
    rows = []
    for n in ns:
        means = _category_means_from_rankings(rankings, n)
        mps = [mp for mp, _ in means.values()]
        mrs = [mr for _, mr in means.values()]
        arp = sum(mps) / len(mps)
        arr = sum(mrs) / len(mrs)
        rows.append(MetricsRow(n, arp, arr, f_score(arp, arr), _anmrr_from_rankings(rankings, n)))
    return rows


def evaluate_store(
    store: FeatureStore,
    measure: str = "chisq",
    n: int = 5,
    exclude_query: bool = False,
    config: dict[str, str] | None = None,
) -> MetricsReport:
    """Full metric report at a single cutoff n."""
    _check_n(store, n, exclude_query)
    rankings = _all_rankings(store, measure, exclude_query)
    rows = _rows_from_rankings(rankings, [n])
    return MetricsReport(
        rows=rows,
        per_category=_category_means_from_rankings(rankings, n),
        config=dict(config or {}),
    )


def sweep_store(
    store: FeatureStore,
    measure: str = "chisq",
    n_max: int = 10,
    exclude_query: bool = False,
    config: dict[str, str] | None = None,
) -> MetricsReport:
    """Metric rows for every n in [1, n_max], rankings computed once."""
    _check_n(store, n_max, exclude_query)
    rankings = _all_rankings(store, measure, exclude_query)
    rows = _rows_from_rankings(rankings, range(1, n_max + 1))
    return MetricsReport(
        rows=rows,
        per_category=_category_means_from_rankings(rankings, n_max),
        config=dict(config or {}),
    )
