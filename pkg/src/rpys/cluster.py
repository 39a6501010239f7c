"""Clustering and merging of equivalent cited-reference variants.

Variants of the same work ("Kohn W, 1965, PHYS REV, V140, P1133" vs.
"Kohn W, 1965, Phys Rev, V140, P1I33") are linked when their normalized
keys are close in normalized edit distance and the enabled field
constraints hold. Clusters are the connected components of that link
relation.
"""
from __future__ import annotations

from bisect import bisect_right
from collections import Counter, defaultdict
from dataclasses import dataclass
from typing import Iterable, Optional, Sequence

import numpy as np
from joblib import Parallel, delayed
from sklearn.base import BaseEstimator, ClusterMixin

from ._validation import check_threshold, check_occurrences
from .model import AggregatedCR, CitedRef, Corpus
from .wos import normalize_cr

__all__ = [
    "ClusterConfig",
    "CRClusterer",
    "Variant",
    "cluster",
    "collect_variants",
    "cr_similarity",
    "edit_distance",
    "key_similarity",
    "merge",
    "remove_cr",
    "variant_id",
]

VariantId = tuple[str, Optional[str]]


@dataclass(frozen=True)
class ClusterConfig:
    threshold: float = 0.75
    require_volume_match: bool = True
    require_page_match: bool = True
    require_doi_match: bool = False
    cross_rpy: bool = False

    def __post_init__(self):
        check_threshold(self.threshold)


def edit_distance(a: str, b: str) -> int:
    """Levenshtein distance, bit-parallel over the shorter string."""
    if len(a) > len(b):
        a, b = b, a
    if not a:
        return len(b)
    return _bitparallel(_pattern_masks(a), len(a), b)


def _pattern_masks(pattern: str) -> dict[str, int]:
    masks: dict[str, int] = {}
    for i, ch in enumerate(pattern):
        masks[ch] = masks.get(ch, 0) | (1 << i)
    return masks


def _bitparallel(masks: dict[str, int], m: int, text: str, limit: Optional[int] = None) -> int:
    # Myers/Hyyro column recurrence; every intermediate is truncated to m bits.
    # With ``limit``, any value above it may be returned as soon as the
    # remaining text can no longer bring the score back down to the limit.
    full = (1 << m) - 1
    top = 1 << (m - 1)
    pv, mv, score = full, 0, m
    slack = (limit if limit is not None else m + len(text)) + len(text)
    for ch in text:
        if score > slack:
            return score - slack + limit
        slack -= 1
        eq = masks.get(ch, 0)
        xv = eq | mv
        xh = (((eq & pv) + pv) ^ pv) | eq
        ph = mv | (~(xh | pv) & full)
        mh = pv & xh
        if ph & top:
            score += 1
        elif mh & top:
            score -= 1
        ph = ((ph << 1) | 1) & full
        mh = (mh << 1) & full
        pv = mh | (~(xv | ph) & full)
        mv = ph & xv
    return score


def similarity_from_distance(distance: int, len_a: int, len_b: int) -> float:
    longest = max(len_a, len_b)
    if longest == 0:
        return 1.0
    return 1.0 - distance / longest


def key_similarity(key_a: str, key_b: str) -> float:
    """``1 - editDistance / max(len)``; two empty keys are identical (1.0)."""
    return similarity_from_distance(edit_distance(key_a, key_b), len(key_a), len(key_b))


def cr_similarity(a: CitedRef, b: CitedRef) -> float:
    return key_similarity(normalize_cr(a), normalize_cr(b))


def _max_distance(longest: int, threshold: float) -> int:
    """Largest edit distance whose similarity still reaches ``threshold``."""
    if longest == 0:
        return 0
    k = int((1.0 - threshold) * longest)
    while k >= 0 and similarity_from_distance(k, longest, longest) < threshold:
        k -= 1
    while k + 1 <= longest and similarity_from_distance(k + 1, longest, longest) >= threshold:
        k += 1
    return k


def variant_id(cr: CitedRef) -> VariantId:
    return normalize_cr(cr), cr.doi


@dataclass(frozen=True)
class Variant:
    """A distinct cited-reference variant and its occurrence count."""

    key: str
    doi: Optional[str]
    rpy: Optional[int]
    volume: str
    page: str
    count: int
    ref: CitedRef

    @property
    def id(self) -> VariantId:
        return self.key, self.doi


def collect_variants(occurrences: Iterable[CitedRef]) -> list[Variant]:
    """Group occurrences by variant id, in order of first appearance.

    The representative ``ref`` of a variant is its most frequent raw
    spelling (ties: lexicographically smallest), so the choice does not
    depend on input order.
    """
    raws: dict[VariantId, Counter] = {}
    refs: dict[tuple[VariantId, str], CitedRef] = {}
    ids: dict[CitedRef, VariantId] = {}
    for cr in occurrences:
        vid = ids.get(cr)
        if vid is None:
            vid = ids[cr] = variant_id(cr)
        raws.setdefault(vid, Counter())[cr.raw] += 1
        refs.setdefault((vid, cr.raw), cr)

    variants = []
    for vid, counter in raws.items():
        raw = min(counter, key=lambda r: (-counter[r], r))
        ref = refs[(vid, raw)]
        key = vid[0]
        _, _, _, volume, page = key.split("|")
        variants.append(Variant(key, vid[1], ref.rpy, volume, page, sum(counter.values()), ref))
    return variants


def _block_key(v: Variant, config: ClusterConfig) -> tuple:
    return (
        None if config.cross_rpy else ("rpy", v.rpy),
        v.volume if config.require_volume_match else None,
        v.page if config.require_page_match else None,
        v.doi if config.require_doi_match else None,
    )


class _UnionFind:
    def __init__(self, n: int):
        self.parent = list(range(n))

    def find(self, i: int) -> int:
        parent = self.parent
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    def union(self, i: int, j: int) -> bool:
        ri, rj = self.find(i), self.find(j)
        if ri == rj:
            return False
        if ri > rj:
            ri, rj = rj, ri
        self.parent[rj] = ri
        return True


def _histograms(keys: Sequence[str]) -> np.ndarray:
    alphabet = {ch: i for i, ch in enumerate(sorted(set("".join(keys))))}
    hist = np.zeros((len(keys), max(len(alphabet), 1)), dtype=np.int32)
    for row, key in enumerate(keys):
        for ch, count in Counter(key).items():
            hist[row, alphabet[ch]] = count
    return hist


def _block_links(keys: Sequence[str], threshold: float) -> list[tuple[int, int]]:
    """Spanning links for one block; indices are local to ``keys``.

    Pairs already connected are skipped, so the result is a spanning
    forest of the link graph rather than every linked pair.
    """
    n = len(keys)
    if n < 2:
        return []
    order = sorted(range(n), key=lambda i: (len(keys[i]), keys[i]))
    lengths = [len(keys[i]) for i in order]
    budgets = {length: _max_distance(length, threshold) for length in set(lengths)}
    widest = budgets[lengths[-1]]
    # one edit changes the character histogram by at most 2 in L1
    hist = _histograms([keys[i] for i in order])
    masks = [None] * n
    uf = _UnionFind(n)
    links = []
    for a in range(n - 1):
        ka, la = keys[order[a]], lengths[a]
        # lengths only grow, so no partner lies beyond this point
        end = bisect_right(lengths, la + widest, lo=a + 1)
        if end == a + 1:
            continue
        floor = ((np.abs(hist[a + 1 : end] - hist[a]).sum(axis=1) + 1) // 2).tolist()
        for b in range(a + 1, end):
            lb = lengths[b]
            budget = budgets[lb]
            if lb - la > budget or floor[b - a - 1] > budget:
                continue
            if uf.find(a) == uf.find(b):
                continue
            kb = keys[order[b]]
            if ka == kb:
                d = 0
            elif la == 0:
                d = lb
            else:
                if masks[a] is None:
                    masks[a] = _pattern_masks(ka)
                d = _bitparallel(masks[a], la, kb, budget)
            if d <= budget and similarity_from_distance(d, la, lb) >= threshold:
                uf.union(a, b)
                links.append((order[a], order[b]))
    return links


def cluster(
    occurrences: Iterable[CitedRef],
    config: Optional[ClusterConfig] = None,
    n_jobs: Optional[int] = None,
) -> list[frozenset[VariantId]]:
    """Partition the distinct variants of ``occurrences`` into clusters.

    Two variants are linked iff they share an RPY (unless
    ``config.cross_rpy``), agree on every enabled field constraint
    (both absent counts as agreement) and have ``cr_similarity`` at or
    above ``config.threshold``. Clusters are the connected components of
    the links, ordered by the first appearance of any member.
    """
    config = config or ClusterConfig()
    variants = collect_variants(occurrences)
    return _cluster_variants(variants, config, n_jobs)


def _cluster_variants(variants: list[Variant], config: ClusterConfig, n_jobs: Optional[int]):
    blocks: dict[tuple, list[int]] = defaultdict(list)
    for i, v in enumerate(variants):
        blocks[_block_key(v, config)].append(i)
    members = [idx for idx in blocks.values() if len(idx) > 1]

    def keys_of(idx):
        return [variants[i].key for i in idx]

    if n_jobs not in (None, 1) and len(members) > 1:
        results = Parallel(n_jobs=n_jobs)(delayed(_block_links)(keys_of(idx), config.threshold) for idx in members)
    else:
        results = [_block_links(keys_of(idx), config.threshold) for idx in members]

    uf = _UnionFind(len(variants))
    for idx, links in zip(members, results):
        for a, b in links:
            uf.union(idx[a], idx[b])

    groups: dict[int, list[VariantId]] = {}
    for i, v in enumerate(variants):
        groups.setdefault(uf.find(i), []).append(v.id)
    return [frozenset(g) for g in groups.values()]


def merge(clusters: Sequence[Iterable[VariantId]], occurrences: Iterable[CitedRef]) -> list[AggregatedCR]:
    """Turn clusters into :class:`AggregatedCR` objects.

    ``ncr`` is the number of occurrences of all members; the canonical
    variant is the most frequent member, ties going to the smallest key.
    """
    variants = {v.id: v for v in collect_variants(occurrences)}
    aggregates = []
    for cluster_id, members in enumerate(clusters):
        members = [variants[vid] for vid in members if vid in variants]
        if not members:
            continue
        members.sort(key=lambda v: (-v.count, v.key, v.doi or ""))
        aggregates.append(
            AggregatedCR(
                canonical=members[0].ref,
                ncr=sum(v.count for v in members),
                variants=tuple((v.ref, v.count) for v in members),
                cluster_id=cluster_id,
            )
        )
    return aggregates


def remove_cr(aggregates: Sequence[AggregatedCR], bounds: tuple[int, int]) -> list[AggregatedCR]:
    """Drop every aggregate whose ``ncr`` lies in the inclusive ``bounds``."""
    lo, hi = bounds
    if lo > hi:
        raise ValueError(f"invalid N_CR bounds [{lo}, {hi}]")
    return [agg for agg in aggregates if not lo <= agg.ncr <= hi]


class CRClusterer(ClusterMixin, BaseEstimator):
    """Estimator wrapper around :func:`cluster` and :func:`merge`.

    ``fit`` takes an iterable of :class:`CitedRef` occurrences (or a
    :class:`Corpus`) and sets ``labels_`` (cluster index per occurrence),
    ``clusters_`` and ``aggregates_``.

    >>> from rpys.wos import parse_cr_line
    >>> crs = [parse_cr_line(s) for s in ("Kohn W, 1965, PHYS REV, V140, P1133",
    ...                                    "Kohn W, 1965, PHYS REV, V140, P1133",
    ...                                    "Kohn W, 1965, PHYS REW, V140, P1133")]
    >>> CRClusterer().fit_predict(crs).tolist()
    [0, 0, 0]
    """

    def __init__(
        self,
        threshold=0.75,
        match_volume=True,
        match_page=True,
        match_doi=False,
        cross_rpy=False,
        n_jobs=None,
    ):
        self.threshold = threshold
        self.match_volume = match_volume
        self.match_page = match_page
        self.match_doi = match_doi
        self.cross_rpy = cross_rpy
        self.n_jobs = n_jobs

    def config(self) -> ClusterConfig:
        return ClusterConfig(
            threshold=self.threshold,
            require_volume_match=self.match_volume,
            require_page_match=self.match_page,
            require_doi_match=self.match_doi,
            cross_rpy=self.cross_rpy,
        )

    def fit(self, X, y=None):
        occurrences = X.occurrences() if isinstance(X, Corpus) else check_occurrences(X)
        config = self.config()
        variants = collect_variants(occurrences)
        self.clusters_ = _cluster_variants(variants, config, self.n_jobs)
        index = {vid: c for c, members in enumerate(self.clusters_) for vid in members}
        self.labels_ = np.array([index[variant_id(cr)] for cr in occurrences], dtype=int)
        self.aggregates_ = merge(self.clusters_, occurrences)
        self.n_occurrences_ = len(occurrences)
        return self
