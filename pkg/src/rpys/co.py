"""Co-citation RPYS: analyse the records that cite one or more marker papers."""
from __future__ import annotations

import re
import warnings
from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence

from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_is_fitted

from ._validation import check_bounds, check_window
from .cluster import ClusterConfig, cluster, merge, remove_cr
from .model import AggregatedCR, CitedRef, Corpus, Record, YearRange
from .spectroscopy import Spectrogram, TableRow, compute_spectrogram, ranking_key, top_crs
from .wos import normalize_text

__all__ = [
    "MarkerQuery",
    "MarkerSuggestion",
    "NoMatchesWarning",
    "RPYS",
    "RPYSCO",
    "RpysCoResult",
    "match_cr",
    "match_marker",
    "peak_table",
    "run_rpys",
    "run_rpys_co",
    "select_citing",
    "suggest_markers",
]

_YEAR = re.compile(r"^\d{4}$")
_VOLUME = re.compile(r"^V(\w+)$", re.IGNORECASE)
_PAGE = re.compile(r"^P(\w+)$", re.IGNORECASE)
_DOI = re.compile(r"^DOI\s+(.+)$", re.IGNORECASE)


class NoMatchesWarning(UserWarning):
    """No record in the corpus cites any of the markers."""


@dataclass(frozen=True)
class MarkerQuery:
    """Bibliographic description of a marker paper.

    In ``strict`` mode every field that is set must match a cited
    reference (author as a normalized prefix); ``doi_only`` compares the
    DOI alone, case-insensitively.
    """

    first_author: Optional[str] = None
    rpy: Optional[int] = None
    volume: Optional[str] = None
    page: Optional[str] = None
    doi: Optional[str] = None
    match_mode: str = "strict"

    def __post_init__(self):
        if self.match_mode not in ("strict", "doi_only"):
            raise ValueError(f"unknown match_mode {self.match_mode!r}")
        if self.doi is not None:
            object.__setattr__(self, "doi", self.doi.strip().lower())
        if self.match_mode == "doi_only" and not self.doi:
            raise ValueError("doi_only markers need a DOI")
        if not ((self.first_author and self.rpy is not None) or self.doi):
            raise ValueError("a marker needs first author and year, or a DOI")

    @classmethod
    def parse(cls, text: str) -> "MarkerQuery":
        """Parse ``"Becke AD,1988,V38,P3098"`` (comma separated, any order after the author)."""
        author = rpy = volume = page = doi = None
        for token in (t.strip() for t in text.split(",")):
            if not token:
                continue
            if rpy is None and _YEAR.match(token):
                rpy = int(token)
            elif doi is None and (m := _DOI.match(token)):
                doi = m.group(1)
            elif volume is None and author is not None and (m := _VOLUME.match(token)):
                volume = m.group(1)
            elif page is None and author is not None and (m := _PAGE.match(token)):
                page = m.group(1)
            elif author is None:
                author = token
            else:
                raise ValueError(f"cannot interpret marker token {token!r} in {text!r}")
        return cls(first_author=author, rpy=rpy, volume=volume, page=page, doi=doi)

    @classmethod
    def from_doi(cls, doi: str) -> "MarkerQuery":
        return cls(doi=doi, match_mode="doi_only")

    def describe(self) -> str:
        if self.match_mode == "doi_only":
            return f"DOI {self.doi}"
        parts = [p for p in (self.first_author, self.rpy) if p is not None]
        parts += [f"V{self.volume}"] if self.volume else []
        parts += [f"P{self.page}"] if self.page else []
        parts += [f"DOI {self.doi}"] if self.doi else []
        return ", ".join(str(p) for p in parts)


def match_cr(cr: CitedRef, marker: MarkerQuery) -> bool:
    if marker.match_mode == "doi_only":
        return cr.doi is not None and cr.doi.lower() == marker.doi
    if marker.first_author is not None:
        if not normalize_text(cr.first_author).startswith(normalize_text(marker.first_author)):
            return False
    if marker.rpy is not None and cr.rpy != marker.rpy:
        return False
    if marker.volume is not None and normalize_text(cr.volume) != normalize_text(marker.volume):
        return False
    if marker.page is not None and normalize_text(cr.page) != normalize_text(marker.page):
        return False
    if marker.doi is not None and (cr.doi or "").lower() != marker.doi:
        return False
    return True


def match_marker(record: Record, marker: MarkerQuery) -> bool:
    """True iff any cited reference of ``record`` matches ``marker``."""
    return any(match_cr(cr, marker) for cr in record.cited_refs)


def select_citing(corpus: Corpus, markers: Sequence[MarkerQuery]) -> Corpus:
    """Records citing at least one marker, in corpus order.

    Emits :class:`NoMatchesWarning` and returns an empty corpus when
    nothing matches.
    """
    markers = list(markers)
    if not markers:
        raise ValueError("at least one marker is required")
    selected = tuple(r for r in corpus.records if any(match_marker(r, m) for m in markers))
    if not selected:
        warnings.warn(
            f"no record cites any of: {'; '.join(m.describe() for m in markers)}",
            NoMatchesWarning,
            stacklevel=2,
        )
    note = " | ".join(m.describe() for m in markers)
    return Corpus(selected, provenance=f"{corpus.provenance} [citing: {note}]")


@dataclass(frozen=True)
class RpysCoResult:
    markers: tuple[MarkerQuery, ...]
    n_citing: int
    spectrogram: Spectrogram
    aggregates: tuple[AggregatedCR, ...]
    peak_table: tuple[TableRow, ...]
    top_table: tuple[TableRow, ...]
    settings: dict = field(default_factory=dict, compare=False)

    @property
    def marker(self) -> Optional[MarkerQuery]:
        return self.markers[0] if self.markers else None


def peak_table(aggregates: Iterable[AggregatedCR], peaks: Iterable[int], per_year: int = 3) -> list[TableRow]:
    """Most cited aggregates under each peak year, in year order."""
    aggregates = list(aggregates)
    chosen = []
    for year in sorted(peaks):
        chosen.extend(row.aggregate for row in top_crs(aggregates, per_year, within_year=year))
    return [TableRow(i, a.rpy, a.display, a.ncr, a) for i, a in enumerate(chosen, start=1)]


def run_rpys(
    corpus: Corpus,
    rpy_range=(1950, 1990),
    cluster_config: Optional[ClusterConfig] = None,
    remove_range: Optional[tuple[int, int]] = None,
    window: int = 5,
    n_top: int = 10,
    peak_papers: int = 3,
    markers: Sequence[MarkerQuery] = (),
    n_jobs: Optional[int] = None,
) -> RpysCoResult:
    """Plain RPYS over every record of ``corpus``.

    Cluster, merge, optionally drop aggregates whose NCR lies in
    ``remove_range``, then build the spectrogram and the CR tables.
    """
    rpy_range = YearRange.coerce(rpy_range)
    cluster_config = cluster_config or ClusterConfig()
    window = check_window(window)
    occurrences = corpus.occurrences()
    aggregates = merge(cluster(occurrences, cluster_config, n_jobs=n_jobs), occurrences)
    if remove_range is not None:
        aggregates = remove_cr(aggregates, check_bounds(remove_range))
    aggregates.sort(key=ranking_key)
    spectrogram = compute_spectrogram(aggregates, rpy_range, window)
    settings = {
        "rpy_range": [rpy_range.lo, rpy_range.hi, rpy_range.include_missing],
        "cluster": {
            "threshold": cluster_config.threshold,
            "volume": cluster_config.require_volume_match,
            "page": cluster_config.require_page_match,
            "DOI": cluster_config.require_doi_match,
            "cross_rpy": cluster_config.cross_rpy,
        },
        "remove_range": list(remove_range) if remove_range is not None else None,
        "window": window,
        "n_top": n_top,
        "peak_papers": peak_papers,
    }
    return RpysCoResult(
        markers=tuple(markers),
        n_citing=len(corpus),
        spectrogram=spectrogram,
        aggregates=tuple(aggregates),
        peak_table=tuple(peak_table(aggregates, spectrogram.peaks, peak_papers)),
        top_table=tuple(top_crs(aggregates, n_top)),
        settings=settings,
    )


def run_rpys_co(corpus: Corpus, markers: Sequence[MarkerQuery], **kwargs) -> RpysCoResult:
    """RPYS over the records citing at least one of ``markers``.

    Keyword arguments are those of :func:`run_rpys`.
    """
    markers = tuple(markers)
    citing = select_citing(corpus, markers)
    return run_rpys(citing, markers=markers, **kwargs)


@dataclass(frozen=True)
class MarkerSuggestion:
    rank: int
    rpy: Optional[int]
    cr: str
    ncr: int
    ratio: float
    comparable_to_marker: bool
    is_marker: bool
    aggregate: AggregatedCR


def suggest_markers(result: RpysCoResult, n: int = 10, tolerance: float = 0.25) -> list[MarkerSuggestion]:
    """Candidate next markers: the ``n`` most cited CRs of ``result``.

    ``ratio`` is NCR over the number of citing records; a candidate is
    ``comparable_to_marker`` when its NCR lies within ``tolerance`` of
    that number, the sign of a poorly chosen starting marker. CRs that
    match a current marker are flagged ``is_marker``.
    """
    if result.n_citing == 0 or not result.aggregates:
        return []
    suggestions = []
    for row in top_crs(result.aggregates, n):
        agg = row.aggregate
        is_marker = any(match_cr(cr, m) for cr, _ in agg.variants for m in result.markers)
        suggestions.append(
            MarkerSuggestion(
                rank=row.rank,
                rpy=row.rpy,
                cr=row.cr,
                ncr=row.ncr,
                ratio=row.ncr / result.n_citing,
                comparable_to_marker=abs(row.ncr - result.n_citing) <= tolerance * result.n_citing,
                is_marker=is_marker,
                aggregate=agg,
            )
        )
    return suggestions


class RPYS(BaseEstimator):
    """Reference publication year spectroscopy as an estimator.

    ``fit`` takes a :class:`Corpus` (or a sequence of records) and sets
    ``result_`` plus the shortcuts ``aggregates_``, ``spectrogram_``,
    ``peaks_``, ``top_table_`` and ``peak_table_``.

    Parameters
    ----------
    rpy_range : (lo, hi) or (lo, hi, include_missing)
        Year axis of the spectrogram.
    threshold, match_volume, match_page, match_doi, cross_rpy
        Variant clustering settings, see :class:`~rpys.cluster.ClusterConfig`.
    remove_range : (lo, hi) or None
        Aggregates whose NCR falls in this inclusive range are dropped.
    window : int
        Median window in years (odd).
    """

    def __init__(
        self,
        rpy_range=(1950, 1990),
        threshold=0.75,
        match_volume=True,
        match_page=True,
        match_doi=False,
        cross_rpy=False,
        remove_range=None,
        window=5,
        n_top=10,
        peak_papers=3,
        n_jobs=None,
    ):
        self.rpy_range = rpy_range
        self.threshold = threshold
        self.match_volume = match_volume
        self.match_page = match_page
        self.match_doi = match_doi
        self.cross_rpy = cross_rpy
        self.remove_range = remove_range
        self.window = window
        self.n_top = n_top
        self.peak_papers = peak_papers
        self.n_jobs = n_jobs

    def _run_kwargs(self) -> dict:
        return dict(
            rpy_range=self.rpy_range,
            cluster_config=ClusterConfig(
                threshold=self.threshold,
                require_volume_match=self.match_volume,
                require_page_match=self.match_page,
                require_doi_match=self.match_doi,
                cross_rpy=self.cross_rpy,
            ),
            remove_range=self.remove_range,
            window=self.window,
            n_top=self.n_top,
            peak_papers=self.peak_papers,
            n_jobs=self.n_jobs,
        )

    def _set_result(self, result: RpysCoResult):
        self.result_ = result
        self.aggregates_ = list(result.aggregates)
        self.spectrogram_ = result.spectrogram
        self.peaks_ = list(result.spectrogram.peaks)
        self.top_table_ = list(result.top_table)
        self.peak_table_ = list(result.peak_table)
        self.n_citing_ = result.n_citing
        return self

    def fit(self, X, y=None):
        corpus = X if isinstance(X, Corpus) else Corpus(tuple(X))
        return self._set_result(run_rpys(corpus, **self._run_kwargs()))


class RPYSCO(RPYS):
    """RPYS restricted to the records citing any of ``markers``."""

    def __init__(
        self,
        markers=(),
        rpy_range=(1950, 1990),
        threshold=0.75,
        match_volume=True,
        match_page=True,
        match_doi=False,
        cross_rpy=False,
        remove_range=None,
        window=5,
        n_top=10,
        peak_papers=3,
        n_jobs=None,
    ):
        super().__init__(
            rpy_range=rpy_range,
            threshold=threshold,
            match_volume=match_volume,
            match_page=match_page,
            match_doi=match_doi,
            cross_rpy=cross_rpy,
            remove_range=remove_range,
            window=window,
            n_top=n_top,
            peak_papers=peak_papers,
            n_jobs=n_jobs,
        )
        self.markers = markers

    def fit(self, X, y=None):
        corpus = X if isinstance(X, Corpus) else Corpus(tuple(X))
        markers = [m if isinstance(m, MarkerQuery) else MarkerQuery.parse(m) for m in self.markers]
        return self._set_result(run_rpys_co(corpus, markers, **self._run_kwargs()))

    def suggest_markers(self, n: int = 10, tolerance: float = 0.25) -> list[MarkerSuggestion]:
        check_is_fitted(self, "result_")
        return suggest_markers(self.result_, n, tolerance)

