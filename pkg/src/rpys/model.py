"""Domain types shared across the package.

Everything here is a frozen dataclass: records, cited references and
aggregates are built once by a parser or the merge step and never mutated.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

YEAR_MIN = 1500
YEAR_MAX = 2100


class RPYSError(Exception):
    """Base class for all errors raised by this package."""


def valid_year(year: Optional[int]) -> Optional[int]:
    """Return ``year`` if it lies in the accepted window, else None.

    Years outside [1500, 2100] are almost always OCR damage, so they are
    treated as missing rather than rejected.
    """
    if year is None or not YEAR_MIN <= year <= YEAR_MAX:
        return None
    return year


@dataclass(frozen=True)
class CitedRef:
    """One cited-reference occurrence as it appeared in a bibliography."""

    raw: str
    first_author: Optional[str] = None
    rpy: Optional[int] = None
    source: Optional[str] = None
    volume: Optional[str] = None
    page: Optional[str] = None
    doi: Optional[str] = None

    def __post_init__(self):
        if not self.raw or not self.raw.strip():
            raise ValueError("CitedRef.raw must be non-empty")
        if self.rpy is not None and valid_year(self.rpy) is None:
            raise ValueError(f"rpy {self.rpy} outside [{YEAR_MIN}, {YEAR_MAX}]")
        if self.doi is not None:
            if self.doi != self.doi.strip() or self.doi.upper().startswith("DOI "):
                raise ValueError(f"doi not normalized: {self.doi!r}")


@dataclass(frozen=True)
class Record:
    """A citing publication together with its cited references."""

    id: str
    py: Optional[int] = None
    cited_refs: tuple[CitedRef, ...] = ()
    title: Optional[str] = None
    source: Optional[str] = None

    def __post_init__(self):
        if self.py is not None and valid_year(self.py) is None:
            raise ValueError(f"py {self.py} outside [{YEAR_MIN}, {YEAR_MAX}]")
        if not isinstance(self.cited_refs, tuple):
            object.__setattr__(self, "cited_refs", tuple(self.cited_refs))


@dataclass(frozen=True)
class YearRange:
    """Inclusive year window ``[lo, hi]``.

    ``include_missing`` decides whether items without a year pass the
    filter; it is the third element of ``[lo, hi, flag]`` script triples.
    """

    lo: int
    hi: int
    include_missing: bool = False

    def __post_init__(self):
        if self.lo > self.hi:
            raise ValueError(f"empty year range [{self.lo}, {self.hi}]")

    def __contains__(self, year: Optional[int]) -> bool:
        if year is None:
            return self.include_missing
        return self.lo <= year <= self.hi

    @property
    def years(self) -> range:
        return range(self.lo, self.hi + 1)

    @classmethod
    def coerce(cls, value) -> "YearRange":
        """Build a range from a YearRange, ``(lo, hi)`` or ``(lo, hi, flag)``."""
        if isinstance(value, cls):
            return value
        if isinstance(value, (tuple, list)) and len(value) in (2, 3):
            return cls(int(value[0]), int(value[1]), bool(value[2]) if len(value) == 3 else False)
        raise TypeError(f"cannot interpret {value!r} as a year range")


@dataclass(frozen=True)
class AggregatedCR:
    """A cited work after equivalent variants have been merged.

    ``variants`` holds ``(CitedRef, count)`` pairs, one per distinct
    variant; ``canonical`` is the variant used for display.
    """

    canonical: CitedRef
    ncr: int
    variants: tuple[tuple[CitedRef, int], ...]
    cluster_id: int = 0

    def __post_init__(self):
        if not self.variants:
            raise ValueError("AggregatedCR needs at least one variant")
        if self.ncr <= 0:
            raise ValueError("ncr must be positive")
        if self.ncr != sum(count for _, count in self.variants):
            raise ValueError("ncr must equal the sum of variant counts")
        if all(cr != self.canonical for cr, _ in self.variants):
            raise ValueError("canonical variant must be a member of variants")

    @property
    def rpy(self) -> Optional[int]:
        return self.canonical.rpy

    @property
    def display(self) -> str:
        return self.canonical.raw

    @property
    def n_variants(self) -> int:
        return len(self.variants)


@dataclass(frozen=True)
class Corpus:
    """An ordered collection of records with unique ids."""

    records: tuple[Record, ...] = ()
    provenance: str = ""

    def __post_init__(self):
        if not isinstance(self.records, tuple):
            object.__setattr__(self, "records", tuple(self.records))
        seen = set()
        for record in self.records:
            if record.id in seen:
                raise ValueError(f"duplicate record id {record.id!r}")
            seen.add(record.id)

    def __len__(self) -> int:
        return len(self.records)

    def __iter__(self):
        return iter(self.records)

    def occurrences(self) -> list[CitedRef]:
        """All cited-reference occurrences, record by record in file order."""
        return [cr for record in self.records for cr in record.cited_refs]


@dataclass(frozen=True)
class CorpusStats:
    n_records: int
    n_cr_occurrences: int
    rpy_min: Optional[int] = None
    rpy_max: Optional[int] = None


def corpus_stats(corpus: Corpus) -> CorpusStats:
    years = [cr.rpy for cr in corpus.occurrences() if cr.rpy is not None]
    return CorpusStats(
        n_records=len(corpus.records),
        n_cr_occurrences=sum(len(r.cited_refs) for r in corpus.records),
        rpy_min=min(years) if years else None,
        rpy_max=max(years) if years else None,
    )


__all__ = [
    "AggregatedCR",
    "CitedRef",
    "Corpus",
    "CorpusStats",
    "RPYSError",
    "Record",
    "YearRange",
    "corpus_stats",
    "valid_year",
]
