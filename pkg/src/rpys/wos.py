"""Readers for tagged-field (Web of Science plain text) and CSV exports.

A tagged-field file looks like::

    FN Clarivate Analytics Web of Science
    VR 1.0
    PT J
    AU Becke, AD
    PY 1988
    CR Slater JC, 1951, PHYS REV, V81, P385
       Kohn W, 1965, PHYS REV, V140, P1133
    ER

    EF

Each CR line is parsed into a :class:`~rpys.model.CitedRef`.
"""
from __future__ import annotations

import csv
import io
import re
from dataclasses import dataclass, field
from typing import Iterable, Optional, TextIO, Union

from .model import CitedRef, Corpus, Record, RPYSError, YearRange, valid_year

__all__ = [
    "EmptyLine",
    "ImportConfig",
    "MalformedFile",
    "format_cr",
    "normalize_cr",
    "normalize_text",
    "parse_corpus",
    "parse_cr_line",
    "parse_csv_corpus",
    "read_corpus",
]

_YEAR = re.compile(r"^\d{4}$")
_VOLUME = re.compile(r"^[Vv](\d+)$")
# a page token needs a digit so one-word sources ("Physica") stay sources
_PAGE = re.compile(r"^[Pp]((?=[0-9A-Za-z]*\d)[0-9A-Za-z]+)$")
_DOI = re.compile(r"^DOI\s+(.+)$", re.IGNORECASE)
_PUNCT = re.compile(r"[^\w\s]|_")
_SPACES = re.compile(r"\s+")

# Header tags allowed before the first PT.
_FILE_HEADER_TAGS = {"FN", "VR"}


class MalformedFile(RPYSError):
    """Raised when a tagged-field file breaks the PT ... ER ... EF framing."""

    def __init__(self, message: str, line: Optional[int] = None):
        self.line = line
        super().__init__(f"line {line}: {message}" if line is not None else message)


class EmptyLine(RPYSError, ValueError):
    """Raised by :func:`parse_cr_line` for whitespace-only input."""


@dataclass(frozen=True)
class ImportConfig:
    rpy_range: YearRange = field(default_factory=lambda: YearRange(1500, 2100, True))
    py_range: YearRange = field(default_factory=lambda: YearRange(1500, 2100, True))
    max_cr_per_record: int = 0

    def __post_init__(self):
        object.__setattr__(self, "rpy_range", YearRange.coerce(self.rpy_range))
        object.__setattr__(self, "py_range", YearRange.coerce(self.py_range))
        if self.max_cr_per_record < 0:
            raise ValueError("max_cr_per_record must be >= 0")


def normalize_text(text: Optional[str]) -> str:
    """Uppercase, drop punctuation and collapse runs of whitespace."""
    if not text:
        return ""
    return _SPACES.sub(" ", _PUNCT.sub("", text.upper())).strip()


def _clean_doi(text: str) -> Optional[str]:
    text = text.strip().strip("[]").split(",")[0].strip()
    # doubled prefixes ("DOI DOI 10...") show up in some exports
    if (m := _DOI.match(text)) is not None:
        return _clean_doi(m.group(1))
    return text.lower() or None


def parse_cr_line(line: str) -> CitedRef:
    """Parse one comma-separated cited-reference string.

    >>> cr = parse_cr_line("Becke AD, 1988, Physical Review A, V38, P3098")
    >>> cr.first_author, cr.rpy, cr.source, cr.volume, cr.page
    ('BECKE AD', 1988, 'PHYSICAL REVIEW A', '38', '3098')
    """
    if not line or not line.strip():
        raise EmptyLine("cited reference line is empty")
    # stray trailing periods are OCR/export noise; raw keeps them
    tokens = [t.strip().rstrip(".").strip() for t in line.strip().split(", ")]

    year_at = None
    for i, tok in enumerate(tokens):
        if _YEAR.match(tok):
            year_at = i
            break

    first_author = None
    if year_at != 0:
        first_author = normalize_text(tokens[0]) or None
    rpy = valid_year(int(tokens[year_at])) if year_at is not None else None

    source = volume = page = doi = None
    rest_from = 1
    if year_at is not None:
        rest_from = year_at + 1
        if rest_from < len(tokens):
            cand = tokens[rest_from]
            if not (_VOLUME.match(cand) or _PAGE.match(cand) or _DOI.match(cand)):
                source = _SPACES.sub(" ", cand.upper()).strip() or None
                rest_from += 1

    for tok in tokens[rest_from:]:
        if volume is None and (m := _VOLUME.match(tok)):
            volume = m.group(1)
        elif page is None and (m := _PAGE.match(tok)):
            page = m.group(1).upper()
        elif doi is None and (m := _DOI.match(tok)):
            doi = _clean_doi(m.group(1))

    return CitedRef(
        raw=line.rstrip("\r\n"),
        first_author=first_author,
        rpy=rpy,
        source=source,
        volume=volume,
        page=page,
        doi=doi,
    )


def normalize_cr(cr: CitedRef) -> str:
    """Canonical matching key ``AUTHOR|RPY|SOURCE|V|P``.

    Absent fields contribute an empty segment, so the key always has
    five segments.
    """
    return "|".join(
        (
            normalize_text(cr.first_author),
            str(cr.rpy) if cr.rpy is not None else "",
            normalize_text(cr.source),
            normalize_text(cr.volume),
            normalize_text(cr.page),
        )
    )


def format_cr(cr: CitedRef) -> str:
    """Render the structured fields back to a CR line (``raw`` is ignored)."""
    parts = []
    if cr.first_author:
        parts.append(cr.first_author)
    if cr.rpy is not None:
        parts.append(str(cr.rpy))
        if cr.source:
            parts.append(cr.source)
    if cr.volume:
        parts.append(f"V{cr.volume}")
    if cr.page:
        parts.append(f"P{cr.page}")
    if cr.doi:
        parts.append(f"DOI {cr.doi}")
    return ", ".join(parts)


def _select_crs(crs: list[CitedRef], config: ImportConfig) -> tuple[CitedRef, ...]:
    if config.max_cr_per_record:
        crs = crs[: config.max_cr_per_record]
    return tuple(cr for cr in crs if cr.rpy in config.rpy_range)


def _parse_py(text: str) -> Optional[int]:
    text = text.strip()
    return valid_year(int(text)) if _YEAR.match(text) else None


class _RecordBuilder:
    def __init__(self, start_line: int):
        self.start_line = start_line
        self.fields: dict[str, list[str]] = {}

    def add(self, tag: str, value: str):
        self.fields.setdefault(tag, []).append(value)

    def first(self, tag: str) -> Optional[str]:
        values = self.fields.get(tag)
        return values[0].strip() if values else None


def _iter_lines(stream: Union[TextIO, Iterable[str]]):
    for number, line in enumerate(stream, start=1):
        line = line.rstrip("\r\n")
        if number == 1:
            line = line.lstrip("﻿")
        yield number, line


def parse_corpus(stream: Union[TextIO, Iterable[str], str], config: Optional[ImportConfig] = None) -> Corpus:
    """Parse a tagged-field export into a :class:`Corpus`.

    Records are kept in file order if their PY passes ``config.py_range``;
    within each record only CR lines whose year passes ``config.rpy_range``
    are kept. Tags other than the ones used here are skipped.
    """
    config = config or ImportConfig()
    if isinstance(stream, str):
        stream = io.StringIO(stream)

    records: list[Record] = []
    ids: dict[str, int] = {}
    current: Optional[_RecordBuilder] = None
    last_tag: Optional[str] = None
    n_parsed = 0
    saw_ef = False

    for number, line in _iter_lines(stream):
        if saw_ef:
            if line.strip():
                raise MalformedFile("content after EF", number)
            continue
        if not line.strip():
            last_tag = None
            continue
        if line.startswith("   "):
            if current is None or last_tag is None:
                raise MalformedFile("continuation line outside a field", number)
            current.add(last_tag, line[3:])
            continue

        tag, value = line[:2], line[3:] if len(line) > 3 else ""
        if tag == "EF":
            if current is not None:
                raise MalformedFile("EF inside an open record (missing ER)", number)
            saw_ef = True
            continue
        if tag == "PT":
            if current is not None:
                raise MalformedFile("PT before ER of previous record", number)
            current = _RecordBuilder(number)
            current.add(tag, value)
            last_tag = tag
            continue
        if current is None:
            if tag in _FILE_HEADER_TAGS and not records and n_parsed == 0:
                continue
            raise MalformedFile(f"tag {tag!r} before record start (PT)", number)
        if tag == "ER":
            n_parsed += 1
            record = _build_record(current, n_parsed, ids, config)
            if record is not None:
                records.append(record)
            current = None
            last_tag = None
            continue
        current.add(tag, value)
        last_tag = tag

    if current is not None:
        raise MalformedFile(f"record starting at line {current.start_line} has no ER")
    if not saw_ef:
        raise MalformedFile("missing EF end-of-file tag")
    return Corpus(tuple(records), provenance=getattr(stream, "name", "<stream>"))


def _build_record(builder: _RecordBuilder, index: int, ids: dict[str, int], config: ImportConfig) -> Optional[Record]:
    record_id = builder.first("UT") or f"rec{index}"
    # Repeated accession numbers occur in concatenated exports.
    if record_id in ids:
        ids[record_id] += 1
        record_id = f"{record_id}#{ids[record_id]}"
    else:
        ids[record_id] = 1

    py_text = builder.first("PY")
    py = _parse_py(py_text) if py_text else None
    if py not in config.py_range:
        return None

    crs = [parse_cr_line(line) for line in builder.fields.get("CR", []) if line.strip()]
    title = " ".join(v.strip() for v in builder.fields.get("TI", [])) or None
    return Record(
        id=record_id,
        py=py,
        cited_refs=_select_crs(crs, config),
        title=title,
        source=builder.first("SO"),
    )


def parse_csv_corpus(stream: Union[TextIO, str], config: Optional[ImportConfig] = None) -> Corpus:
    """Parse a CSV export with header ``id,py,cr_raw`` (one CR per row).

    Rows sharing an id form one record; records keep first-appearance
    order. A row with an empty ``cr_raw`` creates a record without CRs.
    """
    config = config or ImportConfig()
    if isinstance(stream, str):
        stream = io.StringIO(stream)
    reader = csv.reader(stream)
    header = next(reader, None)
    if header is None:
        raise MalformedFile("empty CSV input (missing header)", 1)
    header = [h.strip().lstrip("﻿") for h in header]
    if header != ["id", "py", "cr_raw"]:
        raise MalformedFile(f"expected header id,py,cr_raw, got {','.join(header)}", 1)

    order: list[str] = []
    pys: dict[str, Optional[int]] = {}
    crs: dict[str, list[CitedRef]] = {}
    for number, row in enumerate(reader, start=2):
        if not row or all(not cell.strip() for cell in row):
            continue
        if len(row) != 3:
            raise MalformedFile(f"expected 3 columns, got {len(row)}", number)
        rid, py_text, raw = (cell.strip() for cell in row)
        if not rid:
            raise MalformedFile("empty record id", number)
        py = _parse_py(py_text) if py_text else None
        if rid not in pys:
            order.append(rid)
            pys[rid] = py
            crs[rid] = []
        elif pys[rid] != py:
            raise MalformedFile(f"record {rid!r} has conflicting PY values", number)
        if raw:
            crs[rid].append(parse_cr_line(raw))

    records = [
        Record(id=rid, py=pys[rid], cited_refs=_select_crs(crs[rid], config))
        for rid in order
        if pys[rid] in config.py_range
    ]
    return Corpus(tuple(records), provenance=getattr(stream, "name", "<csv>"))


def read_corpus(path, fmt: str = "WOS", config: Optional[ImportConfig] = None) -> Corpus:
    """Open ``path`` and parse it as ``WOS`` or ``CSV``."""
    fmt = fmt.upper()
    if fmt not in ("WOS", "CSV"):
        raise ValueError(f"unknown import type {fmt!r}; expected WOS or CSV")
    with open(path, encoding="utf-8", newline="") as fh:
        if fmt == "WOS":
            corpus = parse_corpus(fh, config)
        else:
            corpus = parse_csv_corpus(fh, config)
    return Corpus(corpus.records, provenance=str(path))
