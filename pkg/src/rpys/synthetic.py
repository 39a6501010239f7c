"""Synthetic corpora with noisy cited-reference variants.

Used to build test fixtures and benchmarks. The mutation model imitates
what happens to references in the wild: OCR digit confusions ("0" read as
"8" and vice versa), dropped trailing fields, case changes and stray
punctuation.
"""
from __future__ import annotations

import random
from dataclasses import dataclass
from typing import Iterable, Optional, Sequence, TextIO

from .model import Record

__all__ = [
    "DFT_WORKS",
    "Work",
    "background_works",
    "mutate",
    "random_occurrences",
    "synthetic_records",
    "write_wos",
]

DIGIT_CONFUSIONS = {"0": "8", "8": "0", "1": "7", "7": "1", "3": "8", "5": "6", "6": "5"}


@dataclass(frozen=True)
class Work:
    """A cited work: its clean reference string and a per-record citation probability."""

    cr: str
    p_cite: float


# Frequently cited DFT reference strings, plus a few later
# and earlier works so RPY filtering has something to do.
DFT_WORKS: tuple[Work, ...] = (
    Work("Slater JC, 1951, Physical Review, V81, P385", 0.22),
    Work("Roothaan CCJ, 1951, Reviews of Modern Physics, V23, P69", 0.08),
    Work("Kittel C, 1953, Introduction to solid state physics", 0.06),
    Work("Pugh SF, 1954, Philosophical Magazine, V45, P823", 0.05),
    Work("Mulliken RS, 1955, Journal of Chemical Physics, V23, P1833", 0.18),
    Work("Hohenberg P, 1964, Physical Review B, V136, PB864", 0.45),
    Work("Kohn W, 1965, Physical Review, V140, P1133", 0.55),
    Work("Boys SF, 1970, Molecular Physics, V19, P553", 0.2),
    Work("Hehre WJ, 1972, Journal of Chemical Physics, V56, P2257", 0.2),
    Work("von Barth U, 1972, Journal of Physics C: Solid State Physics, V5, P1629", 0.07),
    Work("Harihara PC, 1973, Theoretica Chimica Acta, V28, P213", 0.22),
    Work("Baerends EJ, 1973, Chemical Physics, V2, P41", 0.1),
    Work("Monkhorst HJ, 1976, Physical Review B, V13, P5188", 0.3),
    Work("Ziegler T, 1977, Theoretica Chimica Acta, V46, P1", 0.06),
    Work("Hay PJ, 1977, Journal of Chemical Physics, V66, P4377", 0.05),
    Work("Ceperley DM, 1980, Physical Review Letters, V45, P566", 0.25),
    Work("Vosko SH, 1980, Canadian Journal of Physics, V58, P1200", 0.3),
    Work("Car R, 1985, Physical Review Letters, V55, P2471", 0.12),
    Work("Hay PJ, 1985, Journal of Chemical Physics, V82, P299", 0.1),
    Work("Perdew JP, 1986, Physical Review B, V33, P8822", 0.35),
    Work("Becke AD, 1988, Physical Review A, V38, P3098", 0.5),
    Work("Lee CT, 1988, Physical Review B, V37, P785", 0.45),
    Work("Parr RG, 1989, Density-functional theory of atoms and molecules", 0.16),
    Work("Dunning TH, 1989, Journal of Chemical Physics, V90, P1007", 0.18),
    Work("Perdew JP, 1996, Physical Review Letters, V77, P3865", 0.4),
    Work("Schrodinger E, 1926, Physical Review, V28, P1049", 0.05),
    Work("Thomas LH, 1927, Proceedings of the Cambridge Philosophical Society, V23, P542", 0.04),
    Work("Fermi E, 1927, Rendiconti Lincei, V6, P602", 0.03),
)


def _swap_digit(text: str, rng: random.Random, start: int = 0) -> str:
    positions = [i for i, ch in enumerate(text) if i >= start and ch in DIGIT_CONFUSIONS]
    if not positions:
        return text
    i = rng.choice(positions)
    return text[:i] + DIGIT_CONFUSIONS[text[i]] + text[i + 1 :]


def mutate(cr: str, rng: random.Random, year_digits: bool = True) -> str:
    """Apply one random corruption to a reference string.

    With ``year_digits=False`` digit confusions avoid the first four-digit
    year so the variant keeps its RPY.
    """
    tokens = cr.split(", ")
    kind = rng.choice(("digit", "truncate", "case", "period", "letter"))
    if kind == "digit":
        if year_digits or len(tokens) < 3:
            return _swap_digit(cr, rng)
        # skip author and year tokens
        head = ", ".join(tokens[:2]) + ", "
        return head + _swap_digit(", ".join(tokens[2:]), rng)
    if kind == "truncate" and len(tokens) > 2:
        # drop the last field or shorten the source title
        if rng.random() < 0.5:
            return ", ".join(tokens[:-1])
        src = tokens[2]
        cut = max(3, len(src) - rng.randint(1, 6))
        return ", ".join(tokens[:2] + [src[:cut]] + tokens[3:])
    if kind == "case":
        return rng.choice((cr.upper(), cr.lower(), cr.title()))
    if kind == "period":
        return cr + "."
    # single letter substitution in the source title
    if len(tokens) > 2 and tokens[2]:
        src = tokens[2]
        i = rng.randrange(len(src))
        letter = rng.choice("ABCDEFGHIJKLMNOPQRSTUVWXYZ")
        return ", ".join(tokens[:2] + [src[:i] + letter + src[i + 1 :]] + tokens[3:])
    return cr.upper()


def random_occurrences(
    rng: random.Random,
    n: int,
    n_works: int = 8,
    p_mutation: float = 0.3,
    year_span: int = 4,
    year_digits: bool = True,
) -> list[str]:
    """``n`` raw CR strings drawn from ``n_works`` random base works, some mutated."""
    surnames = ("Becke", "Kohn", "Perdew", "Slater", "Vosko", "Hay", "Hehre", "Boys", "Lee", "Parr")
    journals = (
        "Physical Review",
        "Physical Review B",
        "Journal of Chemical Physics",
        "Chemical Physics Letters",
        "Theoretica Chimica Acta",
    )
    base_year = rng.randint(1950, 1985)
    works = []
    for _ in range(n_works):
        author = f"{rng.choice(surnames)} {rng.choice('ABCDEFGHJKLMPRSTW')}{rng.choice(['', 'D', 'J', 'P'])}"
        year = base_year + rng.randint(0, year_span)
        parts = [author, str(year), rng.choice(journals)]
        if rng.random() < 0.85:
            parts.append(f"V{rng.randint(1, 140)}")
            if rng.random() < 0.85:
                parts.append(f"P{rng.randint(1, 9999)}")
        works.append(", ".join(parts))
    weights = [rng.random() + 0.1 for _ in works]
    out = []
    for _ in range(n):
        cr = rng.choices(works, weights)[0]
        while rng.random() < p_mutation:
            cr = mutate(cr, rng, year_digits)
        out.append(cr)
    return out


_SURNAMES = ("Adams", "Baker", "Clark", "Dirac", "Evans", "Fock", "Gross", "Hartree", "Ising", "Jones",
             "Klein", "Lowdin", "Mott", "Nesbet", "Pople", "Pauling", "Stoll", "Wigner", "Yang", "Zener")
_JOURNALS = ("Physical Review", "Journal of Chemical Physics", "Molecular Physics", "Chemical Physics Letters",
             "Proceedings of the Royal Society A", "Journal of Physics C", "Theoretica Chimica Acta")


def background_works(rng: random.Random, years=(1950, 1990), per_year: int = 3, p_max: float = 0.2) -> list[Work]:
    """Random, moderately cited works spread over ``years`` (inclusive)."""
    works = []
    for year in range(years[0], years[1] + 1):
        for _ in range(rng.randint(0, per_year)):
            author = f"{rng.choice(_SURNAMES)} {rng.choice('ABCDEFGHJKLMNPRSTW')}"
            cr = f"{author}, {year}, {rng.choice(_JOURNALS)}, V{rng.randint(1, 99)}, P{rng.randint(1, 4999)}"
            works.append(Work(cr, round(rng.uniform(0.005, p_max) ** 1.5 / p_max ** 0.5, 4)))
    return works


def synthetic_records(
    rng: random.Random,
    n_records: int,
    works: Sequence[Work] = DFT_WORKS,
    py_span: tuple[int, int] = (1985, 2019),
    p_mutation: float = 0.08,
    extra: Optional[Sequence[str]] = None,
) -> list[tuple[str, int, list[str]]]:
    """``(id, py, raw CR lines)`` tuples; each record cites each work with its probability.

    ``extra`` lists additional CRs appended to every record.
    """
    out = []
    for i in range(1, n_records + 1):
        crs = []
        for work in works:
            if rng.random() < work.p_cite:
                cr = work.cr
                if rng.random() < p_mutation:
                    cr = mutate(cr, rng)
                crs.append(cr)
        crs.extend(extra or ())
        rng.shuffle(crs)
        out.append((f"WOS:SYN{i:06d}", rng.randint(*py_span), crs))
    return out


def write_wos(records: Iterable, stream: TextIO) -> None:
    """Write records as a tagged-field file.

    Accepts :class:`Record` objects or ``(id, py, raw CR lines)`` tuples.
    """
    stream.write("FN Clarivate Analytics Web of Science\nVR 1.0\n")
    for rec in records:
        if isinstance(rec, Record):
            rid, py, crs, title = rec.id, rec.py, [cr.raw for cr in rec.cited_refs], rec.title
        else:
            rid, py, crs = rec
            title = None
        stream.write("PT J\n")
        stream.write(f"TI {title or 'Synthetic record ' + rid}\n")
        if py is not None:
            stream.write(f"PY {py}\n")
        for j, cr in enumerate(crs):
            stream.write(("CR " if j == 0 else "   ") + cr + "\n")
        stream.write(f"UT {rid}\nER\n\n")
    stream.write("EF\n")
