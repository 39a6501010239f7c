"""Small builders shared by the test modules."""
from pathlib import Path

from rpys.model import Corpus, Record
from rpys.wos import parse_cr_line

TESTS = Path(__file__).resolve().parent
DATA = TESTS / "data"
GOLDEN = TESTS / "golden"
FIXTURE = DATA / "citing_papers.wos.txt"
SCRIPT = DATA / "analysis_script.txt"


def record(rid, raws, py=2000):
    return Record(rid, py, tuple(parse_cr_line(r) for r in raws))


def corpus(rows):
    """``rows`` is a list of raw-CR lists; record ids are r0, r1, ..."""
    return Corpus(tuple(record(f"r{i}", raws) for i, raws in enumerate(rows)))


def wos_text(records):
    """Tagged-field text for ``(id, py, raws)`` tuples; ``py`` may be None."""
    out = ["FN Clarivate Analytics Web of Science", "VR 1.0"]
    for rid, py, raws in records:
        out.append("PT J")
        if py is not None:
            out.append(f"PY {py}")
        for j, raw in enumerate(raws):
            out.append(("CR " if j == 0 else "   ") + raw)
        out += [f"UT {rid}", "ER", ""]
    out.append("EF")
    return "\n".join(out) + "\n"
