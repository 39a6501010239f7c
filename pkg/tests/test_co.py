import random
import warnings

import pytest
from sklearn.base import clone
from sklearn.exceptions import NotFittedError

from oracles import brute_force_citers
from helpers import corpus, record
from rpys.co import (
    RPYS,
    RPYSCO,
    MarkerQuery,
    NoMatchesWarning,
    match_marker,
    run_rpys,
    run_rpys_co,
    select_citing,
    suggest_markers,
)
from rpys.export import cr_csv_text, graph_csv_text
from rpys.model import Corpus, Record
from rpys.synthetic import DFT_WORKS, synthetic_records
from rpys.wos import parse_cr_line

BECKE = "Becke AD, 1988, Physical Review A, V38, P3098"
BECKE_Q = MarkerQuery("Becke AD", 1988, "38", "3098")
KOHN = "Kohn W, 1965, Physical Review, V140, P1133"
SLATER = "Slater JC, 1951, Physical Review, V81, P385"


def synthetic_corpus(seed, n):
    rows = synthetic_records(random.Random(seed), n, p_mutation=0.15)
    return rows, Corpus(tuple(Record(rid, py, tuple(parse_cr_line(r) for r in raws)) for rid, py, raws in rows))


# --- markers -----------------------------------------------------------------


def test_marker_matching_examples():
    assert match_marker(record("a", [KOHN, BECKE]), BECKE_Q)
    assert not match_marker(record("b", [KOHN, SLATER]), BECKE_Q)
    doi = MarkerQuery.from_doi("10.1103/physreva.38.3098")
    assert match_marker(record("c", [BECKE + ", DOI 10.1103/PhysRevA.38.3098"]), doi)
    assert not match_marker(record("d", [BECKE]), doi)


def test_marker_author_is_normalized_prefix():
    assert match_marker(record("a", ["BECKE A.D., 1988, PHYS REV A, V38, P3098"]), MarkerQuery("Becke", 1988))
    assert not match_marker(record("a", [BECKE]), MarkerQuery("Becke AD", 1988, volume="83"))


def test_marker_parse_and_validation():
    assert MarkerQuery.parse("Becke AD,1988,V38,P3098") == BECKE_Q
    assert MarkerQuery.parse("Sun JW, 2013, V138") == MarkerQuery("Sun JW", 2013, "138")
    assert MarkerQuery(doi=" 10.1/ABC ").doi == "10.1/abc"
    for bad in (dict(first_author="Becke AD"), dict(rpy=1988), dict(match_mode="fuzzy", doi="x"),
                dict(first_author="A", rpy=1, match_mode="doi_only")):
        with pytest.raises(ValueError):
            MarkerQuery(**bad)
    with pytest.raises(ValueError):
        MarkerQuery.parse("Becke AD, 1988, 1989")


# --- selection ---------------------------------------------------------------


def test_select_filters_to_citers():
    rows = [[BECKE, KOHN] if i in (1, 4, 6, 9) else [KOHN, SLATER] for i in range(10)]
    selected = select_citing(corpus(rows), [BECKE_Q])
    assert [r.id for r in selected] == ["r1", "r4", "r6", "r9"]


def test_select_union_of_markers():
    rows = [[BECKE]] * 3 + [[SLATER]] * 2 + [[KOHN]] * 4
    selected = select_citing(corpus(rows), [BECKE_Q, MarkerQuery("Slater JC", 1951)])
    assert len(selected) == 5


def test_select_needs_markers_and_warns_on_no_match():
    with pytest.raises(ValueError):
        select_citing(corpus([[KOHN]]), [])
    with pytest.warns(NoMatchesWarning):
        assert len(select_citing(corpus([[KOHN]]), [BECKE_Q])) == 0


@pytest.mark.parametrize("seed", [1, 2])
def test_select_matches_linear_scan_on_1000_records(seed):
    rows, c = synthetic_corpus(seed, 1000)
    for author, year, vol, page in [("Becke AD", 1988, "38", "3098"), ("Kohn W", 1965, "140", "1133"),
                                    ("Kittel C", 1953, None, None)]:
        got = [r.id for r in select_citing(c, [MarkerQuery(author, year, vol, page)])]
        assert got == brute_force_citers([(rid, raws) for rid, _, raws in rows], author, year, vol, page)
        assert 0 < len(got) < 1000


def test_select_is_subset_and_idempotent():
    _, c = synthetic_corpus(3, 300)
    once = select_citing(c, [BECKE_Q])
    twice = select_citing(once, [BECKE_Q])
    assert {r.id for r in once} <= {r.id for r in c}
    assert [r.id for r in twice] == [r.id for r in once]


# --- pipeline ----------------------------------------------------------------


def test_zero_citers_gives_empty_result():
    with pytest.warns(NoMatchesWarning):
        result = run_rpys_co(corpus([[KOHN], [SLATER]]), [BECKE_Q])
    assert result.n_citing == 0 and result.aggregates == () and result.top_table == () and result.peak_table == ()
    assert result.spectrogram.peaks == () and int(result.spectrogram.ncr.sum()) == 0
    assert suggest_markers(result) == []


def test_dominant_1965_work_tops_peak_table():
    rng = random.Random(65)
    rows = []
    for i in range(200):
        raws = [BECKE] if i < 150 else []
        if i < 150 and rng.random() < 0.9:
            raws.append(KOHN)
        raws += [w.cr for w in DFT_WORKS[:6] if rng.random() < 0.1]
        rows.append(raws)
    result = run_rpys_co(corpus(rows), [BECKE_Q])
    assert result.n_citing == 150
    assert 1965 in result.spectrogram.peaks
    top_1965 = [row for row in result.peak_table if row.rpy == 1965][0]
    assert top_1965.cr == KOHN
    assert result.top_table[0].cr == BECKE or result.top_table[0].cr == KOHN


def test_remove_range_leaves_the_two_frequent_works():
    rows = []
    for i in range(120):
        raws = [BECKE]
        if i < 110:
            raws.append(KOHN)
        if i < 60:
            raws.append(SLATER)
        rows.append(raws)
    rows += [[KOHN]] * 30  # non-citers do not count
    result = run_rpys_co(corpus(rows), [BECKE_Q], remove_range=(0, 99))
    assert sorted((a.display, a.ncr) for a in result.aggregates) == [(BECKE, 120), (KOHN, 110)]
    assert all(a.ncr >= 100 for a in result.aggregates)


def test_all_matching_marker_reduces_to_plain_rpys():
    rows, _ = synthetic_corpus(4, 400)
    c = corpus([raws + [BECKE] for _, _, raws in rows])
    co = run_rpys_co(c, [BECKE_Q], remove_range=(0, 9))
    plain = run_rpys(c, remove_range=(0, 9))
    assert cr_csv_text(co.aggregates) == cr_csv_text(plain.aggregates)
    assert graph_csv_text(co.spectrogram) == graph_csv_text(plain.spectrogram)
    assert co.n_citing == plain.n_citing == len(c)


def test_run_is_deterministic():
    _, c = synthetic_corpus(5, 300)
    a, b = run_rpys_co(c, [BECKE_Q]), run_rpys_co(c, [BECKE_Q])
    assert cr_csv_text(a.aggregates) == cr_csv_text(b.aggregates)
    assert a.peak_table == b.peak_table


# --- marker suggestions ------------------------------------------------------

SUN = "Sun JW, 2013, Journal of Chemical Physics, V138"
SUN_PAGED = "Sun JW, 2013, Journal of Chemical Physics, V138, P074101"
PERDEW = "Perdew JP, 1996, Physical Review Letters, V77, P3865"


def marker_iteration_corpus():
    rng = random.Random(69)
    rows = []
    for i in range(69):
        raws = [SUN if i < 51 else SUN_PAGED]
        if i < 45:
            raws.append(PERDEW)
        raws += [w.cr for w in DFT_WORKS if w.cr != PERDEW and rng.random() < 0.3]
        rows.append(raws)
    return corpus(rows)


def test_marker_iteration_scenario():
    result = run_rpys_co(marker_iteration_corpus(), [MarkerQuery("Sun JW", 2013, "138")], rpy_range=(1900, 2017))
    assert result.n_citing == 69
    sugg = suggest_markers(result, 10)
    assert [(s.cr, s.ncr) for s in sugg[:2]] == [(SUN, 51), (PERDEW, 45)]
    assert sugg[0].ratio == pytest.approx(51 / 69, abs=1e-9) and sugg[1].ratio == pytest.approx(45 / 69, abs=1e-9)
    assert sugg[0].is_marker and not sugg[1].is_marker
    assert not sugg[1].comparable_to_marker
    assert [s.aggregate for s in sugg] == [row.aggregate for row in result.top_table]


def test_comparable_flag_and_rare_candidates():
    rows = [[BECKE, KOHN] for _ in range(10)] + [[BECKE, f"Rare {i}, 1970, J, V{i}"] for i in range(4)]
    result = run_rpys_co(corpus(rows), [BECKE_Q])
    sugg = suggest_markers(result)
    by_cr = {s.cr: s for s in sugg}
    assert by_cr[BECKE].comparable_to_marker and by_cr[BECKE].is_marker
    assert not by_cr[KOHN].comparable_to_marker  # 10 of 14, outside 25%
    assert suggest_markers(result, 10, tolerance=0.3)[1].comparable_to_marker



def test_single_citations_are_never_comparable():
    # every citer spells the marker with a different volume, so nothing merges
    rows = [[f"Becke AD, 1988, Journal {i}, V{i}", f"Rare {i}, 1970, J, V{i}"] for i in range(8)]
    result = run_rpys_co(corpus(rows), [MarkerQuery("Becke AD", 1988)], rpy_range=(1950, 1990))
    sugg = suggest_markers(result)
    assert len(sugg) == 10 and all(s.ncr == 1 for s in sugg)
    assert not any(s.comparable_to_marker for s in sugg)
    assert all(s.ratio == pytest.approx(1 / 8) for s in sugg)


# --- estimators --------------------------------------------------------------


def test_estimators_match_functions():
    c = marker_iteration_corpus()
    est = RPYSCO(markers=["Sun JW, 2013, V138"], rpy_range=(1900, 2017)).fit(c)
    ref = run_rpys_co(c, [MarkerQuery("Sun JW", 2013, "138")], rpy_range=(1900, 2017))
    assert est.n_citing_ == 69 and est.aggregates_ == list(ref.aggregates)
    assert est.peaks_ == list(ref.spectrogram.peaks)
    assert [s.ncr for s in est.suggest_markers(2)] == [51, 45]
    plain = RPYS(rpy_range=(1900, 2017)).fit(list(c.records))
    assert plain.n_citing_ == 69
    assert clone(est).get_params()["markers"] == ["Sun JW, 2013, V138"]
    with pytest.raises(NotFittedError):
        RPYSCO(markers=["Sun JW, 2013"]).suggest_markers()
