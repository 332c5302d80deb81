import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from protinfer import Psm, build_graph, equal_division, multiple_counting, peptide_abundance

from conftest import toy_graph, graph_from, small_graphs


def test_probability_sum_and_unit_count():
    g = build_graph([Psm("s1", "Y1", 0.9), Psm("s2", "Y1", 0.8)], [("Y1", "Z1")])
    assert peptide_abundance(g, "probability")[0] == pytest.approx(1.7)
    assert peptide_abundance(g, "unit")[0] == 2.0


def test_zero_probability_psm():
    g = build_graph([Psm("s1", "Y1", 0.0)], [("Y1", "Z1")])
    assert peptide_abundance(g)[0] == 0.0


def test_unknown_weighting():
    with pytest.raises(ValueError):
        peptide_abundance(toy_graph(), "median")


def test_mp_sum_of_unique_peptides():
    g = graph_from({"A": 0.5, "B": 0.9}, [("A", "Z"), ("B", "Z")])
    assert multiple_counting(g, peptide_abundance(g)).c[0] == pytest.approx(1.4)


def test_toy_hand_values():
    g = toy_graph()
    b = peptide_abundance(g)
    mp = multiple_counting(g, b).protein_abundance
    ed = equal_division(g, b).protein_abundance
    assert mp == pytest.approx({"Z1": 2.1, "Z2": 1.8, "Z3": 1.4})
    assert ed == pytest.approx({"Z1": 1.5, "Z2": 0.9, "Z3": 1.1})
    # the shared Y2 is credited in full to both of its parents under MP
    assert mp["Z2"] - 0.5 - 0.7 == pytest.approx(0.6)
    assert mp["Z3"] - 0.8 == pytest.approx(0.6)


def test_ed_three_way_split():
    g = graph_from({"S": 0.9}, [("S", "A"), ("S", "B"), ("S", "C")])
    assert equal_division(g, peptide_abundance(g)).c.tolist() == pytest.approx([0.3] * 3)


def test_ed_symmetry():
    pairs = [("P", "A"), ("P", "B"), ("Q", "A"), ("Q", "B")]
    g = graph_from({"P": 0.4, "Q": 0.7}, pairs)
    c = equal_division(g, peptide_abundance(g)).c
    assert c[0] == c[1]


def test_abundances_accept_mapping():
    g = toy_graph()
    b = dict(zip(g.peptides, peptide_abundance(g)))
    assert np.array_equal(multiple_counting(g, b).c, multiple_counting(g, list(b.values())).c)
    with pytest.raises(KeyError):
        multiple_counting(g, {"Y1": 1.0})
    with pytest.raises(ValueError):
        equal_division(g, [1.0, 2.0])


@settings(max_examples=300, deadline=None)
@given(small_graphs())
def test_mp_inflation(data):
    pairs, b = data
    g = graph_from(b, pairs)
    bv = peptide_abundance(g)
    expected = float((g.peptide_degrees * bv).sum())
    assert multiple_counting(g, bv).c.sum() == pytest.approx(expected, rel=1e-12, abs=1e-300)


@settings(max_examples=200, deadline=None)
@given(small_graphs(), st.data())
def test_monotone_in_psm_probability(data, draw):
    pairs, b = data
    g = graph_from(b, pairs)
    i = draw.draw(st.integers(0, g.n_spectra - 1))
    bumped = list(g.psms)
    old = bumped[i]
    bumped[i] = Psm(old.spectrum, old.peptide, draw.draw(st.floats(old.probability, 1.0)))
    g2 = build_graph(bumped, pairs)
    for method in (multiple_counting, equal_division):
        assert np.all(method(g2, peptide_abundance(g2)).c >= method(g, peptide_abundance(g)).c)


@settings(max_examples=200, deadline=None)
@given(small_graphs())
def test_unit_mode_equals_probability_one(data):
    pairs, b = data
    g = graph_from({p: 1.0 for p in b}, pairs)
    assert np.array_equal(peptide_abundance(g, "probability"), peptide_abundance(g, "unit"))
    for method in (multiple_counting, equal_division):
        a = method(g, peptide_abundance(g, "probability")).c
        u = method(g, peptide_abundance(g, "unit")).c
        assert a.tobytes() == u.tobytes()


def test_unit_mp_gives_integers():
    g = build_graph([Psm(f"s{i}", p, 0.3) for i, p in enumerate("AABBBC")],
                    [("A", "X"), ("B", "X"), ("B", "Y"), ("C", "Y")])
    c = multiple_counting(g, peptide_abundance(g, "unit")).c
    assert c.tolist() == [5.0, 4.0]
