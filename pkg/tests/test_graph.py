import io

import numpy as np
import pytest
from hypothesis import given, settings

from protinfer import Psm, build_graph, connected_components
from protinfer.errors import DuplicateSpectrum, InvalidProbability, OrphanPeptide
from protinfer.ingest import (parse_membership_table, parse_psm_table, write_membership_table,
                              write_psm_table)

from conftest import TOY_MEMBERSHIPS, toy_graph, graph_from, small_graphs


def test_minimal_graph():
    g = build_graph([Psm("s1", "Y1", 0.9)], [("Y1", "Z1")])
    assert (g.n_spectra, g.n_peptides, g.n_proteins) == (1, 1, 1)
    assert g.peptide_degrees.tolist() == [1]


def test_toy_degrees():
    g = toy_graph()
    q = dict(zip(g.peptides, g.peptide_degrees.tolist()))
    assert q == {"Y1": 1, "Y2": 2, "Y3": 1, "Y4": 2, "Y5": 2}
    assert g.n_edges == len(TOY_MEMBERSHIPS)


def test_orphan_peptide():
    with pytest.raises(OrphanPeptide, match="Y9"):
        build_graph([Psm("s1", "Y9", 0.5)], [])


def test_duplicate_spectrum():
    with pytest.raises(DuplicateSpectrum):
        build_graph([Psm("s1", "Y1", 0.5), Psm("s1", "Y2", 0.5)], [("Y1", "Z"), ("Y2", "Z")])


@pytest.mark.parametrize("p", [-0.1, 1.5, float("nan")])
def test_probability_bounds(p):
    with pytest.raises(InvalidProbability):
        build_graph([Psm("s1", "Y1", p)], [("Y1", "Z")])


def test_proteins_without_identified_peptides_are_dropped():
    g = build_graph([Psm("s1", "Y1", 0.5)], [("Y1", "Z1"), ("Y7", "Z2"), ("Y7", "Z1")])
    assert g.proteins == ("Z1",)
    assert g.dropped_proteins == ("Z2",)
    assert g.memberships == [("Y1", "Z1")]


def test_multiple_spectra_per_peptide():
    g = build_graph([Psm("s1", "Y1", 0.5), Psm("s2", "Y1", 0.7)], [("Y1", "Z1")])
    assert g.n_spectra == 2 and g.n_peptides == 1
    assert g.psm_peptide.tolist() == [0, 0]


def test_arrays_are_read_only():
    g = toy_graph()
    with pytest.raises(ValueError):
        g.edge_protein[0] = 5


def test_components_disjoint_pairs():
    g = graph_from({"A": 0.5, "B": 0.5}, [("A", "P1"), ("B", "P2")])
    comps = connected_components(g)
    assert [c.proteins for c in comps] == [("P1",), ("P2",)]


def test_components_toy_single():
    g = toy_graph()
    comps = connected_components(g)
    assert len(comps) == 1 and comps[0] == g


def test_components_empty():
    g = build_graph([], [("Y1", "Z1")])
    assert g.n_proteins == 0
    assert connected_components(g) == []


def test_component_order_by_smallest_accession():
    g = graph_from({"A": 0.1, "B": 0.2, "C": 0.3},
                   [("A", "Q9"), ("A", "A1"), ("B", "M5"), ("C", "B2")])
    assert [c.proteins[0] for c in connected_components(g)] == ["A1", "B2", "M5"]


def _round_trip(g):
    psm_buf, mem_buf = io.StringIO(), io.StringIO()
    write_psm_table(g.psms, psm_buf)
    write_membership_table(g.memberships, mem_buf)
    psm_buf.seek(0)
    mem_buf.seek(0)
    return build_graph(parse_psm_table(psm_buf), parse_membership_table(mem_buf))


@settings(max_examples=200, deadline=None)
@given(small_graphs())
def test_round_trip_is_identity(data):
    pairs, b = data
    g = graph_from(b, pairs)
    g2 = _round_trip(g)
    assert g2 == g
    assert [p.probability for p in g2.psms] == [p.probability for p in g.psms]


@settings(max_examples=200, deadline=None)
@given(small_graphs(max_peptides=12, max_proteins=8))
def test_components_partition_the_graph(data):
    pairs, b = data
    g = graph_from(b, pairs)
    comps = connected_components(g)
    assert sum(c.n_proteins for c in comps) == g.n_proteins
    assert sum(c.n_peptides for c in comps) == g.n_peptides
    assert sum(c.n_spectra for c in comps) == g.n_spectra
    union = sorted(e for c in comps for e in c.memberships)
    assert union == sorted(g.memberships)
    owner = {}
    for i, c in enumerate(comps):
        for p in c.proteins + c.peptides:
            assert owner.setdefault(p, i) == i
        for s in c.psms:
            assert s.peptide in c.peptides
    # maximality: different components share no protein-protein link
    for i, c in enumerate(comps):
        for pep, prot in c.memberships:
            assert owner[pep] == owner[prot] == i
    firsts = [c.proteins[0] for c in comps]
    assert firsts == sorted(firsts)


def test_components_match_union_find():
    rng = np.random.default_rng(3)
    pairs = sorted({(f"y{rng.integers(300)}", f"z{rng.integers(200)}") for _ in range(400)})
    g = graph_from({p: 0.5 for p, _ in pairs}, pairs)
    parent = {}

    def find(x):
        while parent.setdefault(x, x) != x:
            x = parent[x]
        return x

    for pep, prot in pairs:
        parent[find(pep)] = find(prot)
    groups = {}
    for prot in g.proteins:
        groups.setdefault(find(prot), set()).add(prot)
    expected = sorted(sorted(s) for s in groups.values())
    got = sorted(sorted(c.proteins) for c in connected_components(g))
    assert got == expected
