"""Spectrum / peptide / protein identification graph.

Spectra map to exactly one peptide each (with a match probability); peptides
map to one or more parent proteins.  Everything is stored in sorted order so
results downstream are reproducible bit for bit.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components as _cc

from .errors import DuplicateSpectrum, InvalidProbability, OrphanPeptide


@dataclass(frozen=True)
class Psm:
    spectrum: str
    peptide: str
    probability: float


def _frozen(a) -> np.ndarray:
    a = np.ascontiguousarray(a, dtype=np.int64)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class TripartiteGraph:
    """Immutable identification graph.

    ``edge_peptide[e]`` / ``edge_protein[e]`` index into ``peptides`` and
    ``proteins``; edges are sorted by (peptide, protein).  ``psm_peptide[i]``
    is the peptide index of ``psms[i]``.
    """

    psms: tuple[Psm, ...]
    peptides: tuple[str, ...]
    proteins: tuple[str, ...]
    edge_peptide: np.ndarray
    edge_protein: np.ndarray
    psm_peptide: np.ndarray
    dropped_proteins: tuple[str, ...] = ()
    _cache: dict = field(default_factory=dict, repr=False, compare=False)

    @property
    def n_spectra(self) -> int:
        return len(self.psms)

    @property
    def n_peptides(self) -> int:
        return len(self.peptides)

    @property
    def n_proteins(self) -> int:
        return len(self.proteins)

    @property
    def n_edges(self) -> int:
        return len(self.edge_peptide)

    @property
    def peptide_degrees(self) -> np.ndarray:
        """Number of parent proteins per peptide (q_j)."""
        if "q" not in self._cache:
            q = np.bincount(self.edge_peptide, minlength=self.n_peptides)
            self._cache["q"] = _frozen(q)
        return self._cache["q"]

    @property
    def memberships(self) -> list[tuple[str, str]]:
        return [(self.peptides[j], self.proteins[k])
                for j, k in zip(self.edge_peptide.tolist(), self.edge_protein.tolist())]

    def protein_peptides(self) -> list[tuple[int, ...]]:
        """Sorted peptide indices for each protein."""
        if "pp" not in self._cache:
            out: list[list[int]] = [[] for _ in range(self.n_proteins)]
            for j, k in zip(self.edge_peptide.tolist(), self.edge_protein.tolist()):
                out[k].append(j)
            self._cache["pp"] = [tuple(v) for v in out]
        return self._cache["pp"]

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, TripartiteGraph):
            return NotImplemented
        return (self.psms == other.psms
                and self.peptides == other.peptides
                and self.proteins == other.proteins
                and np.array_equal(self.edge_peptide, other.edge_peptide)
                and np.array_equal(self.edge_protein, other.edge_protein))

    __hash__ = None  # type: ignore[assignment]


def build_graph(psms: Iterable[Psm], memberships: Iterable[tuple[str, str]]) -> TripartiteGraph:
    """Validate PSMs and peptide->protein pairs and assemble the graph.

    Proteins left without any identified peptide are dropped and listed in
    ``dropped_proteins``.
    """
    psms = list(psms)
    seen: set[str] = set()
    for p in psms:
        if not (isinstance(p.probability, (int, float)) and math.isfinite(p.probability)
                and 0.0 <= p.probability <= 1.0):
            raise InvalidProbability(
                f"spectrum {p.spectrum!r}: probability {p.probability!r} outside [0, 1]")
        if p.spectrum in seen:
            raise DuplicateSpectrum(f"spectrum {p.spectrum!r} matched more than once")
        seen.add(p.spectrum)

    peptides = tuple(sorted({p.peptide for p in psms}))
    pep_index = {s: j for j, s in enumerate(peptides)}

    all_proteins: set[str] = set()
    pairs: set[tuple[str, str]] = set()
    for pep, prot in memberships:
        all_proteins.add(prot)
        if pep in pep_index:
            pairs.add((pep, prot))

    proteins = tuple(sorted({prot for _, prot in pairs}))
    prot_index = {a: k for k, a in enumerate(proteins)}
    edges = sorted((pep_index[pep], prot_index[prot]) for pep, prot in pairs)

    has_parent = np.zeros(len(peptides), dtype=bool)
    for j, _ in edges:
        has_parent[j] = True
    if not has_parent.all():
        orphan = peptides[int(np.flatnonzero(~has_parent)[0])]
        raise OrphanPeptide(f"peptide {orphan!r} has no parent protein")

    psms_sorted = tuple(sorted(psms, key=lambda p: p.spectrum))
    edge_arr = np.array(edges, dtype=np.int64).reshape(-1, 2)
    return TripartiteGraph(
        psms=psms_sorted,
        peptides=peptides,
        proteins=proteins,
        edge_peptide=_frozen(edge_arr[:, 0]),
        edge_protein=_frozen(edge_arr[:, 1]),
        psm_peptide=_frozen([pep_index[p.peptide] for p in psms_sorted]),
        dropped_proteins=tuple(sorted(all_proteins - set(proteins))),
    )


def _local_rank(labels: np.ndarray, order: np.ndarray) -> np.ndarray:
    """Position of each item within its label group, preserving global order."""
    rank = np.empty(len(labels), dtype=np.int64)
    sorted_labels = labels[order]
    starts = np.r_[0, np.flatnonzero(np.diff(sorted_labels)) + 1]
    counts = np.diff(np.r_[starts, len(order)])
    rank[order] = np.arange(len(order)) - np.repeat(starts, counts)
    return rank


def _split(items: np.ndarray, labels: np.ndarray, n_groups: int) -> list[np.ndarray]:
    order = np.argsort(labels, kind="stable")
    bounds = np.searchsorted(labels[order], np.arange(1, n_groups))
    return np.split(items[order], bounds)


def connected_components(graph: TripartiteGraph) -> list[TripartiteGraph]:
    """Split into maximal protein/peptide components.

    Components are ordered by their smallest protein accession; since
    proteins are sorted, that is the order of each component's first protein.
    """
    if graph.n_proteins == 0:
        return []
    m = graph.n_peptides
    n = m + graph.n_proteins
    adj = coo_matrix(
        (np.ones(graph.n_edges), (graph.edge_peptide, m + graph.edge_protein)),
        shape=(n, n),
    )
    n_comp, labels = _cc(adj, directed=False)
    if n_comp == 1:
        return [graph]
    # relabel so component order follows the first protein of each component
    prot_labels = labels[m:]
    first = np.full(n_comp, graph.n_proteins, dtype=np.int64)
    np.minimum.at(first, prot_labels, np.arange(graph.n_proteins))
    relabel = np.empty(n_comp, dtype=np.int64)
    relabel[np.argsort(first, kind="stable")] = np.arange(n_comp)
    labels = relabel[labels]
    pep_lab, prot_lab = labels[:m], labels[m:]

    pep_rank = _local_rank(pep_lab, np.argsort(pep_lab, kind="stable"))
    prot_rank = _local_rank(prot_lab, np.argsort(prot_lab, kind="stable"))
    edge_lab = pep_lab[graph.edge_peptide]
    psm_lab = pep_lab[graph.psm_peptide]

    peps = _split(np.arange(m), pep_lab, n_comp)
    prots = _split(np.arange(graph.n_proteins), prot_lab, n_comp)
    edges = _split(np.arange(graph.n_edges), edge_lab, n_comp)
    psms = _split(np.arange(graph.n_spectra), psm_lab, n_comp)

    out = []
    for c in range(n_comp):
        e = edges[c]
        out.append(TripartiteGraph(
            psms=tuple(graph.psms[i] for i in psms[c].tolist()),
            peptides=tuple(graph.peptides[j] for j in peps[c].tolist()),
            proteins=tuple(graph.proteins[k] for k in prots[c].tolist()),
            edge_peptide=_frozen(pep_rank[graph.edge_peptide[e]]),
            edge_protein=_frozen(prot_rank[graph.edge_protein[e]]),
            psm_peptide=_frozen(pep_rank[graph.psm_peptide[psms[c]]]),
        ))
    return out
