"""Spectral-counting protein quantification.

Peptide abundance is the sum of PSM probabilities (or the plain PSM count in
``unit`` weighting).  Protein abundance is then either the sum over all member
peptides (multiple counting) or the sum of each peptide's abundance divided by
its number of parent proteins (equal division).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from .graph import TripartiteGraph

PROBABILITY = "probability"
UNIT = "unit"
WEIGHTINGS = (PROBABILITY, UNIT)

MULTIPLE_COUNTING = "mp"
EQUAL_DIVISION = "ed"
LINEAR_PROGRAM = "lp"
METHODS = (MULTIPLE_COUNTING, EQUAL_DIVISION, LINEAR_PROGRAM)


@dataclass(frozen=True, eq=False)
class AbundanceVector:
    """Peptide (``b``) and protein (``c``) abundance aligned with the graph order."""

    graph: TripartiteGraph
    b: np.ndarray
    c: np.ndarray
    method: str
    weighting: str | None = None

    @property
    def peptide_abundance(self) -> dict[str, float]:
        return dict(zip(self.graph.peptides, self.b.tolist()))

    @property
    def protein_abundance(self) -> dict[str, float]:
        return dict(zip(self.graph.proteins, self.c.tolist()))


def as_peptide_array(graph: TripartiteGraph, b: Mapping[str, float] | Sequence[float]) -> np.ndarray:
    """Peptide abundances as a float array in graph peptide order."""
    if isinstance(b, Mapping):
        missing = [p for p in graph.peptides if p not in b]
        if missing:
            raise KeyError(f"no abundance for peptide {missing[0]!r}")
        return np.array([b[p] for p in graph.peptides], dtype=float)
    arr = np.array(b, dtype=float)
    if arr.shape != (graph.n_peptides,):
        raise ValueError(f"expected {graph.n_peptides} peptide abundances, got {arr.shape}")
    return arr


def peptide_abundance(graph: TripartiteGraph, mode: str = PROBABILITY) -> np.ndarray:
    """b_j for every peptide, in graph order."""
    if mode == PROBABILITY:
        weights = np.array([p.probability for p in graph.psms], dtype=float)
    elif mode == UNIT:
        weights = np.ones(graph.n_spectra)
    else:
        raise ValueError(f"unknown weighting {mode!r}")
    return np.bincount(graph.psm_peptide, weights=weights, minlength=graph.n_peptides)


def multiple_counting(graph: TripartiteGraph, b) -> AbundanceVector:
    b = as_peptide_array(graph, b)
    c = np.bincount(graph.edge_protein, weights=b[graph.edge_peptide], minlength=graph.n_proteins)
    return AbundanceVector(graph, b, c, MULTIPLE_COUNTING)


def equal_division(graph: TripartiteGraph, b) -> AbundanceVector:
    b = as_peptide_array(graph, b)
    share = b / graph.peptide_degrees
    c = np.bincount(graph.edge_protein, weights=share[graph.edge_peptide],
                    minlength=graph.n_proteins)
    return AbundanceVector(graph, b, c, EQUAL_DIVISION)
