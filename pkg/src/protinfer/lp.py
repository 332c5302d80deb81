"""Zero-shrinking linear program for distributing shared peptide abundance.

Decision variables are one ``d`` per peptide/protein membership edge (the
share of peptide ``j`` explained by protein ``k``) and one ``t`` per protein
bounding its largest share::

    minimize    sum_k t_k
    subject to  d_jk <= t_k              for every edge (j, k)
                sum_k d_jk == b_j        for every peptide j
                d, t >= 0

Minimizing the column maxima pushes whole columns to zero, so proteins whose
evidence is fully explained by other proteins end up with zero abundance.
Protein abundance is the column sum of the optimal ``d``.
"""

from __future__ import annotations

import logging
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np
import scipy.sparse as sp

from . import simplex
from .errors import IterationLimit
from .graph import TripartiteGraph, connected_components
from .quantify import AbundanceVector, LINEAR_PROGRAM, as_peptide_array

LOGGER = logging.getLogger(__name__)

CLAMP = 1e-10           # relative to the largest peptide abundance
FEASIBILITY_TOL = 1e-8


@dataclass(frozen=True, eq=False)
class LpInstance:
    """LP over a graph; variable order is ``d`` by edge, then ``t`` by protein."""

    graph: TripartiteGraph
    b: np.ndarray

    @property
    def n_variables(self) -> int:
        return self.graph.n_edges + self.graph.n_proteins

    @property
    def n_constraints(self) -> int:
        return self.graph.n_edges + self.graph.n_peptides

    def variable_names(self) -> list[str]:
        return ([f"d{e}" for e in range(self.graph.n_edges)]
                + [f"t{k}" for k in range(self.graph.n_proteins)])

    def standard_form(self):
        """(c, A, rhs) over columns [d | t | coupling slacks], rows [coupling | peptide]."""
        g = self.graph
        E, n, m = g.n_edges, g.n_proteins, g.n_peptides
        e = np.arange(E)
        rows = np.r_[e, e, e, E + g.edge_peptide]
        cols = np.r_[e, E + g.edge_protein, E + n + e, e]
        vals = np.r_[np.ones(E), -np.ones(E), np.ones(E), np.ones(E)]
        A = sp.csc_matrix((vals, (rows, cols)), shape=(E + m, 2 * E + n))
        c = np.r_[np.zeros(E), np.ones(n), np.zeros(E)]
        rhs = np.r_[np.zeros(E), self.b]
        return c, A, rhs

    def crash_basis(self) -> np.ndarray:
        """A primal feasible starting basis.

        Each peptide is assigned whole to one parent (the parent with the most
        unique-peptide evidence, ties to the lower index); ``t_k`` is the
        largest assigned share, tight on one edge per protein.
        """
        g = self.graph
        E, n = g.n_edges, g.n_proteins
        q = g.peptide_degrees
        unique = q[g.edge_peptide] == 1
        evidence = np.bincount(g.edge_protein[unique], weights=self.b[g.edge_peptide[unique]],
                               minlength=n)
        chosen = np.full(g.n_peptides, -1, dtype=np.int64)
        best = np.full(g.n_peptides, -np.inf)
        for edge, (j, k) in enumerate(zip(g.edge_peptide.tolist(), g.edge_protein.tolist())):
            if evidence[k] > best[j]:
                best[j] = evidence[k]
                chosen[j] = edge
        d = np.zeros(E)
        d[chosen] = self.b
        tight = np.full(n, -1, dtype=np.int64)
        top = np.full(n, -1.0)
        for edge, k in enumerate(g.edge_protein.tolist()):
            if d[edge] > top[k]:
                top[k] = d[edge]
                tight[k] = edge
        slack_rows = np.ones(E, dtype=bool)
        slack_rows[tight] = False
        # basis position i corresponds to row i: coupling rows first, then peptides
        basis = np.empty(E + g.n_peptides, dtype=np.int64)
        basis[np.flatnonzero(slack_rows)] = E + n + np.flatnonzero(slack_rows)
        basis[tight] = E + np.arange(n)
        basis[E:] = chosen
        return basis

    def to_lp_text(self) -> str:
        """Dump in CPLEX LP text format for cross-checking with other solvers."""
        g = self.graph
        lines = ["\\ protein abundance LP", "\\ variables:"]
        for e, (pep, prot) in enumerate(g.memberships):
            lines.append(f"\\   d{e} = {pep} -> {prot}")
        for k, prot in enumerate(g.proteins):
            lines.append(f"\\   t{k} = max share of {prot}")
        lines.append("Minimize")
        lines.append(" obj: " + (" + ".join(f"t{k}" for k in range(g.n_proteins)) or "0"))
        lines.append("Subject To")
        for e, k in enumerate(g.edge_protein.tolist()):
            lines.append(f" cap{e}: d{e} - t{k} <= 0")
        by_pep: list[list[int]] = [[] for _ in range(g.n_peptides)]
        for e, j in enumerate(g.edge_peptide.tolist()):
            by_pep[j].append(e)
        for j, edges in enumerate(by_pep):
            lhs = " + ".join(f"d{e}" for e in edges)
            lines.append(f" pep{j}: {lhs} = {float(self.b[j])!r}")
        lines.append("End")
        return "\n".join(lines) + "\n"


@dataclass(frozen=True, eq=False)
class LpSolution:
    graph: TripartiteGraph
    d: np.ndarray          # per edge
    t: np.ndarray          # per protein
    objective: float
    iterations: int
    status: str

    @property
    def distribution(self) -> dict[tuple[str, str], float]:
        """Nonzero shares keyed by (peptide, protein)."""
        g = self.graph
        return {(g.peptides[j], g.proteins[k]): float(v)
                for j, k, v in zip(g.edge_peptide.tolist(), g.edge_protein.tolist(),
                                   self.d.tolist()) if v != 0.0}

    @property
    def column_max(self) -> dict[str, float]:
        return dict(zip(self.graph.proteins, self.t.tolist()))


def build_lp(graph: TripartiteGraph, b: Mapping[str, float] | Sequence[float]) -> LpInstance:
    b = as_peptide_array(graph, b)
    if (b < 0).any():
        raise ValueError("peptide abundances must be non-negative")
    b.setflags(write=False)
    return LpInstance(graph, b)


def solve_lp(instance: LpInstance, *, max_iter: int = 10**6) -> LpSolution:
    g = instance.graph
    E, n = g.n_edges, g.n_proteins
    c, A, rhs = instance.standard_form()
    res = simplex.solve(c, A, rhs, basis=instance.crash_basis(), max_iter=max_iter)
    if res.status != simplex.OPTIMAL:
        # unreachable: the crash basis is feasible and the objective is bounded below by 0
        raise RuntimeError(f"unexpected simplex status {res.status}")
    clamp = CLAMP * (float(instance.b.max()) if instance.b.size else 0.0)
    d = res.x[:E].copy()
    d[d < clamp] = 0.0
    t = res.x[E:E + n].copy()
    t[t < clamp] = 0.0
    return LpSolution(g, d, t, float(t.sum()), res.iterations, res.status)


def recover_abundance(solution: LpSolution, b=None) -> AbundanceVector:
    """Protein abundance as the column sums of the distribution matrix."""
    g = solution.graph
    if b is None:
        b = np.bincount(g.edge_peptide, weights=solution.d, minlength=g.n_peptides)
    else:
        b = as_peptide_array(g, b)
    c = np.bincount(g.edge_protein, weights=solution.d, minlength=g.n_proteins)
    return AbundanceVector(g, b, c, LINEAR_PROGRAM)


def _solve_component(args):
    idx, graph, b, max_iter = args
    try:
        return solve_lp(LpInstance(graph, b), max_iter=max_iter)
    except IterationLimit as exc:
        raise IterationLimit(f"component {idx} (first protein {graph.proteins[0]}): {exc}")


def solve_per_component(graph: TripartiteGraph, b, *, workers: int | None = 1,
                        max_iter: int = 10**6) -> LpSolution:
    """Solve each connected component separately and merge.

    The objective and constraints separate over components, so the merged
    solution is optimal for the whole graph.  ``workers=None`` uses one
    process per CPU.
    """
    b = as_peptide_array(graph, b)
    components = connected_components(graph)
    if len(components) <= 1:
        return solve_lp(build_lp(graph, b), max_iter=max_iter)

    pep_index = {p: j for j, p in enumerate(graph.peptides)}
    edge_index = {(j, k): e for e, (j, k) in
                  enumerate(zip(graph.edge_peptide.tolist(), graph.edge_protein.tolist()))}
    prot_index = {p: k for k, p in enumerate(graph.proteins)}
    jobs = []
    for idx, comp in enumerate(components):
        local_b = b[[pep_index[p] for p in comp.peptides]]
        jobs.append((idx, comp, local_b, max_iter))

    if workers is None:
        workers = os.cpu_count() or 1
    if workers > 1:
        chunk = max(1, len(jobs) // (workers * 8))
        with ProcessPoolExecutor(max_workers=workers) as pool:
            solutions = list(pool.map(_solve_component, jobs, chunksize=chunk))
    else:
        solutions = [_solve_component(job) for job in jobs]

    d = np.zeros(graph.n_edges)
    t = np.zeros(graph.n_proteins)
    iterations = 0
    for comp, sol in zip(components, solutions):
        pep_g = [pep_index[p] for p in comp.peptides]
        prot_g = [prot_index[p] for p in comp.proteins]
        e_g = [edge_index[(pep_g[j], prot_g[k])] for j, k in
               zip(comp.edge_peptide.tolist(), comp.edge_protein.tolist())]
        d[e_g] = sol.d
        t[prot_g] = sol.t
        iterations += sol.iterations
    objective = float(sum(sol.objective for sol in solutions))
    return LpSolution(graph, d, t, objective, iterations, simplex.OPTIMAL)


def check_feasible(solution: LpSolution, b) -> float:
    """Largest violation of the peptide row sums and coupling constraints."""
    g = solution.graph
    b = as_peptide_array(g, b)
    rows = np.bincount(g.edge_peptide, weights=solution.d, minlength=g.n_peptides)
    worst = float(np.abs(rows - b).max()) if g.n_peptides else 0.0
    if g.n_edges:
        worst = max(worst, float((solution.d - solution.t[g.edge_protein]).max()),
                    float(-solution.d.min()))
    return worst
