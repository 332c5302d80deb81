"""Revised primal simplex with Bland's pivoting rule.

Solves ``min c @ x  s.t.  A @ x == b, x >= 0`` for sparse ``A``.  A feasible
starting basis may be supplied; otherwise a phase-1 problem with one
artificial variable per row is solved first.

Bland's rule (smallest-index entering variable, smallest-index leaving
variable among ratio ties) guarantees termination on degenerate problems, and
together with a fixed column order makes the returned vertex deterministic.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
from scipy.sparse.linalg import splu

from .errors import IterationLimit

LOGGER = logging.getLogger(__name__)

OPTIMAL = "optimal"
INFEASIBLE = "infeasible"
UNBOUNDED = "unbounded"

# above this many rows the basis is kept as a sparse LU plus eta file
DENSE_BASIS_LIMIT = 1500
REFACTOR_EVERY = 64


@dataclass
class SimplexResult:
    x: np.ndarray
    objective: float
    basis: np.ndarray
    iterations: int
    status: str


class _DenseBasis:
    """Explicit basis inverse with product-form rank-one updates."""

    def __init__(self, B: sp.spmatrix):
        self.inv = np.linalg.inv(B.toarray())

    def ftran(self, v: np.ndarray) -> np.ndarray:
        return self.inv @ v

    def btran(self, v: np.ndarray) -> np.ndarray:
        return v @ self.inv

    def update(self, r: int, alpha: np.ndarray) -> None:
        row = self.inv[r] / alpha[r]
        self.inv -= np.outer(alpha, row)
        self.inv[r] = row


class _SparseBasis:
    """Sparse LU of the last refactored basis plus a list of eta columns."""

    def __init__(self, B: sp.spmatrix):
        self.lu = splu(sp.csc_matrix(B))
        self.etas: list[tuple[int, np.ndarray, np.ndarray, float]] = []

    def ftran(self, v: np.ndarray) -> np.ndarray:
        x = self.lu.solve(np.asarray(v, dtype=float))
        for r, idx, w, wr in self.etas:
            xr = x[r] / wr
            if xr != 0.0:
                x[idx] -= w * xr
            x[r] = xr
        return x

    def btran(self, v: np.ndarray) -> np.ndarray:
        u = np.array(v, dtype=float)
        for r, idx, w, wr in reversed(self.etas):
            u[r] = (u[r] - u[idx] @ w) / wr
        return self.lu.solve(u, trans="T")

    def update(self, r: int, alpha: np.ndarray) -> None:
        idx = np.flatnonzero(alpha)
        idx = idx[idx != r]
        self.etas.append((r, idx, alpha[idx].copy(), float(alpha[r])))


def _factor(B: sp.spmatrix):
    if B.shape[0] <= DENSE_BASIS_LIMIT:
        return _DenseBasis(B)
    return _SparseBasis(B)


def _iterate(c, A, b, basis, *, max_iter, opt_tol, piv_tol, zero_tol, allowed=None):
    """Run Bland-rule pivots from a primal feasible ``basis`` (modified in place).

    ``allowed`` optionally masks which columns may enter the basis.
    Returns (status, iterations).
    """
    n_rows, n_cols = A.shape
    AT = A.T.tocsr()
    is_basic = np.zeros(n_cols, dtype=bool)
    is_basic[basis] = True
    blocked = ~allowed if allowed is not None else np.zeros(n_cols, dtype=bool)

    factor = _factor(A[:, basis])
    x_b = factor.ftran(b)
    x_b[np.abs(x_b) <= zero_tol] = 0.0
    since_refactor = 0
    it = 0
    while True:
        y = factor.btran(c[basis])
        rc = c - AT @ y
        candidates = (rc < -opt_tol) & ~is_basic & ~blocked
        if not candidates.any():
            return OPTIMAL, it
        if it >= max_iter:
            raise IterationLimit(f"simplex exceeded {max_iter} pivots")
        q = int(np.argmax(candidates))

        col = A[:, q].toarray().ravel()
        alpha = factor.ftran(col)
        rows = np.flatnonzero(alpha > piv_tol)
        if rows.size == 0:
            return UNBOUNDED, it
        ratios = x_b[rows] / alpha[rows]
        theta = ratios.min()
        if theta > 0:
            ties = rows[ratios <= theta * (1.0 + 1e-12)]
        else:
            ties = rows[ratios <= 0.0]
        r = int(ties[np.argmin(basis[ties])])

        x_b -= theta * alpha
        x_b[r] = theta
        x_b[np.abs(x_b) <= zero_tol] = 0.0
        if (x_b < 0).any():
            x_b[x_b < 0] = 0.0

        is_basic[basis[r]] = False
        is_basic[q] = True
        basis[r] = q
        it += 1
        since_refactor += 1
        if since_refactor >= REFACTOR_EVERY:
            factor = _factor(A[:, basis])
            x_b = factor.ftran(b)
            x_b[np.abs(x_b) <= zero_tol] = 0.0
            x_b[x_b < 0] = 0.0
            since_refactor = 0
        else:
            factor.update(r, alpha)


def _zero_tol(b: np.ndarray) -> float:
    scale = float(np.abs(b).max()) if b.size else 0.0
    return 1e-11 * (scale if scale > 0 else 1.0)


def solve(c, A, b, basis=None, *, max_iter: int = 10**6, opt_tol: float = 1e-8,
          piv_tol: float = 1e-9) -> SimplexResult:
    """Minimize ``c @ x`` subject to ``A @ x == b``, ``x >= 0``.

    ``basis`` lists one column index per row forming a primal feasible basis.
    If omitted, phase 1 finds one (or reports infeasibility).
    """
    c = np.asarray(c, dtype=float)
    b = np.asarray(b, dtype=float)
    A = sp.csc_matrix(A, dtype=float)
    n_rows, n_cols = A.shape
    zero_tol = _zero_tol(b)
    iterations = 0

    if n_rows == 0:
        x = np.zeros(n_cols)
        if (c < 0).any():
            return SimplexResult(x, float("-inf"), np.array([], dtype=np.int64), 0, UNBOUNDED)
        return SimplexResult(x, 0.0, np.array([], dtype=np.int64), 0, OPTIMAL)

    if basis is None:
        phase1 = _phase_one(A, b, max_iter=max_iter, opt_tol=opt_tol, piv_tol=piv_tol,
                            zero_tol=zero_tol)
        if phase1 is None:
            return SimplexResult(np.zeros(n_cols), float("nan"),
                                 np.array([], dtype=np.int64), 0, INFEASIBLE)
        A, b, basis, iterations = phase1
    basis = np.array(basis, dtype=np.int64)

    status, it = _iterate(c, A, b, basis, max_iter=max_iter - iterations, opt_tol=opt_tol,
                          piv_tol=piv_tol, zero_tol=zero_tol)
    iterations += it
    x = np.zeros(n_cols)
    # fresh solve for the final basic values; stale updates are discarded
    x_b = _factor(A[:, basis]).ftran(b)
    x_b[np.abs(x_b) <= zero_tol] = 0.0
    x[basis] = x_b
    objective = float(c @ x) if status == OPTIMAL else float("-inf")
    return SimplexResult(x, objective, basis, iterations, status)


def _phase_one(A, b, *, max_iter, opt_tol, piv_tol, zero_tol):
    """Find a feasible basis; returns (A, b, basis, iterations) or None.

    Rows found to be redundant are dropped from the returned system.
    """
    n_rows, n_cols = A.shape
    sign = np.where(b < 0, -1.0, 1.0)
    A = sp.diags(sign) @ A
    b = b * sign
    aux = sp.hstack([A, sp.identity(n_rows)], format="csc")
    cost = np.r_[np.zeros(n_cols), np.ones(n_rows)]
    basis = np.arange(n_cols, n_cols + n_rows)
    _, iterations = _iterate(cost, aux, b, basis, max_iter=max_iter, opt_tol=opt_tol,
                             piv_tol=piv_tol, zero_tol=zero_tol)
    x_b = _factor(aux[:, basis]).ftran(b)
    infeas = float(x_b[basis >= n_cols].sum())
    if infeas > 1e-8 * max(1.0, float(np.abs(b).max())):
        return None

    # pivot remaining zero-level artificials out of the basis
    keep_rows = np.ones(n_rows, dtype=bool)
    for r in range(n_rows):
        if basis[r] < n_cols:
            continue
        factor = _factor(aux[:, basis])
        e = np.zeros(n_rows)
        e[r] = 1.0
        row = factor.btran(e) @ aux[:, :n_cols]
        row = np.asarray(row).ravel()
        row[basis[basis < n_cols]] = 0.0
        cand = np.flatnonzero(np.abs(row) > piv_tol)
        if cand.size:
            basis[r] = int(cand[0])
        else:
            keep_rows[r] = False
    if not keep_rows.all():
        LOGGER.debug("phase 1 dropped %d redundant rows", int((~keep_rows).sum()))
    A = A[keep_rows]
    return A.tocsc(), b[keep_rows], basis[keep_rows], iterations
