"""Turn protein abundances into presence probabilities.

The probability of presence is modelled as ``p = 1 / (1 + exp(A*c + B))``.
Presence indicators are unknown, so ``A``, ``B`` and the indicators are fitted
jointly by hard-assignment EM: the E-step marks a protein present when
``A*c + B <= 0``; the M-step minimizes the Bernoulli negative log-likelihood
for those indicators with a damped Newton method.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np
from scipy.special import expit

from .errors import Degenerate, ZeroMaximum

LOGGER = logging.getLogger(__name__)


@dataclass(frozen=True)
class CalibrationModel:
    A: float
    B: float
    iterations: int = 0
    converged: bool = True
    final_nll: float = float("nan")

    def log_odds(self, c) -> np.ndarray:
        """Log-odds of presence, ``-(A*c + B)``."""
        return -(self.A * np.asarray(c, dtype=float) + self.B)

    def probability(self, c) -> np.ndarray:
        return sigmoid_probability(c, self)


def sigmoid_probability(c, model: CalibrationModel):
    # expit(-z) == 1/(1+exp(z)) without overflow
    p = expit(-(model.A * np.asarray(c, dtype=float) + model.B))
    return float(p) if np.ndim(p) == 0 else p


def negative_log_likelihood(C, R, A: float, B: float) -> float:
    C = np.asarray(C, dtype=float)
    R = np.asarray(R, dtype=float)
    z = A * C + B
    return float(np.sum((1.0 - R) * (-z) + np.logaddexp(0.0, z)))


def nll_gradient(C, R, A: float, B: float) -> np.ndarray:
    """Gradient of the negative log-likelihood with respect to (A, B)."""
    C = np.asarray(C, dtype=float)
    resid = np.asarray(R, dtype=float) - expit(-(A * C + B))
    return np.array([resid @ C, resid.sum()])


def _hessian(C, A, B):
    p = expit(-(A * C + B))
    w = p * (1.0 - p)
    return np.array([[w @ (C * C), w @ C], [w @ C, w.sum()]])


def fit_sigmoid(C, R, A: float, B: float, *, max_iter: int = 50,
                grad_tol: float = 1e-8) -> tuple[float, float, float]:
    """M-step: minimize the NLL over (A, B) for fixed indicators.

    Damped Newton with step halving; a ridge is added whenever the Hessian is
    not safely positive definite.  Returns (A, B, nll).
    """
    C = np.asarray(C, dtype=float)
    R = np.asarray(R, dtype=float)
    theta = np.array([A, B], dtype=float)
    f = negative_log_likelihood(C, R, *theta)
    for _ in range(max_iter):
        g = nll_gradient(C, R, *theta)
        if np.max(np.abs(g)) < grad_tol:
            break
        H = _hessian(C, *theta)
        ridge = 0.0
        while True:
            try:
                L = np.linalg.cholesky(H + ridge * np.eye(2))
                step = -np.linalg.solve(L.T, np.linalg.solve(L, g))
                break
            except np.linalg.LinAlgError:
                ridge = max(ridge * 10.0, 1e-12 * (1.0 + np.trace(H)))
        slope = g @ step
        t = 1.0
        for _ in range(60):
            cand = theta + t * step
            f_new = negative_log_likelihood(C, R, *cand)
            if f_new <= f + 1e-4 * t * slope:
                break
            t *= 0.5
        else:
            break
        theta, f = cand, f_new
    return float(theta[0]), float(theta[1]), f


def _e_step(C, A, B) -> np.ndarray:
    return (A * C + B <= 0.0).astype(np.int8)


def em_fit(C, *, max_iter: int = 100) -> tuple[CalibrationModel, np.ndarray]:
    """Fit the sigmoid and presence indicators by hard-assignment EM.

    Starts from a shallow sigmoid centred on the median abundance, or on the
    midpoint of the range when the median split would leave one class empty.
    Stops when the indicators repeat; on a cycle the lowest-likelihood member
    of the cycle is returned.
    """
    C = np.asarray(C, dtype=float)
    if C.size == 0 or C.max() == C.min():
        raise Degenerate("all abundances are equal; no separating sigmoid exists")
    A = -1.0 / (C.max() - C.min())
    B = -A * float(np.median(C))
    R = _e_step(C, A, B)
    if R.min() == R.max():
        B = -A * (C.max() + C.min()) / 2.0
        R = _e_step(C, A, B)
    seen: dict[bytes, tuple[float, float, float, np.ndarray]] = {}
    history: list[bytes] = []
    converged = False
    it = 0
    nll = negative_log_likelihood(C, R, A, B)
    while it < max_iter:
        it += 1
        A, B, nll = fit_sigmoid(C, R, A, B)
        key = R.tobytes()
        seen[key] = (A, B, nll, R)
        history.append(key)
        R_next = _e_step(C, A, B)
        if R_next.min() == R_next.max():
            LOGGER.warning("EM E-step collapsed to a single class; keeping previous fit")
            break
        nkey = R_next.tobytes()
        if nkey == key:
            converged = True
            break
        if nkey in seen:
            cycle = history[history.index(nkey):]
            best = min(cycle, key=lambda k: seen[k][2])
            A, B, nll, R = seen[best]
            LOGGER.info("EM indicators cycle with period %d; keeping lowest NLL", len(cycle))
            break
        R = R_next
    if not A < 0:
        raise Degenerate(f"fitted slope A={A} is not negative")
    model = CalibrationModel(A, B, iterations=it, converged=converged, final_nll=nll)
    return model, R


def normalized_score(C) -> np.ndarray:
    """Abundance divided by the largest abundance."""
    C = np.asarray(C, dtype=float)
    top = C.max() if C.size else 0.0
    if not top > 0:
        raise ZeroMaximum("maximum abundance is not positive")
    return C / top
