"""Maximise a linear functional over the unit ball of a matrix seminorm.

Problem: maximise <w, x> subject to ||op(x)|| <= 1, where ``op`` is linear
into matrices and ||.|| is the operator norm. Since the objective and the
ball are homogeneous this equals the maximum of the ratio
<w, x> / ||op(x)||; every iterate is pulled back to the boundary of the ball
by radial rescaling, which is exact along rays from 0.

The operator norm is replaced by the log-sum-exp smoothing of the singular
values, f_mu >= ||.||, whose gradient is sum_i p_i u_i v_i^* (softmax weights
over the top of the spectrum, i.e. a smoothed constraint normal). The
smoothed ratio is ascended with L-BFGS; mu is then reduced tenfold.

Every stage produces a certified bracket:

* lower: <w, x> / ||op(x)|| for the current x (exact, feasible witness);
* upper: ||Z||_* for a matrix Z with adj(Z) = w exactly, built from the
  smoothed normal plus a Gram correction. Weak duality gives
  <w, x> = Re<Z, op(x)> <= ||Z||_* ||op(x)||.

Variables are expected to be pre-scaled so that the Gram operator adj(op(.))
is the identity.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy import linalg
from scipy.optimize import minimize


@dataclass
class BallMaxResult:
    x: np.ndarray
    lower: float
    upper: float
    iterations: int
    converged: bool


# softmax weights below exp(-CUTOFF) are dropped from the smoothed norm
CUTOFF = 46.0


def _spectrum(M: np.ndarray, top: int | None = None, gram: np.ndarray | None = None):
    """Singular values (ascending) and right/left singular vectors via eigh(M* M).

    With ``top`` only the largest ``top`` singular triplets are computed.
    """
    A = M.conj().T @ M if gram is None else gram
    n = A.shape[0]
    if top is None or top >= n:
        ev, V = linalg.eigh(A)
    else:
        ev, V = linalg.eigh(A, subset_by_index=[n - top, n - 1])
    s = np.sqrt(np.clip(ev, 0.0, None))
    U = M @ V
    nz = s > 1e-13 * max(s[-1], 1e-300)
    U[:, nz] /= s[nz]
    U[:, ~nz] = 0.0
    return s, U, V


def _smoothed(M: np.ndarray, mu: float, full: bool = False):
    """Log-sum-exp of the singular values at temperature mu, and its gradient.

    Only the singular values within CUTOFF * mu of the largest are computed;
    the omitted terms change the value by less than n mu exp(-CUTOFF).
    ``full`` computes the whole spectrum (more accurate vectors in clusters).
    """
    A = M.conj().T @ M
    n = A.shape[0]
    top = n if full else min(n, 8)
    while True:
        s, U, V = _spectrum(M, top, A)
        if top >= n or s[0] < s[-1] - CUTOFF * mu:
            break
        top = min(n, 4 * top)
    smax = s[-1]
    z = np.exp((s - smax) / mu)
    Z = z.sum()
    p = z / Z
    G = (U * p) @ V.conj().T
    return smax + mu * math.log(Z), G, smax


def _norm(M: np.ndarray) -> float:
    return float(_spectrum(M, 1)[0][-1])


def maximize_over_ball(
    w: np.ndarray,
    op: Callable[[np.ndarray], np.ndarray],
    adj: Callable[[np.ndarray], np.ndarray],
    x0: np.ndarray | None = None,
    *,
    rtol: float = 1e-7,
    max_iter: int = 20000,
    mu0: float = 0.1,
    mu_min: float = 1e-10,
    stage_iter: int = 500,
) -> BallMaxResult:
    """Certified maximisation of <w, x> over {x : ||op(x)|| <= 1}.

    ``adj`` must satisfy <adj(G), x> = Re<G, op(x)>, and adj(op(x)) = x.
    """
    w = np.asarray(w, dtype=float)
    if not np.any(w):
        return BallMaxResult(np.zeros_like(w), 0.0, 0.0, 0, True)
    x = w.copy() if x0 is None else np.asarray(x0, dtype=float).copy()
    if w @ x < 0:
        x = -x
    if w @ x <= 0 or not np.any(x):
        x = w.copy()

    def certify(x):
        nrm = _norm(op(x))
        if nrm == 0:
            return -math.inf, x
        xs = x / nrm
        return float(w @ xs), xs

    best_lower, best_x = certify(x)
    x = best_x
    best_upper = math.inf
    iterations = 0
    mu = mu0
    converged = False
    while True:
        def neg_ratio(y, mu=mu):
            f, G, _ = _smoothed(op(y), mu)
            val = w @ y
            grad = (w * f - val * adj(G)) / (f * f)
            return -val / f, -grad

        budget = min(stage_iter, max_iter - iterations)
        if budget <= 0:
            break
        res = minimize(
            neg_ratio, x, jac=True, method="L-BFGS-B",
            options={"maxiter": budget, "gtol": 1e-14, "ftol": 1e-16},
        )
        iterations += max(int(res.nit), 1)
        lower, xs = certify(res.x)
        if lower > best_lower:
            best_lower, best_x = lower, xs
        x = best_x

        # dual certificate from the smoothed normal at the best point
        _, G, _ = _smoothed(op(best_x), mu, full=True)
        g = adj(G)
        gg = g @ g
        c = (w @ g) / gg if gg > 0 else 0.0
        Z = c * G + op(w - c * g)
        upper = float(np.sum(linalg.svdvals(Z)))
        best_upper = min(best_upper, upper)
        if best_upper - best_lower <= rtol * abs(best_lower):
            converged = True
            break
        if mu <= mu_min:
            break
        mu /= 10.0
    return BallMaxResult(best_x, best_lower, best_upper, iterations, converged)
