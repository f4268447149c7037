"""The flip construction on M_n: a spectral projection recovering the norm metric.

The GNS space of (M_n, tr) is realised as C^n (x) C^n through
a -> sum_ij a_ij e_j (x) e_i, i.e. column-major vectorisation. Under this
identification the flip S(xi (x) eta) = eta (x) xi is the transposition
a -> a^T, left multiplication by a is I (x) a, and with P = (I + S)/2

    ||[P, pi(a)]|| = ||a (x) I - I (x) a|| / 2 = (lambda_max(a) - lambda_min(a)) / 2.

The Connes distance of (M_n, C^n (x) C^n, P) is therefore the norm distance
||phi - psi|| = ||rho_phi - rho_psi||_1 on states.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import linalg

from ._seminorm_opt import maximize_over_ball

__all__ = [
    "MatrixState",
    "random_matrix_state",
    "random_self_adjoint",
    "spread_half",
    "flip_operator",
    "gns_vector",
    "left_multiplication",
    "flip_commutator_norm",
    "projection_commutator_norm",
    "state_norm_distance",
    "norm_witness",
    "gell_mann_basis",
    "maximize_spread_ball",
    "UnitHmReport",
    "verify_unithm",
]

MAX_N = 40  # n^4 entries for the n^2 x n^2 matrices


@dataclass(frozen=True, eq=False)
class MatrixState:
    """A density matrix: positive semidefinite with unit trace."""

    density: np.ndarray

    def __post_init__(self):
        rho = np.asarray(self.density, dtype=complex)
        if rho.ndim != 2 or rho.shape[0] != rho.shape[1]:
            raise ValueError("density must be a square matrix")
        if np.abs(rho - rho.conj().T).max(initial=0.0) > 1e-12:
            raise ValueError("density must be self-adjoint")
        rho = (rho + rho.conj().T) / 2
        if abs(np.trace(rho) - 1.0) > 1e-12:
            raise ValueError("density must have unit trace")
        if linalg.eigvalsh(rho)[0] < -1e-12:
            raise ValueError("density must be positive semidefinite")
        object.__setattr__(self, "density", rho)

    @property
    def n(self) -> int:
        return self.density.shape[0]

    @classmethod
    def pure(cls, vector) -> "MatrixState":
        v = np.asarray(vector, dtype=complex)
        v = v / np.linalg.norm(v)
        return cls(np.outer(v, v.conj()))

    def __call__(self, a) -> complex:
        return complex(np.trace(self.density @ a))


def random_matrix_state(n: int, rng: np.random.Generator, rank: int | None = None) -> MatrixState:
    """Density g g* / tr(g g*) with a complex Gaussian n x rank factor g."""
    rank = n if rank is None else rank
    g = rng.standard_normal((n, rank)) + 1j * rng.standard_normal((n, rank))
    rho = g @ g.conj().T
    rho = (rho + rho.conj().T) / 2
    rho /= np.trace(rho).real
    return MatrixState(rho)


def random_self_adjoint(n: int, rng: np.random.Generator) -> np.ndarray:
    g = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    return (g + g.conj().T) / 2


def _self_adjoint(a, tol: float = 1e-10) -> np.ndarray:
    a = np.asarray(a)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError("expected a square matrix")
    if np.abs(a - a.conj().T).max(initial=0.0) > tol:
        raise ValueError("matrix is not self-adjoint")
    return (a + a.conj().T) / 2


def spread_half(a) -> float:
    """(lambda_max - lambda_min) / 2 = inf over real t of ||a - t I||."""
    ev = linalg.eigvalsh(_self_adjoint(a))
    return float(ev[-1] - ev[0]) / 2.0


def flip_operator(n: int) -> np.ndarray:
    """The permutation matrix of e_i (x) e_j -> e_j (x) e_i on C^(n^2)."""
    i, j = np.divmod(np.arange(n * n), n)
    S = np.zeros((n * n, n * n))
    S[j * n + i, i * n + j] = 1.0
    return S


def gns_vector(a, normalise: bool = False) -> np.ndarray:
    """sum_ij a_ij e_j (x) e_i, optionally scaled by n^(-1/2) for the trace state."""
    a = np.asarray(a)
    v = a.ravel(order="F")
    return v / math.sqrt(a.shape[0]) if normalise else v


def left_multiplication(a) -> np.ndarray:
    """pi(a) = I (x) a, so that pi(a) gns_vector(b) = gns_vector(a b)."""
    a = np.asarray(a)
    return np.kron(np.eye(a.shape[0]), a)


def _check_size(n: int):
    if n > MAX_N:
        raise MemoryError(f"n = {n} exceeds the size cap {MAX_N}")


def flip_commutator_norm(a) -> float:
    """||a (x) I - I (x) a|| / 2, from the n^2 x n^2 Hermitian matrix."""
    a = _self_adjoint(a)
    n = a.shape[0]
    _check_size(n)
    eye = np.eye(n)
    M = 0.5 * (np.kron(a, eye) - np.kron(eye, a))
    ev = linalg.eigvalsh(M)
    return float(max(abs(ev[0]), abs(ev[-1])))


def projection_commutator_norm(a) -> float:
    """||[P, pi(a)]|| with P = (I + S)/2, computed directly."""
    a = _self_adjoint(a)
    n = a.shape[0]
    _check_size(n)
    P = 0.5 * (np.eye(n * n) + flip_operator(n))
    A = left_multiplication(a)
    C = P @ A - A @ P
    # C is anti-Hermitian, so i C is Hermitian
    ev = linalg.eigvalsh(1j * C)
    return float(max(abs(ev[0]), abs(ev[-1])))


def _densities(phi, psi) -> np.ndarray:
    a = phi.density if isinstance(phi, MatrixState) else np.asarray(phi)
    b = psi.density if isinstance(psi, MatrixState) else np.asarray(psi)
    if a.shape != b.shape:
        raise ValueError("states have different sizes")
    return a - b


def state_norm_distance(phi, psi) -> float:
    """||phi - psi|| = trace norm of rho_phi - rho_psi."""
    delta = _self_adjoint(_densities(phi, psi), tol=1e-12)
    return float(np.abs(linalg.eigvalsh(delta)).sum())


def norm_witness(phi, psi) -> np.ndarray:
    """sign(rho_phi - rho_psi), a maximiser with spread_half <= 1."""
    delta = _self_adjoint(_densities(phi, psi), tol=1e-12)
    ev, V = linalg.eigh(delta)
    return (V * np.sign(ev)) @ V.conj().T


def gell_mann_basis(n: int) -> np.ndarray:
    """The n^2 - 1 generalised Gell-Mann matrices, tr(G_k G_l) = 2 delta_kl."""
    out = []
    for j in range(n):
        for k in range(j + 1, n):
            s = np.zeros((n, n), complex)
            s[j, k] = s[k, j] = 1.0
            out.append(s)
            a = np.zeros((n, n), complex)
            a[j, k], a[k, j] = -1j, 1j
            out.append(a)
    for l in range(1, n):
        d = np.zeros((n, n), complex)
        d[np.arange(l), np.arange(l)] = 1.0
        d[l, l] = -l
        out.append(d * math.sqrt(2.0 / (l * (l + 1))))
    return np.array(out)


def maximize_spread_ball(phi, psi, rtol: float = 1e-9) -> tuple[float, float, np.ndarray]:
    """Numerical sup of |tr((rho_phi - rho_psi) a)| over ||[P, pi(a)]|| <= 1.

    Runs the generic certified ball maximiser over traceless Hermitian a in
    the Gell-Mann coordinates; an independent check of the sign witness.
    Returns (lower, upper, a).
    """
    delta = _self_adjoint(_densities(phi, psi), tol=1e-12)
    n = delta.shape[0]
    _check_size(n)
    G = gell_mann_basis(n)
    eye = np.eye(n)
    # rescale so that the Gram operator of op is the identity
    c = math.sqrt(n)
    ops = np.array([0.5 * (np.kron(g, eye) - np.kron(eye, g)) for g in G]) / c
    w = np.array([np.trace(delta @ g).real for g in G]) / c

    def op(x):
        return np.tensordot(x, ops, axes=1)

    def adj(M):
        return np.real(np.einsum("kij,ij->k", ops.conj(), M))

    res = maximize_over_ball(w, op, adj, rtol=rtol)
    a = np.tensordot(res.x / c, G, axes=1)
    return res.lower, res.upper, a


@dataclass
class UnitHmReport:
    n: int
    trials: int
    max_deviation: float
    max_seminorm_gap: float
    tol: float

    @property
    def passed(self) -> bool:
        return self.max_deviation < self.tol and self.max_seminorm_gap < self.tol

    def as_dict(self) -> dict:
        return {
            "n": self.n,
            "trials": self.trials,
            "max_deviation": float(self.max_deviation),
            "max_seminorm_gap": float(self.max_seminorm_gap),
            "pass": bool(self.passed),
        }


def verify_unithm(n: int, trials: int = 20, seed=0, tol: float = 1e-7, identical: bool = False) -> UnitHmReport:
    """Compare ||phi - psi|| with the sup over the unit ball of ||[P, pi(.)]||.

    For each trial the sign witness a is rescaled to ||[P, pi(a)]|| = 1 (the
    commutator computed directly from P and pi(a)); the deviation is
    | ||phi - psi|| - |tr((rho_phi - rho_psi) a)| |. Trials draw from
    independent child seeds of ``seed``.
    """
    if n < 1 or n > 10:
        raise ValueError("n must lie in 1..10")
    dev = 0.0
    gap = 0.0
    for child in np.random.SeedSequence(seed).spawn(trials):
        rng = np.random.default_rng(child)
        phi = random_matrix_state(n, rng)
        psi = phi if identical else random_matrix_state(n, rng)
        dist = state_norm_distance(phi, psi)
        if dist == 0.0:
            continue
        a = norm_witness(phi, psi)
        c = projection_commutator_norm(a)
        gap = max(gap, abs(c - spread_half(a)))
        value = abs(np.trace((phi.density - psi.density) @ a)) / c
        dev = max(dev, abs(dist - value))
    return UnitHmReport(n, trials, dev, gap, tol)
