"""Level-N truncation of the GNS representation of C(Cantor set).

The Hilbert space is L^2 of the symmetric product measure restricted to the
2**N atoms of level N, i.e. functions of the first N coordinates with inner
product (a, b) = tau(b* a) = 2**-N sum_x a(x) conj(b(x)).

Two orthonormal bases are used:

* the atom basis, normalised point masses ``2**(N/2) 1_{x}``; multiplication
  operators are diagonal here;
* the Walsh basis ``s_S = prod_{i in S} s_i`` with ``s_i = 2 e_i - 1``, indexed
  by bitmasks ``S``; the Dirac operator is diagonal here, with eigenvalue
  ``alpha_{max S}`` on ``s_S`` (``max S`` is ``S.bit_length()``).

Walsh coefficients of a function ``f`` are ``f_hat(S) = tau(s_S f)`` and
``f = sum_S f_hat(S) s_S``.
"""
from __future__ import annotations

import math
import os
from dataclasses import dataclass

import numpy as np
from scipy import linalg
from scipy.sparse.linalg import LinearOperator, eigsh

from .dirac import DiracSpec, eigenvalue_condition_check

__all__ = [
    "DEFAULT_MAX_LEVEL",
    "DENSE_LIMIT",
    "max_level",
    "fwht",
    "walsh_levels",
    "walsh_signs",
    "AlgebraElement",
    "TruncatedTriple",
    "build_triple",
    "symmetry",
    "walsh_function",
    "constant",
    "commutator",
    "commutator_norm",
    "multiplication_matrix",
    "projection_matrix",
    "conditional_expectation",
    "af_estimate_cn",
    "eigenvalue_condition_check",
]

DEFAULT_MAX_LEVEL = 14
DENSE_LIMIT = 4096


def max_level() -> int:
    """Memory cap on N; ``SPECTRAL_CANTOR_MAX_LEVEL`` overrides the default of 14."""
    env = os.environ.get("SPECTRAL_CANTOR_MAX_LEVEL")
    return int(env) if env else DEFAULT_MAX_LEVEL


def fwht(x: np.ndarray) -> np.ndarray:
    """Unnormalised Walsh-Hadamard transform along axis 0 (Sylvester ordering).

    ``fwht(x)[S] = sum_j (-1)**popcount(S & j) x[j]``, computed with the
    in-place butterfly in O(n log n).
    """
    x = np.array(x, copy=True)
    n = x.shape[0]
    if n & (n - 1):
        raise ValueError("length must be a power of two")
    tail = x.shape[1:]
    h = 1
    while h < n:
        y = x.reshape((n // (2 * h), 2, h) + tail)
        a = y[:, 0].copy()
        y[:, 0] += y[:, 1]
        y[:, 1] = a - y[:, 1]
        h *= 2
    return x


def walsh_levels(N: int) -> np.ndarray:
    """``max S`` for every bitmask ``S < 2**N`` (0 for the empty set)."""
    idx = np.arange(1 << N)
    lev = np.zeros(1 << N, dtype=np.int64)
    for k in range(1, N + 1):
        lev[idx >= (1 << (k - 1))] = k
    return lev


def walsh_signs(N: int) -> np.ndarray:
    """(-1)**|S| for every bitmask ``S < 2**N``."""
    sign = np.ones(1 << N)
    for k in range(N):
        sign[(np.arange(1 << N) >> k) & 1 == 1] *= -1
    return sign


@dataclass(frozen=True)
class AlgebraElement:
    """A function on the 2**N atoms of level N, stored by its atom values."""

    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values)
        if v.ndim != 1 or v.size == 0 or v.size & (v.size - 1):
            raise ValueError("values must be a 1-d array whose length is a power of two")
        if not np.iscomplexobj(v):
            v = v.astype(float)
        object.__setattr__(self, "values", v)

    @property
    def N(self) -> int:
        return self.values.size.bit_length() - 1

    @property
    def is_self_adjoint(self) -> bool:
        return not np.iscomplexobj(self.values) or not np.any(self.values.imag)

    @property
    def level(self) -> int:
        """Least n such that the function only depends on the first n coordinates."""
        v = self.values
        for n in range(self.N + 1):
            blocks = v.reshape(-1, 1 << n)
            if np.array_equal(blocks, np.broadcast_to(blocks[0], blocks.shape)):
                return n
        return self.N

    def lift(self, N: int) -> "AlgebraElement":
        """The same function viewed at a finer truncation level ``N``."""
        if N < self.N:
            raise ValueError("cannot lift to a coarser level")
        return AlgebraElement(np.tile(self.values, 1 << (N - self.N)))

    def restrict(self, n: int) -> "AlgebraElement":
        """View at a coarser level ``n``; requires ``self.level <= n``."""
        if self.level > n:
            raise ValueError(f"element has level {self.level} > {n}")
        return AlgebraElement(self.values[: 1 << n].copy())

    def __add__(self, other):
        other = other.values if isinstance(other, AlgebraElement) else other
        return AlgebraElement(self.values + other)

    def __sub__(self, other):
        other = other.values if isinstance(other, AlgebraElement) else other
        return AlgebraElement(self.values - other)

    def __mul__(self, c):
        if isinstance(c, AlgebraElement):
            return AlgebraElement(self.values * c.values)
        return AlgebraElement(self.values * c)

    __rmul__ = __mul__

    def __truediv__(self, c):
        return AlgebraElement(self.values / c)

    def sup_norm(self) -> float:
        return float(np.max(np.abs(self.values)))

    def trace(self) -> complex | float:
        """tau(a), the mean over atoms."""
        return self.values.mean()


def _values(a, N: int | None = None) -> np.ndarray:
    v = a.values if isinstance(a, AlgebraElement) else np.asarray(a)
    if N is not None and v.size != 1 << N:
        raise ValueError(f"element has {v.size} atom values, triple has {1 << N}")
    return v


def symmetry(n: int, N: int) -> AlgebraElement:
    """s_n = 2 e_n - 1 at truncation level N."""
    if not 1 <= n <= N:
        raise ValueError(f"need 1 <= n <= N, got n={n}, N={N}")
    x = np.arange(1 << N)
    return AlgebraElement(2.0 * ((x >> (n - 1)) & 1) - 1.0)


def walsh_function(S: int, N: int) -> AlgebraElement:
    """s_S for the coordinate set encoded by bitmask ``S``."""
    if S >> N:
        raise ValueError("S uses coordinates beyond N")
    x = np.arange(1 << N)
    ones = np.zeros(1 << N, dtype=np.int64)
    for k in range(N):
        if (S >> k) & 1:
            ones += 1 - ((x >> k) & 1)
    return AlgebraElement((-1.0) ** ones)


def constant(c: float, N: int) -> AlgebraElement:
    return AlgebraElement(np.full(1 << N, float(c)))


@dataclass(frozen=True, eq=False)
class TruncatedTriple:
    """Level-N data: Hilbert space of dimension 2**N, the Dirac diagonal, basis maps."""

    level: int
    spec: DiracSpec
    alpha: np.ndarray
    dirac_diag: np.ndarray

    @property
    def atom_count(self) -> int:
        return 1 << self.level

    @property
    def walsh_levels(self) -> np.ndarray:
        return walsh_levels(self.level)

    def to_walsh(self, a) -> np.ndarray:
        """Walsh coefficients tau(s_S a)."""
        v = _values(a, self.level)
        return walsh_signs(self.level) * fwht(v) / self.atom_count

    def from_walsh(self, coeffs) -> np.ndarray:
        """Atom values of sum_S coeffs[S] s_S."""
        c = np.asarray(coeffs)
        if c.shape[0] != self.atom_count:
            raise ValueError("coefficient vector has the wrong length")
        return fwht(walsh_signs(self.level) * c)

    def walsh_matrix(self) -> np.ndarray:
        """Orthogonal change of basis W, atom coordinates -> Walsh coordinates."""
        d = self.atom_count
        H = fwht(np.eye(d))
        return walsh_signs(self.level)[:, None] * H / math.sqrt(d)

    def dirac_matrix(self, basis: str = "walsh") -> np.ndarray:
        D = np.diag(self.dirac_diag)
        if basis == "walsh":
            return D
        W = self.walsh_matrix()
        return W.T @ D @ W


def build_triple(N: int, spec: DiracSpec, max_level_override: int | None = None) -> TruncatedTriple:
    """Assemble the level-N triple for the given eigenvalue spec."""
    if N < 1:
        raise ValueError("level N must be at least 1")
    cap = max_level() if max_level_override is None else max_level_override
    if N > cap:
        raise ValueError(
            f"level {N} exceeds the memory cap {cap}; raise it with SPECTRAL_CANTOR_MAX_LEVEL"
        )
    alpha = spec.eigenvalues(N)
    return TruncatedTriple(N, spec, alpha, alpha[walsh_levels(N)])


def multiplication_matrix(t: TruncatedTriple, a, basis: str = "walsh") -> np.ndarray:
    """Matrix of M_a; in the Walsh basis its (U, T) entry is a_hat(U xor T)."""
    v = _values(a, t.level)
    if basis == "atom":
        return np.diag(v)
    coeffs = t.to_walsh(v)
    idx = np.arange(t.atom_count)
    return coeffs[idx[:, None] ^ idx[None, :]]


def projection_matrix(t: TruncatedTriple, k: int, kind: str = "P", basis: str = "walsh") -> np.ndarray:
    """P_k (onto functions of the first k coordinates) or Q_k = P_k - P_{k-1}."""
    if not 0 <= k <= t.level:
        raise ValueError("k out of range")
    lev = t.walsh_levels
    mask = lev <= k if kind == "P" else lev == k
    M = np.diag(mask.astype(float))
    if basis == "walsh":
        return M
    W = t.walsh_matrix()
    return W.T @ M @ W


def _commutator_walsh(alpha_diag: np.ndarray, coeffs: np.ndarray) -> np.ndarray:
    idx = np.arange(coeffs.shape[0])
    X = idx[:, None] ^ idx[None, :]
    return (alpha_diag[:, None] - alpha_diag[None, :]) * coeffs[X]


def commutator(t: TruncatedTriple, a, basis: str = "walsh") -> np.ndarray:
    """Matrix of [D, M_a], entries (alpha_U - alpha_T) a_hat(U xor T) in the Walsh basis."""
    coeffs = t.to_walsh(_values(a, t.level))
    C = _commutator_walsh(t.dirac_diag, coeffs)
    if basis == "walsh":
        return C
    W = t.walsh_matrix()
    return W.T @ C @ W


def commutator_norm(t: TruncatedTriple, a, *, seed: int = 0) -> float:
    """Operator norm of [D, M_a].

    For ``a`` of level n the commutator vanishes on Q_k H for k > n and
    preserves P_n H, so only the 2**n-dimensional block P_n H is formed.
    Blocks up to ``DENSE_LIMIT`` use a dense symmetric eigensolve of C* C;
    larger ones use Lanczos on matrix-free products.
    """
    v = _values(a, t.level)
    coeffs = t.to_walsh(v)
    nz = np.flatnonzero(coeffs)
    if nz.size == 0 or (nz.size == 1 and nz[0] == 0):
        return 0.0
    n = int(nz.max()).bit_length()
    d = 1 << n
    diag = t.dirac_diag[:d]
    block = coeffs[:d]
    if d <= DENSE_LIMIT:
        C = _commutator_walsh(diag, block)
        G = C.conj().T @ C
        top = linalg.eigh(G, eigvals_only=True, subset_by_index=[d - 1, d - 1])[0]
        return math.sqrt(max(top, 0.0))

    sign = walsh_signs(n)
    vals = v[:d]

    def apply(x, values):
        # D (a x) - a (D x), products taken in the atom picture
        ax = sign * fwht(values * fwht(sign * x)) / d
        xd = diag * x
        axd = sign * fwht(values * fwht(sign * xd)) / d
        return diag * ax - axd

    def matvec(x):
        # C* = -[D, M_conj(a)]
        return -apply(apply(np.ravel(x), vals), np.conj(vals))

    dtype = complex if np.iscomplexobj(vals) else float
    op = LinearOperator((d, d), matvec=matvec, dtype=dtype)
    v0 = np.random.default_rng(seed).standard_normal(d)
    top = eigsh(op, k=1, which="LA", tol=1e-10, v0=v0, return_eigenvectors=False)[0]
    return math.sqrt(max(float(np.real(top)), 0.0))


def conditional_expectation(t: TruncatedTriple, a, k: int) -> AlgebraElement:
    """pi_k(a): average of ``a`` over coordinates k+1..N."""
    if not 0 <= k <= t.level:
        raise ValueError(f"k must lie in [0, {t.level}], got {k}")
    v = _values(a, t.level)
    mean = v.reshape(-1, 1 << k).mean(axis=0)
    return AlgebraElement(np.tile(mean, 1 << (t.level - k)))


def af_estimate_cn(t: TruncatedTriple, k: int) -> float:
    """Best constant c_k with ||b||_inf <= c_k ||b||_2 on the range of pi_k - pi_{k-1}.

    The range consists of functions g(x_1..x_{k-1}) s_k. The maximum ratio is
    attained at g = indicator of one level-(k-1) atom; all such witnesses are
    evaluated and the largest ratio returned (it equals 2**((k-1)/2)).
    """
    if not 1 <= k <= t.level:
        raise ValueError(f"k must lie in [1, {t.level}], got {k}")
    x = np.arange(1 << k)
    s_k = 2.0 * ((x >> (k - 1)) & 1) - 1.0
    low = x & ((1 << (k - 1)) - 1)
    best = 0.0
    chunk = 64
    for start in range(0, 1 << (k - 1), chunk):
        atoms = np.arange(start, min(start + chunk, 1 << (k - 1)))
        b = (low[None, :] == atoms[:, None]) * s_k[None, :]
        sup = np.max(np.abs(b), axis=1)
        l2 = np.sqrt(np.mean(b * b, axis=1))
        best = max(best, float(np.max(sup / l2)))
    return best
