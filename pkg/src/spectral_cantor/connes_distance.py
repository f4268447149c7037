"""The Connes distance d(phi, psi) = sup{|phi(a) - psi(a)| : ||[D, a]|| <= 1}.

Computed on the level-N truncation as a convex program over self-adjoint
elements modulo constants, with a feasible witness (lower certificate) and a
dual or analytic upper bound.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from scipy import linalg
from scipy.optimize import minimize

from ._seminorm_opt import maximize_over_ball
from .cantor_points import CantorPoint, as_gamma, first_disagreement
from .dirac import beta_sequence
from .gns_cantor import (
    AlgebraElement,
    TruncatedTriple,
    commutator_norm,
    conditional_expectation,
    symmetry,
    walsh_levels,
)

__all__ = [
    "State",
    "DistanceResult",
    "point_state",
    "uniform_state",
    "random_state",
    "connes_distance",
    "lower_bound_witness",
    "analytic_upper_bound",
    "point_pair_representative",
    "point_distance_profile",
    "DiameterReport",
    "diameter_bound_check",
    "brute_force_oracle",
]


@dataclass(frozen=True, eq=False)
class State:
    """A probability vector over the 2**N atoms of level N."""

    weights: np.ndarray

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=float)
        if w.ndim != 1 or w.size & (w.size - 1) or w.size < 2:
            raise ValueError("weights must be a 1-d array of length 2**N, N >= 1")
        if np.any(w < 0) or abs(w.sum() - 1.0) > 1e-12:
            raise ValueError("weights must be nonnegative and sum to 1")
        object.__setattr__(self, "weights", w)

    @property
    def N(self) -> int:
        return self.weights.size.bit_length() - 1

    @property
    def point(self) -> int | None:
        """Atom code if this is a point evaluation, else ``None``."""
        k = int(np.argmax(self.weights))
        return k if self.weights[k] == 1.0 else None

    def __call__(self, a) -> float:
        v = a.values if isinstance(a, AlgebraElement) else np.asarray(a)
        return float(self.weights @ v)

    def lift(self, N: int) -> "State":
        """The same measure at a finer level, spread uniformly over each atom."""
        k = N - self.N
        if k < 0:
            raise ValueError("cannot lift to a coarser level")
        w = np.zeros(1 << N)
        w.reshape(1 << k, -1)[:] = self.weights / (1 << k)
        return State(w)


def point_state(x, N: int) -> State:
    """Point evaluation chi_x; ``x`` is a CantorPoint, bit string or atom code."""
    if isinstance(x, str):
        x = CantorPoint.parse(x)
    code = x.code if isinstance(x, CantorPoint) else int(x)
    if code >> N:
        raise ValueError(f"point {x!r} is not supported within level {N}")
    w = np.zeros(1 << N)
    w[code] = 1.0
    return State(w)


def uniform_state(N: int) -> State:
    """The trace tau (symmetric product measure)."""
    return State(np.full(1 << N, 1.0 / (1 << N)))


def random_state(N: int, rng: np.random.Generator) -> State:
    w = rng.dirichlet(np.ones(1 << N))
    w = w / w.sum()
    w[-1] = 1.0 - w[:-1].sum()
    if w[-1] < 0:
        w[-1] = 0.0
        w = w / w.sum()
    return State(w)


@dataclass
class DistanceResult:
    """Certified bracket ``value <= d(phi, psi) <= upper_bound``.

    ``value`` equals ``(phi - psi)(witness)`` and ``witness`` satisfies
    ``||[D, witness]|| <= 1``.
    """

    value: float
    witness: AlgebraElement
    upper_bound: float
    iterations: int
    converged: bool
    dual_bound: float = math.inf
    analytic_bound: float = math.inf

    def as_dict(self) -> dict:
        return {
            "value": self.value,
            "upper_bound": self.upper_bound,
            "dual_bound": self.dual_bound,
            "analytic_bound": self.analytic_bound,
            "iterations": self.iterations,
            "converged": self.converged,
        }


@lru_cache(maxsize=16)
def _structure(N: int, alpha_key: tuple):
    """Index pattern and eigenvalue differences of the Walsh-basis commutator."""
    alpha = np.array(alpha_key)
    lev = walsh_levels(N)
    diag = alpha[lev]
    idx = np.arange(1 << N)
    X = idx[:, None] ^ idx[None, :]
    dA = diag[:, None] - diag[None, :]
    frob2 = np.bincount(X.ravel(), weights=(dA * dA).ravel(), minlength=1 << N)
    return X, dA, frob2


def lower_bound_witness(g, m: int, level: int | None = None) -> AlgebraElement:
    """gamma^(m-1) s_m, an element of commutator norm exactly 1 for the geometric spec."""
    gamma = as_gamma(g).gamma
    if m < 1:
        raise ValueError("m must be at least 1")
    level = m if level is None else level
    return symmetry(m, level) * gamma ** (m - 1)


def analytic_upper_bound(t: TruncatedTriple, phi: State, psi: State) -> float:
    """Upper bound on the level-N distance from the tail estimates.

    Point states differing first at coordinate m: 2 sum_{i=m}^N beta_i, which
    for the geometric spec stays below 2 gamma^(m-1) / (1 - gamma)^2.
    Otherwise ||phi - psi||_1 sum_{i<=N} beta_i.
    """
    beta = beta_sequence(t.spec, t.level)
    x, y = phi.point, psi.point
    if x is not None and y is not None:
        if x == y:
            return 0.0
        m = first_disagreement(CantorPoint(x), CantorPoint(y))
        return 2.0 * math.fsum(beta[m - 1:]) if np.all(np.isfinite(beta[m - 1:])) else math.inf
    total = math.fsum(beta) if np.all(np.isfinite(beta)) else math.inf
    return float(np.abs(phi.weights - psi.weights).sum()) * total


def connes_distance(
    t: TruncatedTriple,
    phi: State,
    psi: State,
    *,
    warm_start: AlgebraElement | None = None,
    rtol: float = 1e-7,
    max_iter: int = 20000,
) -> DistanceResult:
    """Certified Connes distance between two states of the level-N algebra.

    The search runs over Walsh coefficients of ``a`` with the constant term
    fixed to zero. For point states of a geometric spec the start is the
    element gamma^(m-1) s_m; ``warm_start`` (for instance the witness from a
    coarser truncation) overrides it and the result is never worse than the
    start.
    """
    N = t.level
    if phi.N != N or psi.N != N:
        raise ValueError("states and triple have different levels")
    delta = phi.weights - psi.weights
    analytic = analytic_upper_bound(t, phi, psi)
    zero = AlgebraElement(np.zeros(1 << N))
    if not np.any(delta):
        return DistanceResult(0.0, zero, 0.0, 0, True, 0.0, analytic)

    X, dA, frob2 = _structure(N, tuple(t.alpha))
    w_hat = t.to_walsh(delta) * (1 << N)
    w_hat[0] = 0.0
    active = frob2 > 0
    active[0] = False
    if np.any(np.abs(w_hat[~active]) > 1e-14):
        # some s_S commutes with D yet separates the states
        return DistanceResult(math.inf, zero, math.inf, 0, False, math.inf, analytic)
    act = np.flatnonzero(active)
    scale = np.sqrt(frob2[act])
    w = w_hat[act] / scale
    d = 1 << N

    def to_coeffs(x):
        c = np.zeros(d)
        c[act] = x / scale
        return c

    def op(x):
        return dA * to_coeffs(x)[X]

    def adj(G):
        g = np.bincount(X.ravel(), weights=np.real(dA * G).ravel(), minlength=d)
        return g[act] / scale

    x0 = None
    if warm_start is not None:
        ws = warm_start.lift(N) if warm_start.N < N else warm_start
        x0 = t.to_walsh(ws.values)[act] * scale
    elif phi.point is not None and psi.point is not None and t.spec.kind == "geometric":
        m = first_disagreement(CantorPoint(phi.point), CantorPoint(psi.point))
        start = lower_bound_witness(t.spec.params["gamma"], m, N)
        x0 = t.to_walsh(start.values)[act] * scale

    res = maximize_over_ball(w, op, adj, x0, rtol=rtol, max_iter=max_iter)
    coeffs = to_coeffs(res.x)
    witness = AlgebraElement(t.from_walsh(coeffs))
    nrm = commutator_norm(t, witness)
    if nrm > 1.0:
        witness = witness / nrm
    value = float(delta @ witness.values)
    if value < 0:
        witness = witness * -1.0
        value = -value
    upper = min(res.upper, analytic)
    upper = max(upper, value)
    return DistanceResult(value, witness, upper, res.iterations, res.converged, res.upper, analytic)


def point_pair_representative(x, y, N: int) -> tuple[int, int]:
    """Canonical pair (0, 2**(m-1)) in the orbit of (x, y) under tree automorphisms.

    Maps of the form x_n -> x_n xor h_n(x_1, ..., x_{n-1}) preserve the
    product measure and every subalgebra A_n, hence commute with D. They act
    transitively on pairs of level-N atoms with the same first disagreement
    index m, so the distance between point states only depends on (m, N).
    """
    cx = x.code if isinstance(x, CantorPoint) else int(x)
    cy = y.code if isinstance(y, CantorPoint) else int(y)
    m = first_disagreement(CantorPoint(cx), CantorPoint(cy))
    if m is None:
        return (0, 0)
    if m > N:
        raise ValueError("points differ beyond the truncation level")
    return (0, 1 << (m - 1))


def point_distance_profile(
    t: TruncatedTriple,
    warm_starts: dict | None = None,
    **kwargs,
) -> dict[int, DistanceResult]:
    """Distances d(chi_0, chi_{e_m}) for m = 1..N, i.e. one per orbit of point pairs."""
    out = {}
    for m in range(1, t.level + 1):
        ws = None if warm_starts is None else warm_starts.get(m)
        out[m] = connes_distance(
            t, point_state(0, t.level), point_state(1 << (m - 1), t.level), warm_start=ws, **kwargs
        )
    return out


@dataclass
class DiameterReport:
    bound: float
    max_sampled: float
    max_refined: float
    refined_upper: float
    tail_max_excess: float
    samples: int
    tail_bounds: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return (
            max(self.max_sampled, self.max_refined) <= self.bound + 1e-7
            and self.tail_max_excess <= 1e-7
        )


def _random_element_in_ball(t: TruncatedTriple, rng) -> AlgebraElement:
    lev = t.walsh_levels
    coeffs = rng.standard_normal(t.atom_count) / (1.0 + np.abs(t.alpha[lev]))
    coeffs[0] = rng.standard_normal()
    a = AlgebraElement(t.from_walsh(coeffs))
    nrm = commutator_norm(t, a)
    return a / nrm if nrm > 0 else a


def diameter_bound_check(t: TruncatedTriple, samples: int = 100, seed=0, **kwargs) -> DiameterReport:
    """Check ||a - tau(a)|| <= sum beta and ||a - pi_n(a)|| <= sum_{j>n} beta over D.

    Besides random elements of D, the supremum of ||a - tau(a)||_inf over D
    is computed directly: it equals max_x d(chi_x, tau), which by the tree
    symmetry is d(chi_0, tau); its optimal witness is included in the tail
    checks.
    """
    beta = beta_sequence(t.spec, t.level)
    if not np.all(np.isfinite(beta)):
        raise ValueError("spec has an infinite beta_n; the diameter bound does not apply")
    tails = [math.fsum(beta[n:]) for n in range(t.level + 1)]
    rng = np.random.default_rng(seed)
    elements = [_random_element_in_ball(t, rng) for _ in range(samples)]
    res = connes_distance(t, point_state(0, t.level), uniform_state(t.level), **kwargs)
    elements.append(res.witness)

    max_sampled = 0.0
    excess = -math.inf
    for i, a in enumerate(elements):
        centred = float(np.max(np.abs(a.values - a.values.mean())))
        if i < samples:
            max_sampled = max(max_sampled, centred)
        for n in range(t.level + 1):
            gap = (a - conditional_expectation(t, a, n)).sup_norm()
            excess = max(excess, gap - tails[n])
    refined = float(np.max(np.abs(res.witness.values - res.witness.values.mean())))
    return DiameterReport(
        bound=tails[0],
        max_sampled=max_sampled,
        max_refined=refined,
        refined_upper=res.upper_bound,
        tail_max_excess=excess,
        samples=samples,
        tail_bounds=tails,
    )


def _dense_commutators(alpha_levels: np.ndarray, N: int, A: np.ndarray) -> np.ndarray:
    """[D, diag(a)] in the atom basis for a batch of atom-value vectors ``A``."""
    d = 1 << N
    H = linalg.hadamard(d).astype(float)
    D = H.T @ np.diag(alpha_levels) @ H / d
    return D[None, :, :] * A[:, None, :] - A[:, :, None] * D[None, :, :]


def brute_force_oracle(t: TruncatedTriple, phi: State, psi: State, grid: int = 400) -> float:
    """Exhaustive search for d(phi, psi) at N <= 2, independent of the main solver.

    The distance is the maximum over directions of the homogeneous ratio
    (phi - psi)(a) / ||[D, a]||. Elements are parametrised by atom values with
    a(0) = 0 (quotient by constants), D is assembled densely from the
    Sylvester-Hadamard matrix, and norms come from batched SVDs. For N = 2 the
    direction sphere is scanned on a ``grid`` x ``grid`` angular grid, refined
    around the best cell, and polished with Nelder-Mead.
    """
    N = t.level
    if N > 2:
        raise ValueError("brute_force_oracle only supports N <= 2")
    delta = phi.weights - psi.weights
    if not np.any(delta):
        return 0.0
    d = 1 << N
    lev = np.array([int(s).bit_length() for s in range(d)])
    alpha_levels = t.alpha[lev]

    def ratio(A):
        C = _dense_commutators(alpha_levels, N, A)
        nrm = np.linalg.norm(C, ord=2, axis=(1, 2))
        num = np.abs(A @ delta)
        with np.errstate(divide="ignore", invalid="ignore"):
            r = np.where(nrm > 0, num / nrm, np.where(num > 0, np.inf, 0.0))
        return r

    if N == 1:
        return float(ratio(np.array([[0.0, 1.0]]))[0])

    def directions(theta, phi_ang):
        st = np.sin(theta)
        return np.stack(
            [np.zeros_like(theta), st * np.cos(phi_ang), st * np.sin(phi_ang), np.cos(theta)], axis=-1
        )

    th = np.linspace(0.0, np.pi, grid)
    ph = np.linspace(0.0, 2 * np.pi, grid, endpoint=False)
    TH, PH = np.meshgrid(th, ph, indexing="ij")
    r = ratio(directions(TH.ravel(), PH.ravel()))
    k = int(np.argmax(r))
    best = float(r[k])
    t0, p0 = TH.ravel()[k], PH.ravel()[k]
    h_t, h_p = np.pi / grid, 2 * np.pi / grid
    for _ in range(4):
        th = np.linspace(t0 - 2 * h_t, t0 + 2 * h_t, 41)
        ph = np.linspace(p0 - 2 * h_p, p0 + 2 * h_p, 41)
        TH, PH = np.meshgrid(th, ph, indexing="ij")
        r = ratio(directions(TH.ravel(), PH.ravel()))
        k = int(np.argmax(r))
        if r[k] >= best:
            best, t0, p0 = float(r[k]), TH.ravel()[k], PH.ravel()[k]
        h_t, h_p = h_t / 10, h_p / 10

    polish = minimize(
        lambda v: -ratio(directions(np.array([v[0]]), np.array([v[1]])))[0],
        np.array([t0, p0]),
        method="Nelder-Mead",
        options={"xatol": 1e-12, "fatol": 1e-14, "maxiter": 4000},
    )
    return max(best, float(-polish.fun))
