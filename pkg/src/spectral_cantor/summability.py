"""Summability of Dirac operators: traces of |D|^-s and (1 + D^2)^(-p/2).

Partial sums use compensated summation (``math.fsum``). Divergence cannot be
seen from a finite partial sum, so each trace also reports the ratio of the
last two terms and a verdict based on it.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence, Union

import numpy as np

from .cantor_points import as_gamma
from .dirac import DiracSpec

__all__ = [
    "UhfParams",
    "TraceResult",
    "cantor_multiplicity",
    "uhf_multiplicity",
    "trace_power",
    "trace_resolvent",
    "geometric_trace_closed_form",
    "summability_threshold",
    "uhf_dirac_specs",
    "af_recipe_spec",
    "uhf_cn",
]

Mult = Union[Sequence[float], Callable[[int], float]]

# ratios within this distance of 1 count as non-decaying
RATIO_TOL = 1e-12


@dataclass(frozen=True)
class UhfParams:
    """Block sizes d_1, d_2, ... of a UHF algebra M_{d_1} (x) M_{d_2} (x) ..."""

    d_series: tuple

    def __post_init__(self):
        d = tuple(int(v) for v in self.d_series)
        if not d:
            raise ValueError("d_series must be nonempty")
        if any(v < 2 for v in d):
            raise ValueError("every d_n must be at least 2")
        object.__setattr__(self, "d_series", d)

    @classmethod
    def car(cls, n: int) -> "UhfParams":
        """The CAR algebra, d_n = 2."""
        return cls((2,) * n)

    @property
    def m_series(self) -> tuple:
        """Cumulative sizes m_n = d_1 ... d_n (exact integers)."""
        return tuple(math.prod(self.d_series[:k]) for k in range(1, len(self.d_series) + 1))

    def __len__(self):
        return len(self.d_series)


@dataclass(frozen=True)
class TraceResult:
    partial_sum: float
    term_ratio: float
    verdict: str
    horizon: int

    def as_dict(self) -> dict:
        return {
            "partial_sum": self.partial_sum,
            "term_ratio": self.term_ratio,
            "verdict": self.verdict,
            "horizon": self.horizon,
        }


def cantor_multiplicity(n: int) -> float:
    """dim H_n - dim H_{n-1} for the Cantor algebra: 1 for n = 0, else 2^(n-1)."""
    return 1.0 if n == 0 else math.ldexp(1.0, n - 1)


def uhf_multiplicity(params: UhfParams) -> Callable[[int], float]:
    """n -> m_n^2 - m_{n-1}^2 with m_0 = 1 (and 1 for n = 0)."""
    m = (1,) + params.m_series

    def mult(n: int) -> float:
        if n == 0:
            return 1.0
        if n >= len(m):
            raise ValueError(f"UHF parameters only cover {len(m) - 1} levels")
        return float(min(m[n] ** 2 - m[n - 1] ** 2, m[n] ** 2))

    return mult


def _log_mult(mult: Mult | None, k: int, start: int) -> np.ndarray:
    idx = np.arange(start, k + 1)
    if mult is None:
        # log of the Cantor multiplicities, exact far beyond float range
        return np.where(idx == 0, 0.0, (idx - 1) * math.log(2.0))
    if callable(mult):
        vals = np.array([float(mult(n)) for n in idx])
    else:
        seq = np.asarray(mult, dtype=float)
        if seq.size < k + 1:
            raise ValueError(f"multiplicity sequence has {seq.size} terms, {k + 1} needed (index 0..k)")
        vals = seq[start:k + 1].copy()
    with np.errstate(divide="ignore"):
        return np.log(vals)


def _log_abs_eigenvalues(spec: DiracSpec, k: int) -> np.ndarray:
    """log |alpha_n| for n = 0..k, without overflow for geometric specs."""
    if spec.kind == "geometric":
        n = np.arange(k + 1)
        out = (n - 1.0) * -math.log(spec.params["gamma"]) + math.log(spec.scale)
        out[0] = -math.inf
        return out
    with np.errstate(divide="ignore"):
        return np.log(np.abs(spec.eigenvalues(k)))


def _verdict(terms: np.ndarray) -> tuple[float, str]:
    if terms.size < 2:
        return math.nan, "undetermined"
    if terms[-2] == 0:
        return 0.0, "convergent"
    ratio = float(terms[-1] / terms[-2])
    return ratio, ("divergent" if ratio >= 1.0 - RATIO_TOL else "convergent")


def trace_power(spec: DiracSpec, s: float, horizon: int, mult: Mult | None = None) -> TraceResult:
    """sum_{n=1}^k |alpha_n|^(-s) mult(n), the kernel alpha_0 = 0 excluded.

    ``mult`` defaults to the Cantor multiplicities 2^(n-1). Terms are formed
    in log space so that huge multiplicities and eigenvalues do not overflow
    before they cancel.
    """
    if not s > 0:
        raise ValueError("s must be positive")
    if horizon < 1:
        raise ValueError("horizon must be at least 1")
    log_alpha = _log_abs_eigenvalues(spec, horizon)[1:]
    if np.any(np.isneginf(log_alpha)):
        raise ValueError("eigenvalues beyond index 0 must be nonzero")
    terms = np.exp(_log_mult(mult, horizon, 1) - s * log_alpha)
    ratio, verdict = _verdict(terms)
    return TraceResult(math.fsum(terms), ratio, verdict, horizon)


def trace_resolvent(spec: DiracSpec, p: float, horizon: int, mult: Mult | None = None) -> TraceResult:
    """sum_{n=0}^k (1 + alpha_n^2)^(-p/2) mult(n)."""
    if not p > 0:
        raise ValueError("p must be positive")
    if horizon < 0:
        raise ValueError("horizon must be nonnegative")
    la = _log_abs_eigenvalues(spec, horizon)
    # log(1 + a^2) = 2 log a + log1p(a^-2), stable for huge and tiny a
    log_res = np.where(la > 0, 2 * la + np.log1p(np.exp(-2 * np.maximum(la, 0))),
                       np.log1p(np.exp(2 * np.minimum(la, 0))))
    terms = np.exp(_log_mult(mult, horizon, 0) - 0.5 * p * log_res)
    ratio, verdict = _verdict(terms)
    return TraceResult(math.fsum(terms), ratio, verdict, horizon)


def geometric_trace_closed_form(g, s: float, k: int) -> float:
    """(1 - (2 gamma^s)^k) / (1 - 2 gamma^s), or k when 2 gamma^s = 1."""
    gamma = as_gamma(g).gamma
    r = 2.0 * gamma**s
    if r == 1.0:
        return float(k)
    return -math.expm1(k * math.log(r)) / (1.0 - r)


def summability_threshold(g) -> float:
    """log 2 / (-log gamma): summable exactly for s above this value."""
    return as_gamma(g).dimension


def uhf_dirac_specs(
    params: UhfParams,
    beta: Sequence[float] | None = None,
    s: float | None = None,
) -> dict:
    """The two UHF eigenvalue families.

    * ``sqrt``: alpha_n = sqrt(m_n) / beta_n, for a positive summable beta;
    * ``power``: alpha_n = m_n^s for s > 1.

    Returns a dict with whichever of the two the arguments determine.
    """
    m = params.m_series
    out = {}
    if beta is not None:
        b = np.asarray(beta, dtype=float)
        if b.size < len(m):
            raise ValueError("beta must have one term per UHF level")
        if np.any(b <= 0) or not np.isfinite(b).all():
            raise ValueError("beta must be positive and finite")
        out["sqrt"] = DiracSpec.uhf_sqrt(tuple(b[: len(m)]), tuple(float(v) for v in m))
    if s is not None:
        if not s > 1:
            raise ValueError("the power family requires s > 1")
        out["power"] = DiracSpec.uhf_power(s, tuple(float(v) for v in m))
    if not out:
        raise ValueError("give beta, s or both")
    return out


def af_recipe_spec(p: float, horizon: int, dims: Callable[[int], float] | None = None) -> tuple[DiracSpec, float]:
    """Eigenvalues alpha_n = beta_n^-1 with beta_n = dim(A_n)^-t, t = max(2, 3/p).

    ``dims`` defaults to dim A_n = n + 1. Returns the spec and t.
    """
    if not p > 0:
        raise ValueError("p must be positive")
    t = max(2.0, 3.0 / p)
    dims = dims or (lambda n: n + 1.0)
    beta = tuple(float(dims(n)) ** -t for n in range(1, horizon + 1))
    return DiracSpec.af_general(beta, (1.0,) * horizon), t


def uhf_cn(params: UhfParams, k: int) -> tuple[float, np.ndarray]:
    """sup{||a|| : a in A_k, ||a||_2 <= 1} for the normalised trace on M_{m_k}.

    Equals sqrt(m_k); the witness is the matrix unit e_11 rescaled to unit
    trace-state 2-norm, returned together with the value.
    """
    if not 1 <= k <= len(params):
        raise ValueError("k out of range")
    m = params.m_series[k - 1]
    if m > 4096:
        raise ValueError("m_k too large for an explicit witness")
    a = np.zeros((m, m))
    a[0, 0] = 1.0
    two_norm = math.sqrt(np.trace(a.T @ a) / m)
    a /= two_norm
    return float(np.linalg.norm(a, 2)), a
