"""Eigenvalue sequences for Dirac operators D = sum_n alpha_n Q_n."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence, Union

import numpy as np

from .cantor_points import as_gamma

__all__ = ["DiracSpec", "beta_sequence", "eigenvalue_condition_check"]

Series = Union[Sequence[float], Callable[[int], float]]


def _series_values(series: Series, n: int, name: str) -> np.ndarray:
    """Values series(1..n) as a float array."""
    if callable(series):
        return np.array([float(series(k)) for k in range(1, n + 1)], dtype=float)
    seq = np.asarray(series, dtype=float)
    if seq.size < n:
        raise ValueError(f"{name} provides {seq.size} terms, {n} requested")
    return seq[:n].copy()


def _series_len(series: Series) -> int | None:
    return None if callable(series) else len(series)


@dataclass(frozen=True)
class DiracSpec:
    """An eigenvalue sequence alpha_0 = 0, alpha_1, alpha_2, ...

    Build instances with the class constructors (:meth:`geometric`,
    :meth:`af_general`, :meth:`uhf_sqrt`, :meth:`uhf_power`, :meth:`custom`)
    rather than directly. ``scale`` multiplies every eigenvalue.
    """

    kind: str
    params: dict = field(default_factory=dict, compare=False)
    scale: float = 1.0

    @classmethod
    def geometric(cls, gamma) -> "DiracSpec":
        """alpha_n = gamma^(1-n)."""
        return cls("geometric", {"gamma": as_gamma(gamma).gamma})

    @classmethod
    def af_general(cls, beta: Series, c: Series) -> "DiracSpec":
        """alpha_n = c_n / beta_n for a summable positive beta and constants c_n >= 1."""
        return cls("af_general", {"beta": beta, "c": c})

    @classmethod
    def uhf_sqrt(cls, beta: Series, m: Series) -> "DiracSpec":
        """alpha_n = sqrt(m_n) / beta_n."""
        return cls("uhf_sqrt", {"beta": beta, "m": m})

    @classmethod
    def uhf_power(cls, s: float, m: Series) -> "DiracSpec":
        """alpha_n = m_n ** s."""
        return cls("uhf_power", {"s": float(s), "m": m})

    @classmethod
    def custom(cls, eigenvalues: Sequence[float]) -> "DiracSpec":
        """Explicit list alpha_1, alpha_2, ... (alpha_0 = 0 is implied)."""
        return cls("custom", {"values": tuple(float(v) for v in eigenvalues)})

    def scaled(self, factor: float) -> "DiracSpec":
        if not factor > 0:
            raise ValueError("scale factor must be positive")
        return DiracSpec(self.kind, self.params, self.scale * factor)

    @property
    def horizon(self) -> int | None:
        """Number of nonzero-index eigenvalues available, ``None`` if unbounded."""
        p = self.params
        if self.kind == "geometric":
            return None
        if self.kind == "custom":
            return len(p["values"])
        lens = [
            _series_len(p[key]) for key in ("beta", "c", "m") if key in p
        ]
        lens = [v for v in lens if v is not None]
        return min(lens) if lens else None

    def eigenvalues(self, n: int) -> np.ndarray:
        """Array ``[alpha_0, ..., alpha_n]`` with ``alpha_0 = 0``."""
        if n < 0:
            raise ValueError("n must be nonnegative")
        horizon = self.horizon
        if horizon is not None and n > horizon:
            raise ValueError(f"spec supplies {horizon} eigenvalues, {n} requested")
        p = self.params
        k = np.arange(1, n + 1, dtype=float)
        if self.kind == "geometric":
            vals = p["gamma"] ** (1.0 - k)
        elif self.kind == "af_general":
            vals = _series_values(p["c"], n, "c") / _series_values(p["beta"], n, "beta")
        elif self.kind == "uhf_sqrt":
            vals = np.sqrt(_series_values(p["m"], n, "m")) / _series_values(p["beta"], n, "beta")
        elif self.kind == "uhf_power":
            vals = _series_values(p["m"], n, "m") ** p["s"]
        elif self.kind == "custom":
            vals = np.asarray(p["values"][:n], dtype=float)
        else:
            raise ValueError(f"unknown spec kind {self.kind!r}")
        return np.concatenate([[0.0], self.scale * vals])

    def describe(self) -> dict:
        out = {"kind": self.kind, "scale": self.scale}
        for key, val in self.params.items():
            if isinstance(val, (int, float)):
                out[key] = val
        return out


def beta_sequence(spec: DiracSpec, horizon: int) -> np.ndarray:
    """beta_n = sup_{0 <= i < n} |alpha_n - alpha_i|^{-1} for n = 1..horizon.

    The supremum is taken literally over all earlier eigenvalues. A repeated
    eigenvalue gives ``inf``. Geometric specs use the closed form
    beta_n = gamma^(n-1) / (1 - gamma) / scale, the gap to the neighbouring
    level of the rule gamma^(1-n) extended to n = 0; it agrees with the scan
    for n >= 2 and bounds it at n = 1, so sum beta = (1 - gamma)^-2.
    """
    if spec.kind == "geometric":
        g = spec.params["gamma"]
        return g ** np.arange(horizon, dtype=float) / (1.0 - g) / spec.scale
    alpha = spec.eigenvalues(horizon)
    out = np.empty(horizon)
    for n in range(1, horizon + 1):
        gap = np.min(np.abs(alpha[n] - alpha[:n]))
        out[n - 1] = math.inf if gap == 0 else 1.0 / gap
    return out


def eigenvalue_condition_check(spec: DiracSpec, horizon: int | None = None) -> float:
    """Partial sum of beta_n up to ``horizon``; ``inf`` if some beta_n is infinite.

    Without a horizon the spec's own length is used (required for rules with
    unbounded length).
    """
    if horizon is None:
        horizon = spec.horizon
        if horizon is None:
            raise ValueError("a horizon is required for unbounded eigenvalue rules")
    beta = beta_sequence(spec, horizon)
    if np.isinf(beta).any():
        return math.inf
    return math.fsum(beta)
