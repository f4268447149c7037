"""Embeddings of (Cantor group, delta_gamma) and their metric geometry.

* ``f_gamma`` sends x to the sequence gamma^(n-1) (1 - gamma) x(n) in l^1, an
  isometry for delta_gamma;
* ``F_gamma`` folds that sequence into e_gamma real coordinates, a
  bi-Lipschitz map into Euclidean space;
* the sets D_gamma = {gamma} x f_gamma(C) live in R x l^1 with the norm
  max(|t|, ||x||_1) and are used for Gromov-Hausdorff estimates.

All sequences are truncated at an explicit level L.
"""
from __future__ import annotations

import contextlib
import csv
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import brentq

from .cantor_points import CantorPoint, as_gamma, cover_sum

__all__ = [
    "NORM_TAGS",
    "EmbeddedCloud",
    "DimensionEstimate",
    "e_gamma",
    "embed_f_gamma",
    "embed_F_gamma",
    "F_gamma_lipschitz",
    "f_gamma_codes",
    "F_gamma_codes",
    "cantor_cloud",
    "pairwise_distances",
    "box_dimension",
    "default_scales",
    "hausdorff_bounds",
    "gh_upper_bound",
    "gh_correspondence_distance",
    "gh_truncated_closed_form",
    "MembershipVerdict",
    "universal_space_membership",
    "write_cloud_csv",
    "write_dimension_csv",
]

NORM_TAGS = ("l1", "l2", "linf", "E-max")
MEMORY_BUDGET = 2**27  # float64 entries


def e_gamma(g) -> int:
    """floor(log 2 / (-log gamma)) + 1, taken literally at integer values.

    When log 2 / (-log gamma) is an integer k up to rounding (gamma = 2^(-1/k)),
    the result is k + 1 so that gamma^e < 1/2 strictly.
    """
    t = as_gamma(g).dimension
    k = round(t)
    if abs(t - k) <= 1e-9 * max(1.0, t):
        return int(k) + 1
    return math.floor(t) + 1


def _bits(codes, L: int) -> np.ndarray:
    codes = np.asarray(codes, dtype=np.int64)
    return ((codes[..., None] >> np.arange(L)) & 1).astype(float)


def _check_support(x: CantorPoint, L: int):
    if x.code >> L:
        raise ValueError(f"point {x} has nonzero coordinates beyond level {L}")


def f_gamma_codes(codes, g, L: int) -> np.ndarray:
    """Rows f_gamma(x)(1..L) for an array of integer codes."""
    gamma = as_gamma(g).gamma
    return _bits(codes, L) * (gamma ** np.arange(L) * (1.0 - gamma))


def embed_f_gamma(x: CantorPoint, g, L: int) -> np.ndarray:
    """First L coordinates of f_gamma(x); the dropped l^1 tail is at most gamma^L."""
    _check_support(x, L)
    return f_gamma_codes(np.array([x.code]), g, L)[0]


def F_gamma_codes(codes, g, L: int) -> np.ndarray:
    """Rows F_gamma(x) in R^e for an array of integer codes supported within L.

    Coordinate i collects the bits x(i), x(i + e), x(i + 2e), ... with weights
    q^(p-1) (1 - q), q = gamma^e.
    """
    gamma = as_gamma(g).gamma
    e = e_gamma(gamma)
    q = gamma**e
    bits = _bits(codes, L)
    out = np.zeros(bits.shape[:-1] + (e,))
    for i in range(min(e, L)):
        cols = bits[..., i::e]
        out[..., i] = cols @ (q ** np.arange(cols.shape[-1]) * (1.0 - q))
    return out


def embed_F_gamma(x: CantorPoint, g, L: int) -> np.ndarray:
    """F_gamma(x) in R^(e_gamma), series truncated at level L."""
    _check_support(x, L)
    return F_gamma_codes(np.array([x.code]), g, L)[0]


def F_gamma_lipschitz(g) -> tuple[float, float]:
    """Constants (c, C) with c delta <= ||F(x) - F(y)||_2 <= C delta."""
    gamma = as_gamma(g).gamma
    e = e_gamma(gamma)
    return (1.0 - 2.0 * gamma**e) * gamma, gamma ** (1 - e) / (1.0 - gamma)


@dataclass
class EmbeddedCloud:
    """A finite point cloud with its norm and, optionally, Cantor provenance.

    ``kind`` is ``"f"``, ``"F"`` or ``"D"`` for clouds built by
    :func:`cantor_cloud` (``codes`` then lists the source points) and
    ``None`` for arbitrary data.
    """

    points: np.ndarray
    norm_tag: str = "l2"
    gamma: float | None = None
    level: int | None = None
    codes: np.ndarray | None = None
    kind: str | None = None

    def __post_init__(self):
        self.points = np.atleast_2d(np.asarray(self.points, dtype=float))
        if self.norm_tag not in NORM_TAGS:
            raise ValueError(f"norm_tag must be one of {NORM_TAGS}")
        if not np.isfinite(self.points).all():
            raise ValueError("points must be finite")

    def __len__(self):
        return self.points.shape[0]

    @property
    def has_provenance(self) -> bool:
        return self.codes is not None and self.gamma is not None and self.level is not None

    @property
    def resolution(self) -> float:
        """Sup-norm distance between a truncated point and the full series."""
        if self.gamma is None or self.level is None:
            return 0.0
        g, L = self.gamma, self.level
        if self.kind == "F":
            e = e_gamma(g)
            return (g**e) ** (L // e)
        return g**L * (1.0 - g)


def cantor_cloud(g, L: int, kind: str = "f", codes=None) -> EmbeddedCloud:
    """All 2^L level-L points (or the given codes) under f_gamma, F_gamma or into D_gamma."""
    gamma = as_gamma(g).gamma
    if L < 1:
        raise ValueError("L must be at least 1")
    if codes is None:
        if (1 << L) * max(L, 1) > MEMORY_BUDGET:
            raise MemoryError(f"2^{L} points exceed the memory budget")
        codes = np.arange(1 << L, dtype=np.int64)
    codes = np.asarray(codes, dtype=np.int64)
    if np.any(codes >> L):
        raise ValueError("codes must be supported within level L")
    if kind == "f":
        pts, tag = f_gamma_codes(codes, gamma, L), "l1"
    elif kind == "F":
        pts, tag = F_gamma_codes(codes, gamma, L), "l2"
    elif kind == "D":
        f = f_gamma_codes(codes, gamma, L)
        pts, tag = np.column_stack([np.full(len(codes), gamma), f]), "E-max"
    else:
        raise ValueError("kind must be 'f', 'F' or 'D'")
    return EmbeddedCloud(pts, tag, gamma, L, codes, kind)


def _norm(diff: np.ndarray, tag: str) -> np.ndarray:
    if tag == "l1":
        return np.abs(diff).sum(-1)
    if tag == "l2":
        return np.sqrt((diff * diff).sum(-1))
    if tag == "linf":
        return np.abs(diff).max(-1)
    return np.maximum(np.abs(diff[..., 0]), np.abs(diff[..., 1:]).sum(-1))


def pairwise_distances(cloud: EmbeddedCloud, other: EmbeddedCloud | None = None) -> np.ndarray:
    """Distance matrix under the cloud's norm."""
    other = cloud if other is None else other
    P, Q = cloud.points, other.points
    if P.shape[1] != Q.shape[1]:
        raise ValueError("clouds live in different dimensions")
    if P.shape[0] * Q.shape[0] * P.shape[1] > MEMORY_BUDGET:
        raise MemoryError("pairwise distance tensor exceeds the memory budget")
    return _norm(P[:, None, :] - Q[None, :, :], cloud.norm_tag)


@dataclass
class DimensionEstimate:
    slope: float
    scales_used: np.ndarray
    counts: np.ndarray
    residual: float
    method: str
    intercept: float = 0.0
    table: list = field(default_factory=list)


def default_scales(cloud: EmbeddedCloud, method: str) -> np.ndarray:
    """Scales matched to the self-similarity of a Cantor cloud.

    * interval counting: gamma^n, n = 1..L;
    * grid counting on f_gamma: geometric midpoints (1 - gamma) gamma^(k - 3/2)
      between successive coordinate weights, k = 1..L+1;
    * grid counting on F_gamma: q^j, j = 0..L//e - 1, with q = gamma^e.

    Clouds without provenance get 12 scales over two decades below half the
    bounding-box width.
    """
    if method == "interval" or (method == "grid" and cloud.has_provenance):
        g, L = cloud.gamma, cloud.level
        if method == "interval":
            return g ** np.arange(1, L + 1, dtype=float)
        if cloud.kind == "F":
            e = e_gamma(g)
            return (g**e) ** np.arange(0, L // e, dtype=float)
        return (1.0 - g) * g ** (np.arange(1, L + 2) - 1.5)
    width = float(np.ptp(cloud.points, axis=0).max()) if len(cloud) > 1 else 1.0
    hi = width / 2 if width > 0 else 1.0
    return np.geomspace(hi, hi / 100.0, 12)


def _grid_count(points: np.ndarray, eps: float) -> int:
    """Occupied half-open boxes [k eps, (k+1) eps) of the grid anchored at 0."""
    idx = np.ascontiguousarray(np.floor(points / eps).astype(np.int64))
    rows = idx.view(np.dtype((np.void, idx.dtype.itemsize * idx.shape[1])))
    return int(np.unique(rows).size)


def _interval_level(eps: float, g: float) -> int:
    """Least n >= 0 with gamma^n <= eps, up to a relative tie tolerance of 1e-12."""
    target = eps * (1.0 + 1e-12)
    n = max(0, math.ceil(math.log(target) / math.log(g)))
    while g**n > target:
        n += 1
    while n > 0 and g ** (n - 1) <= target:
        n -= 1
    return n


def box_dimension(cloud: EmbeddedCloud, scales=None, method: str = "auto") -> DimensionEstimate:
    """Least-squares slope of log N(eps) against log(1/eps).

    ``method="interval"`` counts standard intervals of diameter at most eps
    that meet the cloud (exact for Cantor clouds: N(gamma^n) = 2^n when the
    cloud is the full level-L truncation and n <= L). ``method="grid"`` counts
    occupied axis-aligned boxes. ``"auto"`` picks interval counting when the
    cloud has Cantor provenance.

    Raises ``ValueError`` when fewer than 4 scales or less than two decades
    are given, or when a scale is below the truncation resolution.
    """
    if method == "auto":
        method = "interval" if cloud.has_provenance else "grid"
    if method not in ("interval", "grid"):
        raise ValueError("method must be 'auto', 'interval' or 'grid'")
    if method == "interval" and not cloud.has_provenance:
        raise ValueError("interval counting needs a cloud with Cantor provenance")
    scales = default_scales(cloud, method) if scales is None else np.asarray(scales, dtype=float)
    if scales.size < 4 or np.any(scales <= 0):
        raise ValueError("need at least 4 positive scales")
    if math.log10(scales.max() / scales.min()) < 2.0 - 1e-12:
        raise ValueError("scales must span at least two decades")
    if method == "interval":
        floor_scale = cloud.gamma**cloud.level * (1.0 - 1e-12)
        if scales.min() < floor_scale:
            raise ValueError(f"smallest scale {scales.min():.3g} is below gamma^L = {floor_scale:.3g}")
    elif cloud.has_provenance and scales.min() <= cloud.resolution:
        raise ValueError(
            f"smallest scale {scales.min():.3g} is below the truncation resolution {cloud.resolution:.3g}"
        )

    if method == "interval":
        g, L = cloud.gamma, cloud.level
        codes = np.asarray(cloud.codes, dtype=np.int64)
        counts = []
        for eps in scales:
            n = min(_interval_level(eps, g), L)
            counts.append(np.unique(codes & ((1 << n) - 1)).size)
    else:
        counts = [_grid_count(cloud.points, eps) for eps in scales]
    counts = np.asarray(counts, dtype=float)
    x = np.log(1.0 / scales)
    y = np.log(counts)
    if np.ptp(y) == 0:
        slope, intercept, resid = 0.0, float(y[0]), 0.0
    else:
        (slope, intercept), res, *_ = np.polyfit(x, y, 1, full=True)
        resid = float(math.sqrt(res[0] / len(x))) if len(res) else 0.0
    table = [(float(math.log(e)), float(math.log(c))) for e, c in zip(scales, counts)]
    return DimensionEstimate(float(slope), scales, counts, resid, method, float(intercept), table)


def hausdorff_bounds(g, n: int) -> dict:
    """Two-sided bounds (1 - gamma)^t <= H^t(C_gamma) <= 1, t = log 2 / (-log gamma).

    ``cover_sum`` is the t-sum over the level-n standard intervals, the
    certificate for the upper bound (it is 1 for every n).
    """
    G = as_gamma(g)
    t = G.dimension
    return {
        "lower": (1.0 - G.gamma) ** t,
        "upper": 1.0,
        "cover_sum": cover_sum(n, t, G),
        "dimension": t,
        "level": n,
    }


def _ordered(g, mu) -> tuple[float, float]:
    a, b = as_gamma(g).gamma, as_gamma(mu).gamma
    return (a, b) if a >= b else (b, a)


def gh_upper_bound(g, mu) -> float:
    """2 (gamma - mu) / (1 - gamma) for mu <= gamma (arguments are swapped otherwise)."""
    gamma, m = _ordered(g, mu)
    return 2.0 * (gamma - m) / (1.0 - gamma)


def gh_truncated_closed_form(g, mu, L: int) -> float:
    """max(gamma - mu, 2 max_{n<=L} h(n) - h(L)), h(n) = gamma^n - mu^n.

    Total variation of the unimodal sequence h over 0..L, which is the
    matched distance of the all-ones bit pattern.
    """
    gamma, m = _ordered(g, mu)
    n = np.arange(1, L + 1)
    h = gamma**n - m**n
    return max(gamma - m, 2.0 * float(h.max()) - float(h[-1]))


def gh_correspondence_distance(g, mu, L: int) -> float:
    """Hausdorff distance in R x l^1 certified by matching equal bit sequences.

    Both level-L clouds D_gamma and D_mu are built; the value is the largest
    E-max distance between matched points, an upper bound for their
    Hausdorff distance (and hence the Gromov-Hausdorff distance).
    """
    gamma, m = _ordered(g, mu)
    if L < 1:
        raise ValueError("L must be at least 1")
    if gamma == m:
        return 0.0
    A = cantor_cloud(gamma, L, "D")
    B = cantor_cloud(m, L, "D")
    return float(_norm(A.points - B.points, "E-max").max())


@dataclass
class MembershipVerdict:
    member: bool
    branch: str  # "cantor", "e1", "zero" or "outside"
    gamma: float | None = None
    bits: tuple | None = None
    reason: str = ""


def universal_space_membership(v, tol: float = 1e-10) -> MembershipVerdict:
    """Classify a finite vector against E = {e_1} u (union of (1 - gamma) f_gamma(C_gamma)).

    The envelope 0 <= v(n) <= 4/(n+1)^2 is checked first, then the tol-ball
    around e_1. Otherwise gamma is recovered from the first nonzero
    coordinate n0 by solving (1 - gamma)^2 gamma^(n0 - 1) = v(n0) on both
    sides of the maximiser (n0 - 1)/(n0 + 1), and every coordinate is checked
    against {0, (1 - gamma)^2 gamma^(k-1)}.
    """
    v = np.asarray(v, dtype=float).ravel()
    if not np.isfinite(v).all():
        return MembershipVerdict(False, "outside", reason="non-finite entries")
    n = np.arange(1, v.size + 1)
    cap = 4.0 / (n + 1.0) ** 2
    bad = np.flatnonzero((v < -tol) | (v > cap + tol))
    if bad.size:
        k = int(bad[0]) + 1
        return MembershipVerdict(False, "outside", reason=f"envelope violated at coordinate {k}")
    e1 = np.zeros_like(v)
    if v.size:
        e1[0] = 1.0
    if np.abs(v - e1).max(initial=0.0) <= tol:
        return MembershipVerdict(True, "e1", reason="within tol of e_1")
    nz = np.flatnonzero(np.abs(v) > tol)
    if nz.size == 0:
        return MembershipVerdict(True, "zero", bits=(0,) * v.size, reason="0 lies in every C_gamma")

    n0 = int(nz[0]) + 1
    target = v[n0 - 1]

    def g_n(x):
        return (1.0 - x) ** 2 * x ** (n0 - 1) - target

    roots = []
    peak = (n0 - 1) / (n0 + 1)
    lo, hi = 1e-15, 1.0 - 1e-15
    if n0 == 1:
        roots.append(1.0 - math.sqrt(target))
    else:
        if g_n(peak) >= 0:
            if g_n(lo) < 0:
                roots.append(brentq(g_n, lo, peak, xtol=1e-15, rtol=4 * np.finfo(float).eps))
            if g_n(hi) < 0:
                roots.append(brentq(g_n, peak, hi, xtol=1e-15, rtol=4 * np.finfo(float).eps))
    for gamma in roots:
        if not 0.0 < gamma < 1.0:
            continue
        w = (1.0 - gamma) ** 2 * gamma ** (n - 1.0)
        bits = np.where(np.abs(v - w) <= np.abs(v), 1, 0)
        if np.abs(v - bits * w).max() <= tol:
            return MembershipVerdict(
                True, "cantor", float(gamma), tuple(int(b) for b in bits),
                reason=f"(1 - gamma) f_gamma(x) with gamma = {gamma:.12g}",
            )
    return MembershipVerdict(False, "outside", reason="no gamma and bit pattern fit every coordinate")


def _fmt(x: float) -> str:
    return format(float(x), ".17g")


@contextlib.contextmanager
def _open_dest(dest):
    if hasattr(dest, "write"):
        yield dest
    else:
        with open(dest, "w", newline="") as fh:
            yield fh


def write_cloud_csv(cloud: EmbeddedCloud, dest) -> None:
    """One point per row: coordinates, then gamma, level and bit string when known.

    ``dest`` is a path or an open text stream.
    """
    dim = cloud.points.shape[1]
    with _open_dest(dest) as fh:
        w = csv.writer(fh, lineterminator="\n")
        header = [f"x{i + 1}" for i in range(dim)]
        if cloud.has_provenance:
            header += ["gamma", "level", "bits"]
        w.writerow(header)
        for i, row in enumerate(cloud.points):
            out = [_fmt(c) for c in row]
            if cloud.has_provenance:
                bits = "".join(str(b) for b in CantorPoint.from_code(int(cloud.codes[i]), cloud.level).bits)
                out += [_fmt(cloud.gamma), cloud.level, bits]
            w.writerow(out)


def write_dimension_csv(est: DimensionEstimate, dest) -> None:
    """The (log eps, log N) table behind a dimension estimate."""
    with _open_dest(dest) as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["log_eps", "log_N"])
        for le, ln in est.table:
            w.writerow([_fmt(le), _fmt(ln)])
