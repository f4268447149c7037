"""Acceptance suite: thirteen end-to-end checks of the library against closed forms.

Each check returns a :class:`CriterionResult`; ``quick=True`` shrinks sizes so
that the whole suite runs in well under a minute.
"""
from __future__ import annotations

import math
import time
from dataclasses import dataclass, field

import numpy as np

from .cantor_points import as_gamma, cover_sum, delta_gamma_codes, first_disagreement_codes
from .connes_distance import (
    connes_distance,
    diameter_bound_check,
    point_distance_profile,
    point_pair_representative,
    point_state,
    random_state,
    brute_force_oracle,
)
from .dirac import DiracSpec
from .fractal_embed import (
    F_gamma_codes,
    F_gamma_lipschitz,
    box_dimension,
    cantor_cloud,
    f_gamma_codes,
    gh_correspondence_distance,
    gh_upper_bound,
    hausdorff_bounds,
)
from .gns_cantor import build_triple, commutator_norm, symmetry
from .matrix_triple import flip_commutator_norm, random_self_adjoint, spread_half, verify_unithm
from .summability import (
    af_recipe_spec,
    geometric_trace_closed_form,
    summability_threshold,
    trace_power,
    trace_resolvent,
)

__all__ = ["CriterionResult", "CRITERIA", "run_criterion", "run_acceptance", "format_table"]

GAMMAS4 = (0.3, 0.5, 0.7, 0.9)
GAMMAS5 = (0.3, 1 / 3, 0.5, 0.7, 0.9)


@dataclass
class CriterionResult:
    number: int
    title: str
    passed: bool
    elapsed: float = 0.0
    budget: float = math.inf
    detail: dict = field(default_factory=dict)

    @property
    def within_budget(self) -> bool:
        return self.elapsed <= self.budget

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        return f"[{status}] {self.number:>2}. {self.title} ({self.elapsed:.1f}s / budget {self.budget:.0f}s)"

    def as_dict(self) -> dict:
        return {
            "number": self.number,
            "title": self.title,
            "passed": self.passed,
            "elapsed": self.elapsed,
            "budget": self.budget,
            "detail": self.detail,
        }


def c1_eigenvalue_identity(quick=False) -> dict:
    N = 6 if quick else 10
    worst = 0.0
    for g in GAMMAS4:
        t = build_triple(N, DiracSpec.geometric(g))
        for n in range(1, N + 1):
            val = commutator_norm(t, symmetry(n, N))
            worst = max(worst, abs(val / g ** (1 - n) - 1.0))
    return {"ok": worst <= 1e-9, "N": N, "max_rel_error": worst}


def _orbit_spot_check(g: float, N: int, pairs: int, seed: int) -> float:
    """Max deviation between direct solves on random point pairs and their orbit representative."""
    t = build_triple(N, DiracSpec.geometric(g))
    rng = np.random.default_rng(seed)
    reps = {}
    worst = 0.0
    for _ in range(pairs):
        x, y = rng.choice(1 << N, size=2, replace=False)
        direct = connes_distance(t, point_state(int(x), N), point_state(int(y), N)).value
        rep = point_pair_representative(int(x), int(y), N)
        if rep not in reps:
            reps[rep] = connes_distance(t, point_state(rep[0], N), point_state(rep[1], N)).value
        worst = max(worst, abs(direct - reps[rep]))
    return worst


def c2_distance_sandwich(quick=False) -> dict:
    N = 4 if quick else 8
    violations = []
    rows = {}
    for g in GAMMAS4:
        t = build_triple(N, DiracSpec.geometric(g))
        for m, res in point_distance_profile(t).items():
            lo, hi = 2 * g ** (m - 1), 2 * g ** (m - 1) / (1 - g) ** 2
            rows[f"{g}:{m}"] = (res.value, res.upper_bound, res.dual_bound)
            if res.value < lo * (1 - 1e-12) or res.upper_bound > hi + 1e-7 or res.value > res.upper_bound:
                violations.append((g, m, res.value, res.upper_bound))
    # the reduction to one pair per first-disagreement index, checked by direct solves
    orbit_dev = max(_orbit_spot_check(g, 3 if quick else 5, 4 if quick else 8, 7) for g in GAMMAS4)
    return {
        "ok": not violations and orbit_dev <= 1e-6,
        "N": N,
        "violations": violations,
        "orbit_deviation": orbit_dev,
        "brackets": rows,
    }


def c3_oracle(quick=False) -> dict:
    n_random = 5 if quick else 20
    worst = 0.0
    count = 0
    rng = np.random.default_rng(3)
    for g in (0.5, 0.3):
        for N in (1, 2):
            t = build_triple(N, DiracSpec.geometric(g))
            pairs = [(point_state(x, N), point_state(y, N)) for x in range(1 << N) for y in range(x + 1, 1 << N)]
            pairs += [(random_state(N, rng), random_state(N, rng)) for _ in range(n_random)]
            for phi, psi in pairs:
                worst = max(worst, abs(connes_distance(t, phi, psi).value - brute_force_oracle(t, phi, psi)))
                count += 1
    return {"ok": worst <= 1e-4, "pairs": count, "max_abs_difference": worst}


def c4_diameter(quick=False) -> dict:
    N = 5 if quick else 8
    t = build_triple(N, DiracSpec.geometric(0.5))
    rep = diameter_bound_check(t, samples=50 if quick else 200, seed=4)
    ok = max(rep.max_sampled, rep.max_refined) <= 4 + 1e-7 and rep.tail_max_excess <= 1e-7
    return {
        "ok": ok,
        "N": N,
        "max_refined": rep.max_refined,
        "max_sampled": rep.max_sampled,
        "refined_upper": rep.refined_upper,
        "truncated_beta_sum": rep.bound,
        "tail_max_excess": rep.tail_max_excess,
    }


def c5_trace(quick=False) -> dict:
    kmax = 50 if quick else 200
    worst = 0.0
    for g in (0.3, 0.5, 0.7):
        spec = DiracSpec.geometric(g)
        for s in (1.0, 2.0, 3.0):
            for k in range(1, kmax + 1):
                val = trace_power(spec, s, k).partial_sum
                ref = geometric_trace_closed_form(g, s, k)
                worst = max(worst, abs(val / ref - 1.0))
    ratio_at, ratio_above = [], []
    for g in GAMMAS4:
        spec = DiracSpec.geometric(g)
        th = summability_threshold(g)
        ratio_at.append(trace_power(spec, th, kmax).term_ratio)
        ratio_above.append(trace_power(spec, 1.01 * th, kmax).term_ratio)
    ok = (
        worst <= 1e-12
        and all(abs(r - 1.0) <= 1e-12 for r in ratio_at)
        and all(r < 1.0 for r in ratio_above)
    )
    return {
        "ok": ok,
        "max_rel_error": worst,
        "ratio_at_threshold": ratio_at,
        "ratio_above_threshold": ratio_above,
    }


def c6_resolvent(quick=False) -> dict:
    horizon = 1000 if quick else 100_000
    sums = {}
    for p in (0.5, 1.0, 2.0):
        spec, _ = af_recipe_spec(p, horizon)
        # dim A_n - dim A_(n-1) = 1; terms are positive, so the last partial sum is the largest
        sums[p] = trace_resolvent(spec, p, horizon, mult=np.ones(horizon + 1)).partial_sum
    return {"ok": all(v <= 2.0 for v in sums.values()), "horizon": horizon, "partial_sums": sums}


def _random_pairs(rng, count: int, bits: int):
    x = rng.integers(0, 1 << bits, size=count, dtype=np.int64)
    y = rng.integers(0, 1 << bits, size=count, dtype=np.int64)
    keep = x != y
    return x[keep], y[keep]


def _xor_bits(x, y, bits: int) -> np.ndarray:
    return ((np.bitwise_xor(x, y)[:, None] >> np.arange(bits)) & 1).astype(float)


def c7_isometry(quick=False) -> dict:
    L, full = 40, 60
    count = 1000 if quick else 10_000
    rng = np.random.default_rng(7)
    worst_iso = 0.0
    worst_inf = 0.0
    chain_ok = True
    mask = (1 << L) - 1
    for g in GAMMAS4:
        x, y = _random_pairs(rng, count, full)
        fx, fy = f_gamma_codes(x & mask, g, L), f_gamma_codes(y & mask, g, L)
        diff = fx - fy
        l1 = np.abs(diff).sum(1)
        # 2 gamma^L is far below double resolution of ||.||_1 ~ 1, so the defect
        # ||f(x) - f(y)||_1 - delta(x, y) is formed in a single compensated sum
        dterms = _xor_bits(x, y, full) * (g ** np.arange(full) * (1 - g))
        defect = np.array([math.fsum(np.concatenate([np.abs(r), -d])) for r, d in zip(diff, dterms)])
        worst_iso = max(worst_iso, float(np.max(np.abs(defect)) / (2 * g**L)))
        m = first_disagreement_codes(x, y)
        inside = m <= L
        linf = np.abs(diff).max(1)
        expect = g ** (m - 1.0) * (1 - g)
        worst_inf = max(worst_inf, float(np.max(np.abs(linf - expect)[inside] / expect[inside])))
        l2 = np.sqrt((diff * diff).sum(1))
        chain_ok &= bool(np.all(linf <= l2 * (1 + 1e-15)) and np.all(l2 <= l1 * (1 + 1e-15)))
    ok = worst_iso <= 1.0 and worst_inf <= 4 * np.finfo(float).eps and chain_ok
    return {
        "ok": ok,
        "L": L,
        "isometry_error_over_2gammaL": worst_iso,
        "linf_rel_error": worst_inf,
        "norm_chain": chain_ok,
    }


def c8_bilipschitz(quick=False) -> dict:
    L, full = 40, 60
    count = 1000 if quick else 10_000
    rng = np.random.default_rng(8)
    mask = (1 << L) - 1
    margins = {}
    ok = True
    for g in GAMMAS5:
        x, y = _random_pairs(rng, count, full)
        d = np.linalg.norm(F_gamma_codes(x & mask, g, L) - F_gamma_codes(y & mask, g, L), axis=1)
        delta = delta_gamma_codes(x, y, g, full)
        c, C = F_gamma_lipschitz(g)
        slack = g**L / (1 - g)
        lo = float(np.min(d - (c * delta - slack)))
        hi = float(np.min((C * delta + slack) - d))
        margins[round(g, 6)] = (lo, hi)
        ok &= lo >= 0 and hi >= 0
    # gamma = 1/3: F is the classical middle-thirds map; digits read from exact integers
    depth = 15
    pts = F_gamma_codes(np.arange(1 << depth), 1 / 3, depth)[:, 0]
    ints = np.rint(pts * 3**depth).astype(np.int64)
    digits_ok = True
    for _ in range(depth):
        digits_ok &= bool(np.all(np.isin(ints % 3, (0, 2))))
        ints //= 3
    return {"ok": ok and digits_ok, "margins": margins, "base3_digits_0_2": digits_ok}


def c9_dimension(quick=False) -> dict:
    L = 14  # already fast; smaller L cannot span two decades at gamma = 0.7
    out = {}
    ok = True
    for g in (1 / 3, 0.5, 0.7):
        t = as_gamma(g).dimension
        cloud = cantor_cloud(g, L, "f")
        interval = box_dimension(cloud, method="interval")
        grid = box_dimension(cloud, method="grid")
        out[round(g, 6)] = {
            "interval_slope": interval.slope,
            "grid_slope": grid.slope,
            "target": t,
        }
        ok &= abs(interval.slope - t) <= 1e-9 and abs(grid.slope / t - 1) <= 0.05
    return {"ok": ok, "L": L, "estimates": out}


def c10_cover(quick=False) -> dict:
    worst = 0.0
    bounds_ok = True
    for g in GAMMAS5 + (0.01, 0.99):
        t = as_gamma(g).dimension
        for n in range(1, 41):
            worst = max(worst, abs(cover_sum(n, t, g) - 1.0))
        hb = hausdorff_bounds(g, 40)
        bounds_ok &= hb["lower"] < hb["upper"]
    return {"ok": worst <= 1e-12 and bounds_ok, "max_abs_error": worst, "bounds_ordered": bounds_ok}


def c11_gh(quick=False) -> dict:
    L = 12
    grid = np.linspace(0.05, 0.95, 8 if quick else 20)
    worst = -math.inf
    for g in grid:
        for mu in grid:
            val = gh_correspondence_distance(g, mu, L)
            top = max(g, mu)
            worst = max(worst, val - gh_upper_bound(g, mu) - 2 * top**L)
    return {"ok": worst <= 0.0, "grid": len(grid), "max_excess": worst}


def c12_matrix(quick=False) -> dict:
    per_n = 100 if quick else 1000
    rng = np.random.default_rng(12)
    worst = 0.0
    for n in range(2, 9):
        for _ in range(per_n):
            a = random_self_adjoint(n, rng)
            worst = max(worst, abs(flip_commutator_norm(a) - spread_half(a)))
    rep = verify_unithm(8, 5 if quick else 20, seed=12)
    return {
        "ok": worst <= 1e-9 and rep.max_deviation < 1e-7,
        "max_seminorm_difference": worst,
        "unithm_max_deviation": rep.max_deviation,
    }


def c13_monotone(quick=False) -> dict:
    top = 5 if quick else 8
    g = 0.5
    prev = {}
    worst = -math.inf
    values = {}
    for N in range(2, top + 1):
        t = build_triple(N, DiracSpec.geometric(g))
        warm = {m: r.witness for m, r in prev.items()}
        cur = point_distance_profile(t, warm_starts=warm)
        for m, r in cur.items():
            values[f"{N}:{m}"] = r.value
            if m in prev:
                worst = max(worst, prev[m].value - r.value)
        prev = cur
    return {"ok": worst <= 1e-8, "max_decrease": worst, "values": values}


CRITERIA = [
    (1, "commutator norm of s_n equals gamma^(1-n)", c1_eigenvalue_identity, 10),
    (2, "point-state Connes distances within the two-sided bound", c2_distance_sandwich, 300),
    (3, "solver agrees with brute-force oracle at N <= 2", c3_oracle, 120),
    (4, "diameter of the Lipschitz ball at most sum of beta", c4_diameter, 120),
    (5, "trace of |D|^-s matches closed form; threshold ratio", c5_trace, 1),
    (6, "resolvent trace of the AF recipe stays below 2", c6_resolvent, 5),
    (7, "f_gamma isometry and norm chain", c7_isometry, 10),
    (8, "F_gamma bi-Lipschitz bounds and base-3 digits", c8_bilipschitz, 30),
    (9, "box-counting dimension", c9_dimension, 60),
    (10, "Hausdorff cover sums equal 1", c10_cover, 1),
    (11, "Gromov-Hausdorff correspondence bound", c11_gh, 120),
    (12, "flip commutator equals half spread; norm metric recovered", c12_matrix, 60),
    (13, "truncated distances nondecreasing in N", c13_monotone, 180),
]


def run_criterion(number: int, quick: bool = False) -> CriterionResult:
    for num, title, fn, budget in CRITERIA:
        if num == number:
            start = time.perf_counter()
            detail = fn(quick)
            elapsed = time.perf_counter() - start
            # runtime budgets apply to the full-size runs only
            passed = bool(detail.pop("ok")) and (quick or elapsed <= budget)
            return CriterionResult(num, title, passed, elapsed, budget, detail)
    raise ValueError(f"no criterion {number}")


def run_acceptance(quick: bool = False, only=None, stream=None) -> list[CriterionResult]:
    results = []
    for num, *_ in CRITERIA:
        if only is not None and num not in only:
            continue
        res = run_criterion(num, quick)
        if stream is not None:
            print(res.line(), file=stream, flush=True)
        results.append(res)
    return results


def format_table(results) -> str:
    lines = [r.line() for r in results]
    passed = sum(r.passed for r in results)
    lines.append(f"{passed}/{len(results)} criteria passed")
    return "\n".join(lines)
