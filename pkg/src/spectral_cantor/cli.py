"""Command-line interface.

Exit codes: 0 success, 1 a proven inequality was violated (or an acceptance
check failed), 2 usage or validation error.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from dataclasses import asdict, dataclass, field

import numpy as np

from . import __version__
from .cantor_points import CantorPoint, as_gamma, delta_gamma, first_disagreement
from .connes_distance import connes_distance, point_state, uniform_state
from .dirac import DiracSpec
from .fractal_embed import (
    box_dimension,
    cantor_cloud,
    gh_correspondence_distance,
    gh_upper_bound,
    write_cloud_csv,
    write_dimension_csv,
)
from .gns_cantor import build_triple, max_level
from .matrix_triple import verify_unithm
from .summability import geometric_trace_closed_form, summability_threshold, trace_power, trace_resolvent

COMMANDS = ("metric", "connes-dist", "embed", "dimension", "gh-bound", "trace", "matrix-triple", "verify-all")


class ValidationError(Exception):
    pass


@dataclass
class RunConfig:
    command: str
    gamma: float | None = None
    mu: float | None = None
    level: int | None = None
    trunc: int | None = None
    s: float | None = None
    p: float | None = None
    horizon: int | None = None
    seed: int = 0
    tol: float = 1e-7
    format: str = "json"
    out: str | None = None
    extra: dict = field(default_factory=dict)

    def validate(self):
        for name in ("gamma", "mu"):
            v = getattr(self, name)
            if v is not None and not 0.0 < v < 1.0:
                raise ValidationError(f"--{name} must lie in (0, 1)")
        for name in ("level", "trunc", "horizon"):
            v = getattr(self, name)
            if v is not None and v < 1:
                raise ValidationError(f"--{name} must be at least 1")
        for name in ("s", "p", "tol"):
            v = getattr(self, name)
            if v is not None and not v > 0:
                raise ValidationError(f"--{name} must be positive")
        if self.format not in ("json", "csv"):
            raise ValidationError("--format must be json or csv")
        return self

    def echo(self) -> dict:
        d = asdict(self)
        d.update(d.pop("extra"))
        return d


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        v = float(obj)
        return v if math.isfinite(v) else ("inf" if v > 0 else "-inf" if v < 0 else "nan")
    return obj


def _fmt(x) -> str:
    return format(float(x), ".17g")


def _emit_json(cfg: RunConfig, payload: dict, stream):
    doc = {"version": __version__, "config": cfg.echo(), **payload}
    text = json.dumps(_jsonable(doc), indent=2, sort_keys=True)
    _write(cfg, text + "\n", stream)


def _write(cfg: RunConfig, text: str, stream):
    if cfg.out:
        with open(cfg.out, "w", newline="") as fh:
            fh.write(text)
    else:
        stream.write(text)


def _parse_points(tokens) -> list[CantorPoint]:
    try:
        return [CantorPoint.parse(t) for t in tokens]
    except ValueError as exc:
        raise ValidationError(str(exc)) from None


def _label(x: CantorPoint, width: int) -> str:
    return "".join(str(b) for b in x.with_level(width).bits)


def cmd_metric(cfg: RunConfig, stream) -> int:
    g = _need(cfg, "gamma")
    if cfg.extra.get("points"):
        pts = _parse_points(cfg.extra["points"])
    elif cfg.extra.get("random"):
        L = cfg.trunc or 16
        rng = np.random.default_rng(cfg.seed)
        codes = rng.integers(0, 1 << L, size=cfg.extra["random"])
        pts = [CantorPoint.from_code(int(c), L) for c in codes]
    elif cfg.level:
        pts = [CantorPoint.from_code(c, cfg.level) for c in range(1 << cfg.level)]
    else:
        raise ValidationError("give points, --random K or --level N")
    width = max(max(p.support_level for p in pts), 1)
    labels = [_label(p, width) for p in pts]
    n = len(pts)
    D = np.array([[delta_gamma(pts[i], pts[j], g) for j in range(n)] for i in range(n)])

    brackets, violations = [], []
    if cfg.extra.get("connes"):
        N = cfg.level or width
        if N > min(max_level(), 10):
            raise ValidationError("Connes brackets are limited to level 10")
        if any(p.code >> N for p in pts):
            raise ValidationError("points must be supported within --level")
        t = build_triple(N, DiracSpec.geometric(g))
        cache = {}
        for i in range(n):
            for j in range(i + 1, n):
                m = first_disagreement(pts[i], pts[j])
                if m is None:
                    row = {"x": labels[i], "y": labels[j], "m": None, "lower": 0.0, "upper": 0.0}
                else:
                    if m not in cache:
                        # distances only depend on the first disagreement index
                        cache[m] = connes_distance(t, point_state(0, N), point_state(1 << (m - 1), N), rtol=cfg.tol)
                    r = cache[m]
                    lo, hi = 2 * g ** (m - 1), 2 * g ** (m - 1) / (1 - g) ** 2
                    row = {
                        "x": labels[i], "y": labels[j], "m": m,
                        "lower": r.value, "upper": r.upper_bound,
                        "bound_lower": lo, "bound_upper": hi,
                    }
                    if r.value < lo * (1 - 1e-12) or r.upper_bound > hi + cfg.tol:
                        violations.append(row)
                brackets.append(row)

    if cfg.format == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow([""] + labels)
        for lab, row in zip(labels, D):
            w.writerow([lab] + [_fmt(v) for v in row])
        _write(cfg, buf.getvalue(), stream)
    else:
        _emit_json(cfg, {"labels": labels, "delta": D, "connes": brackets, "violations": violations}, stream)
    return 1 if violations else 0


def _state(token: str, N: int):
    if token == "uniform":
        return uniform_state(N)
    pts = _parse_points([token])
    if pts[0].code >> N:
        raise ValidationError(f"point {token} is not supported within level {N}")
    return point_state(pts[0], N)


def cmd_connes(cfg: RunConfig, stream) -> int:
    g = _need(cfg, "gamma")
    x, y = cfg.extra.get("x"), cfg.extra.get("y")
    if x is None or y is None:
        raise ValidationError("connes-dist needs --x and --y (bit strings or 'uniform')")
    N = cfg.level or max(len(x) if x != "uniform" else 1, len(y) if y != "uniform" else 1)
    if N > max_level():
        raise ValidationError(f"--level exceeds the cap {max_level()} (set SPECTRAL_CANTOR_MAX_LEVEL)")
    t = build_triple(N, DiracSpec.geometric(g))
    phi, psi = _state(x, N), _state(y, N)
    r = connes_distance(t, phi, psi, rtol=cfg.tol)
    payload = {"level": N, **r.as_dict(), "violations": []}
    if phi.point is not None and psi.point is not None and phi.point != psi.point:
        m = first_disagreement(CantorPoint(phi.point), CantorPoint(psi.point))
        lo, hi = 2 * g ** (m - 1), 2 * g ** (m - 1) / (1 - g) ** 2
        payload.update(m=m, bound_lower=lo, bound_upper=hi)
        if r.value < lo * (1 - 1e-12) or r.upper_bound > hi + cfg.tol:
            payload["violations"].append("two-sided bound")
    if cfg.format == "csv":
        keys = [k for k in payload if k != "violations"]
        _write(cfg, ",".join(keys) + "\n" + ",".join(
            _fmt(payload[k]) if isinstance(payload[k], float) else str(payload[k]) for k in keys) + "\n", stream)
    else:
        _emit_json(cfg, payload, stream)
    return 1 if payload["violations"] else 0


def cmd_embed(cfg: RunConfig, stream) -> int:
    g = _need(cfg, "gamma")
    L = cfg.trunc or 8
    kind = cfg.extra.get("kind", "F")
    if cfg.extra.get("points"):
        pts = _parse_points(cfg.extra["points"])
        if any(p.code >> L for p in pts):
            raise ValidationError("points must be supported within --trunc")
        codes = np.array([p.code for p in pts], dtype=np.int64)
    else:
        if L > 16:
            raise ValidationError("exhaustive embedding is limited to --trunc 16")
        codes = None
    cloud = cantor_cloud(g, L, kind, codes)
    if cfg.format == "csv":
        _write_with(cfg, lambda fh: write_cloud_csv(cloud, fh), stream)
    else:
        labels = [_label(CantorPoint.from_code(int(c), L), L) for c in cloud.codes]
        _emit_json(cfg, {"kind": kind, "norm": cloud.norm_tag, "labels": labels, "points": cloud.points}, stream)
    return 0


def _write_with(cfg: RunConfig, writer, stream):
    buf = io.StringIO()
    writer(buf)
    _write(cfg, buf.getvalue(), stream)


def cmd_dimension(cfg: RunConfig, stream) -> int:
    g = _need(cfg, "gamma")
    L = cfg.trunc or 14
    if L > 20:
        raise ValidationError("--trunc is limited to 20 for dimension estimates")
    cloud = cantor_cloud(g, L, cfg.extra.get("kind", "f"))
    try:
        est = box_dimension(cloud, method=cfg.extra.get("method", "auto"))
    except ValueError as exc:
        raise ValidationError(str(exc)) from None
    target = as_gamma(g).dimension
    if cfg.format == "csv":
        _write_with(cfg, lambda fh: write_dimension_csv(est, fh), stream)
    else:
        _emit_json(cfg, {
            "method": est.method, "slope": est.slope, "target": target,
            "relative_error": abs(est.slope / target - 1), "residual": est.residual,
            "scales": est.scales_used, "counts": est.counts,
        }, stream)
    return 0


def cmd_gh(cfg: RunConfig, stream) -> int:
    g, mu = _need(cfg, "gamma"), _need(cfg, "mu")
    L = cfg.trunc or 12
    if L > 20:
        raise ValidationError("--trunc is limited to 20 for correspondences")
    bound = gh_upper_bound(g, mu)
    val = gh_correspondence_distance(g, mu, L)
    tail = 2 * max(g, mu) ** L
    payload = {
        "upper_bound": bound, "correspondence": val, "tail": tail,
        "note": "upper bounds only; no lower bound is computed",
        "violations": [] if val <= bound + tail else ["correspondence exceeds bound + tail"],
    }
    if cfg.format == "csv":
        _write(cfg, "upper_bound,correspondence,tail\n" + f"{_fmt(bound)},{_fmt(val)},{_fmt(tail)}\n", stream)
    else:
        _emit_json(cfg, payload, stream)
    return 1 if payload["violations"] else 0


def cmd_trace(cfg: RunConfig, stream) -> int:
    g = _need(cfg, "gamma")
    k = cfg.horizon or 100
    spec = DiracSpec.geometric(g)
    if (cfg.s is None) == (cfg.p is None):
        raise ValidationError("give exactly one of --s (power trace) or --p (resolvent trace)")
    if cfg.s is not None:
        r = trace_power(spec, cfg.s, k)
        extra = {"closed_form": geometric_trace_closed_form(g, cfg.s, k)}
        s_or_p = {"s": cfg.s}
    else:
        r = trace_resolvent(spec, cfg.p, k)
        extra = {}
        s_or_p = {"p": cfg.p}
    payload = {
        "spec": spec.describe(), "s_or_p": s_or_p, "horizon": k,
        "partial_sum": r.partial_sum, "term_ratio": r.term_ratio, "verdict": r.verdict,
        "threshold": summability_threshold(g), **extra,
    }
    if cfg.format == "csv":
        _write(cfg, "horizon,partial_sum,term_ratio,verdict\n"
               + f"{k},{_fmt(r.partial_sum)},{_fmt(r.term_ratio)},{r.verdict}\n", stream)
    else:
        _emit_json(cfg, payload, stream)
    return 0


def cmd_matrix(cfg: RunConfig, stream) -> int:
    n = cfg.extra.get("n", 4)
    trials = cfg.extra.get("trials", 20)
    try:
        rep = verify_unithm(n, trials, cfg.seed, tol=cfg.tol)
    except ValueError as exc:
        raise ValidationError(str(exc)) from None
    d = rep.as_dict()
    if cfg.format == "csv":
        _write(cfg, "n,trials,max_deviation,pass\n" + f"{n},{trials},{_fmt(d['max_deviation'])},{d['pass']}\n", stream)
    else:
        _emit_json(cfg, d, stream)
    return 0 if rep.passed else 1


def cmd_verify_all(cfg: RunConfig, stream) -> int:
    from .acceptance import format_table, run_acceptance

    quick = bool(cfg.extra.get("quick"))
    results = run_acceptance(quick=quick, stream=sys.stderr if cfg.format == "json" else None)
    if cfg.format == "json":
        rows = [{"number": r.number, "title": r.title, "passed": r.passed} for r in results]
        _emit_json(cfg, {"results": rows, "all_passed": all(r.passed for r in results)}, stream)
    else:
        _write(cfg, format_table(results) + "\n", stream)
    return 0 if all(r.passed for r in results) else 1


def _need(cfg: RunConfig, name: str):
    v = getattr(cfg, name)
    if v is None:
        raise ValidationError(f"--{name} is required for {cfg.command}")
    return v


HANDLERS = {
    "metric": cmd_metric,
    "connes-dist": cmd_connes,
    "embed": cmd_embed,
    "dimension": cmd_dimension,
    "gh-bound": cmd_gh,
    "trace": cmd_trace,
    "matrix-triple": cmd_matrix,
    "verify-all": cmd_verify_all,
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--gamma", type=float)
    common.add_argument("--mu", type=float)
    common.add_argument("--level", type=int, help="truncation level N of the algebra")
    common.add_argument("--trunc", type=int, help="truncation level L of sequences")
    common.add_argument("--s", type=float)
    common.add_argument("--p", type=float)
    common.add_argument("--horizon", type=int)
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--tol", type=float, default=1e-7)
    common.add_argument("--format", choices=("json", "csv"), default="json")
    common.add_argument("--out")

    parser = argparse.ArgumentParser(prog="spectral-cantor", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", metavar="command")

    p = sub.add_parser("metric", parents=[common], help="delta_gamma matrix and Connes brackets")
    p.add_argument("points", nargs="*", help="bit strings, coordinate 1 first")
    p.add_argument("--random", type=int, help="sample this many points of level --trunc")
    p.add_argument("--connes", action="store_true", help="add certified Connes distance brackets")

    p = sub.add_parser("connes-dist", parents=[common], help="certified Connes distance between two states")
    p.add_argument("--x", required=True)
    p.add_argument("--y", required=True)

    p = sub.add_parser("embed", parents=[common], help="embed level-L points by f_gamma, F_gamma or into D_gamma")
    p.add_argument("points", nargs="*")
    p.add_argument("--kind", choices=("f", "F", "D"), default="F")

    p = sub.add_parser("dimension", parents=[common], help="box-counting dimension of a Cantor cloud")
    p.add_argument("--kind", choices=("f", "F"), default="f")
    p.add_argument("--method", choices=("auto", "interval", "grid"), default="auto")

    sub.add_parser("gh-bound", parents=[common], help="Gromov-Hausdorff upper bounds")
    sub.add_parser("trace", parents=[common], help="power or resolvent trace of the Cantor Dirac operator")

    p = sub.add_parser("matrix-triple", parents=[common], help="norm metric from the flip projection on M_n")
    p.add_argument("--n", type=int, default=4)
    p.add_argument("--trials", type=int, default=20)

    p = sub.add_parser("verify-all", parents=[common], help="run the acceptance suite")
    p.add_argument("--quick", action="store_true")
    return parser


_BASE = {f for f in RunConfig.__dataclass_fields__ if f != "extra"}


def main(argv=None, stream=None) -> int:
    stream = sys.stdout if stream is None else stream
    parser = build_parser()
    argv = sys.argv[1:] if argv is None else list(argv)
    if not argv:
        parser.print_usage(sys.stderr)
        return 2
    try:
        ns = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    if ns.command is None:
        parser.print_usage(sys.stderr)
        return 2
    values = vars(ns)
    cfg = RunConfig(
        **{k: values[k] for k in _BASE if k in values},
        extra={k: v for k, v in values.items() if k not in _BASE},
    )
    try:
        cfg.validate()
        return HANDLERS[cfg.command](cfg, stream)
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
