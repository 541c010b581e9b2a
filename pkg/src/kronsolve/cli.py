"""Command-line front end: solve, verify, oracle-check, bench.

System files are line-based: a header of `key: value` pairs (vars, field,
optionally epsilon, delta-bound, height, seed), then one `F: <expr>` line
per equation and an optional `G: <expr>` line (default G = 1).  Lines
starting with `#` are comments.

Fiber documents are single-line JSON with every coefficient as a decimal
string ("num/den" over Q); they round-trip losslessly.
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from fractions import Fraction

from . import linalg, oracle, qlift, rings, slp as slp_mod, solver, upoly
from .errors import (
    EmptyVariety,
    ExprSyntaxError,
    FieldTooSmall,
    KronError,
    RetriesExhausted,
    TooLarge,
)

EXIT_OK = 0
EXIT_CHECK_FAILED = 1
EXIT_PARSE = 2
EXIT_RETRIES = 3
EXIT_EMPTY = 4
EXIT_FIELD_TOO_SMALL = 5
EXIT_TOO_LARGE = 6


class SystemFile:
    """Parsed system file: the SystemSpec plus solver settings."""

    def __init__(self, spec, field, epsilon=None, delta_bound=None, seed=None):
        self.spec = spec
        self.field = field
        self.epsilon = epsilon
        self.delta_bound = delta_bound
        self.seed = seed


def parse_system_file(text: str) -> SystemFile:
    header = {}
    f_lines = []
    g_line = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if ":" not in line:
            raise ExprSyntaxError("expected 'key: value'", lineno, 1)
        key, value = line.split(":", 1)
        key = key.strip().lower()
        value = value.strip()
        if key == "f":
            f_lines.append((value, lineno))
        elif key == "g":
            if g_line is not None:
                raise ExprSyntaxError("duplicate G line", lineno, 1)
            g_line = (value, lineno)
        elif key in ("vars", "field", "epsilon", "delta-bound", "height", "seed"):
            if key in header:
                raise ExprSyntaxError(f"duplicate header key {key!r}", lineno, 1)
            header[key] = value
        else:
            raise ExprSyntaxError(f"unknown header key {key!r}", lineno, 1)
    if "vars" not in header:
        raise ExprSyntaxError("missing 'vars' header", 1, 1)
    if "field" not in header:
        raise ExprSyntaxError("missing 'field' header", 1, 1)
    if not f_lines:
        raise ExprSyntaxError("no equations (F lines)", 1, 1)
    n = int(header["vars"])
    # the field descriptor is validated here so malformed files fail early
    field = header["field"]
    rings.from_descriptor(field)
    height = int(header["height"]) if "height" in header else None
    try:
        spec = slp_mod.build_system(
            [text for text, _ in f_lines],
            g_line[0] if g_line else None, n, height=height,
        )
    except ExprSyntaxError as exc:
        # remap to file coordinates: expressions are single lines
        for text, lineno in f_lines + ([g_line] if g_line else []):
            try:
                slp_mod.parse_expression(text, n)
            except ExprSyntaxError as inner:
                raise ExprSyntaxError(str(inner).rsplit(" at line", 1)[0],
                                      lineno, inner.column) from inner
        raise exc
    return SystemFile(
        spec=spec,
        field=field,
        epsilon=float(header["epsilon"]) if "epsilon" in header else None,
        delta_bound=int(header["delta-bound"]) if "delta-bound" in header else None,
        seed=int(header["seed"]) if "seed" in header else None,
    )


def load_system(path: str) -> SystemFile:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_system_file(fh.read())


# ---------------------------------------------------------------------------
# fiber document serialization


def _fmt_elt(ring, x) -> object:
    if isinstance(ring, rings.Rationals):
        x = Fraction(x)
        return str(x.numerator) if x.denominator == 1 else f"{x.numerator}/{x.denominator}"
    return ring.fmt(x)


def _parse_elt(ring, s):
    if isinstance(ring, rings.Rationals):
        return Fraction(s)
    return ring.parse_elt(s)


def serialize_fiber(fiber, ring, metadata=None) -> dict:
    return {
        "field": rings.descriptor(ring),
        "lambda": [[_fmt_elt(ring, c) for c in row] for row in fiber.change.lam],
        "point": [_fmt_elt(ring, c) for c in fiber.point.values],
        "m": [_fmt_elt(ring, c) for c in fiber.m],
        "v": [[_fmt_elt(ring, c) for c in v] for v in fiber.v],
        "w": [[_fmt_elt(ring, c) for c in w] for w in fiber.w],
        "metadata": metadata or {},
    }


def deserialize_fiber(doc: dict, ring=None):
    if ring is None:
        ring = rings.from_descriptor(doc["field"])
    lam = [[_parse_elt(ring, c) for c in row] for row in doc["lambda"]]
    change = solver.LinearChange(
        lam=tuple(tuple(row) for row in lam),
        lam_inv=tuple(tuple(row) for row in linalg.mat_inv(ring, lam)),
        sample_size=0,
    )
    point = solver.LiftingPoint(
        values=tuple(_parse_elt(ring, c) for c in doc["point"])
    )
    m = [_parse_elt(ring, c) for c in doc["m"]]
    v = [[_parse_elt(ring, c) for c in vv] for vv in doc["v"]]
    w = [[_parse_elt(ring, c) for c in ww] for ww in doc["w"]]
    level = len(v) + 1 if v else None
    if level is None:
        # level-r fiber of an r = 1 system has no parametrizations
        level = 1
    return solver.Fiber(level=level, m=m, v=v, w=w, change=change, point=point)


def _emit(doc: dict):
    sys.stdout.write(json.dumps(doc, separators=(",", ":")) + "\n")


def _error_doc(kind: str, exc: Exception) -> dict:
    return {"error": kind, "detail": str(exc)}


# ---------------------------------------------------------------------------
# commands


def cmd_solve(args) -> int:
    try:
        sysfile = load_system(args.file)
    except (OSError, ValueError, ExprSyntaxError) as exc:
        _emit(_error_doc("parse", exc))
        return EXIT_PARSE
    spec = sysfile.spec
    cfg = solver.SolveConfig(
        field=sysfile.field,
        epsilon=args.epsilon if args.epsilon is not None else (sysfile.epsilon or 0.01),
        seed=args.seed if args.seed is not None else (sysfile.seed or solver.SolveConfig.seed),
        delta_bound=args.delta_bound if args.delta_bound is not None else sysfile.delta_bound,
        max_retries=args.retries,
    )
    ring = rings.from_descriptor(sysfile.field)
    stats: dict = {}
    t0 = time.perf_counter()
    try:
        if isinstance(ring, rings.Rationals):
            fiber = qlift.solve_over_Q(spec, cfg, stats=stats)
        else:
            fiber = solver.solve(spec, cfg, stats=stats)
    except EmptyVariety as exc:
        _emit(_error_doc("empty-variety", exc))
        return EXIT_EMPTY
    except FieldTooSmall as exc:
        _emit(_error_doc("field-too-small", exc))
        return EXIT_FIELD_TOO_SMALL
    except (RetriesExhausted, KronError) as exc:
        cause = getattr(exc, "cause", None)
        doc = _error_doc("retries-exhausted", exc)
        if cause is not None:
            doc["cause"] = type(cause).__name__
        _emit(doc)
        return EXIT_RETRIES
    meta = {
        "seed": cfg.seed,
        "epsilon": cfg.epsilon,
        "degree": fiber.delta,
        "elapsed_s": round(time.perf_counter() - t0, 6),
    }
    for key in ("retries", "delta_bound", "prime"):
        if key in stats:
            meta[key] = stats[key]
    timings = {k: round(v, 6) for k, v in stats.items()
               if isinstance(v, float) and k not in ("epsilon",)}
    meta["timings"] = timings
    _emit(serialize_fiber(fiber, ring, metadata=meta))
    return EXIT_OK


def cmd_verify(args) -> int:
    try:
        sysfile = load_system(args.system)
        with open(args.file, "r", encoding="utf-8") as fh:
            doc = json.loads(fh.read())
    except (OSError, ValueError, ExprSyntaxError) as exc:
        _emit(_error_doc("parse", exc))
        return EXIT_PARSE
    if doc.get("field") != sysfile.field:
        _emit({"error": "field-mismatch",
               "document": doc.get("field"), "system": sysfile.field})
        return EXIT_PARSE
    ring = rings.from_descriptor(sysfile.field)
    fiber = deserialize_fiber(doc, ring)
    # the document's parametrization count fixes the level; cross-check r
    fiber.level = sysfile.spec.r
    ok, report = solver.verify(fiber, sysfile.spec, ring)
    _emit({"pass": ok, "checks": report})
    return EXIT_OK if ok else EXIT_CHECK_FAILED


def cmd_oracle_check(args) -> int:
    try:
        sysfile = load_system(args.file)
    except (OSError, ValueError, ExprSyntaxError) as exc:
        _emit(_error_doc("parse", exc))
        return EXIT_PARSE
    ring = rings.from_descriptor(sysfile.field)
    if not isinstance(ring, rings.PrimeField):
        _emit({"error": "unsupported-field",
               "detail": "oracle checks run over prime fields"})
        return EXIT_PARSE
    spec = sysfile.spec
    p = ring.p
    try:
        if p**spec.n > oracle.ENUMERATION_GUARD:
            raise TooLarge(f"{p}^{spec.n} exceeds the enumeration guard")
        cfg = solver.SolveConfig(
            field=sysfile.field,
            epsilon=args.epsilon if args.epsilon is not None else (sysfile.epsilon or 0.01),
            seed=args.seed if args.seed is not None else (sysfile.seed or solver.SolveConfig.seed),
            delta_bound=sysfile.delta_bound,
            max_retries=args.retries,
        )
        try:
            fiber = solver.solve(spec, cfg)
        except KronError as exc:
            _emit({"result": "SOLVER_FAILED", "detail": str(exc),
                   "kind": type(exc).__name__})
            return EXIT_RETRIES
        zeros = oracle.brute_zeros(spec, p)
        lam = [list(row) for row in fiber.change.lam]
        prefix = list(fiber.point.values[: spec.n - spec.r])
        pts = oracle.fiber_points(zeros, lam, prefix, p)
        mp = oracle.minpoly_of_form(pts, lam[spec.n - spec.r], p)
        match = mp == fiber.m and len(pts) == fiber.delta
        _emit({
            "result": "MATCH" if match else "MISMATCH",
            "solver_m": [str(c) for c in fiber.m],
            "oracle_m": [str(c) for c in mp],
            "fiber_points": len(pts),
            "degree": fiber.delta,
        })
        return EXIT_OK if match else EXIT_CHECK_FAILED
    except TooLarge as exc:
        _emit(_error_doc("too-large", exc))
        return EXIT_TOO_LARGE


def _bench_system(n: int, r: int, degrees, p: int, rng):
    """Random product-of-linear-forms system: well-behaved by construction."""
    exprs = []
    for d in degrees:
        factors = []
        for _ in range(d):
            coeffs = [rng.randrange(1, p) for _ in range(n)]
            const = rng.randrange(p)
            terms = " + ".join(f"{c}*x{i + 1}" for i, c in enumerate(coeffs))
            factors.append(f"({terms} + {const})")
        exprs.append("*".join(factors))
    return slp_mod.build_system(exprs, None, n)


def cmd_bench(args) -> int:
    import random as _random

    params = {}
    try:
        for chunk in args.sweep.replace(";", " ").split():
            key, value = chunk.split("=", 1)
            params[key] = value
        d_list = [int(x) for x in params.get("d", "").split(",") if x]
        n = int(params.get("n", 2))
        r = int(params.get("r", 2))
        dfix = int(params.get("dfix", 4))
        field = params.get("field", f"Fp:{(1 << 61) - 1}")
        seed = int(params.get("seed", 1))
        epsilon = float(params.get("epsilon", 0.01))
    except (ValueError, KeyError) as exc:
        _emit(_error_doc("parse", exc))
        return EXIT_PARSE
    ring = rings.from_descriptor(field)
    header = ["d", "delta", "total_s", "lift_s", "project_s", "shape_s",
              "conclude_s", "ratio_total"]
    rows = []
    prev_total = None
    for d in d_list:
        rng = _random.Random((seed, d).__repr__())
        degrees = [d] + [dfix] * (r - 1)
        coeff_range = min(997, ring.card or 997)
        spec = _bench_system(n, r, degrees, coeff_range, rng)
        cfg = solver.SolveConfig(field=field, epsilon=epsilon, seed=seed,
                                 max_retries=5)
        stats: dict = {}
        t0 = time.perf_counter()
        try:
            fiber = solver.solve(spec, cfg, stats=stats)
            delta = fiber.delta
        except KronError:
            delta = -1
        total = time.perf_counter() - t0
        ratio = "" if prev_total is None else f"{total / prev_total:.3f}"
        prev_total = total
        rows.append([
            str(d), str(delta), f"{total:.6f}",
            f"{stats.get('lift', 0.0):.6f}", f"{stats.get('project', 0.0):.6f}",
            f"{stats.get('shape', 0.0):.6f}", f"{stats.get('conclude', 0.0):.6f}",
            ratio,
        ])
    out_lines = [",".join(header)] + [",".join(row) for row in rows]
    csv_text = "\n".join(out_lines) + "\n"
    if args.csv:
        with open(args.csv, "w", encoding="utf-8") as fh:
            fh.write(csv_text)
    sys.stdout.write(csv_text)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="kronsolve",
        description="Kronecker representations of polynomial-system zero sets",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_solve = sub.add_parser("solve", help="solve a system file")
    p_solve.add_argument("-f", "--file", required=True)
    p_solve.add_argument("--seed", type=int, default=None)
    p_solve.add_argument("--epsilon", type=float, default=None)
    p_solve.add_argument("--delta-bound", type=int, default=None)
    p_solve.add_argument("--retries", type=int, default=5)
    p_solve.set_defaults(func=cmd_solve)

    p_verify = sub.add_parser("verify", help="verify a fiber document")
    p_verify.add_argument("-f", "--file", required=True, help="fiber document")
    p_verify.add_argument("-s", "--system", required=True, help="system file")
    p_verify.set_defaults(func=cmd_verify)

    p_oracle = sub.add_parser("oracle-check",
                              help="compare the solver against brute force")
    p_oracle.add_argument("-f", "--file", required=True)
    p_oracle.add_argument("--seed", type=int, default=None)
    p_oracle.add_argument("--epsilon", type=float, default=None)
    p_oracle.add_argument("--retries", type=int, default=5)
    p_oracle.set_defaults(func=cmd_oracle_check)

    p_bench = sub.add_parser("bench", help="timing ladder")
    p_bench.add_argument("--sweep", required=True,
                         help='e.g. "d=2,4 n=2 r=2 field=Fp:1000003 seed=1"')
    p_bench.add_argument("--csv", default=None, help="also write CSV here")
    p_bench.set_defaults(func=cmd_bench)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
