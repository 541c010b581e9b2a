"""Shared helpers for the test suite: split-system generators and an
independent dense-polynomial oracle for straight-line programs."""

from __future__ import annotations

from kronsolve import slp as slp_mod
from kronsolve import upoly


def random_linear(rng, p):
    while True:
        a, b, c = rng.randrange(p), rng.randrange(p), rng.randrange(p)
        if a or b:
            return (a, b, c)


def _normalize_line(line, p):
    a, b, c = line
    lead = a if a else b
    inv = pow(lead, -1, p)
    return (a * inv % p, b * inv % p, c * inv % p)


def random_split_system(rng, p, dmax=3):
    """A pair of products of random affine-linear forms in two variables
    whose common zeros are transversal line intersections: a radical,
    zero-dimensional complete intersection with all solutions rational.

    Returns (expr1, expr2, point set)."""
    while True:
        d1 = rng.randrange(1, dmax + 1)
        d2 = rng.randrange(1, dmax + 1)
        f1 = [random_linear(rng, p) for _ in range(d1)]
        f2 = [random_linear(rng, p) for _ in range(d2)]
        n1 = {_normalize_line(l, p) for l in f1}
        n2 = {_normalize_line(l, p) for l in f2}
        if len(n1) != d1 or len(n2) != d2 or (n1 & n2):
            continue
        points = set()
        degenerate = False
        for a1, b1, c1 in f1:
            for a2, b2, c2 in f2:
                det = (a1 * b2 - a2 * b1) % p
                if det == 0:
                    continue  # parallel lines: no common point
                inv = pow(det, -1, p)
                x = (-c1 * b2 + c2 * b1) * inv % p
                y = (-a1 * c2 + a2 * c1) * inv % p
                if (x, y) in points:
                    degenerate = True
                points.add((x, y))
        if degenerate or not points:
            continue

        def to_expr(lines):
            return "*".join(f"({a}*x1 + {b}*x2 + {c})" for (a, b, c) in lines)

        return to_expr(f1), to_expr(f2), points


def random_slp(rng, n_vars, length):
    """A random portable straight-line program with one output."""
    instrs = []
    params = []
    for i in range(n_vars):
        instrs.append(("in", i))
    params.append(rng.randrange(-9, 10))
    instrs.append(("par", 0))
    while sum(1 for ins in instrs if ins[0] in ("add", "sub", "mul")) < length:
        op = rng.choice(("add", "sub", "mul"))
        a = rng.randrange(len(instrs))
        b = rng.randrange(len(instrs))
        instrs.append((op, a, b))
    return slp_mod.Slp(n_vars, params, instrs, [len(instrs) - 1])


def slp_to_dense(prog, p):
    """Expand every output of a program into a dense multivariate dict
    {exponent tuple: coefficient mod p}; independent of slp.evaluate."""
    n = prog.n_vars
    zero_exp = (0,) * n
    vals = []
    for ins in prog.instrs:
        op = ins[0]
        if op == "in":
            e = [0] * n
            e[ins[1]] = 1
            vals.append({tuple(e): 1})
        elif op == "par":
            c = prog.params[ins[1]] % p
            vals.append({zero_exp: c} if c else {})
        elif op in ("add", "sub"):
            a, b = dict(vals[ins[1]]), vals[ins[2]]
            sign = 1 if op == "add" else -1
            for e, c in b.items():
                a[e] = (a.get(e, 0) + sign * c) % p
                if not a[e]:
                    del a[e]
            vals.append(a)
        else:
            a, b = vals[ins[1]], vals[ins[2]]
            out = {}
            for e1, c1 in a.items():
                for e2, c2 in b.items():
                    e = tuple(x + y for x, y in zip(e1, e2))
                    out[e] = (out.get(e, 0) + c1 * c2) % p
                    if not out[e]:
                        del out[e]
            vals.append(out)
    return [vals[o] for o in prog.outputs]


def dense_partial(poly, var, p):
    out = {}
    for e, c in poly.items():
        if e[var] == 0:
            continue
        ne = list(e)
        ne[var] -= 1
        cc = c * e[var] % p
        if cc:
            out[tuple(ne)] = cc
    return out


def dense_eval(poly, point, p):
    acc = 0
    for e, c in poly.items():
        term = c
        for x, k in zip(point, e):
            term = term * pow(x, k, p) % p
        acc = (acc + term) % p
    return acc


def fiber_rational_points(fiber, p):
    """Points of the fiber with coordinates in F_p, by scanning the roots
    of m and pulling back through the inverse change of variables."""
    from kronsolve import rings

    ring = rings.PrimeField(p)
    n = len(fiber.change.lam)
    prefix = list(fiber.point.values[: n - fiber.level])
    pts = []
    for t in range(p):
        if upoly.evaluate(ring, fiber.m, t) != 0:
            continue
        y = prefix + [t]
        for v in fiber.v:
            y.append(upoly.evaluate(ring, v, t))
        x = []
        for row in fiber.change.lam_inv:
            acc = 0
            for c, yi in zip(row, y):
                acc = (acc + c * yi) % p
            x.append(acc)
        pts.append(tuple(x))
    return pts
