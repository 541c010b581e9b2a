"""Brute-force reference implementations, used by tests and `oracle-check`.

Everything here is deliberately independent of the solver pipeline: zero
sets are found by exhaustive enumeration over F_p^n (vectorized with numpy,
sharded by the leading coordinate), fibers by filtering, and minimal
polynomials by expanding the product of linear factors.
"""

from __future__ import annotations

import numpy as np

from .errors import TooLarge

ENUMERATION_GUARD = 10**8


def brute_zeros(spec, p: int):
    """All x in F_p^n with F_1(x) = ... = F_r(x) = 0 and G(x) != 0.

    Lexicographic enumeration, no early exit; returns a sorted list of
    tuples of ints.
    """
    n, r = spec.n, spec.r
    if p**n > ENUMERATION_GUARD:
        raise TooLarge(f"{p}^{n} points exceed the enumeration guard")
    if n == 0:
        return []
    tail = p ** (n - 1)
    grids = []
    for j in range(1, n):
        block = p ** (n - 1 - j)
        col = np.tile(np.repeat(np.arange(p, dtype=np.int64), block), p ** (j - 1))
        grids.append(col)
    points = []
    for lead in range(p):
        values = [np.full(tail, lead, dtype=np.int64)] + grids
        outs = _eval_slp_mod(spec.slp, values, p)
        mask = np.ones(tail, dtype=bool)
        for j in range(r):
            mask &= outs[j] == 0
        mask &= outs[r] != 0
        idx = np.nonzero(mask)[0]
        for i in idx:
            coords = [lead]
            rem = int(i)
            for j in range(1, n):
                block = p ** (n - 1 - j)
                coords.append(rem // block)
                rem %= block
            points.append(tuple(coords))
    return points


def _eval_slp_mod(prog, values, p):
    vals = [None] * len(prog.instrs)
    for idx, ins in enumerate(prog.instrs):
        op = ins[0]
        if op == "in":
            vals[idx] = values[ins[1]]
        elif op == "par":
            vals[idx] = np.int64(prog.params[ins[1]] % p)
        elif op == "add":
            vals[idx] = (vals[ins[1]] + vals[ins[2]]) % p
        elif op == "sub":
            vals[idx] = (vals[ins[1]] - vals[ins[2]]) % p
        else:
            vals[idx] = (vals[ins[1]] * vals[ins[2]]) % p
    return [vals[o] for o in prog.outputs]


def fiber_points(zeros, lam, point_prefix, p: int):
    """Filter a zero set to the fiber: (lam . x)[i] = prefix[i] for all i."""
    k = len(point_prefix)
    out = []
    for x in zeros:
        ok = True
        for i in range(k):
            acc = 0
            for c, xi in zip(lam[i], x):
                acc += c * xi
            if acc % p != point_prefix[i] % p:
                ok = False
                break
        if ok:
            out.append(x)
    return out


def minpoly_of_form(points, form, p: int):
    """prod (T - form(x)) over the distinct values of the linear form on the
    points; monic and square-free by construction."""
    values = set()
    for x in points:
        acc = 0
        for c, xi in zip(form, x):
            acc += c * xi
        values.add(acc % p)
    poly = [1]
    for v in sorted(values):
        # multiply by (T - v)
        nxt = [0] * (len(poly) + 1)
        for i, c in enumerate(poly):
            nxt[i + 1] = (nxt[i + 1] + c) % p
            nxt[i] = (nxt[i] - c * v) % p
        poly = nxt
    return poly
