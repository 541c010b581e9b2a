"""Dynamic evaluation (D5): computing over k[X]/(m) for monic square-free m
that need not be irreducible.

Zero tests and inversions route through `inv_or_split`: meeting a zero
divisor splits the modulus into coprime factors and the computation
continues on each branch; the per-branch results are recombined by Chinese
remaindering.  Splits are processed depth-first with the full state
re-reduced into each sub-branch.

Polynomials in Y over k[X]/(m) are represented as upoly coefficient lists
whose entries are QuotientRing elements (tuples of field elements), so the
generic upoly routines apply directly per branch.
"""

from __future__ import annotations

from dataclasses import dataclass

from . import upoly
from .errors import ShapeViolation
from .upoly import QuotientRing


@dataclass
class SplitContext:
    """Pairwise-coprime moduli with per-branch payloads; the product of the
    moduli equals the original modulus."""

    modulus: list
    branches: list  # list of (modulus: list, payload)

    def check_product(self, ring):
        prod = [ring.one]
        for m, _ in self.branches:
            prod = upoly.poly_mul(ring, prod, m)
        if prod != list(self.modulus):
            raise AssertionError("branch moduli do not multiply back to the modulus")


def inv_or_split(ring, a, m):
    """Inverse of a modulo m, or a split of m, or a zero marker.

    Returns ("inverse", inv) when gcd(a, m) = 1, ("zero",) when a = 0 mod m,
    and ("split", m1, m2) with m1 = gcd(a, m) monic otherwise.
    """
    a = upoly.divrem_monic(ring, list(a), list(m))[1]
    if not a:
        return ("zero",)
    g = upoly.poly_gcd(ring, a, m)
    if upoly.deg(g) == 0:
        return ("inverse", upoly.modinv(ring, a, list(m)))
    if len(g) == len(m):
        return ("zero",)
    return ("split", g, upoly.exact_div(ring, list(m), g))


def _reduce_ypoly(ring, m, f):
    """Re-reduce a Y-polynomial's coefficients into k[X]/(m)."""
    q = QuotientRing(ring, m)
    return upoly.trim(q, [q.from_poly(list(c)) for c in f])


def _normalize(ring, m, f, out):
    """Find the actual Y-degree of f per branch and make it monic.

    Appends (modulus, monic f) or (modulus, None) for the zero branch to
    `out`, splitting the modulus as needed.
    """
    f = _reduce_ypoly(ring, m, f)
    while f:
        res = inv_or_split(ring, list(f[-1]), m)
        if res[0] == "zero":
            f.pop()
            continue
        if res[0] == "inverse":
            q = QuotientRing(ring, m)
            inv = tuple(res[1])
            out.append((m, [q.mul(inv, c) for c in f]))
            return
        _, m1, m2 = res
        _normalize(ring, m1, f, out)
        _normalize(ring, m2, f, out)
        return
    out.append((m, None))


def _gcd_branch(ring, m, f, g, out):
    """Monic gcd of f, g in (k[X]/(m))[Y] by Euclid with splitting."""
    leaves = []
    _normalize(ring, m, g, leaves)
    for mi, gi in leaves:
        if gi is None:
            fl = []
            _normalize(ring, mi, f, fl)
            for mj, fj in fl:
                out.append((mj, fj if fj is not None else []))
            continue
        q = QuotientRing(ring, mi)
        fi = _reduce_ypoly(ring, mi, f)
        r = upoly.divrem_monic(q, fi, gi)[1]
        _gcd_branch(ring, mi, gi, r, out)


def biv_gcd(ring, f1, f2, m) -> SplitContext:
    """Per-branch monic gcd of two Y-polynomials over k[X]/(m).

    f1, f2 are lists of X-polynomials (low Y-degree first); m is monic and
    square-free.  Every coefficient inversion routes through inv_or_split.
    """
    f1q = [tuple(upoly.trim(ring, list(c))) for c in f1]
    f2q = [tuple(upoly.trim(ring, list(c))) for c in f2]
    out: list = []
    _gcd_branch(ring, list(m), f1q, f2q, out)
    ctx = SplitContext(modulus=list(m), branches=out)
    ctx.check_product(ring)
    return ctx


def crt_pair(ring, m1, v1, m2, v2):
    """The unique v mod m1*m2 with v = v1 mod m1 and v = v2 mod m2."""
    u = upoly.modinv(ring, m1, m2)
    diff = upoly.divrem_monic(ring, upoly.poly_sub(ring, v2, v1), m2)[1]
    w = upoly.divrem_monic(ring, upoly.poly_mul(ring, diff, u), m2)[1]
    return upoly.poly_add(ring, v1, upoly.poly_mul(ring, m1, w))


def crt_combine(ring, ctx: SplitContext):
    """Recombine per-branch linear gcds Y - v_i(X) into v mod the modulus.

    Raises ShapeViolation when a branch gcd is not of degree 1 in Y
    (an unlucky separating form upstream).
    """
    acc_m = None
    acc_v = None
    for m, g in ctx.branches:
        if g is None or len(g) != 2:
            raise ShapeViolation(
                f"branch gcd has Y-degree {upoly.deg(g if g else [])}, expected 1"
            )
        q = QuotientRing(ring, m)
        v = list(q.neg(g[0]))  # g = Y + c  ->  v = -c
        if acc_m is None:
            acc_m, acc_v = list(m), v
        else:
            acc_v = crt_pair(ring, acc_m, acc_v, list(m), v)
            acc_m = upoly.poly_mul(ring, acc_m, list(m))
    if acc_m is None:
        raise ShapeViolation("empty split context")
    return upoly.divrem_monic(ring, acc_v, acc_m)[1]


def _resultant_branch(ring, m, a, b, acc, sign, out):
    """res_Y(a, b) per branch, mirroring the field recursion with splits."""
    leaves_a: list = []
    _normalize_keep_lc(ring, m, a, leaves_a)
    for mi, ai in leaves_a:
        acc_i = upoly.divrem_monic(ring, list(acc), mi)[1]
        if ai is None:
            # a = 0: resultant 0 unless b is a constant? res(0, b) = 0
            out.append((mi, []))
            continue
        leaves_b: list = []
        _normalize_keep_lc(ring, mi, b, leaves_b)
        for mj, bj in leaves_b:
            acc_j = upoly.divrem_monic(ring, acc_i, mj)[1]
            _resultant_core(ring, mj, _reduce_ypoly(ring, mj, ai), bj, acc_j, sign, out)


def _normalize_keep_lc(ring, m, f, out):
    """Like _normalize but keeps f unscaled: appends (modulus, f-with-true-degree)."""
    f = _reduce_ypoly(ring, m, f)
    while f:
        res = inv_or_split(ring, list(f[-1]), m)
        if res[0] == "zero":
            f.pop()
            continue
        if res[0] == "inverse":
            out.append((m, f))
            return
        _, m1, m2 = res
        _normalize_keep_lc(ring, m1, f, out)
        _normalize_keep_lc(ring, m2, f, out)
        return
    out.append((m, None))


def _resultant_core(ring, m, a, b, acc, sign, out):
    if b is None:
        out.append((m, []))
        return
    q = QuotientRing(ring, m)
    da, db = len(a) - 1, len(b) - 1
    if db == 0:
        val = q.mul(tuple(acc), q.pow_(b[0], da))
        if sign:
            val = q.neg(val)
        out.append((m, list(val)))
        return
    if da < db:
        if (da * db) % 2:
            sign = not sign
        _resultant_core(ring, m, b, a, acc, sign, out)
        return
    # reduce: r = a mod b after making b monic (may split)
    res = inv_or_split(ring, list(b[-1]), m)
    if res[0] == "split":
        _, m1, m2 = res
        _resultant_branch(ring, m1, a, b, acc, sign, out)
        _resultant_branch(ring, m2, a, b, acc, sign, out)
        return
    assert res[0] == "inverse"
    lc = tuple(res[1])
    qi = QuotientRing(ring, m)
    b_monic = [qi.mul(lc, c) for c in b]
    r = upoly.divrem_monic(qi, list(a), b_monic)[1]
    # res(a, b) = (-1)^(da db) lc(b)^(da - dr) res(b, r); account for the
    # monic scaling: res(a, b_monic * lc(b)) handled via lc powers directly
    leaves_r: list = []
    _normalize_keep_lc(ring, m, r, leaves_r)
    for mi, ri in leaves_r:
        qj = QuotientRing(ring, mi)
        acc_i = tuple(upoly.divrem_monic(ring, list(acc), mi)[1])
        sign_i = sign
        if ri is None:
            out.append((mi, []))
            continue
        dr = len(ri) - 1
        if (da * db) % 2:
            sign_i = not sign_i
        lc_b = tuple(upoly.divrem_monic(ring, list(b[-1]), mi)[1])
        acc_i = qj.mul(acc_i, qj.pow_(lc_b, da - dr))
        _resultant_core(
            ring, mi, _reduce_ypoly(ring, mi, b), _reduce_ypoly(ring, mi, ri),
            list(acc_i), sign_i, out,
        )


def resultant_mod(ring, f, g, m):
    """res_Y(f, g) computed in k[X]/(m) by dynamic evaluation plus CRT.

    f and g are Y-polynomials with X-polynomial coefficients; returns the
    canonical representative (degree < deg m) of the resultant.
    """
    fq = [tuple(upoly.trim(ring, list(c))) for c in f]
    gq = [tuple(upoly.trim(ring, list(c))) for c in g]
    out: list = []
    _resultant_branch(ring, list(m), fq, gq, [ring.one], False, out)
    ctx = SplitContext(modulus=list(m), branches=out)
    ctx.check_product(ring)
    acc_m = None
    acc_v = None
    for mi, vi in ctx.branches:
        vi = list(vi)
        if acc_m is None:
            acc_m, acc_v = list(mi), vi
        else:
            acc_v = crt_pair(ring, acc_m, acc_v, list(mi), vi)
            acc_m = upoly.poly_mul(ring, acc_m, list(mi))
    return upoly.divrem_monic(ring, acc_v, acc_m)[1]
