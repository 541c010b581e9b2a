"""Dense univariate polynomials over any coefficient ring.

A polynomial is a plain list of ring elements, lowest degree first, with a
nonzero leading (last) coefficient; the zero polynomial is the empty list.
Every function takes the coefficient ring as its first argument, so the
same code runs over prime fields, extensions, the rationals, residue rings,
truncated power series (`SeriesRing`) and quotient rings (`QuotientRing`).

The degree of the zero polynomial is the sentinel `NEG_INF`, never -1.

Convention note: `discriminant(f)` is defined as `resultant(f, f')` with no
leading-coefficient or sign normalization.  Downstream code only consumes
its vanishing locus and gcd structure, so the unnormalized convention is
safe; tests pin it.  `resultant(f, g)` follows
res(f, g) = lc(f)^deg(g) * prod g(alpha) over the roots alpha of f.
"""

from __future__ import annotations

from .errors import (
    DuplicateNode,
    NonUnit,
    NonUnitConstantTerm,
    NotCoprime,
    NotMonic,
)

NEG_INF = float("-inf")

KARATSUBA_CUTOFF = 32


def trim(ring, f):
    """Drop trailing zeros in place; returns f."""
    while f and ring.is_zero(f[-1]):
        f.pop()
    return f


def deg(f):
    return len(f) - 1 if f else NEG_INF


def is_zero_poly(f):
    return not f


def constant(ring, c):
    return [] if ring.is_zero(c) else [c]


def from_int_poly(ring, ints):
    return trim(ring, [ring.from_int(c) for c in ints])


def poly_eq(ring, f, g):
    return list(f) == list(g)


def poly_add(ring, f, g):
    if len(f) < len(g):
        f, g = g, f
    out = list(f)
    for i, c in enumerate(g):
        out[i] = ring.add(out[i], c)
    return trim(ring, out)


def poly_sub(ring, f, g):
    n = max(len(f), len(g))
    out = []
    z = ring.zero
    for i in range(n):
        a = f[i] if i < len(f) else z
        b = g[i] if i < len(g) else z
        out.append(ring.sub(a, b))
    return trim(ring, out)


def poly_neg(ring, f):
    return [ring.neg(c) for c in f]


def poly_scale(ring, c, f):
    if ring.is_zero(c):
        return []
    return trim(ring, [ring.mul(c, a) for a in f])


def _mul_schoolbook(ring, f, g):
    out = [ring.zero] * (len(f) + len(g) - 1)
    for i, x in enumerate(f):
        if ring.is_zero(x):
            continue
        for j, y in enumerate(g):
            out[i + j] = ring.add(out[i + j], ring.mul(x, y))
    return out


def _mul_karatsuba(ring, f, g):
    if min(len(f), len(g)) < KARATSUBA_CUTOFF:
        return _mul_schoolbook(ring, f, g)
    n = max(len(f), len(g))
    z = ring.zero
    f = f + [z] * (n - len(f))
    g = g + [z] * (n - len(g))
    h = n // 2
    f0, f1 = f[:h], f[h:]
    g0, g1 = g[:h], g[h:]
    low = _mul_karatsuba(ring, f0, g0)
    high = _mul_karatsuba(ring, f1, g1)
    fs = [ring.add(a, b) for a, b in _zip_pad(ring, f0, f1)]
    gs = [ring.add(a, b) for a, b in _zip_pad(ring, g0, g1)]
    mid = _mul_karatsuba(ring, fs, gs)
    out = [z] * (2 * n - 1)
    for i, c in enumerate(low):
        out[i] = ring.add(out[i], c)
        out[i + h] = ring.sub(out[i + h], c)
    for i, c in enumerate(mid):
        out[i + h] = ring.add(out[i + h], c)
    for i, c in enumerate(high):
        out[i + h] = ring.sub(out[i + h], c)
        out[i + 2 * h] = ring.add(out[i + 2 * h], c)
    return out


def _zip_pad(ring, f, g):
    n = max(len(f), len(g))
    z = ring.zero
    return [(f[i] if i < len(f) else z, g[i] if i < len(g) else z) for i in range(n)]


def poly_mul(ring, f, g):
    """Product; schoolbook below the Karatsuba crossover, Karatsuba above."""
    if not f or not g:
        return []
    return trim(ring, _mul_karatsuba(ring, list(f), list(g)))


def divrem_monic(ring, f, g):
    """(quotient, remainder) of f by a monic g, valid over any ring."""
    if not g or not _is_one(ring, g[-1]):
        raise NotMonic("divisor must be monic")
    dg = len(g) - 1
    if dg == 0:
        return list(f), []
    r = list(f)
    q = [ring.zero] * max(0, len(f) - dg)
    while len(r) - 1 >= dg:
        c = r[-1]
        k = len(r) - 1 - dg
        if not ring.is_zero(c):
            q[k] = c
            for j in range(dg):
                r[k + j] = ring.sub(r[k + j], ring.mul(c, g[j]))
        r.pop()
        trim(ring, r)
    return trim(ring, q), r


def _is_one(ring, c):
    return c == ring.one


def divrem_field(ring, f, g):
    """(quotient, remainder) over a field; g arbitrary nonzero."""
    if not g:
        raise ZeroDivisionError("polynomial division by zero")
    lc_inv = ring.inv(g[-1])
    dg = len(g) - 1
    r = list(f)
    q = [ring.zero] * max(0, len(f) - dg)
    while len(r) - 1 >= dg and r:
        c = ring.mul(r[-1], lc_inv)
        k = len(r) - 1 - dg
        q[k] = c
        for j in range(dg + 1):
            r[k + j] = ring.sub(r[k + j], ring.mul(c, g[j]))
        trim(ring, r)
    return trim(ring, q), r


def make_monic(ring, f):
    if not f:
        return []
    lc = f[-1]
    if _is_one(ring, lc):
        return list(f)
    c = ring.inv(lc)
    return [ring.mul(c, a) for a in f]


def exact_div(ring, f, g):
    """f / g for monic g dividing f exactly."""
    q, r = divrem_monic(ring, f, g)
    if r:
        raise ValueError("exact division left a remainder")
    return q


def derivative(ring, f):
    out = []
    for i in range(1, len(f)):
        out.append(ring.mul(ring.from_int(i), f[i]))
    return trim(ring, out)


def evaluate(ring, f, x):
    acc = ring.zero
    for c in reversed(f):
        acc = ring.add(ring.mul(acc, x), c)
    return acc


def multipoint_eval(ring, f, points):
    return [evaluate(ring, f, x) for x in points]


def batch_inv(ring, values):
    """Simultaneous inversion with one ring inversion and 3n multiplications."""
    n = len(values)
    if n == 0:
        return []
    prefix = [values[0]]
    for v in values[1:]:
        prefix.append(ring.mul(prefix[-1], v))
    inv_all = ring.inv(prefix[-1])
    out = [None] * n
    for i in range(n - 1, 0, -1):
        out[i] = ring.mul(inv_all, prefix[i - 1])
        inv_all = ring.mul(inv_all, values[i])
    out[0] = inv_all
    return out


def _interpolate_prime_field(p, pairs):
    """Plain-int inner loops for the prime-field case (hot path)."""
    xs = [a for a, _ in pairs]
    n = len(pairs)
    diffs = []
    for j in range(1, n):
        for i in range(n - 1, j - 1, -1):
            dx = (xs[i] - xs[i - j]) % p
            if dx == 0:
                raise DuplicateNode("interpolation nodes are not distinct")
            diffs.append(dx)
    # batched inversion on raw ints
    invs = []
    if diffs:
        prefix = [diffs[0]]
        for v in diffs[1:]:
            prefix.append(prefix[-1] * v % p)
        inv_all = pow(prefix[-1], -1, p)
        invs = [0] * len(diffs)
        for i in range(len(diffs) - 1, 0, -1):
            invs[i] = inv_all * prefix[i - 1] % p
            inv_all = inv_all * diffs[i] % p
        invs[0] = inv_all
    coef = [b for _, b in pairs]
    k = 0
    for j in range(1, n):
        for i in range(n - 1, j - 1, -1):
            coef[i] = (coef[i] - coef[i - 1]) * invs[k] % p
            k += 1
    out = [coef[-1]]
    for i in range(n - 2, -1, -1):
        x = xs[i]
        out.append(0)
        for j in range(len(out) - 1, 0, -1):
            out[j] = (out[j - 1] - x * out[j]) % p
        out[0] = (coef[i] - x * out[0]) % p
    while out and out[-1] == 0:
        out.pop()
    return out


def interpolate(ring, pairs):
    """Unique interpolating polynomial through (alpha_i, beta_i), Newton form.

    Requires invertible node differences; raises DuplicateNode otherwise.
    The divided-difference denominators are inverted in one batch.
    """
    pairs = list(pairs)
    xs = [a for a, _ in pairs]
    n = len(pairs)
    if n == 0:
        return []
    if getattr(ring, "kind", None) == "prime_field":
        return _interpolate_prime_field(ring.p, pairs)
    diffs = []
    for j in range(1, n):
        for i in range(n - 1, j - 1, -1):
            dx = ring.sub(xs[i], xs[i - j])
            if ring.is_zero(dx):
                raise DuplicateNode("interpolation nodes are not distinct")
            diffs.append(dx)
    try:
        invs = batch_inv(ring, diffs)
    except NonUnit as exc:
        raise DuplicateNode(f"node difference not invertible: {exc}") from exc
    coef = [b for _, b in pairs]
    k = 0
    for j in range(1, n):
        for i in range(n - 1, j - 1, -1):
            coef[i] = ring.mul(ring.sub(coef[i], coef[i - 1]), invs[k])
            k += 1
    # Horner expansion of the Newton form, in place: out = out*(X - x_i) + c_i
    out = [coef[-1]]
    for i in range(n - 2, -1, -1):
        x = xs[i]
        out.append(ring.zero)
        for j in range(len(out) - 1, 0, -1):
            out[j] = ring.sub(out[j - 1], ring.mul(x, out[j]))
        out[0] = ring.sub(coef[i], ring.mul(x, out[0]))
    return trim(ring, out)


def poly_gcd(ring, f, g):
    """Monic gcd over a field; gcd(0, 0) = 0."""
    f, g = trim(ring, list(f)), trim(ring, list(g))
    while g:
        f = divrem_field(ring, f, g)[1]
        f, g = g, f
    return make_monic(ring, f)


def xgcd(ring, f, g):
    """(d, u, v) with u*f + v*g = d, d the monic gcd."""
    r0, r1 = trim(ring, list(f)), trim(ring, list(g))
    s0, s1 = [ring.one], []
    t0, t1 = [], [ring.one]
    while r1:
        q, r = divrem_field(ring, r0, r1)
        r0, r1 = r1, r
        s0, s1 = s1, poly_sub(ring, s0, poly_mul(ring, q, s1))
        t0, t1 = t1, poly_sub(ring, t0, poly_mul(ring, q, t1))
    if not r0:
        return [], [], []
    c = ring.inv(r0[-1])
    return (
        [ring.mul(c, a) for a in r0],
        [ring.mul(c, a) for a in s0],
        [ring.mul(c, a) for a in t0],
    )


def modinv(ring, f, m):
    """Inverse of f modulo monic m; NotCoprime carries the witness gcd."""
    if not m or not _is_one(ring, m[-1]):
        raise NotMonic("modulus must be monic")
    f = divrem_monic(ring, f, m)[1]
    d, u, _ = xgcd(ring, f, m)
    if deg(d) != 0:
        raise NotCoprime("argument shares a factor with the modulus", witness=d)
    return divrem_monic(ring, u, m)[1]


def resultant(ring, f, g):
    """res(f, g) = lc(f)^deg(g) * prod g(alpha_i) over the roots of f."""
    a, b = trim(ring, list(f)), trim(ring, list(g))
    if not a or not b:
        return ring.zero
    sign = False
    acc = ring.one
    while True:
        da, db = len(a) - 1, len(b) - 1
        if db == 0:
            acc = ring.mul(acc, ring.pow_(b[0], da))
            break
        if da < db:
            a, b = b, a
            if (da * db) % 2:
                sign = not sign
            continue
        r = divrem_field(ring, a, b)[1]
        if not r:
            return ring.zero
        dr = len(r) - 1
        if (da * db) % 2:
            sign = not sign
        acc = ring.mul(acc, ring.pow_(b[-1], da - dr))
        a, b = b, r
    return ring.neg(acc) if sign else acc


def discriminant(ring, f):
    """res(f, f'); unnormalized, only the zero locus is meaningful downstream."""
    if deg(f) < 1:
        raise ValueError("discriminant needs degree at least 1")
    fd = derivative(ring, f)
    if not fd:
        return ring.zero
    return resultant(ring, f, fd)


def squarefree_part(ring, f):
    """Monic product of the distinct irreducible factors of a monic f.

    Over characteristic p the inseparable branch f = g(T^p) is handled by
    coefficient-wise p-th roots (perfect base field) and recursion.
    """
    if not f or not _is_one(ring, f[-1]):
        raise NotMonic("input must be monic")
    if len(f) == 1:
        return [ring.one]
    fd = derivative(ring, f)
    if not fd:
        # f = g(T^p) = (h(T))^p with h the coefficient-wise p-th root of g
        p = ring.char
        h = [ring.pth_root(f[i]) for i in range(0, len(f), p)]
        return squarefree_part(ring, h)
    u = poly_gcd(ring, f, fd)
    v = exact_div(ring, f, u)  # distinct factors with multiplicity not divisible by p
    w = u
    g = poly_gcd(ring, w, v)
    while deg(g) > 0:
        w = exact_div(ring, w, g)
        g = poly_gcd(ring, w, v)
    # w now collects the factors whose multiplicity is divisible by p
    if deg(w) > 0:
        return poly_mul(ring, v, squarefree_part(ring, make_monic(ring, w)))
    return v


def compose_shift(ring, f, c):
    """f(X + c) by Horner; used for Taylor shifts between Z and X coordinates."""
    out = []
    shift = [c, ring.one]
    for a in reversed(f):
        out = poly_add(ring, poly_mul(ring, out, shift), constant(ring, a))
    return out


def poly_pow_mod(ring, f, n, m):
    """f^n modulo monic m (square and multiply)."""
    acc = [ring.one]
    f = divrem_monic(ring, f, m)[1]
    while n:
        if n & 1:
            acc = divrem_monic(ring, poly_mul(ring, acc, f), m)[1]
        f = divrem_monic(ring, poly_mul(ring, f, f), m)[1]
        n >>= 1
    return acc


# ---------------------------------------------------------------------------
# truncated power series in the local variable Z = X - base_point


class SeriesRing:
    """k[[Z]]/(Z^prec): elements are trimmed tuples of base elements, length
    at most prec.  All operations truncate at Z^prec."""

    kind = "series"

    def __init__(self, base, prec: int, base_point=None):
        if prec < 1:
            raise ValueError("precision must be at least 1")
        self.base = base
        self.prec = prec
        self.base_point = base_point if base_point is not None else base.zero
        self.char = base.char
        self.card = None
        self.zero = ()
        self.one = (base.one,)

    def __repr__(self):
        return f"SeriesRing({self.base!r}, prec={self.prec})"

    def __eq__(self, other):
        return (
            isinstance(other, SeriesRing)
            and other.base == self.base
            and other.prec == self.prec
            and other.base_point == self.base_point
        )

    def __hash__(self):
        return hash(("series", self.base, self.prec))

    def with_prec(self, prec):
        return SeriesRing(self.base, prec, self.base_point)

    def truncate(self, a):
        a = a[: self.prec]
        n = len(a)
        while n and self.base.is_zero(a[n - 1]):
            n -= 1
        return tuple(a[:n])

    def from_int(self, a):
        return self.truncate((self.base.from_int(a),))

    def contains(self, x):
        return (
            isinstance(x, tuple)
            and len(x) <= self.prec
            and all(self.base.contains(c) for c in x)
        )

    def coerce(self, x):
        """Scalars embed as constant series; sequences are interpreted as
        coefficient tuples only when they cannot be scalars of the base."""
        if self.contains(x):
            return self.truncate(x)
        if self.base.contains(x):
            return self.truncate((x,))
        if isinstance(x, int):
            return self.from_int(x)
        try:
            return self.truncate((self.base.coerce(x),))
        except TypeError:
            pass
        if isinstance(x, (tuple, list)):
            return self.truncate(tuple(self.base.coerce(c) for c in x))
        raise TypeError(f"cannot coerce {type(x).__name__} into a series ring")

    def inject(self, i):
        return self.truncate((self.base.inject(i),))

    def add(self, a, b):
        base = self.base
        n = max(len(a), len(b))
        z = base.zero
        return self.truncate(
            tuple(
                base.add(a[i] if i < len(a) else z, b[i] if i < len(b) else z)
                for i in range(n)
            )
        )

    def sub(self, a, b):
        base = self.base
        n = max(len(a), len(b))
        z = base.zero
        return self.truncate(
            tuple(
                base.sub(a[i] if i < len(a) else z, b[i] if i < len(b) else z)
                for i in range(n)
            )
        )

    def neg(self, a):
        base = self.base
        return tuple(base.neg(c) for c in a)

    def mul(self, a, b):
        if not a or not b:
            return ()
        base = self.base
        t = self.prec
        out = [base.zero] * min(len(a) + len(b) - 1, t)
        for i, x in enumerate(a):
            if i >= t:
                break
            if base.is_zero(x):
                continue
            for j, y in enumerate(b):
                if i + j >= t:
                    break
                out[i + j] = base.add(out[i + j], base.mul(x, y))
        return self.truncate(tuple(out))

    def pow_(self, a, n: int):
        acc = self.one
        while n:
            if n & 1:
                acc = self.mul(acc, a)
            a = self.mul(a, a)
            n >>= 1
        return acc

    def inv(self, a):
        """Newton iteration doubling the precision each round."""
        if not a or self.base.is_zero(a[0]) or not self.base.is_unit(a[0]):
            raise NonUnitConstantTerm("series constant term is not a unit")
        b = (self.base.inv(a[0]),)
        t = 1
        two = self.from_int(2)
        while t < self.prec:
            t = min(2 * t, self.prec)
            stage = self.with_prec(t)
            b = stage.mul(b, stage.sub(two, stage.mul(self.truncate(a)[:t], b)))
        return self.truncate(b)

    def is_zero(self, a):
        return not a

    def is_unit(self, a):
        return bool(a) and self.base.is_unit(a[0])

    def fmt(self, a):
        return [self.base.fmt(c) for c in a]


def series_from_poly(sring: SeriesRing, f):
    """Expand a polynomial in X around the base point: coefficients of
    f(base_point + Z), truncated at the series precision."""
    shifted = compose_shift(sring.base, list(f), sring.base_point)
    return sring.truncate(tuple(shifted))


def poly_from_series(sring: SeriesRing, a):
    """Interpret a series as a polynomial in X: g(Z) -> g(X - base_point)."""
    base = sring.base
    return compose_shift(base, list(a), base.neg(sring.base_point))


# ---------------------------------------------------------------------------
# quotient ring R[T]/(m) for monic m


class QuotientRing:
    """R[T]/(m) for monic m over the ring R.

    Elements are trimmed tuples of base elements of length < deg m.
    Inversion requires the base to be a field and raises NotCoprime with the
    witness gcd otherwise (the dynamic-evaluation module catches it).
    """

    kind = "quotient"

    def __init__(self, base, modulus):
        if not modulus or modulus[-1] != base.one:
            raise NotMonic("quotient modulus must be monic")
        self.base = base
        self.modulus = [base.coerce(c) for c in modulus]
        self.d = len(modulus) - 1
        self.char = base.char
        self.card = None if base.card is None else base.card**self.d
        self.zero = ()
        self.one = (base.one,) if self.d > 0 else ()

    def __repr__(self):
        return f"QuotientRing({self.base!r}, deg={self.d})"

    def to_poly(self, a):
        return list(a)

    def from_poly(self, f):
        r = divrem_monic(self.base, trim(self.base, list(f)), self.modulus)[1]
        return tuple(r)

    def from_int(self, a):
        return self.from_poly([self.base.from_int(a)])

    def contains(self, x):
        return (
            isinstance(x, tuple)
            and len(x) < max(self.d + 1, 2)
            and all(self.base.contains(c) for c in x)
        )

    def coerce(self, x):
        if self.base.contains(x):
            return self.from_poly([x])
        if isinstance(x, int):
            return self.from_int(x)
        if isinstance(x, (tuple, list)):
            return self.from_poly(list(x))
        return self.from_poly([self.base.coerce(x)])

    def inject(self, i):
        q = self.base.card
        digits = []
        for _ in range(self.d):
            digits.append(self.base.inject(i % q))
            i //= q
        return tuple(trim(self.base, digits))

    def add(self, a, b):
        return tuple(poly_add(self.base, list(a), list(b)))

    def sub(self, a, b):
        return tuple(poly_sub(self.base, list(a), list(b)))

    def neg(self, a):
        return tuple(poly_neg(self.base, list(a)))

    def mul(self, a, b):
        if not a or not b:
            return ()
        prod = poly_mul(self.base, list(a), list(b))
        return tuple(divrem_monic(self.base, prod, self.modulus)[1])

    def pow_(self, a, n: int):
        acc = self.one
        while n:
            if n & 1:
                acc = self.mul(acc, a)
            a = self.mul(a, a)
            n >>= 1
        return acc

    def inv(self, a):
        return tuple(modinv(self.base, list(a), self.modulus))

    def is_zero(self, a):
        return not a

    def is_unit(self, a):
        try:
            self.inv(a)
            return True
        except (NotCoprime, NonUnit):
            return False

    def fmt(self, a):
        return [self.base.fmt(c) for c in a]
