"""Coefficient rings: prime fields, extension fields, rationals, residue rings.

Elements are canonical immutable values rather than wrapper objects: an
element of F_p or Z/p^k is an int in [0, modulus), an element of F_{p^e} is
a tuple of base-field elements of length e (lowest degree first), and a
rational is a `fractions.Fraction` in lowest terms with positive
denominator.  Equality of representatives is equality of elements.  The
ring object carries the operations, so generic code receives a ring and
threads it through.

The common ring protocol (shared with the quotient and truncated-series
rings in `upoly`):

    zero, one, char, card          -- card is None for the rationals
    from_int(a), coerce(x), inject(i)
    add, sub, mul, neg, pow_, inv
    is_zero(a), is_unit(a)
    pth_root(a), sample(n, rng)
    fmt(a), parse_elt(s)           -- decimal-string serialization

`inject(i)` is the canonical injection of {0, ..., card-1} used to realize
sampling sets as initial segments: base-p digit expansion for extensions,
identity for prime fields and residue rings, the integer itself for Q.
All randomness is drawn from explicitly passed `random.Random` streams.
"""

from __future__ import annotations

import random
from fractions import Fraction

from .errors import BadPrime, FieldTooSmall, NonUnit, Unsupported

MAX_PRIME_BITS = 62  # keep double-word products exact in compiled backends

_SMALL_PRIMES = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47)


def is_probable_prime(n: int, rounds: int = 40, rng: random.Random | None = None) -> bool:
    """Miller-Rabin test with `rounds` random witnesses (deterministic per n)."""
    if n < 2:
        return False
    for q in _SMALL_PRIMES:
        if n == q:
            return True
        if n % q == 0:
            return False
    if rng is None:
        rng = random.Random(f"miller-rabin:{n}")
    d = n - 1
    s = 0
    while d % 2 == 0:
        d //= 2
        s += 1
    for _ in range(rounds):
        a = rng.randrange(2, n - 1)
        x = pow(a, d, n)
        if x in (1, n - 1):
            continue
        for _ in range(s - 1):
            x = x * x % n
            if x == n - 1:
                break
        else:
            return False
    return True


class PrimeField:
    """F_p with canonical representatives in [0, p)."""

    kind = "prime_field"

    def __init__(self, p: int):
        if p.bit_length() > MAX_PRIME_BITS:
            raise ValueError(f"prime must be below 2^{MAX_PRIME_BITS}")
        if not is_probable_prime(p):
            raise ValueError(f"{p} is not prime")
        self.p = p
        self.char = p
        self.card = p
        self.zero = 0
        self.one = 1

    def __repr__(self):
        return f"PrimeField({self.p})"

    def __eq__(self, other):
        return isinstance(other, PrimeField) and other.p == self.p

    def __hash__(self):
        return hash(("Fp", self.p))

    def from_int(self, a: int):
        return a % self.p

    def coerce(self, x):
        if isinstance(x, int):
            return x % self.p
        raise TypeError(f"cannot coerce {type(x).__name__} into F_p")

    inject = from_int

    def add(self, a, b):
        c = a + b
        return c - self.p if c >= self.p else c

    def sub(self, a, b):
        c = a - b
        return c + self.p if c < 0 else c

    def mul(self, a, b):
        return a * b % self.p

    def neg(self, a):
        return self.p - a if a else 0

    def pow_(self, a, e: int):
        return pow(a, e, self.p)

    def inv(self, a):
        if a == 0:
            raise NonUnit("zero is not invertible", witness=0)
        return pow(a, -1, self.p)

    def is_zero(self, a):
        return a == 0

    def is_unit(self, a):
        return a != 0

    def contains(self, x):
        return isinstance(x, int) and 0 <= x < self.p

    def pth_root(self, a):
        # Frobenius is the identity on the prime field.
        return a

    def sample(self, n: int, rng: random.Random):
        if n > self.card:
            raise FieldTooSmall(n, self.card)
        return rng.randrange(n)

    def fmt(self, a):
        return str(a)

    def parse_elt(self, s):
        return self.from_int(int(s))


class ExtensionField:
    """F_{q^e} as base[T]/(modulus) for a monic irreducible modulus.

    The base is a PrimeField, or transiently another ExtensionField when the
    solver needs headroom above a small non-prime field.  Elements are
    tuples of base elements of fixed length e.
    """

    kind = "extension_field"

    def __init__(self, base, modulus, check_irreducible: bool = True):
        e = len(modulus) - 1
        if e < 2:
            raise ValueError("extension degree must be at least 2")
        if modulus[-1] != base.one:
            raise ValueError("modulus must be monic")
        if check_irreducible and not is_irreducible(base, list(modulus)):
            raise ValueError("modulus is reducible")
        self.base = base
        self.e = e
        self.modulus = tuple(modulus)
        self.char = base.char
        self.card = base.card**e
        self.zero = (base.zero,) * e
        self.one = (base.one,) + (base.zero,) * (e - 1)
        # x^e = -(m_0 + m_1 x + ... + m_{e-1} x^{e-1})
        self._red = tuple(base.neg(c) for c in modulus[:-1])

    def __repr__(self):
        return f"ExtensionField({self.base!r}, e={self.e})"

    def __eq__(self, other):
        return (
            isinstance(other, ExtensionField)
            and other.base == self.base
            and other.modulus == self.modulus
        )

    def __hash__(self):
        return hash(("Fq", self.base, self.modulus))

    def from_int(self, a: int):
        return (self.base.from_int(a),) + (self.base.zero,) * (self.e - 1)

    def embed(self, a):
        """Constant-coefficient embedding of a base-field element."""
        return (a,) + (self.base.zero,) * (self.e - 1)

    def to_base(self, a):
        """Inverse of embed; returns None when a is not a base element."""
        zero = self.base.zero
        if any(c != zero for c in a[1:]):
            return None
        return a[0]

    def contains(self, x):
        return (
            isinstance(x, tuple)
            and len(x) == self.e
            and all(self.base.contains(c) for c in x)
        )

    def coerce(self, x):
        if self.contains(x):
            return x
        if self.base.contains(x):
            return self.embed(x)
        if isinstance(x, int):
            return self.from_int(x)
        return self.embed(self.base.coerce(x))

    def inject(self, i: int):
        digits = []
        q = self.base.card
        for _ in range(self.e):
            digits.append(self.base.inject(i % q))
            i //= q
        return tuple(digits)

    def add(self, a, b):
        base = self.base
        return tuple(base.add(x, y) for x, y in zip(a, b))

    def sub(self, a, b):
        base = self.base
        return tuple(base.sub(x, y) for x, y in zip(a, b))

    def neg(self, a):
        base = self.base
        return tuple(base.neg(x) for x in a)

    def mul(self, a, b):
        base = self.base
        e = self.e
        prod = [base.zero] * (2 * e - 1)
        for i, x in enumerate(a):
            if x == base.zero:
                continue
            for j, y in enumerate(b):
                prod[i + j] = base.add(prod[i + j], base.mul(x, y))
        red = self._red
        for i in range(2 * e - 2, e - 1, -1):
            c = prod[i]
            if c == base.zero:
                continue
            k = i - e
            for j in range(e):
                prod[k + j] = base.add(prod[k + j], base.mul(c, red[j]))
        return tuple(prod[:e])

    def pow_(self, a, n: int):
        acc = self.one
        while n:
            if n & 1:
                acc = self.mul(acc, a)
            a = self.mul(a, a)
            n >>= 1
        return acc

    def inv(self, a):
        if a == self.zero:
            raise NonUnit("zero is not invertible", witness=a)
        base = self.base
        # extended Euclid on coefficient lists over the base field
        r0, r1 = list(self.modulus), _trim(base, list(a))
        s0, s1 = [], [base.one]
        while r1:
            lc = base.inv(r1[-1])
            q, r0 = _divmod_field(base, r0, r1, lc)
            r0, r1 = r1, r0
            s0 = _poly_sub(base, s0, _poly_mul(base, q, s1))
            s0, s1 = s1, s0
        if len(r0) != 1:
            raise NonUnit("gcd with modulus is nontrivial", witness=tuple(r0))
        c = base.inv(r0[0])
        out = [base.mul(c, x) for x in s0]
        out += [base.zero] * (self.e - len(out))
        return tuple(out[: self.e])

    def is_zero(self, a):
        return a == self.zero

    def is_unit(self, a):
        return a != self.zero

    def pth_root(self, a):
        # inverse Frobenius: x -> x^(card/p)
        return self.pow_(a, self.card // self.char)

    def sample(self, n: int, rng: random.Random):
        if n > self.card:
            raise FieldTooSmall(n, self.card)
        return self.inject(rng.randrange(n))

    def fmt(self, a):
        return [self.base.fmt(c) for c in a]

    def parse_elt(self, s):
        return tuple(self.base.parse_elt(c) for c in s)


class Rationals:
    """Exact rational arithmetic on `fractions.Fraction` values."""

    kind = "rationals"

    def __init__(self):
        self.char = 0
        self.card = None
        self.zero = Fraction(0)
        self.one = Fraction(1)

    def __repr__(self):
        return "Rationals()"

    def __eq__(self, other):
        return isinstance(other, Rationals)

    def __hash__(self):
        return hash("Q")

    def from_int(self, a: int):
        return Fraction(a)

    def coerce(self, x):
        return Fraction(x)

    inject = from_int

    def add(self, a, b):
        return a + b

    def sub(self, a, b):
        return a - b

    def mul(self, a, b):
        return a * b

    def neg(self, a):
        return -a

    def pow_(self, a, e: int):
        return a**e

    def inv(self, a):
        if a == 0:
            raise NonUnit("zero is not invertible", witness=a)
        return 1 / a

    def is_zero(self, a):
        return a == 0

    def is_unit(self, a):
        return a != 0

    def contains(self, x):
        return isinstance(x, Fraction)

    def pth_root(self, a):
        # characteristic zero: identity
        return a

    def sample(self, n: int, rng: random.Random):
        return Fraction(rng.randrange(n))

    def fmt(self, a):
        return str(a.numerator) if a.denominator == 1 else f"{a.numerator}/{a.denominator}"

    def parse_elt(self, s):
        return Fraction(s)


class ResidueRing:
    """Z/p^k for p-adic work; canonical representatives in [0, p^k)."""

    kind = "residue_ring"

    def __init__(self, p: int, k: int):
        if k < 1:
            raise ValueError("precision exponent must be at least 1")
        if p.bit_length() > MAX_PRIME_BITS:
            raise ValueError(f"prime must be below 2^{MAX_PRIME_BITS}")
        if not is_probable_prime(p):
            raise ValueError(f"{p} is not prime")
        self.p = p
        self.k = k
        self.m = p**k
        self.char = p
        self.card = self.m
        self.zero = 0
        self.one = 1 % self.m

    def __repr__(self):
        return f"ResidueRing({self.p}, {self.k})"

    def __eq__(self, other):
        return isinstance(other, ResidueRing) and (other.p, other.k) == (self.p, self.k)

    def __hash__(self):
        return hash(("Zpk", self.p, self.k))

    def from_int(self, a: int):
        return a % self.m

    def coerce(self, x):
        if isinstance(x, int):
            return x % self.m
        raise TypeError(f"cannot coerce {type(x).__name__} into Z/p^k")

    inject = from_int

    def add(self, a, b):
        c = a + b
        return c - self.m if c >= self.m else c

    def sub(self, a, b):
        c = a - b
        return c + self.m if c < 0 else c

    def mul(self, a, b):
        return a * b % self.m

    def neg(self, a):
        return self.m - a if a else 0

    def pow_(self, a, e: int):
        return pow(a, e, self.m)

    def inv(self, a):
        if a % self.p == 0:
            import math

            raise NonUnit(f"{a} shares the factor p={self.p} with the modulus",
                          witness=math.gcd(a, self.m))
        return pow(a, -1, self.m)

    def is_zero(self, a):
        return a == 0

    def is_unit(self, a):
        return a % self.p != 0

    def contains(self, x):
        return isinstance(x, int) and 0 <= x < self.m

    def pth_root(self, a):
        if self.k > 1:
            raise Unsupported("p-th roots are not defined in Z/p^k for k > 1")
        return a

    def sample(self, n: int, rng: random.Random):
        if n > self.card:
            raise FieldTooSmall(n, self.card)
        return rng.randrange(n)

    def fmt(self, a):
        return str(a)

    def parse_elt(self, s):
        return self.from_int(int(s))


# ---------------------------------------------------------------------------
# small polynomial helpers over a base field (coefficient lists, low first);
# only what extension arithmetic and irreducibility testing need.


def _trim(ring, f):
    while f and f[-1] == ring.zero:
        f.pop()
    return f


def _poly_mul(ring, f, g):
    if not f or not g:
        return []
    out = [ring.zero] * (len(f) + len(g) - 1)
    for i, x in enumerate(f):
        if x == ring.zero:
            continue
        for j, y in enumerate(g):
            out[i + j] = ring.add(out[i + j], ring.mul(x, y))
    return _trim(ring, out)


def _poly_sub(ring, f, g):
    n = max(len(f), len(g))
    f = f + [ring.zero] * (n - len(f))
    g = g + [ring.zero] * (n - len(g))
    return _trim(ring, [ring.sub(a, b) for a, b in zip(f, g)])


def _divmod_field(ring, f, g, lc_inv):
    """Quotient and remainder of f by g over a field; lc_inv = 1/lc(g)."""
    f = list(f)
    q = [ring.zero] * max(0, len(f) - len(g) + 1)
    dg = len(g) - 1
    while len(f) - 1 >= dg and f:
        c = ring.mul(f[-1], lc_inv)
        k = len(f) - 1 - dg
        q[k] = c
        for j in range(dg + 1):
            f[k + j] = ring.sub(f[k + j], ring.mul(c, g[j]))
        _trim(ring, f)
    return _trim(ring, q), f


def _powmod(ring, f, n, m, m_lc_inv):
    """f^n modulo the polynomial m over a field."""
    acc = [ring.one]
    f = _divmod_field(ring, list(f), m, m_lc_inv)[1]
    while n:
        if n & 1:
            acc = _divmod_field(ring, _poly_mul(ring, acc, f), m, m_lc_inv)[1]
        f = _divmod_field(ring, _poly_mul(ring, f, f), m, m_lc_inv)[1]
        n >>= 1
    return acc


def _poly_gcd(ring, f, g):
    f, g = list(f), list(g)
    while g:
        lc_inv = ring.inv(g[-1])
        f = _divmod_field(ring, f, g, lc_inv)[1]
        f, g = g, f
    return f


def is_irreducible(base, f) -> bool:
    """Rabin test: f monic over the finite field `base` is irreducible iff
    T^(q^e) = T mod f and gcd(T^(q^(e/l)) - T, f) = 1 for prime l | e."""
    e = len(f) - 1
    if e < 1:
        return False
    if e == 1:
        return True
    q = base.card
    x = [base.zero, base.one]
    lc_inv = base.inv(f[-1])
    for ell in _prime_divisors(e):
        h = _poly_sub(base, _powmod(base, x, q ** (e // ell), f, lc_inv), x)
        if len(_poly_gcd(base, list(f), h)) != 1:
            return False
    h = _poly_sub(base, _powmod(base, x, q**e, f, lc_inv), x)
    return not h


def _prime_divisors(n):
    out = []
    d = 2
    while d * d <= n:
        if n % d == 0:
            out.append(d)
            while n % d == 0:
                n //= d
        d += 1
    if n > 1:
        out.append(n)
    return out


def random_irreducible(base, e: int, rng: random.Random):
    """Random monic irreducible of degree e over a finite field, by
    sampling plus the Rabin test.  Degree 1 returns T."""
    if e == 1:
        return [base.zero, base.one]
    q = base.card
    while True:
        f = [base.inject(rng.randrange(q)) for _ in range(e)] + [base.one]
        if is_irreducible(base, f):
            return f


def find_irreducible(p: int, e: int, rng: random.Random):
    """Monic irreducible of degree e over F_p (coefficient list, low first)."""
    return random_irreducible(PrimeField(p), e, rng)


def reduce_mod(a, p: int) -> int:
    """Reduce a rational (or integer) modulo p; BadPrime when p | denominator."""
    a = Fraction(a)
    if a.denominator % p == 0:
        raise BadPrime(f"denominator {a.denominator} is divisible by {p}")
    return a.numerator * pow(a.denominator, -1, p) % p


# ---------------------------------------------------------------------------
# field descriptors for the CLI: Fp:<p>, Fq:<p>^<e>, Q


def from_descriptor(desc: str):
    desc = desc.strip()
    if desc == "Q":
        return Rationals()
    if desc.startswith("Fp:"):
        return PrimeField(int(desc[3:]))
    if desc.startswith("Fq:"):
        body = desc[3:]
        if "^" not in body:
            raise ValueError(f"malformed field descriptor {desc!r}")
        p_s, e_s = body.split("^", 1)
        p, e = int(p_s), int(e_s)
        if e == 1:
            return PrimeField(p)
        # fixed per-(p, e) stream so the same descriptor names the same field
        # across sessions (serialized fibers must round-trip)
        modulus = find_irreducible(p, e, random.Random(f"modulus:{p}:{e}"))
        return ExtensionField(PrimeField(p), modulus, check_irreducible=False)
    raise ValueError(f"unknown field descriptor {desc!r}")


def descriptor(ring) -> str:
    if isinstance(ring, Rationals):
        return "Q"
    if isinstance(ring, PrimeField):
        return f"Fp:{ring.p}"
    if isinstance(ring, ExtensionField) and isinstance(ring.base, PrimeField):
        return f"Fq:{ring.base.p}^{ring.e}"
    raise ValueError(f"no descriptor for {ring!r}")
