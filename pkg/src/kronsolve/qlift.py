"""Solving over the rationals: lucky primes, modular solve, p-adic lifting
and rational reconstruction with exact verification.

The change of variables and the lifting point are drawn as integers once;
the system is solved modulo a random prime from the prescribed interval,
the modular representation is lifted by a global Newton iteration that
doubles the p-adic order each round, and the coefficients are recovered by
rational reconstruction.  A reconstruction is accepted only after the
resulting representation verifies exactly over Q; otherwise the order keeps
doubling until the height budget is exhausted, and then a fresh prime is
tried.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass
from fractions import Fraction

from . import linalg, rings, slp as slp_mod, solver, upoly
from .errors import (
    EmptyVariety,
    JacobianNonInvertible,
    KronError,
    NoReconstruction,
    NotCoprime,
    RetriesExhausted,
    SingularMatrix,
    UnluckyRun,
)
from .rings import PrimeField, Rationals, ResidueRing
from .upoly import QuotientRing

PRIME_CAP = 2**61


@dataclass
class HeightBudget:
    eta: int
    strategy: str = "doubling"

    def __post_init__(self):
        self.eta = max(1, int(self.eta))


@dataclass
class PadicState:
    """State of the p-adic lifting: representation modulo p^(2^j).

    V[0] stays the class of T at every order; jac_inv caches the Jacobian
    inverse at the previous order (None before the first step).
    """

    prime: int
    j: int
    m: list  # monic, integer coefficients canonical mod p^(2^j)
    v: list  # list of coefficient lists, v[0] = [0, 1]
    jac_inv: object = None

    @property
    def order(self) -> int:
        return 2**self.j


def height_budget(spec) -> HeightBudget:
    """Initial bit-size budget for the output coefficients (doubling
    strategy verified against exact arithmetic downstream)."""
    n, r, d, h = spec.n, spec.r, spec.dmax, spec.height
    eta = 4 * n * d ** (r - 1) * (h + n * d) * (1 + math.log2(n * d * h + 2)) ** 2
    return HeightBudget(eta=math.ceil(eta))


def unlucky_bound(spec, epsilon: float) -> int:
    """Crude explicit majorant for the bit size of the integer whose prime
    divisors are exactly the unlucky primes."""
    n, r, d, h = spec.n, spec.r, spec.dmax, spec.height
    return (
        d**r * 2**n * (h + 1) * math.ceil(math.log2(1 / epsilon) + 2) * (n + r + 1)
    )


def lucky_prime(spec, epsilon: float, rng: random.Random) -> int:
    """A random Miller-Rabin-certified prime in (4 eps^-1 H, 10 eps^-1 H],
    capped below 2^61 to keep word-size modular arithmetic."""
    bound = unlucky_bound(spec, epsilon)
    lo = math.floor(4 * (1 / epsilon) * bound)
    hi = min(math.floor(10 * (1 / epsilon) * bound), PRIME_CAP)
    if lo >= hi:
        raise KronError(
            "prime interval exceeds the word-size cap; multi-prime CRT is out of scope"
        )
    while True:
        candidate = rng.randrange(lo + 1, hi + 1) | 1
        if candidate > lo and rings.is_probable_prime(candidate):
            return candidate


def sampling_bound(spec, delta: int) -> int:
    """Degree bound D for the integer sampling set of the rational path."""
    n, r, d = spec.n, spec.r, spec.dmax
    return r * (n + 1) * ((n + 1) * d * delta**2 + 2 * delta**3
                          + n * n * 2 ** (n - 1) * d * delta**2)


def _specialized_system(spec, lam_int, point_int, ring):
    lam = [[ring.from_int(c) for c in row] for row in lam_int]
    composed = slp_mod.compose_linear(spec.slp, lam, ring)
    prefix = [ring.from_int(c) for c in point_int[: spec.n - spec.r]]
    return slp_mod.specialize(composed, prefix, ring)


def global_newton_step(state: PadicState, spec, lam_int, point_int) -> PadicState:
    """One step of the global Newton iterator: doubles the p-adic order of
    the representation, updating the cached Jacobian inverse."""
    p, j, r = state.prime, state.j, spec.r
    ring2 = ResidueRing(p, 2 ** (j + 1))
    q2 = QuotientRing(ring2, [ring2.from_int(c) for c in state.m])
    specd = _specialized_system(spec, lam_int, point_int, ring2)
    grads = [slp_mod.gradient(specd, i) for i in range(r)]
    assignment = [q2.from_poly([ring2.from_int(c) for c in vi]) for vi in state.v]
    f_vals = slp_mod.evaluate(specd, assignment, q2)[:r]
    jac = []
    for i in range(r):
        partials = slp_mod.evaluate(grads[i], assignment, q2)
        jac.append(partials[:r])

    if state.jac_inv is None:
        # first step: invert the Jacobian over F_p
        ring1 = PrimeField(p)
        q1 = QuotientRing(ring1, [ring1.from_int(c) for c in state.m])
        jac1 = [[q1.from_poly([ring1.from_int(x) for x in c]) for c in row]
                for row in jac]
        det, adj = linalg.berkowitz(q1, jac1)
        try:
            det_inv = q1.inv(det)
        except NotCoprime as exc:
            raise JacobianNonInvertible(
                "Jacobian determinant not invertible modulo the prime",
                witness=exc.witness,
            ) from exc
        c_cur = [[q1.mul(det_inv, adj[i][t]) for t in range(r)] for i in range(r)]
        ring_c = ring1
    else:
        # Newton update of the cached inverse: C <- 2C - C J C at order 2^j
        ring_c = ResidueRing(p, 2**j)
        qc = QuotientRing(ring_c, [ring_c.from_int(c) for c in state.m])
        c_prev = [[qc.from_poly([ring_c.from_int(x) for x in cc]) for cc in row]
                  for row in state.jac_inv]
        jac_c = [[qc.from_poly([ring_c.from_int(x) for x in c]) for c in row]
                 for row in jac]
        cj = linalg.mat_mul(qc, c_prev, jac_c)
        cjc = linalg.mat_mul(qc, cj, c_prev)
        c_cur = [
            [qc.sub(qc.add(c_prev[i][t], c_prev[i][t]), cjc[i][t]) for t in range(r)]
            for i in range(r)
        ]

    # w = v - C f at the polynomial level (v_1 = T must survive literally,
    # which the quotient representation would collapse when deg m = 1)
    c_lifted = [[q2.from_poly([ring2.from_int(x) for x in cc]) for cc in row]
                for row in c_cur]
    m_poly = [ring2.from_int(c) for c in state.m]
    w = []
    for i in range(r):
        corr = q2.zero
        for t in range(r):
            corr = q2.add(corr, q2.mul(c_lifted[i][t], f_vals[t]))
        vi_poly = [ring2.from_int(c) for c in state.v[i]]
        w.append(upoly.poly_sub(ring2, vi_poly, list(corr)))
    delta_corr = upoly.poly_sub(ring2, w[0], [ring2.zero, ring2.one])
    v_new = []
    for i in range(r):
        di = upoly.divrem_monic(
            ring2,
            upoly.poly_mul(ring2, delta_corr, upoly.derivative(ring2, w[i])),
            m_poly,
        )[1]
        v_new.append(upoly.poly_sub(ring2, w[i], di))
    dm = upoly.derivative(ring2, m_poly)
    delta_m = upoly.divrem_monic(
        ring2, upoly.poly_mul(ring2, delta_corr, dm), m_poly
    )[1]
    m_new = upoly.poly_sub(ring2, m_poly, delta_m)
    return PadicState(
        prime=p,
        j=j + 1,
        m=_pad(m_new, len(state.m)),
        v=[[int(c) for c in vi] for vi in v_new],
        jac_inv=[[list(cc) for cc in row] for row in c_cur],
    )


def _pad(coeffs, width):
    out = [int(c) for c in coeffs]
    return out + [0] * (width - len(out))


def _deriv(q, elem):
    out = []
    for i in range(1, len(elem)):
        out.append(q.base.mul(q.base.from_int(i), elem[i]))
    return q.from_poly(out)


def padic_lift(fiber, spec, lam_int, point_int, prime: int, j0: int):
    """Lift the modular fiber to order 2^j0; returns the state plus the
    numerators W_i = M' V_i mod M at that order."""
    state = _initial_state(fiber, prime)
    while state.j < j0:
        state = global_newton_step(state, spec, lam_int, point_int)
    return state, lift_numerators(state)


def _initial_state(fiber, prime: int) -> PadicState:
    v = [[0, 1]] + [[int(c) for c in vi] for vi in fiber.v]
    return PadicState(prime=prime, j=0, m=[int(c) for c in fiber.m], v=v)


def lift_numerators(state: PadicState):
    ring = ResidueRing(state.prime, state.order)
    q = QuotientRing(ring, [ring.from_int(c) for c in state.m])
    dm = _deriv(q, tuple(q.modulus))
    out = []
    for vi in state.v[1:]:
        w = q.mul(dm, q.from_poly([ring.from_int(c) for c in vi]))
        out.append(list(w))
    return out


def rational_reconstruct(g: int, f: int, budget: HeightBudget) -> Fraction:
    """Recover the fraction num/den with num * den^{-1} = g mod f and
    heights below both sqrt(f/2) and the budget, by the truncated extended
    Euclidean remainder sequence."""
    if not 0 <= g < f:
        raise ValueError("residue out of range")
    if g == 0:
        return Fraction(0)
    bound = math.isqrt(f // 2)
    r0, r1 = f, g
    t0, t1 = 0, 1
    while r1 > bound:
        quo = r0 // r1
        r0, r1 = r1, r0 - quo * r1
        t0, t1 = t1, t0 - quo * t1
    num, den = r1, t1
    if den == 0:
        raise NoReconstruction("Euclidean sequence collapsed")
    if den < 0:
        num, den = -num, -den
    if den > bound or math.gcd(num, den) != 1 or math.gcd(den, f) != 1:
        raise NoReconstruction("no fraction within the height bound")
    if max(abs(num).bit_length(), den.bit_length()) > budget.eta:
        raise NoReconstruction("candidate exceeds the height budget")
    if (num - den * g) % f != 0:
        raise NoReconstruction("candidate does not match the residue")
    return Fraction(num, den)


def _reconstruct_poly(coeffs, f, budget):
    return [rational_reconstruct(c % f, f, budget) for c in coeffs]


def solve_over_Q(spec, cfg: solver.SolveConfig, rng=None, force_pair=None,
                 force_prime=None, stats=None):
    """Full rational pipeline; returns a verified Fiber over Q.

    `force_pair` fixes the integer (lambda, point) draw and `force_prime`
    the modular prime (used to check cross-prime agreement)."""
    cfg.validate(spec.r)
    if rng is None:
        rng = random.Random(cfg.seed)
    rationals = Rationals()
    delta_bound = cfg.delta_bound or spec.bezout
    budget = height_budget(spec)

    if force_pair is not None:
        lam_int, point_int = force_pair
    else:
        size = math.ceil(2 * (1 / cfg.epsilon) * sampling_bound(spec, delta_bound))
        attempts = 0
        while True:
            lam_int = [[rng.randrange(size) for _ in range(spec.n)]
                       for _ in range(spec.n)]
            if _int_det_nonzero(lam_int):
                break
            attempts += 1
            if attempts > 32:
                raise RetriesExhausted("no invertible integer change found",
                                       cause=SingularMatrix("singular"))
        point_int = [rng.randrange(size) for _ in range(spec.n - 1)]

    last_cause = None
    empty_seen = False
    for _prime_round in range(cfg.max_retries + 1):
        prime = force_prime if force_prime is not None else lucky_prime(
            spec, cfg.epsilon, rng)
        cfg_p = solver.SolveConfig(
            field=f"Fp:{prime}",
            epsilon=cfg.epsilon,
            seed=cfg.seed,
            delta_bound=delta_bound,
            max_retries=cfg.max_retries,
        )
        try:
            fiber_p = solver.solve(
                spec, cfg_p, rng=rng, stats=stats,
                force=(lam_int, point_int),
            )
        except EmptyVariety:
            if empty_seen or force_prime is not None:
                raise
            empty_seen = True
            last_cause = EmptyVariety("empty modulo one prime")
            continue
        except (SingularMatrix, UnluckyRun, RetriesExhausted) as exc:
            last_cause = exc
            if force_prime is not None:
                raise RetriesExhausted("forced prime failed", cause=exc)
            continue

        try:
            fiber_q = _lift_and_reconstruct(
                spec, cfg, fiber_p, lam_int, point_int, prime, budget, rationals
            )
            if stats is not None:
                stats["prime"] = prime
            return fiber_q
        except (NoReconstruction, JacobianNonInvertible, UnluckyRun) as exc:
            last_cause = exc
            if force_prime is not None:
                raise RetriesExhausted("forced prime failed", cause=exc)
            continue
    raise RetriesExhausted("rational pipeline retries exhausted", cause=last_cause)


def _int_det_nonzero(mat):
    try:
        linalg.mat_inv(Rationals(), [[Fraction(c) for c in row] for row in mat])
        return True
    except SingularMatrix:
        return False


def _lift_and_reconstruct(spec, cfg, fiber_p, lam_int, point_int, prime,
                          budget, rationals):
    state = _initial_state(fiber_p, prime)
    lam_q = [[Fraction(c) for c in row] for row in lam_int]
    change = solver.LinearChange(
        lam=tuple(tuple(row) for row in lam_q),
        lam_inv=tuple(tuple(row) for row in linalg.mat_inv(rationals, lam_q)),
        sample_size=0,
    )
    point = solver.LiftingPoint(values=tuple(Fraction(c) for c in point_int))
    composed = slp_mod.compose_linear(spec.slp, lam_q, rationals)
    while True:
        modulus = prime**state.order
        try:
            m_q = _reconstruct_poly(state.m, modulus, budget)
            w_lists = lift_numerators(state)
            w_q = [_reconstruct_poly(w, modulus, budget) for w in w_lists]
            fiber_q = _assemble_fiber(spec, m_q, w_q, change, point, rationals)
            ok, _report = solver.verify(fiber_q, spec, rationals, composed=composed)
            if ok:
                return fiber_q
        except (NoReconstruction, NotCoprime):
            pass
        # double the order and keep lifting, within the height budget
        if state.order * math.log2(prime) > 2 * budget.eta + 64:
            raise NoReconstruction("height budget exhausted at this prime")
        state = global_newton_step(state, spec, lam_int, point_int)


def _assemble_fiber(spec, m_q, w_q, change, point, rationals):
    m = upoly.trim(rationals, list(m_q))
    m_prime = upoly.derivative(rationals, m)
    inv = upoly.modinv(rationals, m_prime, m)
    v_list = []
    w_list = []
    for w in w_q:
        w = upoly.divrem_monic(rationals, upoly.trim(rationals, list(w)), m)[1]
        v = upoly.divrem_monic(rationals, upoly.poly_mul(rationals, inv, w), m)[1]
        v_list.append(v)
        w_list.append(w)
    return solver.Fiber(
        level=spec.r, m=m, v=v_list, w=w_list, change=change, point=point
    )
