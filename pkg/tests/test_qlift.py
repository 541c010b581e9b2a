"""Rational pipeline: lucky primes, the global Newton iterator, p-adic
lifting, rational reconstruction, and the end-to-end solve over Q."""

import math
import random
from fractions import Fraction

import pytest

from kronsolve import qlift, rings, slp, solver, upoly
from kronsolve.errors import EmptyVariety, NoReconstruction
from kronsolve.qlift import HeightBudget, PadicState

Q = rings.Rationals()


def test_lucky_prime_contract():
    spec = slp.build_system(["x1^2 + x2^2 - 5", "x1*x2 - 2"], None, 2)
    bound = qlift.unlucky_bound(spec, 0.01)
    lo, hi = 400 * bound, 1000 * bound
    p1 = qlift.lucky_prime(spec, 0.01, random.Random(3))
    assert lo < p1 <= hi
    assert rings.is_probable_prime(p1, rounds=40)
    assert qlift.lucky_prime(spec, 0.01, random.Random(3)) == p1  # deterministic
    assert qlift.lucky_prime(spec, 0.01, random.Random(4)) != p1  # fresh draws differ


def test_global_newton_step_examples():
    spec = slp.build_system(["3*x1 - 1"], None, 1)
    state = PadicState(prime=5, j=0, m=[3, 1], v=[[0, 1]])
    s1 = qlift.global_newton_step(state, spec, [[1]], [])
    assert s1.m == [8, 1]  # T - 17 mod 25
    assert s1.v[0] == [0, 1]  # V_1 stays T
    s2 = qlift.global_newton_step(s1, spec, [[1]], [])
    assert s2.m == [208, 1]  # T - 417 mod 625
    # stationary integer system
    spec2 = slp.build_system(["x1^2 - 2"], None, 1)
    st = PadicState(prime=5, j=0, m=[3, 0, 1], v=[[0, 1]])
    st1 = qlift.global_newton_step(st, spec2, [[1]], [])
    assert st1.m == [23, 0, 1]


def test_padic_lift_orders():
    spec = slp.build_system(["3*x1 - 1"], None, 1)
    fib = solver.Fiber(level=1, m=[3, 1], v=[], w=[], change=None,
                       point=solver.LiftingPoint(values=()))
    state, w = qlift.padic_lift(fib, spec, [[1]], [], 5, 0)
    assert state.m == [3, 1] and w == []  # order 1: unchanged
    state4, _ = qlift.padic_lift(fib, spec, [[1]], [], 5, 2)
    assert state4.m == [625 - 417, 1]  # T - 417 mod 625


def test_padic_lift_stationary_on_integer_fibers():
    """Planted integer solutions: the lift is stationary from the first
    order at which every coefficient is exact."""
    rng = random.Random(31)
    prime = 10007
    ring = rings.PrimeField(prime)
    done = 0
    while done < 200:
        k = rng.randrange(1, 4)
        roots = rng.sample(range(-40, 41), k)
        # F = prod (x1 - c_i), identity change: m = prod (T - c_i) over Z
        expr = "*".join(f"(x1 - {c})" if c >= 0 else f"(x1 + {abs(c)})"
                        for c in roots)
        spec = slp.build_system([expr], None, 1)
        m_true = [1]
        for c in roots:
            m_true = [
                (a - c * b) for a, b in
                zip([0] + m_true, m_true + [0])
            ]
        m_mod = [c % prime for c in m_true]
        fib = solver.Fiber(level=1, m=m_mod, v=[], w=[], change=None,
                           point=solver.LiftingPoint(values=()))
        state = qlift._initial_state(fib, prime)
        for j in range(1, 3):
            state = qlift.global_newton_step(state, spec, [[1]], [])
            mod = prime ** (2**j)
            assert state.m == [c % mod for c in m_true]
        done += 1


def test_rational_reconstruct_examples():
    budget = HeightBudget(eta=64)
    assert qlift.rational_reconstruct(34, 101, budget) == Fraction(1, 3)
    assert qlift.rational_reconstruct(0, 101, budget) == Fraction(0)
    assert qlift.rational_reconstruct(50, 101, budget) == Fraction(-1, 2)
    # exhaustive uniqueness for the worked example
    for num in range(-7, 8):
        for den in range(1, 8):
            if math.gcd(abs(num), den) != 1 or den % 101 == 0:
                continue
            if num * pow(den, -1, 101) % 101 == 34:
                assert Fraction(num, den) == Fraction(1, 3)


def test_rational_reconstruct_budget():
    tight = HeightBudget(eta=1)
    with pytest.raises(NoReconstruction):
        qlift.rational_reconstruct(34, 101, tight)


def test_reconstruction_round_trip_500():
    rng = random.Random(7)
    cand = rng.randrange(2**60, 2**61) | 1
    while not rings.is_probable_prime(cand):
        cand += 2
    budget = HeightBudget(eta=25)
    for _ in range(500):
        num = rng.randrange(-(2**20) + 1, 2**20)
        den = rng.randrange(1, 2**20)
        fr = Fraction(num, den)
        residue = rings.reduce_mod(fr, cand)
        assert qlift.rational_reconstruct(residue, cand, budget) == fr


def test_height_budget_contract():
    spec1 = slp.build_system(["3*x1 - 1"], None, 1)
    b1 = qlift.height_budget(spec1)
    assert b1.eta >= 2  # covers T - 1/3
    assert b1.strategy == "doubling"
    # monotone in each of n, d, h
    spec_n = slp.build_system(["3*x1 - 1", "x2 - 1"], None, 2)
    spec_d = slp.build_system(["3*x1^2 - 1"], None, 1)
    spec_h = slp.build_system(["3000001*x1 - 1"], None, 1)
    assert qlift.height_budget(spec_n).eta >= b1.eta
    assert qlift.height_budget(spec_d).eta >= b1.eta
    assert qlift.height_budget(spec_h).eta >= b1.eta


def test_solve_over_q_linear():
    spec = slp.build_system(["3*x1 - 1"], None, 1)
    cfg = solver.SolveConfig(field="Q", epsilon=0.01, seed=11)
    fib = qlift.solve_over_Q(spec, cfg, force_pair=([[1]], []))
    assert fib.m == [Fraction(-1, 3), Fraction(1)]
    ok, _ = solver.verify(fib, spec, Q)
    assert ok


def test_solve_over_q_degree_four():
    spec = slp.build_system(["x1^2 + x2^2 - 5", "x1*x2 - 2"], None, 2)
    cfg = solver.SolveConfig(field="Q", epsilon=0.01, seed=5)
    fib = qlift.solve_over_Q(spec, cfg)
    assert fib.delta == 4
    ok, _ = solver.verify(fib, spec, Q)
    assert ok
    assert upoly.discriminant(Q, fib.m) != 0
    expected = {(Fraction(1), Fraction(2)), (Fraction(2), Fraction(1)),
                (Fraction(-1), Fraction(-2)), (Fraction(-2), Fraction(-1))}
    lam = [list(r) for r in fib.change.lam]
    seen = set()
    for x1, x2 in expected:
        ell = lam[0][0] * x1 + lam[0][1] * x2
        assert upoly.evaluate(Q, fib.m, Fraction(ell)) == 0
        assert upoly.evaluate(Q, fib.v[0], Fraction(ell)) == lam[1][0] * x1 + lam[1][1] * x2
        seen.add(Fraction(ell))
    assert len(seen) == 4


def test_solve_over_q_cross_prime_agreement():
    spec = slp.build_system(["x1^2 + x2^2 - 5", "x1*x2 - 2"], None, 2)
    force = ([[3, 1], [2, 5]], [7])
    f1 = qlift.solve_over_Q(spec, solver.SolveConfig(field="Q", epsilon=0.01, seed=1),
                            force_pair=force, force_prime=10000019)
    f2 = qlift.solve_over_Q(spec, solver.SolveConfig(field="Q", epsilon=0.01, seed=2),
                            force_pair=force, force_prime=10000079)
    assert f1.m == f2.m and f1.v == f2.v and f1.w == f2.w
    # with this change the primitive values are {5, 7, -5, -7}
    assert f1.m == [Fraction(c) for c in [1225, 0, -74, 0, 1]]


def test_solve_over_q_empty():
    spec = slp.build_system(["x1", "x1 - 1"], None, 2)
    with pytest.raises(EmptyVariety):
        qlift.solve_over_Q(spec, solver.SolveConfig(field="Q", epsilon=0.01, seed=3))


def test_solve_over_q_denominator_clearing():
    # rational coefficients in the input: same zero set after clearing
    spec = slp.build_system(["1/2*x1 - 1/3"], None, 1)
    cfg = solver.SolveConfig(field="Q", epsilon=0.01, seed=8)
    fib = qlift.solve_over_Q(spec, cfg, force_pair=([[1]], []))
    assert fib.m == [Fraction(-2, 3), Fraction(1)]
