"""Straight-line programs: parsing, evaluation over assorted rings,
reverse-sweep gradients against a dense oracle, linear composition, and
specialization."""

import random
from fractions import Fraction

import pytest

from kronsolve import linalg, rings, slp, upoly
from kronsolve.errors import ExprSyntaxError, SingularMatrix, UnknownVariable
from kronsolve.upoly import QuotientRing
from util import dense_eval, dense_partial, random_slp, slp_to_dense

F7 = rings.PrimeField(7)
Q = rings.Rationals()


def test_parse_examples():
    prog, den = slp.parse_expression("x1*x2 - 1", 2)
    assert prog.length == 2 and den == 1
    prog4, _ = slp.parse_expression("x1^4", 1)
    assert prog4.length == 2  # square twice
    with pytest.raises(ExprSyntaxError):
        slp.parse_expression("x1 + * 2", 2)
    with pytest.raises(UnknownVariable):
        slp.parse_expression("x3 + 1", 2)
    with pytest.raises(UnknownVariable):
        slp.parse_expression("y1 + 1", 2)
    with pytest.raises(ExprSyntaxError):
        slp.parse_expression("x1 / x2", 2)  # division only in rational literals


def test_parse_reports_position():
    with pytest.raises(ExprSyntaxError) as exc:
        slp.parse_expression("x1 +\n * 2", 2)
    assert exc.value.line == 2 and exc.value.column == 2


def test_evaluate_examples():
    prog, _ = slp.parse_expression("x1^2 + x2^2", 2)
    assert slp.evaluate(prog, [3, 4], F7) == [4]
    constp, _ = slp.parse_expression("2 - 9", 3)
    assert slp.evaluate(constp, [0, 0, 0], F7) == [0]
    # evaluation in a quotient ring: x1*x2 - 1 at (T, T) mod T^2 - 2 -> 1
    prog2, _ = slp.parse_expression("x1*x2 - 1", 2)
    qr = QuotientRing(F7, [5, 0, 1])
    t = qr.from_poly([0, 1])
    assert slp.evaluate(prog2, [t, t], qr) == [qr.one]


def test_rational_literals_cleared():
    prog, den = slp.parse_expression("1/2*x1 + 1/3", 1)
    assert den == 6
    out = slp.evaluate(prog, [Fraction(4)], Q)
    assert out[0] == 6 * (Fraction(4) / 2 + Fraction(1, 3))
    # zero set preserved: root of x/2 + 1/3 is x = -2/3
    assert slp.evaluate(prog, [Fraction(-2, 3)], Q) == [Fraction(0)]
    with pytest.raises(ExprSyntaxError):
        slp.parse_expression("1/0 * x1", 1)


def test_gradient_examples():
    prog, _ = slp.parse_expression("x1*x2", 2)
    g = slp.gradient(prog, 0)
    assert slp.evaluate(g, [3, 4], F7) == [4, 3]
    prog2, _ = slp.parse_expression("x1^2*x2", 2)
    assert slp.evaluate(slp.gradient(prog2, 0), [3, 2], F7) == [5, 2]
    const, _ = slp.parse_expression("11", 3)
    assert slp.evaluate(slp.gradient(const, 0), [1, 2, 3], F7) == [0, 0, 0]


def test_gradient_against_dense_oracle():
    # Baur-Strassen partials match dense-expansion partials, exactly
    p = 101
    P = rings.PrimeField(p)
    rng = random.Random(31)
    for case in range(20):
        n = rng.randrange(1, 5)
        length = rng.randrange(5, 31)
        prog = random_slp(rng, n, length)
        dense = slp_to_dense(prog, p)[0]
        grad = slp.gradient(prog, 0)
        assert grad.length <= 5 * prog.length
        partials = [dense_partial(dense, v, p) for v in range(n)]
        for _ in range(10):
            point = [rng.randrange(p) for _ in range(n)]
            got = slp.evaluate(grad, point, P)
            want = [dense_eval(pd, point, p) for pd in partials]
            assert got == want


def test_compose_linear_examples():
    prog, _ = slp.parse_expression("x1", 1)
    composed = slp.compose_linear(prog, [[2]], F7)
    assert slp.evaluate(composed, [1], F7) == [4]  # x1 = inv(2) y1 = 4 y1
    with pytest.raises(SingularMatrix):
        slp.compose_linear(prog, [[0]], F7)
    two, _ = slp.parse_expression("x1 + 2*x2", 2)
    ident = slp.compose_linear(two, [[1, 0], [0, 1]], F7)
    for pt in [(0, 0), (3, 4), (6, 6)]:
        assert slp.evaluate(ident, list(pt), F7) == slp.evaluate(two, list(pt), F7)


def test_compose_linear_round_trip():
    rng = random.Random(17)
    prog, _ = slp.parse_expression("x1^2 + x2*x1 - 3", 2)
    for _ in range(10):
        lam = [[rng.randrange(7) for _ in range(2)] for _ in range(2)]
        try:
            once = slp.compose_linear(prog, lam, F7)
        except SingularMatrix:
            continue
        lam_inv = linalg.mat_inv(F7, lam)
        twice = slp.compose_linear(once, lam_inv, F7)
        for _ in range(10):
            pt = [rng.randrange(7) for _ in range(2)]
            assert slp.evaluate(twice, pt, F7) == slp.evaluate(prog, pt, F7)


def test_evaluate_commutes_with_reduction():
    # evaluating over Q then reducing mod p = reducing then evaluating
    rng = random.Random(23)
    p = 10007
    P = rings.PrimeField(p)
    for _ in range(100):
        prog = random_slp(rng, rng.randrange(1, 4), rng.randrange(3, 20))
        point_int = [rng.randrange(-50, 50) for _ in range(prog.n_vars)]
        over_q = slp.evaluate(prog, [Fraction(c) for c in point_int], Q)[0]
        over_p = slp.evaluate(prog, [P.from_int(c) for c in point_int], P)[0]
        assert rings.reduce_mod(over_q, p) == over_p


def test_specialize_examples():
    prog, _ = slp.parse_expression("x1 + x2", 2)
    fixed = slp.specialize(prog, [3], F7)
    assert fixed.n_vars == 1
    assert slp.evaluate(fixed, [4], F7) == [0]
    none = slp.specialize(prog, [], F7)
    assert slp.evaluate(none, [3, 4], F7) == [0]
    allf = slp.specialize(prog, [3, 4], F7)
    assert allf.n_vars == 0 and slp.evaluate(allf, [], F7) == [0]


def test_degree_propagation():
    spec = slp.build_system(["x1^2 + x2^2 - 1", "x2 - x1 - 1"], None, 2)
    assert spec.degrees == [2, 1, 0]
    assert spec.dmax == 2
    assert spec.bezout == 2
    spec2 = slp.build_system(["(x1 + 1)*(x2 + 2)*(x1 + x2)"], "x1", 2)
    assert spec2.degrees == [3, 1]


def test_system_spec_validation():
    with pytest.raises(ValueError):
        slp.build_system(["x1", "x2", "x1 + x2"], None, 2)  # r > n


def test_height_defaults_to_parameter_bits():
    spec = slp.build_system(["1000003*x1 - 1"], None, 1)
    assert spec.height >= 20
