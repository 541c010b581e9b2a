"""Brute-force oracle: exhaustive zero sets, fiber filtering, minimal
polynomials of linear forms."""

import pytest

from kronsolve import oracle, rings, slp, upoly
from kronsolve.errors import TooLarge
from kronsolve.slp import Slp, SystemSpec


def test_brute_zeros_example():
    spec = slp.build_system(["x1^2 + x2^2 - 1", "x1 - x2"], None, 2)
    assert oracle.brute_zeros(spec, 7) == [(2, 2), (5, 5)]


def test_brute_zeros_inconsistent():
    spec = slp.build_system(["x1", "x1 - 1"], None, 2)
    assert oracle.brute_zeros(spec, 7) == []


def test_brute_zeros_excluded_hypersurface():
    spec = slp.build_system(["x1 - x2"], "x1", 2)
    pts = oracle.brute_zeros(spec, 5)
    assert pts == [(x, x) for x in range(1, 5)]


def test_brute_zeros_r_zero_convention():
    # no equations: all points with G != 0
    prog, _ = slp.parse_expression("x1", 2)
    spec = SystemSpec(n=2, r=0, slp=prog, degrees=[1])
    pts = oracle.brute_zeros(spec, 3)
    assert pts == [(1, 0), (1, 1), (1, 2), (2, 0), (2, 1), (2, 2)]


def test_brute_zeros_guard():
    spec = slp.build_system(["x1 - x2"], None, 2)
    with pytest.raises(TooLarge):
        oracle.brute_zeros(spec, 2**31 - 1)


def test_fiber_points():
    zeros = [(2, 2), (5, 5), (2, 5)]
    lam = [[1, 0], [0, 1]]
    assert oracle.fiber_points(zeros, lam, [2], 7) == [(2, 2), (2, 5)]
    assert oracle.fiber_points([], lam, [2], 7) == []
    assert oracle.fiber_points(zeros, lam, [], 7) == zeros  # r = n


def test_minpoly_of_form():
    pts = [(2, 2), (5, 5)]
    assert oracle.minpoly_of_form(pts, [0, 1], 7) == [3, 0, 1]
    assert oracle.minpoly_of_form([(3, 4)], [1, 1], 7) == [0, 1]  # T - 0
    # non-separating form: degree < number of points
    pts2 = [(1, 2), (1, 3)]
    assert len(oracle.minpoly_of_form(pts2, [1, 0], 7)) - 1 == 1 < len(pts2)


def test_minpoly_squarefree():
    ring = rings.PrimeField(11)
    pts = [(i, (3 * i + 1) % 11) for i in range(5)]
    mp = oracle.minpoly_of_form(pts, [1, 2], 11)
    assert upoly.discriminant(ring, mp) != 0
