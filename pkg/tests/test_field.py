from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from orbitsphere.field import NumberField, charpoly, minpoly_of_root, pf_eigen


@pytest.fixture(scope="module")
def golden():
    # x^2 - 3x + 1: minimal polynomial of phi^2 = (3+sqrt5)/2
    return NumberField([1, -3, 1])


def test_charpoly_cat():
    assert charpoly([[2, 1], [1, 1]]) == [Fraction(1), Fraction(-3), Fraction(1)]


def test_minpoly_picks_irreducible_factor():
    # (x-2)(x^2-3x+1): largest real root is (3+sqrt5)/2 ~ 2.618
    poly = [Fraction(c) for c in [-2, 7, -5, 1]]
    mp_, _ = minpoly_of_root(poly)
    assert mp_ == [Fraction(1), Fraction(-3), Fraction(1)]


def test_field_basic_arithmetic(golden):
    g = golden.gen
    assert g * g == 3 * g - 1
    assert (g - 1) * (g - 1) == g * g - 2 * g + 1
    assert (g / g) == golden.one
    inv = (g - 1).inverse()
    assert inv * (g - 1) == golden.one


def test_field_ordering(golden):
    g = golden.gen  # ~2.618
    assert g > 2
    assert g < 3
    assert (g - 2) > 0
    assert (2 * g - 5) > 0  # 5.236 - 5
    assert (g * g - 7) < 0  # 6.854 - 7


def test_sign_of_tiny_difference(golden):
    g = golden.gen
    # g^2 = 3g - 1 exactly; any rearrangement must compare equal
    lhs = g * g * g  # g^3 = 8g - 3
    assert lhs == 8 * g - 3
    assert not (lhs < 8 * g - 3) and not (lhs > 8 * g - 3)


def test_parse_round_trip(golden):
    for text in ["g", "g - 1", "2*g + 1/2", "g^1", "3", "-g + 5/3"]:
        e = golden.parse(text)
        again = golden.parse(str(e))
        assert e == again


def test_pf_eigen_cat():
    field, lam, right, left = pf_eigen([[2, 1], [1, 1]])
    assert field.degree == 2
    # A v = lam v with v normalised to v0 = 1
    v = right
    assert 2 * v[0] + v[1] == lam * v[0]
    assert v[0] + v[1] == lam * v[1]
    w = left
    assert 2 * w[0] + w[1] == lam * w[0]
    assert all(x > 0 for x in v + w)


def test_pf_eigen_rational():
    field, lam, right, left = pf_eigen([[3]])
    assert lam == 3
    assert right == [field.one]


@settings(max_examples=60, deadline=None)
@given(st.lists(st.integers(-9, 9), min_size=2, max_size=2),
       st.lists(st.integers(-9, 9), min_size=2, max_size=2))
def test_field_ring_axioms(a, b):
    field = NumberField([1, -3, 1])
    x = field(a)
    y = field(b)
    assert x + y == y + x
    assert x * y == y * x
    assert x * (y + 1) == x * y + x
    if y != 0:
        assert (x / y) * y == x
