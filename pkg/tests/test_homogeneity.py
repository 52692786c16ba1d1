from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from fracphi.homogeneity import NOISE, ZERO, SKNumber, compare, evaluate, multi_degree

S = Fraction(9, 10)

sk = st.builds(
    SKNumber,
    st.fractions(min_value=-5, max_value=5, max_denominator=12),
    st.integers(-4, 4),
    st.integers(-4, 4),
)
s_values = st.fractions(min_value=Fraction(3, 4), max_value=1, max_denominator=40).filter(
    lambda s: Fraction(3, 4) < s < 1
)


def test_noise_below_minus_two_s():
    assert compare(NOISE, SKNumber(0, -2, 0), S) == -1


def test_reflexive():
    a = SKNumber(Fraction(1, 3), 2, -1)
    assert compare(a, a, S) == 0


def test_kappa_is_infinitesimal():
    assert compare(SKNumber(0, 0, -3), ZERO, S) == -1
    assert compare(SKNumber(Fraction(-1, 1000), 0, 5), ZERO, S) == -1


def test_evaluate_noise():
    assert evaluate(NOISE, S) == (Fraction(-12, 5), -1)


def test_evaluate_planted_noise():
    planted = NOISE + SKNumber(0, 2, 0)
    assert str(planted) == "s - 3/2 - k"
    assert evaluate(planted, S) == (Fraction(-3, 5), -1)


def test_unit_monomial_and_time():
    assert evaluate(multi_degree((0, 0, 0, 0)), S) == (0, 0)
    assert multi_degree((1, 0, 0, 0)) == SKNumber(0, 2, 0)
    assert multi_degree((0, 1, 2, 0)) == SKNumber(3)


def test_integer_coefficients_enforced():
    with pytest.raises(TypeError):
        SKNumber(0, Fraction(1, 2), 0)


@pytest.mark.parametrize("text, expected", [
    ("2s", SKNumber(0, 2, 0)),
    ("-3/2 - s - k", NOISE),
    ("13/10", SKNumber(Fraction(13, 10))),
    ("0", ZERO),
])
def test_parse(text, expected):
    assert SKNumber.parse(text) == expected


@pytest.mark.parametrize("text", ["", "s/2", "2x", "1/2s"])
def test_parse_rejects(text):
    with pytest.raises(ValueError):
        SKNumber.parse(text)


@given(sk)
def test_str_round_trip(a):
    assert SKNumber.parse(str(a)) == a


@given(sk, sk, sk, s_values)
def test_translation_invariant(a, b, c, s):
    assert compare(a, b, s) == compare(a + c, b + c, s)


@given(sk, sk, sk, s_values)
def test_total_transitive(a, b, c, s):
    assert compare(a, b, s) == -compare(b, a, s)
    if compare(a, b, s) <= 0 and compare(b, c, s) <= 0:
        assert compare(a, c, s) <= 0


@given(sk, st.integers(-3, 3))
def test_scaling(a, n):
    assert a * n == SKNumber(a.c0 * n, a.cs * n, a.ck * n)
    assert a - a == ZERO


@given(sk)
def test_json_round_trip(a):
    assert SKNumber.from_json(a.to_json()) == a
