from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from gjfacet.errors import RationalFormatError
from gjfacet.rational import as_rational, format_rational, mod1, parse_rational

rationals = st.fractions(max_denominator=10 ** 12)


@given(rationals)
def test_canonical_round_trip(q):
    assert parse_rational(format_rational(q)) == q


@pytest.mark.parametrize("text", ["2/4", "1/1", "-0", "+1/2", " 1/2", "1/-2", "0/5", "01/2", "1.5", "", "1/0", "a"])
def test_strict_rejects_noncanonical(text):
    with pytest.raises(RationalFormatError):
        parse_rational(text)


@pytest.mark.parametrize("text,value", [("0", 0), ("1", 1), ("-3/4", Fraction(-3, 4)), ("7/2", Fraction(7, 2))])
def test_strict_accepts(text, value):
    assert parse_rational(text) == value


def test_lenient_parsing():
    assert parse_rational("2/4", strict=False) == Fraction(1, 2)
    assert parse_rational(" -3 ", strict=False) == -3
    with pytest.raises(RationalFormatError):
        parse_rational("0.5", strict=False)
    with pytest.raises(RationalFormatError):
        parse_rational("1/0", strict=False)


def test_floats_refused():
    with pytest.raises(TypeError):
        as_rational(0.5)


@given(rationals, st.integers(-50, 50))
def test_mod1(q, k):
    r = mod1(q + k)
    assert 0 <= r < 1
    assert r == mod1(q)
    assert (q - r).denominator == 1
