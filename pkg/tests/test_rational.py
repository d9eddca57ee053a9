from __future__ import annotations

from fractions import Fraction

import mpmath
import pytest
from hypothesis import given
from hypothesis import strategies as st

from hasse_forge.errors import DomainError
from hasse_forge.rational import RationalInterval, decimal_string, iv_to_interval, mpf_to_fraction


def test_decimal_rounding_directions():
    x = Fraction(1, 3)
    assert decimal_string(x, 4, up=False) == "0.3333"
    assert decimal_string(x, 4, up=True) == "0.3334"
    assert decimal_string(-x, 2, up=False) == "-0.34"
    assert decimal_string(Fraction(5), 0, up=True) == "5"


@given(st.fractions(), st.integers(0, 20))
def test_decimal_brackets_value(x, digits):
    lo = Fraction(decimal_string(x, digits, up=False))
    hi = Fraction(decimal_string(x, digits, up=True))
    assert lo <= x <= hi and hi - lo <= Fraction(1, 10**digits)


def test_mpf_to_fraction_exact():
    assert mpf_to_fraction(mpmath.mpf("0.375")) == Fraction(3, 8)


def test_iv_enclosure_contains_true_value():
    mpmath.iv.prec = 80
    box = iv_to_interval(mpmath.iv.mpf(1) / 3)
    assert box.contains(Fraction(1, 3)) and box.width < Fraction(1, 10**20)


def test_interval_basics():
    a = RationalInterval(Fraction(1, 2), Fraction(3, 4))
    b = RationalInterval(-1, 2)
    assert (a * b) == RationalInterval(Fraction(-3, 4), Fraction(3, 2))
    assert a.contains(Fraction(2, 3)) and not a.contains(1)
    assert RationalInterval(0, 1).contains(a)
    with pytest.raises(DomainError):
        RationalInterval(1, 0)


def test_interval_report():
    d = RationalInterval(Fraction(1, 3), Fraction(1, 2)).to_dict(3)
    assert d == {"lo": "1/3", "hi": "1/2", "decimal": ["0.333", "0.500"]}
