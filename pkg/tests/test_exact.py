"""Exact arithmetic in quadratic number fields: Surd values and root solving."""

from __future__ import annotations

import math
from fractions import Fraction

import pytest

from genseries import Surd, solve_monic_quadratic, sqrt_fraction
from genseries.exact import as_exact


def test_rational_surd_normalizes_radicand():
    s = Surd(Fraction(3, 4))
    assert s.q == 0 and s.d == 0
    assert s.is_rational
    assert float(s) == 0.75


def test_zero_radical_part_drops_radicand():
    s = Surd(Fraction(1), Fraction(0), 7)
    assert s.d == 0


def test_radicand_one_folds_into_rational_part():
    s = Surd(Fraction(1, 2), Fraction(3, 2), 1)
    assert s == Surd(Fraction(2))


def test_sqrt_of_perfect_square_is_rational():
    s = sqrt_fraction(Fraction(9, 4))
    assert s.is_rational
    assert s.p == Fraction(3, 2)


def test_sqrt_of_nonsquare_is_irrational():
    s = sqrt_fraction(Fraction(5))
    assert not s.is_rational
    assert math.isclose(float(s), math.sqrt(5), rel_tol=1e-15)


def test_quadratic_roots_satisfy_vieta():
    # z^2 + 3z + 1 has roots (-3 +- sqrt(5)) / 2
    r1, r2 = solve_monic_quadratic(Fraction(3), Fraction(1))
    assert r1 + r2 == Surd(Fraction(-3))
    assert r1 * r2 == Surd(Fraction(1))
    assert float(r1) == pytest.approx((-3 + math.sqrt(5)) / 2, rel=1e-15)
    assert float(r2) == pytest.approx((-3 - math.sqrt(5)) / 2, rel=1e-15)


def test_field_arithmetic_closure():
    a = Surd(Fraction(1, 2), Fraction(1, 3), 5)
    b = Surd(Fraction(-2), Fraction(1), 5)
    for value in (a + b, a - b, a * b, a / b, a**3):
        assert isinstance(value, Surd)
        assert value.d in (0, 5)
    assert (a / b) * b == a


def test_mixed_scalars_promote():
    a = Surd(Fraction(1), Fraction(1), 5)
    assert a + Fraction(1, 2) == Surd(Fraction(3, 2), Fraction(1), 5)
    assert Fraction(1, 2) + a == a + Fraction(1, 2)
    assert 2 * a == a + a
    assert a - 1 == Surd(Fraction(0), Fraction(1), 5)
    assert 1 / Surd(Fraction(0), Fraction(1), 5) == Surd(
        Fraction(0), Fraction(1, 5), 5
    )


def test_conjugate_product_is_rational():
    a = Surd(Fraction(2), Fraction(3), 5)
    n = a * a.conjugate()
    assert n.is_rational
    assert n.p == Fraction(4 - 9 * 5)


def test_incompatible_radicands_rejected():
    a = Surd(Fraction(0), Fraction(1), 5)
    b = Surd(Fraction(0), Fraction(1), 2)
    with pytest.raises(Exception):
        _ = a + b


def test_powers_match_float_arithmetic():
    a = Surd(Fraction(-3, 2), Fraction(1, 2), 5)
    assert float(a**4) == pytest.approx(float(a) ** 4, rel=1e-13)
    assert a**0 == Surd(Fraction(1))


def test_complex_conversion():
    a = Surd(Fraction(1, 4), Fraction(-1, 3), 5)
    z = complex(a)
    assert z.imag == 0.0
    assert z.real == pytest.approx(0.25 - math.sqrt(5) / 3, rel=1e-15)


def test_float_derived_radicands_stay_exact_and_fast():
    # binary floats convert to fractions with 2**52 denominators; the
    # radicand reduction must stay bounded on the resulting huge integers
    # while preserving s*s*d == n exactly
    import time

    value = Fraction(3.1) ** 2 - 4
    start = time.monotonic()
    root = sqrt_fraction(value)
    assert time.monotonic() - start < 2.0
    assert (root * root).is_rational
    assert (root * root).p == value


def test_as_exact_accepts_common_scalars():
    assert as_exact(3) == Surd(Fraction(3))
    assert as_exact(Fraction(1, 3)) == Surd(Fraction(1, 3))
    s = Surd(Fraction(0), Fraction(1), 5)
    assert as_exact(s) is s
