from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from shalika.errors import ConfigMismatch, DivisionByZero, PrecisionExhausted
from shalika.padic_core import (
    FieldConfig, add, arith, format_scalar, frac_part, inv, is_unit, make_scalar, mul, norm,
    parse_scalar, primitive_root, principal_part, residue, unit_part, valuation, vp_int, vq,
)

from conftest import padic_rationals


@pytest.mark.parametrize("p", [2, 3, 5, 7])
@given(data=st.data())
def test_frac_part_is_principal_part(p, data):
    x = data.draw(padic_rationals(p, -4, 4, zero=True))
    r = frac_part(x, p)
    assert 0 <= r < 1
    assert vq(x - r, p) >= 0
    assert r.denominator == p ** vp_int(r.denominator, p)


@pytest.mark.parametrize("p", [2, 3, 5])
@given(data=st.data())
def test_valuation_is_additive(p, data):
    a = data.draw(padic_rationals(p))
    b = data.draw(padic_rationals(p))
    assert vq(a * b, p) == vq(a, p) + vq(b, p)
    assert vq(a + b, p) >= min(vq(a, p), vq(b, p))


def test_vq_zero_is_infinite():
    assert vq(Fraction(0), 3) == float("inf")


@pytest.mark.parametrize("x,p,k", [(Fraction(1, 2), 3, 2), (Fraction(-7, 5), 2, 5), (Fraction(10), 5, 1)])
def test_residue_matches_definition(x, p, k):
    r = residue(x, p, k)
    assert 0 <= r < p ** k
    assert vq(x - r, p) >= k or x == r


@pytest.mark.parametrize("p", [2, 3])
@given(data=st.data())
def test_scalar_round_trip_within_precision(p, data):
    cfg = FieldConfig(p, precision=8)
    x = data.draw(padic_rationals(p))
    s = make_scalar(x, cfg)
    assert valuation(s) == vq(x, p)
    assert vq(s.to_fraction() - x, p) >= vq(x, p) + 8
    assert norm(s) == Fraction(p) ** (-vq(x, p))
    assert parse_scalar(format_scalar(s), cfg) == s


@pytest.mark.parametrize("p", [2, 3])
@given(data=st.data())
def test_field_operations_agree_with_rationals(p, data):
    cfg = FieldConfig(p, precision=10)
    a = data.draw(padic_rationals(p, -2, 2))
    b = data.draw(padic_rationals(p, -2, 2))
    A, B = make_scalar(a, cfg), make_scalar(b, cfg)
    assert mul(A, B) == make_scalar(a * b, cfg)
    assert inv(A) == make_scalar(1 / a, cfg)
    if vq(a + b, p) <= min(vq(a, p), vq(b, p)) + 2:
        s = add(A, B)
        assert vq(s.to_fraction() - (a + b), p) >= valuation(s) + s.prec
    assert add(A, arith("neg", A)).is_zero


def test_cancellation_beyond_known_digits_raises():
    cfg = FieldConfig(3, precision=4)
    a = parse_scalar("3^0 * 5 mod 3^2", cfg)
    b = make_scalar(-5, cfg)
    with pytest.raises(PrecisionExhausted):
        add(a, b)


def test_exact_cancellation_gives_zero():
    cfg = FieldConfig(3)
    assert add(make_scalar(Fraction(2, 7), cfg), make_scalar(Fraction(-2, 7), cfg)).is_zero


def test_errors():
    with pytest.raises(DivisionByZero):
        inv(make_scalar(0, FieldConfig(2)))
    with pytest.raises(ConfigMismatch):
        add(make_scalar(1, FieldConfig(2)), make_scalar(1, FieldConfig(3)))
    with pytest.raises(ValueError):
        FieldConfig(6)
    with pytest.raises(ValueError):
        arith("pow", make_scalar(1, FieldConfig(2)))


def test_principal_part_needs_digits():
    assert principal_part(make_scalar(Fraction(5, 8), FieldConfig(2, precision=4))) == Fraction(5, 8)
    assert principal_part(make_scalar(Fraction(13, 8), FieldConfig(2, precision=4))) == Fraction(5, 8)
    cfg = FieldConfig(2, precision=2)
    short = parse_scalar("2^-3 * 1 mod 2^1", cfg)
    with pytest.raises(PrecisionExhausted):
        principal_part(short)


@pytest.mark.parametrize("p,k", [(3, 1), (3, 3), (5, 2), (7, 1), (2, 2)])
def test_primitive_root_generates(p, k):
    g = primitive_root(p, k)
    mod = p ** k
    orbit = {pow(g, i, mod) for i in range(mod)}
    assert orbit == {u for u in range(1, mod) if u % p}


def test_unit_part_and_is_unit():
    assert unit_part(Fraction(18, 5), 3) == Fraction(2, 5)
    assert is_unit(Fraction(2, 5), 3) and not is_unit(Fraction(3, 5), 3)
