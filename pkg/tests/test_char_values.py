import cmath
from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from shalika.char_values import (
    MultChar, chi_eval, chi_psi_eval, default_char, gauss_residue_oracle, gauss_sum, psi_eval,
    unit_shell_sum,
)
from shalika.cyclo import CycloLaurent
from shalika.errors import BadParams, NotInSubgroup, ZeroArgument
from shalika.matgroup import MatF
from shalika.padic_core import FieldConfig, vq

from conftest import padic_rationals

RAMIFIED = [(3, 1), (3, 2), (5, 1), (5, 2), (2, 2), (7, 1)]


@pytest.mark.parametrize("p,e", RAMIFIED + [(2, 0), (3, 0)])
@given(data=st.data())
def test_chi_is_multiplicative(p, e, data):
    chi = default_char(p, e)
    a = data.draw(padic_rationals(p))
    b = data.draw(padic_rationals(p))
    assert chi(a * b) == chi(a) * chi(b)
    assert chi(a) * chi.inverse()(a) == CycloLaurent.one()


@pytest.mark.parametrize("p,e", RAMIFIED)
def test_conductor_is_exact(p, e):
    chi = default_char(p, e)
    mod = p ** e
    assert all(chi(Fraction(1 + mod * t)) == CycloLaurent.one() for t in range(1, 6))
    if e >= 1:
        deeper = [Fraction(1 + p ** (e - 1) * t) for t in range(1, p)] if e > 1 else \
            [Fraction(u) for u in range(2, p)]
        assert any(chi(u) != CycloLaurent.one() for u in deeper)


def test_character_constructor_rejects_bad_parameters():
    with pytest.raises(BadParams):
        MultChar(2, 1, 1)
    with pytest.raises(BadParams):
        MultChar(3, 0, 1)
    with pytest.raises(BadParams):
        MultChar(5, 2, 5)  # conductor 1, not 2
    with pytest.raises(ZeroArgument):
        chi_eval(default_char(3, 1), 0)


@pytest.mark.parametrize("p", [2, 3, 5])
@given(data=st.data())
def test_psi_is_additive_and_trivial_on_o(p, data):
    cfg = FieldConfig(p)
    a = data.draw(padic_rationals(p, zero=True))
    b = data.draw(padic_rationals(p, zero=True))
    assert psi_eval(a + b, cfg) == psi_eval(a, cfg) * psi_eval(b, cfg)
    if vq(a, p) >= 0:
        assert psi_eval(a, cfg) == CycloLaurent.one()
    assert psi_eval(Fraction(1, p), cfg) != CycloLaurent.one()


@pytest.mark.parametrize("p,e", RAMIFIED)
@pytest.mark.parametrize("o", [-4, -3, -2, -1, 0, 1])
def test_gauss_sum_equals_residue_oracle(p, e, o):
    chi = default_char(p, e)
    for u in (1, 2, p + 1):
        if u % p == 0:
            continue
        a = Fraction(p) ** o * u
        assert gauss_sum(chi, a) == gauss_residue_oracle(chi, a)


@pytest.mark.parametrize("p,e", RAMIFIED)
def test_gauss_sum_vanishes_above_conductor(p, e):
    chi = default_char(p, e)
    for o in range(-e + 1, 3):
        assert gauss_sum(chi, Fraction(p) ** o).is_zero()
    assert not gauss_sum(chi, Fraction(p) ** (-e)).is_zero()


@pytest.mark.parametrize("p,e", [(3, 1), (5, 1), (5, 2), (7, 1)])
def test_gauss_sum_absolute_value(p, e):
    """|g(chi, psi_a)|^2 = q^{-e} at o(a) = -e (Lebesgue measure, vol(o) = 1)."""
    chi = default_char(p, e)
    g = gauss_sum(chi, Fraction(1, p ** e))
    w = cmath.exp(2j * cmath.pi / g.M)
    val = sum(complex(c) * w ** k for k, c in enumerate(g.terms[0]))
    assert abs(abs(val) ** 2 - p ** (-e)) < 1e-9


@pytest.mark.parametrize("p,e", [(3, 1), (5, 2)])
@given(data=st.data())
def test_gauss_scaling_by_units(p, e, data):
    chi = default_char(p, e)
    a = data.draw(padic_rationals(p, -e - 2, 1))
    b = data.draw(padic_rationals(p, 0, 0))
    lhs = gauss_sum(chi, a * b)
    rhs = chi.twist_nu(1).inverse()(b) * gauss_sum(chi, a)
    assert lhs == rhs


def test_unit_shell_sum_unramified():
    chi = default_char(3, 0)
    assert unit_shell_sum(chi, Fraction(1, 3)) == CycloLaurent.const(Fraction(-1, 3))
    assert unit_shell_sum(chi, Fraction(1, 9)).is_zero()
    assert unit_shell_sum(chi, Fraction(0)) == CycloLaurent.const(Fraction(2, 3))


def test_unramified_gauss_sum_series_matches_truncated_oracle():
    chi = default_char(3, 0)
    g = gauss_sum(chi, Fraction(1, 3))
    # g = (num/den) with den = 1 - X/q; compare den * oracle against num below X^depth
    depth = 5
    orc = gauss_residue_oracle(chi, Fraction(1, 3), depth=depth)
    prod = g.den * orc
    low = CycloLaurent(prod.M, {a: c for a, c in prod.terms.items() if a < depth})
    assert low == g.num


def test_chi_psi_on_shalika():
    cfg = FieldConfig(3)
    chi = default_char(3, 1)
    s = MatF([[2, 0, Fraction(1, 3), 0], [0, 1, 0, 0], [0, 0, 2, 0], [0, 0, 0, 1]], cfg)
    expected = chi(2) * psi_eval(Fraction(1, 6), cfg)
    assert chi_psi_eval(s, chi) == expected
    with pytest.raises(NotInSubgroup):
        chi_psi_eval(MatF.identity(4, cfg) @ MatF([[1, 0, 0, 0], [1, 1, 0, 0], [0, 0, 1, 0], [0, 0, 0, 1]], cfg), chi)
