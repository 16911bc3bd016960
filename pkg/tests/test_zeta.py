from fractions import Fraction

import pytest
import sympy
from hypothesis import given, strategies as st

from shalika import zeta
from shalika.char_values import default_char
from shalika.cyclo import CycloLaurent
from shalika.errors import BadParams, WindowTooSmall
from shalika.matgroup import MatF
from shalika.mirabolic import FormEvaluator, INDETERMINATE, evaluate, lambda_form, sp_extend
from shalika.padic_core import FieldConfig


def series_counts(m, q, order):
    """Coefficients of prod_{i<m} 1 / (1 - q^i t)."""
    t = sympy.Symbol("t")
    f = 1
    for i in range(m):
        f = f / (1 - q ** i * t)
    poly = sympy.series(f, t, 0, order + 1).removeO()
    return [int(poly.coeff(t, k)) for k in range(order + 1)]


@pytest.mark.parametrize("p", [2, 3])
@pytest.mark.parametrize("m,order", [(1, 3), (2, 4), (3, 3)])
def test_bmk_counts_match_generating_function(p, m, order):
    want = series_counts(m, p, order)
    got = [len(zeta.bmk_reps(m, k, p)) for k in range(order + 1)]
    assert got == want
    assert [len(zeta.bmk_reps(m, k, p, "e_variant", 1)) for k in range(order + 1)] == want


@pytest.mark.parametrize("p,k", [(2, 2), (3, 2), (2, 3)])
def test_bmk_reps_are_distinct_classes(p, k):
    reps = zeta.bmk_reps(2, k, p)
    assert len({zeta.bmk_canonical(b) for b in reps}) == len(reps)


@given(st.sampled_from([2, 3]), st.integers(0, 3), st.data())
def test_bmk_canonical_is_right_B0_invariant(p, k, data):
    cfg = FieldConfig(p)
    reps = zeta.bmk_reps(3, k, p)
    b = reps[data.draw(st.integers(0, len(reps) - 1))]
    unit = st.integers(1, 4 * p).filter(lambda u: u % p)
    rows = [[Fraction(data.draw(unit)), Fraction(data.draw(st.integers(-9, 9))), Fraction(data.draw(st.integers(-9, 9)))],
            [0, Fraction(data.draw(unit)), Fraction(data.draw(st.integers(-9, 9)))],
            [0, 0, Fraction(data.draw(unit))]]
    b0 = MatF(rows, cfg)
    assert zeta.bmk_canonical(b @ b0) == zeta.bmk_canonical(b)


def test_bmk_errors():
    with pytest.raises(BadParams):
        zeta.bmk_reps(0, 1, 2)
    with pytest.raises(BadParams):
        zeta.bmk_reps(2, -1, 2)
    with pytest.raises(BadParams):
        zeta.bmk_reps(2, 1, 2, "twisted")


@pytest.mark.parametrize("p", [2, 3])
def test_unramified_series_starts_at_one(p):
    ev = FormEvaluator(lambda_form(4, default_char(p, 0), "reduced"))
    ser = zeta.c_series(ev, 2, 2, p)
    assert ser.coeffs[0] == CycloLaurent.one()
    # frozen: the higher coefficients computed to zero
    assert all(c.is_zero() for c in ser.coeffs[1:])
    js = ser.to_json()
    assert js["indeterminate_mask"] == [False, False, False]
    assert len(js["t_powers"]) == 3 and ser.kmax == 2


def test_qseries_keeps_indeterminate():
    s = zeta.QSeries([CycloLaurent.one(), INDETERMINATE])
    assert s.indeterminate_mask() == [False, True]
    assert s.to_json()["t_powers"][1] is None
    assert not s.is_one()


@pytest.mark.parametrize("p,e,c,const", [(3, 0, 1, "1/3"), (2, 0, 1, "1/2"), (3, 1, 1, "1"), (2, 0, 2, "1/4")])
def test_phi_star_matches_explicit_form(p, e, c, const):
    res = zeta.phi_star(default_char(p, e), 1, c, off_support=40)
    assert res["status"] == "PASS"
    assert res["mismatches"] == 0 and res["off_support_nonzero"] == 0
    assert res["constant"] == const


@pytest.mark.parametrize("p,e,c", [(3, 0, 1), (3, 1, 1), (2, 2, 2)])
def test_double_transform_is_negation(p, e, c):
    block = zeta.SchwartzBlock("phi_full", 1, default_char(p, e), c)
    f = zeta.sample_block(block, zeta.default_window(block))
    assert zeta.inversion_check(f)["status"] == "PASS"


@pytest.mark.parametrize("ring", ["R", "R_star"])
def test_parseval_on_ring_indicator(ring):
    block = zeta.SchwartzBlock("char_of_ring", 1, default_char(3, 0), 1, ring)
    f = zeta.sample_block(block, zeta.default_window(block))
    res = zeta.parseval_check(f)
    assert res["status"] == "PASS", res


def test_window_too_small_is_detected():
    block = zeta.SchwartzBlock("phi_full", 1, default_char(3, 1), 1)
    with pytest.raises(WindowTooSmall):
        zeta.sample_block(block, zeta.LatticeWindow(0, 1))


def test_window_and_block_errors():
    with pytest.raises(BadParams):
        zeta.LatticeWindow(0, 0)
    assert zeta.LatticeWindow(2, 1).dual() == zeta.LatticeWindow(1, 2)
    with pytest.raises(BadParams):
        zeta.SchwartzBlock("phi_full", 2, default_char(3, 1), 1)
    with pytest.raises(BadParams):
        zeta.SchwartzBlock("gaussian", 1, default_char(3, 0), 1)


@pytest.mark.parametrize("r,p,size", [(2, 3, 24), (2, 2, 6), (1, 5, 1)])
def test_sl_mod_sizes(r, p, size):
    assert len(zeta.sl_mod(r, p, 1)) == size


def test_upsilon():
    cfg = FieldConfig(3)
    want = MatF([[3, 0, 0, 0], [0, 3, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]], cfg)
    assert zeta.upsilon(2, 2, 1, cfg) == want


@pytest.mark.parametrize("p", [2, 3])
def test_unramified_average_is_normalized(p):
    chi = default_char(p, 0)
    ev = zeta.j_pi_average(lambda_form(4, chi, "reduced"), chi, 2, 0)
    assert evaluate(ev, MatF.identity(4, FieldConfig(p))) == CycloLaurent.one()


@pytest.mark.slow
def test_ramified_average_is_normalized_and_semi_invariant():
    chi = default_char(3, 1)
    ev = zeta.j_pi_average(sp_extend(lambda_form(4, chi, "reduced"), chi), chi, 2, 2)
    assert evaluate(ev, MatF.identity(4, FieldConfig(3))) == CycloLaurent.one()
    res = zeta.semi_invariance_check(ev, chi, 2, 2, trials=3)
    assert res["status"] == "PASS", res
