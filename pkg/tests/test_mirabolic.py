import random
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from shalika.char_values import chi_psi_eval, default_char, psi_N_eval
from shalika.cyclo import CycloLaurent
from shalika.errors import BadParams, NotInSubgroup
from shalika.matgroup import MatF, in_P_integral, in_S_circ
from shalika.mirabolic import (
    INDETERMINATE, CosetMeasure, FormEvaluator, PhiLift, Theta, TruncationPolicy, XiLeaf, XiOp,
    essential_form, evaluate, lambda_form, omega_apply, primitive_row_integral, primitive_row_oracle,
    reference_point, sp_extend, support_test, whittaker_double_integral, xi_eval,
)
from shalika.padic_core import FieldConfig
from shalika.sampling import perturb_mirabolic, random_P_integral, random_S_circ

from conftest import padic_rationals

CHARS = [(2, 0), (3, 0), (3, 1)]
_EVALUATORS = {}


def lam(p, e):
    """Shared Lambda-tree evaluator (memo cache reused across tests)."""
    key = (p, e)
    if key not in _EVALUATORS:
        _EVALUATORS[key] = FormEvaluator(lambda_form(4, default_char(p, e), "reduced"))
    return _EVALUATORS[key]


def one(n, p):
    return MatF.identity(n, FieldConfig(p))


# ------------------------------------------------------------------------------
# xi and the lift


def random_unipotent(n, cfg, rng):
    rows = [[Fraction(int(i == j)) for j in range(n)] for i in range(n)]
    for i in range(n - 1):
        for j in range(i + 1, n):
            rows[i][j] = Fraction(cfg.p) ** rng.randint(-2, 1) * rng.randrange(cfg.p ** 2)
    return MatF(rows, cfg)


@pytest.mark.parametrize("p", [2, 3])
@given(seed=st.integers(0, 10 ** 6))
def test_xi_is_psi_equivariant_with_compact_support(p, seed):
    cfg = FieldConfig(p)
    rng = random.Random(seed)
    k = random_P_integral(4, cfg, rng)
    u = random_unipotent(4, cfg, rng)
    assert xi_eval(4, k) == CycloLaurent.one()
    assert xi_eval(4, u @ k) == psi_N_eval(u)
    t = MatF.diag([1, 1, Fraction(1, p), 1], cfg) if seed % 2 else MatF.diag([p, 1, 1, 1], cfg)
    assert xi_eval(4, u @ t @ k).is_zero()


@pytest.mark.parametrize("p", [2, 3])
@given(seed=st.integers(0, 10 ** 6))
def test_lift_of_xi2_is_xi4(p, seed):
    cfg = FieldConfig(p)
    rng = random.Random(seed)
    g = random_S_circ(4, cfg, rng) @ random_P_integral(4, cfg, rng)
    if seed % 2:
        g = perturb_mirabolic(g, rng)
    lifted = evaluate(FormEvaluator(PhiLift(XiLeaf(2), 0)), g)
    assert lifted == evaluate(FormEvaluator(XiLeaf(4)), g)


# ------------------------------------------------------------------------------
# values of J at level 4


@pytest.mark.parametrize("p", [2, 3])
def test_unramified_value_at_identity(p):
    assert evaluate(lam(p, 0), one(4, p)) == CycloLaurent.one()
    tower = FormEvaluator(essential_form(4, default_char(p, 0), "generic"))
    assert evaluate(tower, one(4, p)) == CycloLaurent.one()


@pytest.mark.parametrize("p", [2, 3])
def test_lebesgue_normalization_scales_by_one_minus_inverse_q(p):
    ev = FormEvaluator(lambda_form(4, default_char(p, 0), "reduced"), measure=CosetMeasure("lebesgue_o_one"))
    assert evaluate(ev, one(4, p)) == CycloLaurent.const(1 - Fraction(1, p))


@pytest.mark.parametrize("p", [2, 3])
def test_xi_operator_at_identity(p):
    """z in o contributes 1 and the shell o(z) = -1 contributes 1/(q - 1)."""
    ev = FormEvaluator(XiOp(lambda_form(4, default_char(p, 0), "reduced")))
    assert evaluate(ev, one(4, p)) == CycloLaurent.const(Fraction(p, p - 1))


@pytest.mark.parametrize("p", [2, 3])
def test_value_outside_the_unramified_double_coset(p):
    """diag(1, p, 1/p, 1) has unit determinant, J = -q^{-2} there, and it is
    not in (S^o* cap P*) P*(o)."""
    g = MatF.diag([1, p, Fraction(1, p), 1], FieldConfig(p))
    assert evaluate(lam(p, 0), g) == CycloLaurent.const(Fraction(-1, p * p))
    assert support_test(4, 0, g) == (False, None)


def test_ramified_value_at_reference_point_is_nonzero():
    cfg = FieldConfig(3)
    x = reference_point(4, 1, cfg)
    assert not evaluate(lam(3, 1), x).is_zero()
    assert evaluate(lam(3, 1), one(4, 3)).is_zero()


@pytest.mark.parametrize("p,e", CHARS)
@settings(max_examples=25)
@given(seed=st.integers(0, 10 ** 6))
def test_left_shalika_equivariance(p, e, seed):
    cfg = FieldConfig(p)
    rng = random.Random(seed)
    chi = default_char(p, e)
    g = random_S_circ(4, cfg, rng) @ reference_point(4, e, cfg) @ random_P_integral(4, cfg, rng)
    if seed % 3 == 0:
        g = perturb_mirabolic(g, rng)
    s = random_S_circ(4, cfg, rng)
    ev = lam(p, e)
    assert evaluate(ev, s @ g) == chi_psi_eval(s, chi) * evaluate(ev, g)


@pytest.mark.parametrize("p,e", CHARS)
@settings(max_examples=25)
@given(seed=st.integers(0, 10 ** 6))
def test_right_P_integral_invariance(p, e, seed):
    cfg = FieldConfig(p)
    rng = random.Random(seed)
    g = random_S_circ(4, cfg, rng) @ reference_point(4, e, cfg)
    g = perturb_mirabolic(g, rng) if seed % 2 else g
    k = random_P_integral(4, cfg, rng)
    assert evaluate(lam(p, e), g @ k) == evaluate(lam(p, e), g)


@pytest.mark.parametrize("p,e", CHARS)
@settings(max_examples=20)
@given(seed=st.integers(0, 10 ** 6))
def test_support_law_and_witness(p, e, seed):
    cfg = FieldConfig(p)
    rng = random.Random(seed)
    g = random_S_circ(4, cfg, rng, unit_det=(e == 0)) @ reference_point(4, e, cfg) @ random_P_integral(4, cfg, rng)
    ok, (s, k) = support_test(4, e, g, seed=seed)
    assert ok and s @ reference_point(4, e, cfg) @ k == g
    assert in_S_circ(s) and in_P_integral(k)
    assert not evaluate(lam(p, e), g).is_zero()


@pytest.mark.parametrize("p,e", [(2, 0), (3, 1)])
@pytest.mark.parametrize("seed", range(4))
def test_tower_and_lambda_tree_agree(p, e, seed):
    cfg = FieldConfig(p)
    rng = random.Random(seed)
    g = random_S_circ(4, cfg, rng, vmin=0, vmax=1) @ reference_point(4, e, cfg) @ random_P_integral(4, cfg, rng, 1)
    tower = FormEvaluator(essential_form(4, default_char(p, e), "generic"))
    assert evaluate(tower, g) == evaluate(lam(p, e), g)


# ------------------------------------------------------------------------------
# the S.P extension and error paths


def test_sp_extension_on_group():
    cfg = FieldConfig(3)
    chi = default_char(3, 0)
    ev = FormEvaluator(sp_extend(lambda_form(4, chi, "reduced"), chi))
    assert evaluate(ev, one(4, 3)) == CycloLaurent.one()
    w = MatF([[0, 1, 0, 0], [1, 0, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]], cfg)
    assert evaluate(ev, w) is INDETERMINATE or isinstance(evaluate(ev, w), CycloLaurent)


def test_errors():
    cfg = FieldConfig(3)
    chi = default_char(3, 0)
    with pytest.raises(NotInSubgroup):
        evaluate(lam(3, 0), MatF([[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 1, 0], [1, 0, 0, 1]], cfg))
    with pytest.raises(BadParams):
        evaluate(lam(3, 0), one(2, 3))
    with pytest.raises(BadParams):
        essential_form(3, chi)
    with pytest.raises(BadParams):
        omega_apply(6, lambda_form(6, chi))
    with pytest.raises(BadParams):
        TruncationPolicy(radius=0)
    with pytest.raises(BadParams):
        Theta(XiLeaf(4), chi, "fast")
    with pytest.raises(BadParams):
        CosetMeasure("haar")


# ------------------------------------------------------------------------------
# coset integrals


@pytest.mark.parametrize("p", [2, 3])
@pytest.mark.parametrize("m", [1, 2])
@given(data=st.data())
def test_primitive_row_integral_matches_flat_sum(p, m, data):
    v = data.draw(st.lists(padic_rationals(p, -2, 1, zero=True), min_size=m, max_size=m))
    cfg = FieldConfig(p)
    assert primitive_row_integral(m, v, cfg) == primitive_row_oracle(m, v, cfg)


@pytest.mark.parametrize("p", [2, 3])
@pytest.mark.parametrize("m", [1, 2])
def test_primitive_row_integral_one_polar_coordinate(p, m):
    v = [Fraction(0)] * m
    v[-1] = Fraction(1, p)
    assert primitive_row_integral(m, v, FieldConfig(p)) == CycloLaurent.const(-Fraction(1, p ** m))


@pytest.mark.parametrize("p", [2, 3])
def test_double_integral_value(p):
    """The x-integral over p o^x is q^{-1} 1[o(y) >= -1] - q^{-2} 1[o(y) >= -2];
    against psi(-p y) over p^{-2} o the first term gives 1, the second 0."""
    assert whittaker_double_integral(1, 1, [Fraction(p)], FieldConfig(p)) == CycloLaurent.one()
