from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from shalika.cyclo import CycloLaurent
from shalika.errors import BadParams, BudgetExceeded, EnumerationBudgetExceeded, LengthMismatch
from shalika.hecke import (
    CharacterOnSubgroup, HeckeDescriptor, collapsed_coefficients, coset_key, hecke_apply,
    hecke_cosets, hecke_cosets_bfs, is_dominant, lex_compare, standard_reps_K, vanishing_predicate,
    whittaker_split,
)
from shalika.char_values import psi_eval
from shalika.matgroup import MatF, in_K, in_N
from shalika.padic_core import FieldConfig


def degree_closed_form(f, q):
    """|K p^f K / K| for GL_2 and GL_3 weights used below."""
    table = {
        (1, 0): q + 1, (2, 0): q * q + q, (3, 0): q ** 3 + q ** 2, (1, 1): 1,
        (1, 0, 0): q * q + q + 1, (1, 1, 0): q * q + q + 1,
        (2, 1, 0): (q * q + q + 1) * (q + 1) * q,
    }
    return table[tuple(f)]


@pytest.mark.parametrize("p", [2, 3])
@pytest.mark.parametrize("f", [(1, 0), (2, 0), (3, 0), (1, 1), (1, 0, 0), (1, 1, 0)])
def test_degree_matches_closed_form_and_orbit(p, f):
    std = standard_reps_K(f, p)
    assert len(std) == degree_closed_form(f, p)
    bfs = hecke_cosets_bfs(HeckeDescriptor.maximal(f, p))
    desc = HeckeDescriptor.maximal(f, p)
    assert {coset_key(a, desc) for a in std} == {coset_key(a, desc) for a in bfs}


def test_degree_r3_mixed_weight():
    assert len(standard_reps_K((2, 1, 0), 2)) == degree_closed_form((2, 1, 0), 2)


# Gamma(1) fixes the last row mod p. For (r, a, i) = (3, 1, 1) the cosets are
# [[p, x, y], [0, 1, 0], [0, 0, 1]] (q^2 of them) and [[1, 0, 0], [0, p, y], [0, 0, 1]] (q).
GAMMA_COUNTS = {
    (2, 1, 1): lambda q: q,
    (2, 2, 1): lambda q: q ** 2,
    (2, 1, 2): lambda q: 1,
    (3, 1, 1): lambda q: q * q + q,
    (3, 1, 2): lambda q: q ** 2,
    (3, 2, 1): lambda q: q ** 4 + q ** 3,
}


@pytest.mark.parametrize("p", [2, 3])
@pytest.mark.parametrize("rai", sorted(GAMMA_COUNTS))
def test_gamma_level_counts(p, rai):
    r, a, i = rai
    desc = HeckeDescriptor.gamma(r, a, i, 1, p)
    reps = hecke_cosets(desc)
    assert len(reps) == GAMMA_COUNTS[rai](p)
    bfs = hecke_cosets_bfs(desc)
    assert {coset_key(x, desc) for x in reps} == {coset_key(x, desc) for x in bfs}


@pytest.mark.parametrize("p", [2, 3])
@pytest.mark.parametrize("rai,expected", [
    ((2, 1, 1), {(1, 0): 1}),
    ((2, 2, 1), {(2, 0): 2}),
    ((2, 1, 2), {(1, 1): 0}),
    ((3, 1, 1), {(1, 0, 0): 2, (0, 1, 0): 1}),
])
def test_gamma_collapsed_coefficients(p, rai, expected):
    """Coefficients are powers of q; the exponent table is frozen."""
    desc = HeckeDescriptor.gamma(*rai, 1, p)
    coeffs = collapsed_coefficients(desc, hecke_cosets(desc))
    assert {k: v.rational_value() for k, v in coeffs.items()} == {k: Fraction(p) ** e for k, e in expected.items()}


@pytest.mark.parametrize("p", [2, 3])
@pytest.mark.parametrize("f", [(1, 0), (2, 0), (1, 0, 0)])
def test_apply_to_indicator_of_K_finds_one_coset(p, f):
    desc = HeckeDescriptor.maximal(f, p)
    reps = hecke_cosets(desc)
    ind = lambda h: 1 if in_K(h) else 0
    for a in reps[:6]:
        assert hecke_apply(desc, ind, a.inv(), reps) == CycloLaurent.one()
    table = {coset_key(MatF.identity(len(f), desc.cfg), desc): CycloLaurent.const(7)}
    assert hecke_apply(desc, table, reps[0].inv(), reps) == CycloLaurent.const(7)


@pytest.mark.parametrize("p", [2, 3])
def test_collapsed_coefficients_at_level_K(p):
    """Reps [[p, x], [0, 1]] with x in o/p all have psi(x) = 1, plus the single
    rep diag(1, p)."""
    desc = HeckeDescriptor.maximal((1, 0), p)
    coeffs = collapsed_coefficients(desc)
    assert coeffs == {(1, 0): CycloLaurent.const(p), (0, 1): CycloLaurent.one()}


def test_whittaker_split():
    cfg = FieldConfig(3)
    g, s = whittaker_split(MatF([[3, 1], [0, 1]], cfg))
    assert g == (1, 0) and s == Fraction(1)


@given(st.lists(st.integers(-3, 5), min_size=1, max_size=4))
def test_is_dominant(f):
    assert is_dominant(f) == (all(a >= b for a, b in zip(f, f[1:])) and f[-1] >= 0)


@given(st.lists(st.integers(0, 3), min_size=3, max_size=3), st.lists(st.integers(0, 3), min_size=3, max_size=3))
def test_lex_compare_is_antisymmetric(f, g):
    assert lex_compare(f, g) == -lex_compare(g, f)
    assert (lex_compare(f, g) == 0) == (f == g)


def test_descriptor_errors():
    with pytest.raises(LengthMismatch):
        lex_compare([1], [1, 2])
    with pytest.raises(BadParams):
        HeckeDescriptor(2, (0, 1))
    with pytest.raises(BadParams):
        HeckeDescriptor.gamma(2, 1, 1, 0, 2)
    with pytest.raises(BadParams):
        HeckeDescriptor(2, (2, 1), "Gamma", 1, 2)
    with pytest.raises(EnumerationBudgetExceeded):
        hecke_cosets_bfs(HeckeDescriptor.maximal((2, 0), 3), budget=5)


def _whittaker_pair(cfg):
    N = CharacterOnSubgroup(in_N, lambda h: psi_eval(h.rows[0][1], cfg))
    K = CharacterOnSubgroup(in_K, lambda k: CycloLaurent.one())
    return N, K


@pytest.mark.parametrize("p", [2, 3])
def test_vanishing_off_dominant_weights(p):
    cfg = FieldConfig(p)
    N, K = _whittaker_pair(cfg)
    assert vanishing_predicate(MatF.diag([1, p], cfg), N, K) is True
    assert vanishing_predicate(MatF.diag([p, 1], cfg), N, K) is False
    with pytest.raises(BudgetExceeded):
        vanishing_predicate(MatF.diag([p, 1], cfg), N, K, budget=3)
