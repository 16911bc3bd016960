import itertools
import random
from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from shalika.errors import BadParams, NotInProduct, Singular
from shalika.matgroup import (
    MatF, SubgroupDescriptor, acute, cartan, coset_canonical, factor_s_p, hnf_right, in_B, in_H, in_K,
    in_K1, in_KfrakC, in_mirabolic, in_N, in_P_integral, in_S, in_S_circ, iwasawa, lst_decompose,
    sigma_of, special_element, subgroup_member, u_vec, ubar_vec,
)
from shalika.padic_core import FieldConfig, vq
from shalika.sampling import random_P_integral, random_gl_integral

from conftest import padic_rationals


def random_matrix(n, p, rng, vmin=-2, vmax=2):
    while True:
        rows = [[Fraction(p) ** rng.randint(vmin, vmax) * rng.randrange(p * p) for _ in range(n)]
                for _ in range(n)]
        g = MatF(rows, FieldConfig(p))
        if g.det():
            return g


def elementary_divisors_oracle(g: MatF):
    """f from minimal valuations of k x k minors: d_k = f_n + ... (sorted)."""
    n, p = g.n, g.p
    d = [0]
    for k in range(1, n + 1):
        best = min(vq(MatF([[g.rows[i][j] for j in cols] for i in rows], g.cfg).det(), p)
                   for rows in itertools.combinations(range(n), k)
                   for cols in itertools.combinations(range(n), k))
        d.append(best)
    asc = [d[k] - d[k - 1] for k in range(1, n + 1)]
    return sorted(asc, reverse=True)


seeds = st.integers(0, 10 ** 6)


@pytest.mark.parametrize("n", [1, 2, 3])
@pytest.mark.parametrize("p", [2, 3])
@given(seed=seeds)
def test_cartan_factors_and_divisors(n, p, seed):
    g = random_matrix(n, p, random.Random(seed))
    k1, f, k2 = cartan(g)
    assert k1 @ MatF.diag([Fraction(p) ** a for a in f], g.cfg) @ k2 == g
    assert in_K(k1) and in_K(k2)
    assert f == sorted(f, reverse=True)
    assert f == elementary_divisors_oracle(g)


@pytest.mark.parametrize("n", [2, 3])
@given(seed=seeds)
def test_iwasawa(n, seed):
    g = random_matrix(n, 3, random.Random(seed))
    b, k = iwasawa(g)
    assert b @ k == g and in_K(k) and in_B(b)


@pytest.mark.parametrize("p", [2, 3])
@given(seed=seeds)
def test_hnf_is_a_right_K_invariant(p, seed):
    rng = random.Random(seed)
    cfg = FieldConfig(p)
    g = random_matrix(3, p, rng)
    k = MatF(random_gl_integral(3, cfg, rng), cfg)
    h = hnf_right(g)
    assert hnf_right(g @ k) == h
    assert in_K(g.inv() @ h)
    assert coset_canonical(g @ k) == h


def test_coset_canonical_k1_keeps_det():
    cfg = FieldConfig(3)
    g = MatF([[3, 1], [0, 2]], cfg)
    c = coset_canonical(g, SubgroupDescriptor("K1"))
    assert c.det() == g.det() and in_K1(g.inv() @ c)
    with pytest.raises(BadParams):
        coset_canonical(g, SubgroupDescriptor("S"))


def test_hnf_singular():
    with pytest.raises(Singular):
        hnf_right(MatF([[1, 2], [2, 4]], FieldConfig(3)))


@pytest.mark.parametrize("p", [2, 3])
@given(data=st.data())
def test_lst_decomposition(p, data):
    cfg = FieldConfig(p)
    r = data.draw(st.integers(1, 4))
    x = data.draw(st.lists(padic_rationals(p, -3, 2, zero=True), min_size=r, max_size=r))
    f = data.draw(st.lists(st.integers(-2, 3), min_size=r, max_size=r))
    res = lst_decompose(x, f, cfg)
    assert res.h @ res.u @ res.d @ res.k == ubar_vec(x, cfg)
    assert in_H(res.h, f) and in_K1(res.k)
    up = lst_decompose(x, f, cfg, side="upper")
    assert up.h @ up.u @ up.d.inv() @ up.k == u_vec(x, cfg)
    assert in_H(up.h, [-a for a in f]) and in_K1(up.k)


def test_sigma_orders_by_decreasing_valuation():
    x = [Fraction(1, 9), Fraction(3), Fraction(1), Fraction(1, 3)]
    assert sigma_of(x, 3) == [2, 3, 4, 1]


@given(seed=seeds)
def test_factor_s_p_recovers_a_product(seed):
    rng = random.Random(seed)
    cfg = FieldConfig(3)
    a = random_matrix(2, 3, rng)
    b = random_matrix(2, 3, rng)
    s0 = MatF([list(a.rows[0]) + list(b.rows[0]), list(a.rows[1]) + list(b.rows[1]),
               [0, 0] + list(a.rows[0]), [0, 0] + list(a.rows[1])], cfg)
    p0 = random_P_integral(4, cfg, rng) @ MatF.diag([3, Fraction(1, 3), 1, 1], cfg)
    s, pm = factor_s_p(s0 @ p0)
    assert s @ pm == s0 @ p0 and in_S(s) and in_mirabolic(pm)


def test_factor_s_p_rejects_points_outside():
    with pytest.raises(NotInProduct):
        factor_s_p(MatF([[1, 0, 0, 0], [0, 0, 0, 1], [0, 1, 0, 0], [0, 0, 1, 0]], FieldConfig(3)))


@pytest.mark.parametrize("m,e", [(1, 1), (2, 1), (3, 1), (2, 2)])
def test_special_elements_are_mirabolic(m, e):
    cfg = FieldConfig(3)
    for name in ("g_n", "g_sharp"):
        assert in_mirabolic(special_element(name, cfg, m=m, e=e))
    d = special_element("delta_m", cfg, m=m, e=e)
    assert d.n == m and in_B(d)
    ups = special_element("upsilon", cfg, m=m, e=e, c=m * e)
    assert ups.n == 2 * m


def test_special_element_errors():
    with pytest.raises(BadParams):
        special_element("nope", FieldConfig(2))
    with pytest.raises(BadParams):
        special_element("g_n", FieldConfig(2), m=2)
    with pytest.raises(BadParams):
        acute(MatF.identity(3, FieldConfig(2)), 2)


def test_membership_predicates():
    cfg = FieldConfig(3)
    one = MatF.identity(4, cfg)
    s = MatF([[2, 0, 5, 1], [0, 1, 0, 0], [0, 0, 2, 0], [0, 0, 0, 1]], cfg)
    assert in_S_circ(s) and in_P_integral(s)
    assert not in_S(MatF([[2, 0, 5, 1], [0, 1, 0, 0], [0, 0, 1, 0], [0, 0, 0, 1]], cfg))
    assert in_N(MatF([[1, Fraction(1, 3)], [0, 1]], cfg))
    assert not in_N(MatF([[1, 0], [Fraction(1, 3), 1]], cfg))
    assert in_KfrakC(one, 1, 1)
    assert subgroup_member(one, SubgroupDescriptor("K1"))
    assert subgroup_member(one, SubgroupDescriptor("Gamma", (2,)))
    with pytest.raises(BadParams):
        SubgroupDescriptor("Z")


def test_matrix_arithmetic_and_json():
    cfg = FieldConfig(5)
    g = MatF([[Fraction(1, 5), 2], [3, 4]], cfg)
    assert g @ g.inv() == MatF.identity(2, cfg)
    assert g.T.T == g
    assert MatF.from_json(g.to_json(), cfg) == g
    assert g.det() == Fraction(4, 5) - 6
