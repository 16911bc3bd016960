"""Matrices over Q_p, membership predicates, special elements and decompositions.

Entries are exact rationals (elements of Q inside Q_p), so products,
inverses and membership tests are exact.  ``MatF.scalar`` gives the
PadicScalar view of an entry.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, List, Sequence, Tuple

from .errors import BadParams, NotInProduct, Singular
from .padic_core import (
    FieldConfig,
    PadicScalar,
    frac_part,
    is_integral,
    is_unit,
    make_scalar,
    to_fraction,
    vq,
)

Row = Tuple[Fraction, ...]
F0 = Fraction(0)
F1 = Fraction(1)


class MatF:
    """Immutable square matrix with exact rational entries."""

    __slots__ = ("cfg", "rows", "_hash")

    def __init__(self, rows, cfg: FieldConfig):
        rows = tuple(tuple(to_fraction(x) for x in r) for r in rows)
        n = len(rows)
        if any(len(r) != n for r in rows):
            raise ValueError("matrix must be square")
        self.rows: Tuple[Row, ...] = rows
        self.cfg = cfg
        self._hash = None

    # construction ---------------------------------------------------------
    @classmethod
    def identity(cls, n: int, cfg: FieldConfig) -> "MatF":
        return cls([[F1 if i == j else F0 for j in range(n)] for i in range(n)], cfg)

    @classmethod
    def diag(cls, entries: Sequence, cfg: FieldConfig) -> "MatF":
        n = len(entries)
        return cls([[to_fraction(entries[i]) if i == j else F0 for j in range(n)] for i in range(n)], cfg)

    @classmethod
    def from_scalars(cls, rows, cfg: FieldConfig) -> "MatF":
        return cls([[s.to_fraction() if isinstance(s, PadicScalar) else s for s in r] for r in rows], cfg)

    @classmethod
    def block_diag(cls, blocks: Sequence["MatF"]) -> "MatF":
        cfg = blocks[0].cfg
        n = sum(b.n for b in blocks)
        out = [[F0] * n for _ in range(n)]
        off = 0
        for b in blocks:
            for i in range(b.n):
                for j in range(b.n):
                    out[off + i][off + j] = b.rows[i][j]
            off += b.n
        return cls(out, cfg)

    # basic structure --------------------------------------------------------
    @property
    def n(self) -> int:
        return len(self.rows)

    @property
    def p(self) -> int:
        return self.cfg.p

    def __getitem__(self, ij) -> Fraction:
        i, j = ij
        return self.rows[i][j]

    def scalar(self, i: int, j: int) -> PadicScalar:
        return make_scalar(self.rows[i][j], self.cfg)

    def to_scalars(self):
        return [[make_scalar(x, self.cfg) for x in r] for r in self.rows]

    def tolist(self) -> List[List[Fraction]]:
        return [list(r) for r in self.rows]

    def __eq__(self, other):
        if not isinstance(other, MatF):
            return NotImplemented
        return self.rows == other.rows

    def __hash__(self):
        if self._hash is None:
            self._hash = hash(self.rows)
        return self._hash

    def __repr__(self):
        body = "; ".join(", ".join(str(x) for x in r) for r in self.rows)
        return f"MatF[p={self.cfg.p}]([{body}])"

    # arithmetic ----------------------------------------------------------------
    def __matmul__(self, other: "MatF") -> "MatF":
        if self.n != other.n:
            raise ValueError("size mismatch")
        cols = list(zip(*other.rows))
        return MatF([[sum((a * b for a, b in zip(r, c) if a and b), F0) for c in cols]
                     for r in self.rows], self.cfg)

    __mul__ = __matmul__

    def scale(self, c) -> "MatF":
        c = to_fraction(c)
        return MatF([[c * x for x in r] for r in self.rows], self.cfg)

    def __add__(self, other: "MatF") -> "MatF":
        return MatF([[a + b for a, b in zip(r, s)] for r, s in zip(self.rows, other.rows)], self.cfg)

    def __sub__(self, other: "MatF") -> "MatF":
        return MatF([[a - b for a, b in zip(r, s)] for r, s in zip(self.rows, other.rows)], self.cfg)

    @property
    def T(self) -> "MatF":
        return MatF(list(zip(*self.rows)), self.cfg)

    def det(self) -> Fraction:
        return det_rows(self.rows)

    def inv(self) -> "MatF":
        return MatF(inverse_rows(self.rows), self.cfg)

    def block(self, r0: int, r1: int, c0: int, c1: int) -> List[List[Fraction]]:
        return [list(r[c0:c1]) for r in self.rows[r0:r1]]

    def min_val(self):
        return min((vq(x, self.p) for r in self.rows for x in r if x), default=math.inf)

    def is_integral(self) -> bool:
        p = self.p
        return all(x.denominator % p != 0 for r in self.rows for x in r)

    def to_json(self):
        return [[str(x) for x in r] for r in self.rows]

    @classmethod
    def from_json(cls, obj, cfg: FieldConfig) -> "MatF":
        return cls([[Fraction(x) for x in r] for r in obj], cfg)


def det_rows(rows: Sequence[Sequence[Fraction]]) -> Fraction:
    a = [list(r) for r in rows]
    n = len(a)
    det = F1
    for c in range(n):
        piv = next((i for i in range(c, n) if a[i][c]), None)
        if piv is None:
            return F0
        if piv != c:
            a[c], a[piv] = a[piv], a[c]
            det = -det
        pv = a[c][c]
        det *= pv
        for i in range(c + 1, n):
            if a[i][c]:
                f = a[i][c] / pv
                ai, ac = a[i], a[c]
                for j in range(c, n):
                    if ac[j]:
                        ai[j] -= f * ac[j]
    return det


def inverse_rows(rows: Sequence[Sequence[Fraction]]) -> List[List[Fraction]]:
    n = len(rows)
    a = [list(r) + [F1 if i == j else F0 for j in range(n)] for i, r in enumerate(rows)]
    for c in range(n):
        piv = next((i for i in range(c, n) if a[i][c]), None)
        if piv is None:
            raise Singular("matrix is singular")
        a[c], a[piv] = a[piv], a[c]
        inv_p = 1 / a[c][c]
        a[c] = [x * inv_p for x in a[c]]
        for i in range(n):
            if i != c and a[i][c]:
                f = a[i][c]
                a[i] = [x - f * y for x, y in zip(a[i], a[c])]
    return [r[n:] for r in a]


def mat(rows, p_or_cfg) -> MatF:
    cfg = p_or_cfg if isinstance(p_or_cfg, FieldConfig) else FieldConfig(p_or_cfg)
    return MatF(rows, cfg)


def acute(g: MatF, n: int) -> MatF:
    """Embed g in G_n as diag(g, 1_{n - size(g)})."""
    if g.n > n:
        raise BadParams("cannot embed into a smaller group")
    return MatF.block_diag([g, MatF.identity(n - g.n, g.cfg)]) if g.n < n else g


# ------------------------------------------------------------------------------
# membership predicates


def _all_integral(vals, p) -> bool:
    return all(x.denominator % p != 0 for x in vals)


def in_K(g: MatF) -> bool:
    return g.is_integral() and is_unit(g.det(), g.p)


def in_K1(g: MatF) -> bool:
    return g.is_integral() and g.det() == 1


def in_mirabolic(g: MatF) -> bool:
    n = g.n
    return all(g.rows[n - 1][j] == (F1 if j == n - 1 else F0) for j in range(n)) and g.det() != 0


def in_P_integral(g: MatF) -> bool:
    return in_mirabolic(g) and in_K(g)


def in_P_star(g: MatF) -> bool:
    return in_mirabolic(g) and is_unit(g.det(), g.p)


def in_N(g: MatF) -> bool:
    n = g.n
    return all(g.rows[i][j] == (F1 if i == j else F0) for i in range(n) for j in range(i + 1))


def in_B(g: MatF) -> bool:
    n = g.n
    return all(g.rows[i][j] == 0 for i in range(n) for j in range(i)) and g.det() != 0


def in_Gamma(g: MatF, c: int) -> bool:
    """K with the last row's off-diagonal entries in p^c."""
    n = g.n
    p = g.p
    return in_K(g) and all(vq(g.rows[n - 1][j], p) >= c for j in range(n - 1))


def shalika_blocks(g: MatF):
    """Return (a, b') with g = [[a, b'],[0, a]] or None."""
    n = g.n
    if n % 2:
        return None
    m = n // 2
    A = g.block(0, m, 0, m)
    B = g.block(0, m, m, n)
    C = g.block(m, n, 0, m)
    D = g.block(m, n, m, n)
    if any(x for r in C for x in r) or A != D:
        return None
    if det_rows(A) == 0:
        return None
    return A, B


def in_S(g: MatF) -> bool:
    return shalika_blocks(g) is not None


def in_S_circ(g: MatF) -> bool:
    return in_S(g) and in_mirabolic(g)


def in_S_circ_star(g: MatF) -> bool:
    return in_S_circ(g) and is_unit(g.det(), g.p)


def pi_f(f: Sequence[int], cfg: FieldConfig) -> MatF:
    p = Fraction(cfg.p)
    return MatF.diag([p ** k for k in f], cfg)


def in_H(g: MatF, f: Sequence[int]) -> bool:
    """H_f = varpi^f K^1 varpi^{-f}; g may be embedded in a larger group via
    acute(), in which case only the leading block is tested and the rest must
    be the identity."""
    r = len(f)
    if g.n > r:
        for i in range(g.n):
            for j in range(g.n):
                if (i >= r or j >= r) and g.rows[i][j] != (F1 if i == j else F0):
                    return False
        g = MatF([row[:r] for row in g.rows[:r]], g.cfg)
    pf = pi_f(f, g.cfg)
    return in_K1(pf.inv() @ g @ pf)


def in_O_s(rows, s: int, p: int) -> bool:
    """Membership in R_r(s) = O_r cap O_r(s): integral with last row's
    off-diagonal entries in p^s."""
    r = len(rows)
    if not _all_integral((x for row in rows for x in row), p):
        return False
    return all(vq(rows[r - 1][j], p) >= s for j in range(r - 1))


def _ring_Rc(g: MatF, c: int, e: int) -> bool:
    n = g.n
    m = n // 2
    p = g.p
    l = c - (m - 1) * e
    A = g.block(0, m, 0, m)
    B = g.block(0, m, m, n)
    C = g.block(m, n, 0, m)
    D = g.block(m, n, m, n)
    if not _all_integral((x for r in A + B for x in r), p):
        return False
    if not in_O_s(D, l, p):
        return False
    for i in range(m):
        need = e if i < m - 1 else l
        if any(vq(x, p) < need for x in C[i]):
            return False
    return True


def _w_rows(m: int):
    return [[F1 if i + j == m - 1 else F0 for j in range(m)] for i in range(m)]


def _conj_w_t(rows):
    """w * transpose(X) * w for a square block X."""
    m = len(rows)
    return [[rows[m - 1 - j][m - 1 - i] for j in range(m)] for i in range(m)]


def _ring_Rc_star(g: MatF, c: int, e: int) -> bool:
    n = g.n
    m = n // 2
    p = g.p
    l = c - (m - 1) * e
    lp = l - e
    A = g.block(0, m, 0, m)
    B = g.block(0, m, m, n)
    C = g.block(m, n, 0, m)
    D = g.block(m, n, m, n)
    # D in w tR_m(l) w  <=>  w tD w in R_m(l)
    if not in_O_s(_conj_w_t(D), l, p):
        return False
    # A, B in w tO_m(l') w: w tX w in O_m(l') (last row off-diag in p^{l'},
    # last column off-diag in p^{-l'}, other entries integral)
    for X in (A, B):
        Y = _conj_w_t(X)
        for i in range(m):
            for j in range(m):
                need = 0
                if i == m - 1 and j < m - 1:
                    need = lp
                elif j == m - 1 and i < m - 1:
                    need = -lp
                if vq(Y[i][j], p) < need:
                    return False
    # C in O_m diag(p^l, p^e,...): column 0 in p^l, others in p^e
    for i in range(m):
        for j in range(m):
            need = l if j == 0 else e
            if vq(C[i][j], p) < need:
                return False
    return True


def in_KfrakC(g: MatF, c: int, e: int) -> bool:
    if g.det() == 0:
        return False
    return _ring_Rc(g, c, e) and _ring_Rc(g.inv(), c, e)


def in_KfrakC_star(g: MatF, c: int, e: int) -> bool:
    if g.det() == 0:
        return False
    return _ring_Rc_star(g, c, e) and _ring_Rc_star(g.inv(), c, e)


def in_B_pattern(g: MatF, k: int) -> bool:
    """Integral upper triangular with det of valuation k."""
    return in_B(g) and g.is_integral() and vq(g.det(), g.p) == k


def in_Be_pattern(g: MatF, k: int, lprime: int) -> bool:
    p = g.p
    if not in_B(g) or vq(g.det(), p) != k:
        return False
    m = g.n
    for i in range(m):
        for j in range(i, m):
            need = -lprime if (i == 0 and j > 0) else 0
            if vq(g.rows[i][j], p) < need:
                return False
    return True


@dataclass(frozen=True)
class SubgroupDescriptor:
    tag: str
    params: Tuple = ()

    _TAGS = ("K", "K1", "Gamma", "P_integral", "C", "S", "S_circ", "S_circ_star",
             "P_star", "H", "KfrakC", "KfrakC_star", "B_pattern", "Be_pattern")

    def __post_init__(self):
        if self.tag not in self._TAGS:
            raise BadParams(f"unknown subgroup tag {self.tag!r}")

    def to_json(self):
        return {"tag": self.tag, "params": list(self.params)}


def subgroup_member(g: MatF, d: SubgroupDescriptor) -> bool:
    t, a = d.tag, d.params
    if t == "K":
        return in_K(g)
    if t == "K1":
        return in_K1(g)
    if t in ("Gamma", "C"):
        return in_Gamma(g, a[0])
    if t == "P_integral":
        return in_P_integral(g)
    if t == "S":
        return in_S(g)
    if t == "S_circ":
        return in_S_circ(g)
    if t == "S_circ_star":
        return in_S_circ_star(g)
    if t == "P_star":
        return in_P_star(g)
    if t == "H":
        return in_H(g, a)
    if t == "KfrakC":
        return in_KfrakC(g, a[0], a[1])
    if t == "KfrakC_star":
        return in_KfrakC_star(g, a[0], a[1])
    if t == "B_pattern":
        return in_B_pattern(g, a[1] if len(a) > 1 else a[0])
    if t == "Be_pattern":
        return in_Be_pattern(g, a[1], a[2])
    raise BadParams(t)


# ------------------------------------------------------------------------------
# special elements


def u_vec(x: Sequence, cfg: FieldConfig) -> MatF:
    """u(x) = [[1_r, tx],[0, 1]]."""
    r = len(x)
    M = MatF.identity(r + 1, cfg).tolist()
    for i, xi in enumerate(x):
        M[i][r] = to_fraction(xi)
    return MatF(M, cfg)


def ubar_vec(x: Sequence, cfg: FieldConfig) -> MatF:
    """ubar(x) = [[1_r, 0],[x, 1]]."""
    r = len(x)
    M = MatF.identity(r + 1, cfg).tolist()
    for j, xj in enumerate(x):
        M[r][j] = to_fraction(xj)
    return MatF(M, cfg)


def perm_matrix(h: Sequence[int], cfg: FieldConfig) -> MatF:
    """Matrix sending e_j to e_{h(j)}; ``h`` is 1-based, h[j-1] = h(j)."""
    n = len(h)
    M = [[F0] * n for _ in range(n)]
    for j in range(n):
        M[h[j] - 1][j] = F1
    return MatF(M, cfg)


def h_perm(m: int) -> List[int]:
    """The permutation h_{n+1} of {1..2m+1} (n = 2m)."""
    h = list(range(1, m + 1)) + [2 * m + 1] + [m + k for k in range(1, m + 1)]
    return h


def special_element(name: str, cfg: FieldConfig, **params) -> MatF:
    p = Fraction(cfg.p)
    try:
        if name == "delta_m":
            m, e = params["m"], params.get("e", 0)
            if m < 1:
                raise BadParams("m >= 1")
            if m == 1:
                return MatF.identity(1, cfg)
            exps = [(2 * i - 1) * e for i in range(1, m)] + [(m - 1) * e]
            return MatF.diag([p ** a for a in exps], cfg)
        if name == "delta_sharp":
            m, e = params["m"], params.get("e", 0)
            if m < 1:
                raise BadParams("m >= 1")
            return MatF.diag([p ** (2 * i * e) for i in range(m)], cfg)
        if name == "v_m":
            m, e = params["m"], params["e"]
            return u_vec([p ** (-(m - 1 - i) * e) for i in range(m - 1)], cfg)
        if name == "v_sharp":
            m, e = params["m"], params["e"]
            return ubar_vec([p ** ((m - 1 - i) * e) for i in range(m - 1)], cfg)
        if name == "g_n":
            m, e = params["m"], params["e"]
            v = special_element("v_m", cfg, m=m, e=e)
            d = special_element("delta_m", cfg, m=m, e=e)
            return acute(v @ d, 2 * m)
        if name == "g_sharp":
            m, e = params["m"], params["e"]
            v = special_element("v_sharp", cfg, m=m, e=e)
            d = special_element("delta_sharp", cfg, m=m, e=e)
            return acute(v @ d, 2 * m)
        if name == "w_anti":
            m = params["m"]
            return MatF(_w_rows(m), cfg)
        if name == "upsilon":
            m, e, c = params["m"], params["e"], params["c"]
            l = c - (m - 1) * e
            top = MatF.diag([p ** l] + [p ** e] * (m - 1), cfg)
            return MatF.block_diag([top, MatF(_w_rows(m), cfg)])
        if name == "h_perm":
            m = params["m"]
            return perm_matrix(h_perm(m), cfg)
        if name == "eta":
            m = params["m"]
            return acute(perm_matrix(h_perm(m), cfg), 2 * m + 2)
        if name == "s_j":
            m, j = params["m"], params["j"]
            if not 0 <= j <= m - 2:
                raise BadParams("0 <= j <= m-2")
            h = list(range(1, m + 1))
            h[j], h[m - 1] = m, j + 1
            return perm_matrix(h, cfg)
        if name == "A_w_t":
            w, t, e = params["w"], params["t"], params["e"]
            m = len(w)
            M = MatF.identity(m, cfg).tolist()
            for j in range(m):
                M[m - 1][j] = p ** ((m - w[j]) * e) * to_fraction(t[j])
            return MatF(M, cfg)
        if name == "u_x":
            return u_vec(params["x"], cfg)
        if name == "ubar_x":
            return ubar_vec(params["x"], cfg)
        if name == "pi_f":
            return pi_f(params["f"], cfg)
    except KeyError as exc:
        raise BadParams(f"missing parameter {exc}") from None
    raise BadParams(f"unknown special element {name!r}")


# ------------------------------------------------------------------------------
# normal forms over the valuation ring


def reduce_mod(x: Fraction, a: int, p: int) -> Fraction:
    """Canonical representative of x modulo p^a Z_p."""
    pa = Fraction(p) ** a
    return pa * frac_part(x / pa, p)


def _col_op(M, dst, src, c):
    """col_dst += c * col_src (in place on a list-of-lists)."""
    if c:
        for row in M:
            if row[src]:
                row[dst] += c * row[src]


def _col_scale(M, j, c):
    for row in M:
        row[j] *= c


def _col_swap(M, i, j):
    if i != j:
        for row in M:
            row[i], row[j] = row[j], row[i]


def hnf_right(g: MatF) -> MatF:
    """Canonical representative of gK: lower triangular, diagonal p^a_i,
    entry (i, j), j < i, reduced modulo p^{a_i}."""
    p = g.p
    n = g.n
    M = g.tolist()
    for i in range(n):
        cands = [(vq(M[i][j], p), j) for j in range(i, n) if M[i][j]]
        if not cands:
            raise Singular("matrix is singular")
        v, j = min(cands)
        _col_swap(M, i, j)
        piv = M[i][i]
        _col_scale(M, i, (Fraction(p) ** v) / piv)
        for j in range(i + 1, n):
            if M[i][j]:
                _col_op(M, j, i, -M[i][j] / M[i][i])
    for i in range(1, n):
        a = vq(M[i][i], p)
        for j in range(i):
            r = reduce_mod(M[i][j], a, p)
            c = (r - M[i][j]) / M[i][i]
            _col_op(M, j, i, c)
    return MatF(M, g.cfg)


def coset_canonical(g: MatF, d: SubgroupDescriptor = SubgroupDescriptor("K")) -> MatF:
    h = hnf_right(g)
    if d.tag == "K":
        return h
    if d.tag == "K1":
        u = g.det() / h.det()
        M = h.tolist()
        for row in M:
            row[-1] *= u
        return MatF(M, g.cfg)
    raise BadParams("coset_canonical supports K and K1")


def iwasawa_upper(g: MatF) -> MatF:
    """The b of ``iwasawa`` without forming k."""
    p = g.p
    n = g.n
    M = g.tolist()
    for i in range(n - 1, -1, -1):
        cands = [(vq(M[i][j], p), -j, j) for j in range(i + 1) if M[i][j]]
        if not cands:
            raise Singular("matrix is singular")
        v, _, j = min(cands)
        _col_swap(M, i, j)
        _col_scale(M, i, (Fraction(p) ** v) / M[i][i])
        for j in range(i):
            if M[i][j]:
                _col_op(M, j, i, -M[i][j] / M[i][i])
    for j in range(n):
        for i in range(j - 1, -1, -1):
            a = vq(M[i][i], p)
            r = reduce_mod(M[i][j], a, p)
            c = (r - M[i][j]) / M[i][i]
            _col_op(M, j, i, c)
    return MatF(M, g.cfg)


def iwasawa(g: MatF) -> Tuple[MatF, MatF]:
    """g = b k with b upper triangular (diagonal p^a, entries above the
    diagonal reduced mod p^{a_i}) and k in K."""
    b = iwasawa_upper(g)
    return b, b.inv() @ g


def cartan(g: MatF) -> Tuple[MatF, List[int], MatF]:
    """Smith form g = k1 * diag(p^f) * k2 with f nonincreasing."""
    p = g.p
    n = g.n
    if g.det() == 0:
        raise Singular("matrix is singular")
    M = g.tolist()
    L = [[F1 if i == j else F0 for j in range(n)] for i in range(n)]  # M = L^-1 g R^-1 tracked as L g R
    R = [[F1 if i == j else F0 for j in range(n)] for i in range(n)]
    for t in range(n):
        v, i0, j0 = min((vq(M[i][j], p), i, j) for i in range(t, n) for j in range(t, n) if M[i][j])
        M[t], M[i0] = M[i0], M[t]
        L[t], L[i0] = L[i0], L[t]
        _col_swap(M, t, j0)
        _col_swap(R, t, j0)
        c = (Fraction(p) ** v) / M[t][t]
        _col_scale(M, t, c)
        _col_scale(R, t, c)
        for i in range(t + 1, n):
            if M[i][t]:
                f = M[i][t] / M[t][t]
                M[i] = [x - f * y for x, y in zip(M[i], M[t])]
                L[i] = [x - f * y for x, y in zip(L[i], L[t])]
        for j in range(t + 1, n):
            if M[t][j]:
                f = -M[t][j] / M[t][t]
                _col_op(M, j, t, f)
                _col_op(R, j, t, f)
    exps = [vq(M[i][i], p) for i in range(n)]
    # M = L g R is diag(p^exps) with exps nondecreasing; reverse for f nonincreasing.
    order = list(range(n - 1, -1, -1))
    f = [exps[i] for i in order]
    Pm = [[F1 if order[i] == j else F0 for j in range(n)] for i in range(n)]
    Lm = MatF(L, g.cfg)
    Rm = MatF(R, g.cfg)
    Pm = MatF(Pm, g.cfg)
    # diag(p^f) = P M P^T, so g = L^-1 P^T diag(p^f) P R^-1
    k1 = Lm.inv() @ Pm.T
    k2 = Pm @ Rm.inv()
    return k1, f, k2


# ------------------------------------------------------------------------------
# sigma, tau and the lower/upper decomposition


def _val(x: Fraction, p: int):
    return vq(x, p)


def sigma_of(x: Sequence[Fraction], p: int) -> List[int]:
    """sigma as a 1-based list: sigma[i-1] = sigma(i).  Valuations decrease
    along sigma; ties keep increasing index order."""
    r = len(x)
    idx = list(range(1, r + 1))
    idx.sort(key=lambda j: (-_val(x[j - 1], p), j))
    return idx


def tau_of(x: Sequence[Fraction], f: Sequence[int], p: int, sigma: Sequence[int]) -> List[int]:
    """tau_x^f as a sorted list of positions i (1-based, in sigma order)."""
    r = len(x)
    out = []
    for i in range(1, r + 1):
        xi = x[sigma[i - 1] - 1]
        if is_integral(xi, p):
            continue
        oi = _val(xi, p)
        ok = True
        for j in range(i + 1, r + 1):
            sj = sigma[j - 1]
            if not (oi - _val(x[sj - 1], p) < f[sj - 1] - f[sigma[i - 1] - 1]):
                ok = False
                break
        if ok:
            out.append(i)
    return out


def _hat(a: Fraction) -> Fraction:
    return a if a else F1


def _star(a: Fraction) -> Fraction:
    return 1 / a if a else F0


def d_of(x: Sequence[Fraction], p: int, cfg: FieldConfig) -> MatF:
    """The diagonal matrix d(x) of size r+1."""
    r = len(x)
    s = sigma_of(x, p)
    pos = {s[i]: i + 1 for i in range(r)}  # sigma^{-1}
    d = [F1] * (r + 1)
    for i in range(1, r + 1):
        if i == s[0]:
            d[i - 1] = 1 / _hat(x[i - 1])
        else:
            prev = s[pos[i] - 2]
            d[i - 1] = _hat(x[prev - 1]) / _hat(x[i - 1])
    d[r] = _hat(x[s[r - 1] - 1])
    return MatF.diag(d, cfg)


def sigma_tau(x: Sequence, f: Sequence[int], cfg: FieldConfig):
    """Return (sigma, tau, x(tau)*, d(x(tau)))."""
    p = cfg.p
    x = [to_fraction(a) for a in x]
    if len(f) != len(x):
        raise BadParams("x and f must have equal length")
    sigma = sigma_of(x, p)
    tau = tau_of(x, f, p, sigma)
    chosen = {sigma[i - 1] for i in tau}
    x_tau = [x[j] if (j + 1) in chosen else F0 for j in range(len(x))]
    x_tau_star = [_star(a) for a in x_tau]
    return sigma, tau, x_tau_star, d_of(x_tau, p, cfg)


def _lst_lower_h(x: Dict[int, Fraction], active: List[int], pivot: int,
                 f: Sequence[int], p: int, n: int) -> List[List[Fraction]]:
    """Left factor h (as an n x n list) from the peeling recursion for
    1 + sum_{j in active} x_j E_{pivot, j}.  Indices are 0-based."""
    I = [[F1 if i == j else F0 for j in range(n)] for i in range(n)]
    if all(is_integral(x.get(j, F0), p) for j in active):
        return I
    # peel the coordinate of minimal valuation (largest index among ties)
    s = min(active, key=lambda j: (_val(x.get(j, F0), p), -j))
    y = x[s]
    oy = _val(y, p)
    rest = [j for j in active if j != s]
    A = [j for j in rest if x.get(j, F0) and _val(x[j], p) - oy < f[s] - f[j]]
    B = [j for j in rest if j not in A and x.get(j, F0)]
    # v'' = 1 - sum_{j in B} (x_j / y) E_{s, j}
    v2 = [row[:] for row in I]
    for j in B:
        v2[s][j] = -x[j] / y
    sub = {j: -x[j] for j in A}
    h2 = _lst_lower_h(sub, [j for j in rest], s, f, p, n)
    # recursion's u-factor for the pivot s, needed to build U1 = D u'' D^{-1}
    z2 = _lst_lower_z(sub, rest, f, p)
    U1 = [row[:] for row in I]
    for j, zj in z2.items():
        U1[j][s] = zj * y
    return _mul_lists(_mul_lists(v2, h2), U1)


def _lst_lower_z(x: Dict[int, Fraction], active: List[int], f, p) -> Dict[int, Fraction]:
    """The vector z with u(z) the middle factor (entries x_j^{-1} on the
    recursion's chosen set)."""
    if all(is_integral(x.get(j, F0), p) for j in active):
        return {}
    s = min(active, key=lambda j: (_val(x.get(j, F0), p), -j))
    y = x[s]
    oy = _val(y, p)
    rest = [j for j in active if j != s]
    A = [j for j in rest if x.get(j, F0) and _val(x[j], p) - oy < f[s] - f[j]]
    sub = {j: -x[j] for j in A}
    z2 = _lst_lower_z(sub, rest, f, p)
    z = {j: -zj for j, zj in z2.items()}
    z[s] = 1 / y
    return z


def _mul_lists(a, b):
    cols = list(zip(*b))
    return [[sum((x * y for x, y in zip(r, c) if x and y), F0) for c in cols] for r in a]


@dataclass
class LSTResult:
    h: MatF
    u: MatF
    d: MatF
    k: MatF
    sigma: List[int]
    tau: List[int]
    recursion_tau_matches: bool


def lst_decompose(x: Sequence, f: Sequence[int], cfg: FieldConfig, side: str = "lower") -> LSTResult:
    """lower: ubar_x = h u(x(tau)*) d(x(tau)) k with h in H_f, k in K^1.
    upper: u_x = h ubar(x(tau)*) d(x(tau))^{-1} k with h in H_{-f}."""
    p = cfg.p
    x = [to_fraction(a) for a in x]
    r = len(x)
    if len(f) != r:
        raise BadParams("x and f must have equal length")
    if side == "upper":
        res = lst_decompose([-a for a in x], f, cfg, "lower")
        h = res.h.T.inv()
        sigma, tau, xs, d = sigma_tau(x, f, cfg)
        u = ubar_vec(xs, cfg)
        target = u_vec(x, cfg)
        k = (h @ u @ d.inv()).inv() @ target
        return LSTResult(h, u, d, k, sigma, tau, res.recursion_tau_matches)
    if side != "lower":
        raise BadParams("side must be lower or upper")
    sigma, tau, xs, d = sigma_tau(x, f, cfg)
    xd = {j: x[j] for j in range(r) if x[j]}
    hl = _lst_lower_h(xd, list(range(r)), r, list(f), p, r + 1)
    z = _lst_lower_z(xd, list(range(r)), list(f), p)
    zvec = [z.get(j, F0) for j in range(r)]
    h = MatF(hl, cfg)
    u = u_vec(xs, cfg)
    target = ubar_vec(x, cfg)
    k = (h @ u @ d).inv() @ target
    return LSTResult(h, u, d, k, sigma, tau, zvec == list(xs))


# ------------------------------------------------------------------------------
# Shalika times mirabolic factorization


def solve_linear(A: List[List[Fraction]], b: List[Fraction]):
    """Particular solution and kernel basis of A x = b over Q, or None."""
    m = len(A)
    n = len(A[0]) if A else 0
    rows = [list(A[i]) + [b[i]] for i in range(m)]
    piv = []
    r = 0
    for c in range(n):
        pr = next((i for i in range(r, m) if rows[i][c]), None)
        if pr is None:
            continue
        rows[r], rows[pr] = rows[pr], rows[r]
        iv = 1 / rows[r][c]
        rows[r] = [t * iv for t in rows[r]]
        for i in range(m):
            if i != r and rows[i][c]:
                fct = rows[i][c]
                rows[i] = [s - fct * t for s, t in zip(rows[i], rows[r])]
        piv.append(c)
        r += 1
        if r == m:
            break
    for i in range(r, m):
        if rows[i][n]:
            return None
    x0 = [F0] * n
    for i, c in enumerate(piv):
        x0[c] = rows[i][n]
    free = [c for c in range(n) if c not in piv]
    kernel = []
    for fc in free:
        v = [F0] * n
        v[fc] = F1
        for i, c in enumerate(piv):
            v[c] = -rows[i][fc]
        kernel.append(v)
    return x0, kernel


def factor_s_p(g: MatF) -> Tuple[MatF, MatF]:
    """g = s p with s in S_n, p in P_n.

    Write s = diag(a, a) u(b); p's last row is e_n exactly when the last row
    of s^{-1} g is e_n.  With s^{-1} = u(-b) diag(a^{-1}, a^{-1}), the last
    row of s^{-1} g is (last row of a^{-1}) times the bottom m rows of g.  We
    take b = 0 and a^{-1} with last row l solving l * G_bottom = e_n, the
    other rows of a^{-1} completing l to an invertible matrix.
    """
    n = g.n
    if n % 2:
        raise BadParams("n must be even")
    m = n // 2
    cfg = g.cfg
    bottom = [list(g.rows[m + i]) for i in range(m)]
    # solve l * bottom = e_n, i.e. bottom^T l^T = e_n
    At = [[bottom[i][j] for i in range(m)] for j in range(n)]
    rhs = [F0] * (n - 1) + [F1]
    sol = solve_linear(At, rhs)
    if sol is None:
        raise NotInProduct("last row e_n is not in the span of the bottom block")
    l, _ = sol
    # complete l to an invertible matrix: rows e_i for i != pivot index
    piv = max(i for i in range(m) if l[i])
    ainv = []
    for i in range(m):
        if i == m - 1:
            continue
        ainv.append([F1 if j == (i if i < piv else i + 1) else F0 for j in range(m)])
    ainv.append(list(l))
    a = inverse_rows(ainv)
    s = MatF.block_diag([MatF(a, cfg), MatF(a, cfg)])
    pm = s.inv() @ g
    return s, pm


def smith_rect(V: List[List[Fraction]], p: int):
    """U V W = D for an N x d matrix V of full column rank over Z_(p).

    U, W are invertible over Z_(p); D has p^exps[i] at (i, i) and zeros
    elsewhere.  Returns (U, exps, W) as lists of rows.
    """
    N = len(V)
    d = len(V[0]) if V else 0
    M = [list(r) for r in V]
    U = [[F1 if i == j else F0 for j in range(N)] for i in range(N)]
    W = [[F1 if i == j else F0 for j in range(d)] for i in range(d)]
    exps = []
    for t in range(d):
        cands = [(vq(M[i][j], p), i, j) for i in range(t, N) for j in range(t, d) if M[i][j]]
        if not cands:
            raise Singular("matrix does not have full column rank")
        v, i0, j0 = min(cands)
        M[t], M[i0] = M[i0], M[t]
        U[t], U[i0] = U[i0], U[t]
        _col_swap(M, t, j0)
        _col_swap(W, t, j0)
        c = (Fraction(p) ** v) / M[t][t]
        _col_scale(M, t, c)
        _col_scale(W, t, c)
        for i in range(N):
            if i != t and M[i][t]:
                f = M[i][t] / M[t][t]
                M[i] = [x - f * y for x, y in zip(M[i], M[t])]
                U[i] = [x - f * y for x, y in zip(U[i], U[t])]
        for j in range(t + 1, d):
            if M[t][j]:
                f = -M[t][j] / M[t][t]
                _col_op(M, j, t, f)
                _col_op(W, j, t, f)
        exps.append(v)
    return U, exps, W


def integral_affine_points(x0: List[Fraction], kernel: List[List[Fraction]], p: int):
    """Describe {x0 + sum t_i kernel_i integral} as base + span_o(basis).

    Returns (base, basis) with integral vectors, or None if no integral
    point exists.  ``basis`` is a Z_(p)-basis of the integral kernel lattice.
    """
    N = len(x0)
    if not kernel:
        return (list(x0), []) if all(x.denominator % p for x in x0) else None
    d = len(kernel)
    V = [[kernel[j][i] for j in range(d)] for i in range(N)]
    U, exps, _ = smith_rect(V, p)
    z = [sum((U[i][k] * x0[k] for k in range(N) if U[i][k] and x0[k]), F0) for i in range(N)]
    if any(z[i].denominator % p == 0 for i in range(d, N)):
        return None
    Uinv = inverse_rows(U)
    tail = [F0] * d + z[d:]
    base = [sum((Uinv[i][k] * tail[k] for k in range(N) if tail[k]), F0) for i in range(N)]
    basis = [[Uinv[i][j] for i in range(N)] for j in range(d)]
    return base, basis
