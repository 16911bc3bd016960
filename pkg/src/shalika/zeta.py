"""Zeta-series side: B_{m,k} cosets, series coefficients, Schwartz blocks,
the finite Fourier transform on matrix space and the averaging that turns
an S.P-extended form into a level-K(c) semi-invariant one.

Additive measure on M_n is self-dual: vol(M_n(o)) = 1.  Every volume
constant met along the way is carried in the reports.
"""
from __future__ import annotations

import itertools
import random
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Dict, List, Optional, Tuple, Union

import numpy as np

from . import _kernels
from .char_values import MultChar, chi_psi_eval, gauss_sum
from .cyclo import CycloLaurent, PhaseSum, cyclo_inverse, lcm, reduce_group_ring
from .errors import (BadParams, BudgetExceeded, Indeterminate,
                     NormalizationZero, WindowTooSmall)
from .matgroup import (F0, F1, MatF, _ring_Rc, _ring_Rc_star, det_rows, in_S, special_element,
                       u_vec)
from .mirabolic import (INDETERMINATE, FormEvaluator, IndeterminateValue, Node,
                        _DISPATCH, evaluate)
from .padic_core import FieldConfig, is_unit, residue, vq

Value = Union[CycloLaurent, IndeterminateValue]


def _ident(n: int) -> List[List[Fraction]]:
    return [[F1 if i == j else F0 for j in range(n)] for i in range(n)]


def _pow(p: int, k: int) -> Fraction:
    return Fraction(p) ** k


# ------------------------------------------------------------------------------
# B_{m,k} / B_{m,0}


def _row_offset(i: int, variant: str, lprime: int) -> int:
    return -lprime if (variant == "e_variant" and i == 0) else 0


def bmk_canonical(b: MatF, variant: str = "standard", lprime: int = 0) -> Tuple:
    """Canonical representative of b B_{m,0} (or b B^e_{m,0}) by column
    operations: diagonal scaled to p^{a_i}, then entry (i, j) reduced modulo
    p^{a_i} (times p^{-l'} in row 0 for the e-variant), bottom to top."""
    p = b.p
    m = b.n
    M = [list(r) for r in b.rows]
    for j in range(m):
        a = vq(M[j][j], p)
        u = M[j][j] / _pow(p, a)
        for i in range(m):
            M[i][j] /= u
        for i in range(j - 1, -1, -1):
            a_i = vq(M[i][i], p)
            off = _row_offset(i, variant, lprime)
            x = M[i][j]
            rep = _pow(p, off) * residue(x / _pow(p, off), p, a_i) if x else F0
            t = (x - rep) / M[i][i]
            if t:
                for k in range(m):
                    M[k][j] -= t * M[k][i]
    return tuple(tuple(r) for r in M)


def bmk_reps(m: int, k: int, p: int, variant: str = "standard", lprime: int = 0,
             budget: int = 200000) -> List[MatF]:
    """Right coset reps of B_{m,k}/B_{m,0}: upper triangular, diagonal
    p^{a_i} with sum a = k, entry (i, j) over a residue system mod p^{a_i}."""
    if m < 1:
        raise BadParams("m >= 1")
    if k < 0:
        raise BadParams("k >= 0")
    if variant not in ("standard", "e_variant"):
        raise BadParams(f"unknown variant {variant!r}")
    cfg = FieldConfig(p)
    out = []
    for a in _weak_compositions(k, m):
        slots = [(i, j) for i in range(m) for j in range(i + 1, m)]
        total = 1
        for i, _ in slots:
            total *= p ** a[i]
        if len(out) + total > budget:
            raise BudgetExceeded(f"more than {budget} representatives")
        for vals in itertools.product(*[range(p ** a[i]) for i, _ in slots]):
            M = [[F0] * m for _ in range(m)]
            for i in range(m):
                M[i][i] = _pow(p, a[i])
            for (i, j), v in zip(slots, vals):
                M[i][j] = _pow(p, _row_offset(i, variant, lprime)) * v
            out.append(MatF(M, cfg))
    return out


def _weak_compositions(total: int, parts: int):
    if parts == 1:
        yield (total,)
        return
    for a in range(total + 1):
        for rest in _weak_compositions(total - a, parts - 1):
            yield (a,) + rest


# ------------------------------------------------------------------------------
# series


@dataclass
class QSeries:
    """sum_k c_k t^k with t = q^{-s+1/2}; INDETERMINATE coefficients kept."""

    coeffs: List[Value]

    @property
    def kmax(self) -> int:
        return len(self.coeffs) - 1

    def indeterminate_mask(self) -> List[bool]:
        return [c is INDETERMINATE for c in self.coeffs]

    def to_json(self):
        return {
            "t_powers": [None if c is INDETERMINATE else c.to_json() for c in self.coeffs],
            "indeterminate_mask": self.indeterminate_mask(),
        }

    def is_one(self) -> bool:
        if any(self.indeterminate_mask()):
            return False
        return self.coeffs[0] == 1 and all(c.is_zero() for c in self.coeffs[1:])


def _call(ev, g: MatF) -> Value:
    if isinstance(ev, FormEvaluator):
        return evaluate(ev, g)
    try:
        return ev(g)
    except Indeterminate:
        return INDETERMINATE


def embed_diag(b: MatF, m: int) -> MatF:
    """diag(b, 1_m)."""
    n = b.n + m
    rows = _ident(n)
    for i in range(b.n):
        for j in range(b.n):
            rows[i][j] = b.rows[i][j]
    return MatF(rows, b.cfg)


def c_series(ev, m: int, kmax: int, p: int, variant: str = "standard", lprime: int = 0) -> QSeries:
    """c_k = sum over b in B_{m,k}/B_{m,0} of ev(diag(b, 1_m)), k <= kmax."""
    coeffs: List[Value] = []
    for k in range(kmax + 1):
        acc = CycloLaurent.zero()
        for b in bmk_reps(m, k, p, variant, lprime):
            v = _call(ev, embed_diag(b, m))
            if v is INDETERMINATE:
                acc = INDETERMINATE
                break
            acc = acc + v
        coeffs.append(acc)
    return QSeries(coeffs)


# ------------------------------------------------------------------------------
# averaging nodes and the dual form


@dataclass(frozen=True, eq=False)
class Average(Node):
    """g -> sum_i w_i child(g h_i).  When g h_i g^{-1} lies in S the term is
    read off as chi_psi(g h_i g^{-1}) child(g) (left S-equivariance)."""

    child: Node
    terms: Tuple[Tuple[MatF, CycloLaurent], ...]
    chi: Optional[MultChar] = None
    on_group = True

    @property
    def size(self):
        return self.child.size

    @property
    def right_integral_invariant(self):
        return False


@dataclass(frozen=True, eq=False)
class Scaled(Node):
    child: Node
    factor: CycloLaurent
    on_group = True

    @property
    def size(self):
        return self.child.size

    @property
    def right_integral_invariant(self):
        return False


@dataclass(frozen=True, eq=False)
class DualForm(Node):
    """g -> child(w_n tg^{-1} upsilon)."""

    child: Node
    upsilon: MatF
    on_group = True

    @property
    def size(self):
        return self.child.size

    @property
    def right_integral_invariant(self):
        return False


def _mul(a, b):
    n = len(a)
    return [[sum((a[i][k] * b[k][j] for k in range(n)), F0) for j in range(n)] for i in range(n)]


def _eval_average(ev, node: Average, rows, p):
    cfg = FieldConfig(p)
    g = MatF(rows, cfg)
    ginv = None
    total = PhaseSum()
    here = None
    for h, w in node.terms:
        if node.chi is not None:
            if ginv is None:
                ginv = g.inv()
            s = g @ h @ ginv
            if in_S(s):
                if here is None:
                    here = ev.phases(node.child, rows, p)
                total = total + PhaseSum.from_cyclo(w * chi_psi_eval(s, node.chi)) * here
                continue
        val = ev.phases(node.child, _mul(rows, h.rows), p)
        if not val.is_empty():
            total = total + PhaseSum.from_cyclo(w) * val
    return total


def _eval_scaled(ev, node: Scaled, rows, p):
    inner = ev.phases(node.child, rows, p)
    if inner.is_empty():
        return inner
    return inner * PhaseSum.from_cyclo(node.factor)


def _w(n: int) -> List[List[Fraction]]:
    return [[F1 if i + j == n - 1 else F0 for j in range(n)] for i in range(n)]


def _eval_dual(ev, node: DualForm, rows, p):
    cfg = FieldConfig(p)
    n = len(rows)
    g = MatF(rows, cfg)
    t_inv = g.inv().T
    pt = MatF(_w(n), cfg) @ t_inv @ node.upsilon
    return ev.phases(node.child, pt.rows, p)


_DISPATCH[Average] = _eval_average
_DISPATCH[Scaled] = _eval_scaled
_DISPATCH[DualForm] = _eval_dual


def upsilon(m: int, c: int, e: int, cfg: FieldConfig) -> MatF:
    """diag(p^l, p^e 1_{m-1}, w_m), l = c - (m-1) e."""
    return special_element("upsilon", cfg, m=m, e=e, c=c)


def dual_form(node: Node, m: int, c: int, e: int, p: int) -> DualForm:
    """J*(g) = J(w_n tg^{-1} upsilon); ``node`` should live on G_n (an
    SPExtend or an averaged form)."""
    return DualForm(node, upsilon(m, c, e, FieldConfig(p)))


# ------------------------------------------------------------------------------
# Schwartz blocks


SCHWARTZ_KINDS = ("char_of_ring", "chi0", "phi_chi_l", "phi_full", "phi_star_explicit")


@dataclass(frozen=True)
class SchwartzBlock:
    """A Schwartz function on matrix space.

    ``ring`` (for ``char_of_ring``) is ``R`` or ``R_star``.  ``c`` is the
    conductor integer; l = c - (m-1) e and l' = l - e.
    """

    kind: str
    m: int
    chi: MultChar
    c: int = 0
    ring: str = "R"

    def __post_init__(self):
        if self.kind not in SCHWARTZ_KINDS:
            raise BadParams(f"unknown block kind {self.kind!r}")
        if self.m < 1:
            raise BadParams("m >= 1")
        if self.c < self.m * self.chi.e:
            raise BadParams("needs c >= m e")

    @property
    def e(self) -> int:
        return self.chi.e

    @property
    def p(self) -> int:
        return self.chi.p

    @property
    def l(self) -> int:
        return self.c - (self.m - 1) * self.e

    @property
    def ambient(self) -> int:
        if self.kind == "chi0":
            return 1
        if self.kind == "phi_chi_l":
            return self.m
        return 2 * self.m

    def to_json(self):
        return {"kind": self.kind, "m": self.m, "chi": self.chi.to_json(), "c": self.c, "ring": self.ring}


def chi0(chi: MultChar, x: Fraction) -> CycloLaurent:
    if x == 0 or not is_unit(x, chi.p):
        return CycloLaurent.zero()
    return chi(x)


def _chi0_inv(chi: MultChar, x: Fraction) -> CycloLaurent:
    return chi0(chi.inverse(), x)


def _integral(vals, p, at_least: int = 0) -> bool:
    return all(x == 0 or vq(x, p) >= at_least for x in vals)


_SL_CACHE: Dict[Tuple[int, int, int], List[List[List[Fraction]]]] = {}


def sl_mod(r: int, p: int, N: int) -> List[List[List[Fraction]]]:
    """All of SL_r(Z/p^N) as integer matrices (brute force; r <= 2 or tiny N)."""
    key = (r, p, N)
    if key not in _SL_CACHE:
        if r == 0:
            out = [[]]
        elif r == 1 or N == 0:
            out = [_ident(r)]
        else:
            mod = p ** N
            out = []
            for vals in itertools.product(range(mod), repeat=r * r):
                M = [[Fraction(vals[i * r + j]) for j in range(r)] for i in range(r)]
                d = det_rows(M)
                if (d.numerator - d.denominator) % mod == 0:
                    out.append(M)
        _SL_CACHE[key] = out
    return _SL_CACHE[key]


def _phi_circ(chi: MultChar, x, star: bool) -> CycloLaurent:
    """Off-diagonal integral, diagonal through chi_0(p^e .) (or chi_0^{-1})."""
    p = chi.p
    r = len(x)
    for i in range(r):
        for j in range(r):
            if i != j and x[i][j] and vq(x[i][j], p) < 0:
                return CycloLaurent.zero()
    out = CycloLaurent.one()
    for i in range(r):
        v = _chi0_inv(chi, x[i][i]) if star else chi0(chi, x[i][i] * _pow(p, chi.e))
        if v.is_zero():
            return v
        out = out * v
    return out


def _sl_average(chi: MultChar, x, star: bool) -> CycloLaurent:
    """Average of phi_circ(x u) over SL_{r}(o), taken over SL_r(o/p^e)."""
    r = len(x)
    if r == 0:
        return CycloLaurent.one()
    p = chi.p
    floor = 0 if star else -chi.e
    if not _integral((v for row in x for v in row), p, floor):
        return CycloLaurent.zero()
    group = sl_mod(r, p, max(chi.e, 1))
    acc = CycloLaurent.zero()
    for u in group:
        acc = acc + _phi_circ(chi, _mul(x, u), star)
    return acc * Fraction(1, len(group))


def phi_chi_l(block: SchwartzBlock, v) -> CycloLaurent:
    """[[x, ty], [z, w]] -> Ch(y in p^{-l}, z in o) chi_0(p^e w) avg phi_circ(x u)."""
    chi, m, p = block.chi, block.m, block.p
    x = [row[:m - 1] for row in v[:m - 1]]
    y = [v[i][m - 1] for i in range(m - 1)]
    z = v[m - 1][:m - 1]
    w = v[m - 1][m - 1]
    if not _integral(y, p, -block.l) or not _integral(z, p):
        return CycloLaurent.zero()
    head = chi0(chi, w * _pow(p, chi.e))
    if head.is_zero():
        return head
    return head * _sl_average(chi, x, star=False)


def phi_chi_l_star(block: SchwartzBlock, d) -> CycloLaurent:
    """[[w, y], [tz, x]] -> Ch(y in o, z in p^l) chi_0^{-1}(w) avg phi_circ*(x u)."""
    chi, m, p = block.chi, block.m, block.p
    w = d[0][0]
    y = d[0][1:]
    z = [d[i][0] for i in range(1, m)]
    x = [row[1:] for row in d[1:]]
    if not _integral(y, p) or not _integral(z, p, block.l):
        return CycloLaurent.zero()
    head = _chi0_inv(chi, w)
    if head.is_zero():
        return head
    return head * _sl_average(chi, x, star=True)


def _blocks(rows, m):
    A = [r[:m] for r in rows[:m]]
    B = [r[m:] for r in rows[:m]]
    C = [r[:m] for r in rows[m:]]
    D = [r[m:] for r in rows[m:]]
    return A, B, C, D


def _assemble(A, B, C, D):
    return [list(a) + list(b) for a, b in zip(A, B)] + [list(c) + list(d) for c, d in zip(C, D)]


def _zeros(m):
    return [[F0] * m for _ in range(m)]


def schwartz_eval(block: SchwartzBlock, x) -> CycloLaurent:
    """Pointwise value of ``block`` at the matrix ``x`` (MatF or scalar)."""
    chi, m, p, e, c = block.chi, block.m, block.p, block.e, block.c
    cfg = FieldConfig(p)
    if block.kind == "chi0":
        val = x.rows[0][0] if isinstance(x, MatF) else Fraction(x)
        return chi0(chi, val)
    rows = x.rows if isinstance(x, MatF) else x
    if len(rows) != block.ambient:
        raise BadParams(f"block {block.kind} lives on {block.ambient}x{block.ambient} matrices")
    if block.kind == "phi_chi_l":
        return phi_chi_l(block, rows)
    one = CycloLaurent.one()
    zero = CycloLaurent.zero()
    if block.kind == "char_of_ring":
        test = _ring_Rc if block.ring == "R" else _ring_Rc_star
        return one if test(MatF(rows, cfg), c, e) else zero
    A, B, C, D = _blocks(rows, m)
    if block.kind == "phi_full":
        if not e:
            return one if _ring_Rc(MatF(rows, cfg), c, e) else zero
        if not _ring_Rc(MatF(_assemble(A, _zeros(m), C, D), cfg), c, e):
            return zero
        return phi_chi_l(block, B)
    # explicit dual
    l = block.l
    if not e:
        if not _ring_Rc_star(MatF(rows, cfg), c, e):
            return zero
        return one if _integral([B[j][0] for j in range(1, m)], p, l) else zero
    if not _integral([B[j][0] for j in range(1, m)], p, -l):
        return zero
    if not _ring_Rc_star(MatF(_assemble(A, B, C, _zeros(m)), cfg), c, e):
        return zero
    inner = phi_chi_l_star(block, D)
    if inner.is_zero():
        return inner
    return gauss_sum(chi, _pow(p, -e)) ** m * inner


# ------------------------------------------------------------------------------
# finite Fourier transform


@dataclass(frozen=True)
class LatticeWindow:
    """Functions sampled on p^{-A} M_n(o) / p^{B} M_n(o)."""

    A: int
    B: int

    def __post_init__(self):
        if self.A + self.B < 1:
            raise BadParams("window needs A + B >= 1")

    def dual(self) -> "LatticeWindow":
        return LatticeWindow(self.B, self.A)

    def to_json(self):
        return {"A": self.A, "B": self.B}


@dataclass
class Sampled:
    """Samples on a window: value at index I (coordinates of p^A y, row
    major, modulo p^{A+B}) is scale * sum_r arr[I, r] zeta_R^r."""

    n: int
    p: int
    window: LatticeWindow
    R: int
    scale: Fraction
    arr: np.ndarray
    volume_constant: Fraction = Fraction(1)

    @property
    def L(self) -> int:
        return self.p ** (self.window.A + self.window.B)

    def index(self, rows) -> Optional[Tuple[int, ...]]:
        """Index of the cell holding ``rows``, or None outside p^{-A} M_n(o)."""
        A = self.window.A
        p = self.p
        idx = []
        for row in rows:
            for v in row:
                if v and vq(v, p) < -A:
                    return None
                idx.append(residue(v * _pow(p, A), p, A + self.window.B) if v else 0)
        return tuple(idx)

    def at_index(self, idx) -> CycloLaurent:
        vec = self.arr[idx]
        if not vec.any():
            return CycloLaurent.zero()
        poly = reduce_group_ring(self.R, [int(c) for c in vec])
        return CycloLaurent(self.R, {0: poly}) * self.scale

    def at(self, x) -> CycloLaurent:
        rows = x.rows if isinstance(x, MatF) else x
        idx = self.index(rows)
        if idx is None:
            return CycloLaurent.zero()
        return self.at_index(idx)

    def points(self):
        """Index tuples and a representative matrix for every cell."""
        n, p, A = self.n, self.p, self.window.A
        L = self.L
        for idx in itertools.product(range(L), repeat=n * n):
            rows = [[Fraction(idx[i * n + j]) / _pow(p, A) for j in range(n)] for i in range(n)]
            yield idx, rows

    def reduced(self) -> np.ndarray:
        """Values in the reduced power basis, integer coefficients times scale."""
        mat = np.array([[int(c) for c in reduce_group_ring(self.R, [1 if k == r else 0 for k in range(self.R)])]
                        for r in range(self.R)], dtype=np.int64)
        return self.arr.reshape(-1, self.R) @ mat


def _window_points(n: int, p: int, win: LatticeWindow):
    L = p ** (win.A + win.B)
    for idx in itertools.product(range(L), repeat=n * n):
        yield idx, [[Fraction(idx[i * n + j]) / _pow(p, win.A) for j in range(n)] for i in range(n)]


def probe_window(fn: Callable, n: int, p: int, win: LatticeWindow, rng: random.Random,
                 trials: int = 40) -> None:
    """Raise WindowTooSmall when ``fn`` is visibly nonzero outside p^{-A}
    or not constant on cells of p^B."""
    L = p ** (win.A + win.B)
    for _ in range(trials):
        idx = [rng.randrange(L) for _ in range(n * n)]
        base = [[Fraction(idx[i * n + j]) / _pow(p, win.A) for j in range(n)] for i in range(n)]
        i, j = rng.randrange(n), rng.randrange(n)
        out = [list(r) for r in base]
        out[i][j] = _pow(p, -win.A - 1) * rng.randrange(1, p) + base[i][j]
        if not fn(out).is_zero():
            raise WindowTooSmall(f"support leaks past p^{-win.A} at entry ({i},{j})")
        moved = [list(r) for r in base]
        moved[i][j] += _pow(p, win.B) * rng.randrange(1, p ** 2)
        if fn(moved) != fn(base):
            raise WindowTooSmall(f"function not constant on p^{win.B} cells at entry ({i},{j})")


def sample(fn: Callable, n: int, p: int, win: LatticeWindow, seed: int = 0, probe: bool = True) -> Sampled:
    """Sample ``fn`` (rows -> CycloLaurent with no X powers) on the window."""
    if probe:
        probe_window(fn, n, p, win, random.Random(seed))
    L = p ** (win.A + win.B)
    vals = {}
    R = L
    for idx, rows in _window_points(n, p, win):
        v = fn(rows)
        if v.is_zero():
            continue
        if set(v.terms) != {0}:
            raise BadParams("sampled functions must be free of X powers")
        vals[idx] = v
        R = lcm(R, v.M)
    den = 1
    lifted = {}
    for idx, v in vals.items():
        poly = v.lift(R).terms[0]
        lifted[idx] = poly
        for c in poly:
            den = lcm(den, c.denominator)
    arr = np.zeros((L,) * (n * n) + (R,), dtype=np.int64)
    for idx, poly in lifted.items():
        for r, c in enumerate(poly):
            if c:
                arr[idx + (r,)] = int(c * den)
    return Sampled(n, p, win, R, Fraction(1, den), arr)


def sample_block(block: SchwartzBlock, win: LatticeWindow, seed: int = 0) -> Sampled:
    return sample(lambda rows: schwartz_eval(block, rows), block.ambient, block.p, win, seed)


def fourier(f: Sampled, kernel: Optional[str] = None) -> Sampled:
    """f^#(x) = sum over window cells y of f(y) psi(tr(y x)) vol(cell).

    The output lives on the dual window; with the self-dual measure the
    double transform is x -> f(-x) exactly (volume constant 1)."""
    n, p = f.n, f.p
    B = f.window.B
    L = f.L
    s = f.R // L
    T = _kernels.full_dft(f.arr, n * n, L, s, kernel)
    # axis (i, j) of y pairs with entry (j, i) of x
    perm = [j * n + i for i in range(n) for j in range(n)] + [n * n]
    T = np.ascontiguousarray(np.transpose(T, perm))
    return Sampled(n, p, f.window.dual(), f.R, f.scale * _pow(p, -B * n * n), T,
                   f.volume_constant)


def inversion_check(f: Sampled, kernel: Optional[str] = None) -> Dict:
    """Compare f^## with x -> f(-x) on every window cell, exactly."""
    g = fourier(fourier(f, kernel), kernel)
    L = f.L
    n2 = f.n * f.n
    neg = f.arr
    for ax in range(n2):
        neg = np.take(neg, [(-i) % L for i in range(L)], axis=ax)
    lhs = g.reduced() * g.scale.numerator * f.scale.denominator
    rhs = Sampled(f.n, f.p, f.window, f.R, f.scale, neg).reduced() * f.scale.numerator * g.scale.denominator
    bad = int(np.count_nonzero((lhs != rhs).any(axis=1)))
    return {"cells": L ** n2, "mismatches": bad, "volume_constant": "1",
            "status": "PASS" if bad == 0 else "FAIL"}


def parseval_check(f: Sampled, kernel: Optional[str] = None) -> Dict:
    """For an indicator f: sum |f^#|^2 vol = sum |f|^2 vol, checked on the
    rational value sum f^#(x) f^#(-x) (real for indicators of symmetric sets)."""
    g = fourier(f, kernel)
    vol_f = Fraction(int(np.count_nonzero(f.arr.any(axis=-1)))) * _pow(f.p, -f.window.B * f.n * f.n)
    total = CycloLaurent.zero()
    L = g.L
    n2 = f.n * f.n
    for idx in itertools.product(range(L), repeat=n2):
        a = g.at_index(idx)
        if a.is_zero():
            continue
        total = total + a * a.conj_root()
    total = total * _pow(f.p, -g.window.B * n2)
    return {"lhs": str(vol_f), "rhs": str(total.rational_value()),
            "status": "PASS" if total == vol_f else "FAIL"}


# ------------------------------------------------------------------------------
# the dual Schwartz function and its explicit form


def default_window(block: SchwartzBlock) -> LatticeWindow:
    """Support of phi_c lies in p^{-A} and it is constant on p^B cells."""
    e, l, m = block.e, block.l, block.m
    A = e if m == 1 else max(e, l)
    return LatticeWindow(A, max(l, 1))


def _try_inverse(z: CycloLaurent) -> Optional[CycloLaurent]:
    try:
        return cyclo_inverse(z)
    except (ValueError, StopIteration, ZeroDivisionError):
        return None


def _constant_json(c: CycloLaurent):
    r = c.rational_value()
    return str(r) if r is not None else c.to_json()


def phi_star(chi: MultChar, m: int, c: int, window: Optional[LatticeWindow] = None,
             seed: int = 0, off_support: int = 100, kernel: Optional[str] = None) -> Dict:
    """Fourier-transform phi_c, substitute x -> upsilon^{-1} tx w_n and compare
    with the explicit formula on every cell of the dual window plus
    ``off_support`` random points where the explicit formula vanishes."""
    p = chi.p
    cfg = FieldConfig(p)
    n = 2 * m
    block = SchwartzBlock("phi_full", m, chi, c)
    explicit = SchwartzBlock("phi_star_explicit", m, chi, c)
    win = window or default_window(block)
    f = sample_block(block, win, seed)
    fs = fourier(f, kernel)
    ups = upsilon(m, c, chi.e, cfg)
    w = MatF(_w(n), cfg)
    winv = w.inv()

    def lhs_at(x: MatF) -> CycloLaurent:
        y = ups.inv() @ x.T @ w
        return fs.at(y.rows)

    const = None
    checked = support = bad = 0
    residuals = []
    for idx, yrows in _window_points(n, p, fs.window):
        left = fs.at_index(idx)
        # x with upsilon^{-1} tx w = y
        x = (ups @ MatF(yrows, cfg) @ winv).T
        right = schwartz_eval(explicit, x)
        checked += 1
        if right.is_zero() and left.is_zero():
            continue
        support += 1
        if const is None and not right.is_zero():
            inv = _try_inverse(right)
            if inv is not None:
                const = left * inv
        if const is None or left != const * right:
            bad += 1
            if len(residuals) < 5:
                residuals.append({"x": [[str(v) for v in r] for r in x.rows]})
    rng = random.Random(seed + 1)
    off_checked = off_bad = 0
    tries = 0
    while off_checked < off_support and tries < 50 * off_support:
        tries += 1
        rows = [[_pow(p, rng.randint(-win.B - 1, win.A + 1)) * rng.randrange(1, p ** 2)
                 if rng.random() < 0.8 else F0 for _ in range(n)] for _ in range(n)]
        x = MatF(rows, cfg)
        if not schwartz_eval(explicit, x).is_zero():
            continue
        off_checked += 1
        if not lhs_at(x).is_zero():
            off_bad += 1
    status = "PASS" if const is not None and bad == 0 and off_bad == 0 else "FAIL"
    return {
        "p": p, "e": chi.e, "m": m, "c": c, "l": block.l,
        "window": win.to_json(),
        "constant": _constant_json(const) if const is not None else None,
        "cells": checked, "support_cells": support, "mismatches": bad,
        "off_support_checked": off_checked, "off_support_nonzero": off_bad,
        "residuals": residuals, "status": status,
    }


# ------------------------------------------------------------------------------
# averaging construction


def _unit_reps(p: int, N: int) -> List[int]:
    return [u for u in range(1, p ** N) if u % p] if N else [1]


def _block_diag(top, bottom, cfg: FieldConfig) -> MatF:
    m = len(top)
    rows = [list(top[i]) + [F0] * m for i in range(m)]
    rows += [[F0] * m + list(bottom[i]) for i in range(m)]
    return MatF(rows, cfg)


def delta_m(m: int, e: int, p: int) -> List[Fraction]:
    d = special_element("delta_m", FieldConfig(p), m=m, e=e)
    return [d.rows[i][i] for i in range(m)]


def averaging_stages(base: Node, chi: MultChar, m: int, c: int, b_depth: Optional[int] = None) -> Node:
    """The four stages (t-average, translate by diag(1, delta^{-1}), block
    average, b-average) as a node DAG over ``base``.  ``b_depth`` is the
    modulus exponent of the final b-average (default n - 2)."""
    from .mirabolic import Translate

    p, e = chi.p, chi.e
    cfg = FieldConfig(p)
    n = 2 * m
    l = c - (m - 1) * e
    chi_inv = chi.inverse()
    one_m = _ident(m)
    # stage 1: t in prod (o / p^{(m-i)e})^x, weight chi(prod t)^{-1}
    terms = []
    ranges = [_unit_reps(p, (m - 1 - i) * e) for i in range(m - 1)]
    count = 1
    for r in ranges:
        count *= len(r)
    for ts in itertools.product(*ranges):
        x = [_pow(p, -(m - 1 - i) * e) * t for i, t in enumerate(ts)]
        v = u_vec(x, cfg) if m > 1 else MatF([[F1]], cfg)
        prod = Fraction(1)
        for t in ts:
            prod *= t
        w = chi_inv(prod) * Fraction(1, count) if chi.e else CycloLaurent.const(Fraction(1, count))
        terms.append((_block_diag(one_m, v.rows, cfg), w))
    stage1 = Average(base, tuple(terms), chi)
    # stage 2
    dinv = [[F0] * m for _ in range(m)]
    for i, d in enumerate(delta_m(m, e, p)):
        dinv[i][i] = 1 / d
    stage2 = Translate(stage1, _block_diag(one_m, dinv, cfg))
    # stage 3: u in SL_{m-1}(o / p^{(n-4)e}), x in (o/p^{(m-2)e})^{m-1}, y in (p^l / p^c)^{m-1}
    terms = []
    us = sl_mod(m - 1, p, (n - 4) * e) if m > 1 else [[]]
    xs = list(itertools.product(range(p ** ((m - 2) * e if m > 1 else 0)), repeat=m - 1))
    ys = list(itertools.product(range(p ** max(c - l, 0)), repeat=m - 1))
    total = len(us) * len(xs) * len(ys)
    for u in us:
        for xv in xs:
            for yv in ys:
                lower = _ident(m)
                for i in range(m - 1):
                    for j in range(m - 1):
                        lower[i][j] = u[i][j]
                    lower[i][m - 1] = Fraction(xv[i])
                    lower[m - 1][i] = _pow(p, l) * yv[i]
                terms.append((_block_diag(one_m, lower, cfg), CycloLaurent.const(Fraction(1, total))))
    stage3 = Average(stage2, tuple(terms), chi)
    # stage 4: b in M_m(o) / M_m(p^{depth})
    depth = n - 2 if b_depth is None else b_depth
    terms = []
    size = p ** (depth * m * m)
    for vals in itertools.product(range(p ** depth), repeat=m * m):
        rows = _ident(n)
        for i in range(m):
            for j in range(m):
                rows[i][m + j] = Fraction(vals[i * m + j])
        terms.append((MatF(rows, cfg), CycloLaurent.const(Fraction(1, size))))
    return Average(stage3, tuple(terms), chi)


def j_pi_average(base: Node, chi: MultChar, m: int, c: int, b_depth: Optional[int] = None,
                 policy=None) -> FormEvaluator:
    """Level-K(c) semi-invariant form built from ``base`` (an S.P-extended
    form on G_n), normalized to 1 at 1_n.  Unramified chi: ``base`` itself,
    normalized."""
    if c < m * chi.e:
        raise BadParams("needs c >= m e")
    node = base if not chi.e else averaging_stages(base, chi, m, c, b_depth)
    ev = FormEvaluator(node, policy)
    at_one = evaluate(ev, MatF.identity(2 * m, FieldConfig(chi.p)))
    if at_one is INDETERMINATE or at_one.is_zero():
        raise NormalizationZero(f"value at 1_n is {at_one!r}")
    inv = _try_inverse(at_one)
    if inv is None:
        raise NormalizationZero("value at 1_n is not invertible as an X-monomial")
    out = FormEvaluator(Scaled(node, inv), ev.trunc, ev.measure)
    out.cache = ev.cache
    return out


def semi_invariance_check(ev: FormEvaluator, chi: MultChar, m: int, c: int, trials: int = 5,
                          seed: int = 0, digits: int = 1, shape: str = "block") -> Dict:
    """J(k) against chi(det d_k) J(1_n) for random k in K(c); trials whose
    values are Indeterminate are excluded and counted.  ``shape`` is
    ``general`` or ``block`` (lower-left block zero, which keeps most
    translates inside S.P)."""
    from .matgroup import in_KfrakC

    p = chi.p
    cfg = FieldConfig(p)
    n = 2 * m
    rng = random.Random(seed)
    base = evaluate(ev, MatF.identity(n, cfg))
    done = indeterminate = bad = 0
    tries = 0
    while done + indeterminate < trials and tries < 200 * trials:
        tries += 1
        k = _random_kc(m, c, chi.e, cfg, rng, digits, shape)
        if not in_KfrakC(k, c, chi.e):
            continue
        v = evaluate(ev, k)
        if v is INDETERMINATE or base is INDETERMINATE:
            indeterminate += 1
            continue
        d = MatF([r[m:] for r in k.rows[m:]], cfg).det()
        done += 1
        if v != chi(d) * base if chi.e else v != base:
            bad += 1
    return {"checked": done, "indeterminate": indeterminate, "mismatches": bad,
            "status": "PASS" if bad == 0 and done else ("INDETERMINATE" if not done else "FAIL")}


def _random_kc(m, c, e, cfg, rng, digits, shape="general"):
    p = cfg.p
    n = 2 * m
    l = c - (m - 1) * e
    rows = [[Fraction(rng.randrange(p ** digits)) for _ in range(n)] for _ in range(n)]
    if shape == "block":
        for i in range(m):
            for j in range(m):
                rows[m + i][j] = F0
    for i in range(m):
        for j in range(m):
            need = e if i < m - 1 else l
            rows[m + i][j] *= _pow(p, need)
    for j in range(m - 1):
        rows[n - 1][m + j] *= _pow(p, l)
    return MatF(rows, cfg)
