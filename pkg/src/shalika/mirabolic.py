"""Evaluators for functions on mirabolic groups.

A function is described by an immutable tree of nodes (``XiLeaf``,
``PhiLift``, ``Theta``, ``XiOp``, ``Translate``, ``SPExtend``, ``ClosedForm``)
and evaluated pointwise by ``evaluate``.  Integrals over F and over
P_1 \\ G_1 = F^x are realized as finite sums on residue grids whose mesh is
certified from the point (conjugation bounds), and whose radius grows until
``shell_depth`` consecutive boundary shells sum to exactly zero.

Internally values are ``PhaseSum`` objects (unreduced group-ring sums); the
public entry points reduce to ``CycloLaurent``.

Only level 4 integrals are evaluated (inner block size 1); larger towers can
be built as trees but raise BadParams when a level 6 integral is reached.
"""
from __future__ import annotations

import random
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Dict, Optional, Sequence, Tuple

from .char_values import MultChar, chi_psi_eval, unit_shell_sum
from .cyclo import CycloLaurent, PhaseSum
from .errors import (
    BadParams,
    Indeterminate,
    NotInProduct,
    NotInSubgroup,
    TruncationCapExceeded,
)
from .matgroup import (
    F0,
    F1,
    MatF,
    det_rows,
    hnf_right,
    in_mirabolic,
    in_S_circ,
    integral_affine_points,
    inverse_rows,
    iwasawa_upper,
    factor_s_p,
    reduce_mod,
    solve_linear,
    special_element,
)
from .padic_core import FieldConfig, frac_part, residue, vq

Rows = Tuple[Tuple[Fraction, ...], ...]


# ------------------------------------------------------------------------------
# policies


@dataclass(frozen=True)
class TruncationPolicy:
    """Radius R of the first accepted ball, boundary shells checked beyond it,
    the minimal mesh L, and the largest radius tried before giving up."""

    radius: int = 2
    shell_depth: int = 2
    mesh: int = 1
    radius_cap: int = 8

    def __post_init__(self):
        if self.radius < 1 or self.mesh < 1 or self.shell_depth < 1:
            raise BadParams("radius, mesh and shell depth must be >= 1")
        if self.radius_cap < self.radius:
            raise BadParams("radius_cap must be >= radius")

    @classmethod
    def default(cls, m: int = 1, e: int = 0, slack: int = 0) -> "TruncationPolicy":
        return cls(radius=2 + m * e + slack, shell_depth=2, mesh=1,
                   radius_cap=2 + m * e + slack + 6)

    def to_json(self):
        return {"radius": self.radius, "shell_depth": self.shell_depth, "mesh": self.mesh,
                "radius_cap": self.radius_cap}


MEASURE_TAGS = ("pk_one", "lebesgue_o_one")


@dataclass(frozen=True)
class CosetMeasure:
    """Normalization of the invariant measure on P_m \\ G_m.

    ``pk_one``: vol(P_m \\ P_m K_m) = 1.  ``lebesgue_o_one``: the invariant
    measure agreeing with Lebesgue measure (vol(o^m) = 1) on primitive last
    rows, i.e. (1 - q^{-m}) times pk_one.
    """

    tag: str = "pk_one"

    def __post_init__(self):
        if self.tag not in MEASURE_TAGS:
            raise BadParams(f"unknown measure {self.tag!r}")

    def factor(self, m: int, q: int) -> Fraction:
        if self.tag == "pk_one":
            return F1
        return 1 - Fraction(1, q ** m)


# ------------------------------------------------------------------------------
# nodes


class Node:
    """Base class; ``size`` is n for a function on P_n."""

    memo = False
    # True when the function lives on all of G_n rather than on P_n
    on_group = False

    @property
    def size(self) -> int:
        raise NotImplementedError

    @property
    def right_integral_invariant(self) -> bool:
        """True when the function is right P_n(o)-invariant (memo keys use it)."""
        return True


@dataclass(frozen=True, eq=False)
class XiLeaf(Node):
    n: int

    def __post_init__(self):
        if self.n < 1:
            raise BadParams("n >= 1")

    @property
    def size(self):
        return self.n


@dataclass(frozen=True, eq=False)
class PhiLift(Node):
    child: Node
    l: int = 0

    def __post_init__(self):
        if self.l != 0:
            raise BadParams("only the level 0 lift is evaluated")

    @property
    def size(self):
        return self.child.size + 2


@dataclass(frozen=True, eq=False)
class Theta(Node):
    """theta^chi applied to ``child`` (a function on P_{n+2}).

    ``chi`` is the character in the integrand chi(det A)^{-1}; the tower uses
    nu chi, i.e. ``chi.twist_nu(1)``.  ``method``: ``generic`` sums the child
    over the (A, x) grid; ``reduced`` needs the child to be xi_4 and uses
    minors plus unit-shell Gauss sums; ``auto`` picks ``reduced`` when it
    applies.
    """

    child: Node
    chi: MultChar
    method: str = "auto"
    memo = True

    def __post_init__(self):
        if self.method not in ("auto", "generic", "reduced"):
            raise BadParams(f"unknown theta method {self.method!r}")
        if self.child.size % 2:
            raise BadParams("theta acts on functions on P_n, n even")

    @property
    def size(self):
        return self.child.size

    @property
    def inner_m(self) -> int:
        return self.size // 2 - 1

    def resolved_method(self) -> str:
        if self.method != "auto":
            return self.method
        return "reduced" if _is_xi4(self.child) else "generic"


@dataclass(frozen=True, eq=False)
class XiOp(Node):
    child: Node
    memo = True

    @property
    def size(self):
        return self.child.size


@dataclass(frozen=True, eq=False)
class Translate(Node):
    child: Node
    g: MatF
    side: str = "right"

    def __post_init__(self):
        if self.side not in ("left", "right"):
            raise BadParams("side is 'left' or 'right'")
        if self.g.n != self.child.size:
            raise BadParams("translation matrix has the wrong size")

    @property
    def size(self):
        return self.child.size

    @property
    def right_integral_invariant(self):
        return self.side == "left" and self.child.right_integral_invariant

    @property
    def on_group(self):
        return self.child.on_group


@dataclass(frozen=True, eq=False)
class SPExtend(Node):
    child: Node
    chi: MultChar
    on_group = True

    @property
    def size(self):
        return self.child.size

    @property
    def right_integral_invariant(self):
        return False


@dataclass(frozen=True, eq=False)
class ClosedForm(Node):
    """``value`` times xi_n."""

    n: int
    chi: Optional[MultChar]
    value: CycloLaurent

    @property
    def size(self):
        return self.n


def _is_xi4(node: Node) -> bool:
    if isinstance(node, XiLeaf) and node.n == 4:
        return True
    return (isinstance(node, PhiLift) and isinstance(node.child, XiLeaf)
            and node.child.n == 2)


# ------------------------------------------------------------------------------
# evaluator


class IndeterminateValue:
    """Marker for values the S.P reduction could not determine."""

    _inst = None

    def __new__(cls):
        if cls._inst is None:
            cls._inst = super().__new__(cls)
        return cls._inst

    def __repr__(self):
        return "INDETERMINATE"

    def to_json(self):
        return "indeterminate"


INDETERMINATE = IndeterminateValue()


class FormEvaluator:
    """A node tree plus its memo cache and truncation settings."""

    def __init__(self, node: Node, policy: Optional[TruncationPolicy] = None,
                 measure: Optional[CosetMeasure] = None):
        self.node = node
        self.trunc = policy or TruncationPolicy()
        self.measure = measure or CosetMeasure()
        self.cache: Dict[tuple, PhaseSum] = {}
        self.stats = {"evals": 0, "hits": 0, "max_radius": 0}

    @property
    def size(self):
        return self.node.size

    def __call__(self, point: MatF):
        return evaluate(self, point)

    # internal -----------------------------------------------------------
    def phases(self, node: Node, rows: Rows, p: int) -> PhaseSum:
        key = None
        if node.memo:
            key = (id(node), _point_key(rows, p) if node.right_integral_invariant else rows)
            hit = self.cache.get(key)
            if hit is not None:
                self.stats["hits"] += 1
                return hit
        self.stats["evals"] += 1
        out = _DISPATCH[type(node)](self, node, rows, p)
        if key is not None:
            self.cache[key] = out
        return out


def evaluate(ev: FormEvaluator, point: MatF, policy: Optional[TruncationPolicy] = None):
    """Value of the evaluator's function at ``point`` as a CycloLaurent.

    Returns ``INDETERMINATE`` when an SPExtend node meets a point outside
    S.P_n.
    """
    if not isinstance(ev, FormEvaluator):
        ev = FormEvaluator(ev, policy)
    elif policy is not None and policy != ev.trunc:
        ev = FormEvaluator(ev.node, policy, ev.measure)
    if point.n != ev.size:
        raise BadParams(f"point has size {point.n}, evaluator expects {ev.size}")
    if not ev.node.on_group and not in_mirabolic(point):
        raise NotInSubgroup("point is not in the mirabolic subgroup")
    try:
        return ev.phases(ev.node, point.rows, point.p).value()
    except Indeterminate:
        return INDETERMINATE


def _point_key(rows: Rows, p: int):
    """Canonical representative of g P_n(o): HNF of the top-left block and
    the last column reduced modulo its lattice."""
    n = len(rows)
    if n == 1:
        return ()
    cfg = FieldConfig(p)
    G = MatF([r[:n - 1] for r in rows[:n - 1]], cfg)
    H = hnf_right(G).rows
    v = [rows[i][n - 1] for i in range(n - 1)]
    for j in range(n - 1):
        a = vq(H[j][j], p)
        r = reduce_mod(v[j], a, p)
        t = (v[j] - r) / H[j][j]
        if t:
            for i in range(j, n - 1):
                v[i] -= t * H[i][j]
    return (H, tuple(v))


# ------------------------------------------------------------------------------
# xi_n


def _xi_arg(rows, p: int) -> Optional[Fraction]:
    """psi argument of xi_n at a mirabolic point, or None where xi_n vanishes."""
    n = len(rows)
    if n == 1:
        return F0
    G = MatF([r[:n - 1] for r in rows[:n - 1]], FieldConfig(p))
    b = iwasawa_upper(G).rows
    if any(b[i][i] != 1 for i in range(n - 1)):
        return None
    s = rows[n - 2][n - 1]
    for i in range(n - 2):
        s += b[i][i + 1]
    return s


def xi_eval(n: int, g: MatF) -> CycloLaurent:
    """xi_n(g): psi_N of the unipotent Iwasawa part when the torus part is
    trivial, else 0."""
    if g.n != n:
        raise BadParams("size mismatch")
    if not in_mirabolic(g):
        raise NotInSubgroup("g is not in P_n")
    r = _xi_arg(g.rows, g.p)
    if r is None:
        return CycloLaurent.zero()
    r = frac_part(r, g.p)
    return CycloLaurent.root(r.numerator, r.denominator)


def _eval_xi(ev, node: XiLeaf, rows, p):
    r = _xi_arg(rows, p)
    return PhaseSum() if r is None else PhaseSum.single(frac_part(r, p))


def _eval_closed(ev, node: ClosedForm, rows, p):
    r = _xi_arg(rows, p)
    if r is None:
        return PhaseSum()
    return PhaseSum.from_cyclo(node.value).scaled(shift_r=frac_part(r, p))


# ------------------------------------------------------------------------------
# the lift phi^(0)


def _unit_col(row, cols, p):
    """Largest index in ``cols`` with a unit entry, or None if the row is not
    primitive on those columns."""
    if any(row[j].denominator % p == 0 for j in cols):
        return None
    for j in reversed(cols):
        x = row[j]
        if x and x.numerator % p:
            return j
    return None


def _clear_row(M, r, cols, j):
    """Integral column operations on ``cols`` turning row r into e_r there."""
    if j != r:
        for row in M:
            row[j], row[r] = row[r], row[j]
    piv = M[r][r]
    if piv != 1:
        inv = 1 / piv
        for row in M:
            row[r] *= inv
    for c in cols:
        if c != r and M[r][c]:
            f = M[r][c]
            for row in M:
                if row[r]:
                    row[c] -= f * row[r]


def phi_lift_split(rows, p: int):
    """For p in u g' P_{n+2}(o) return (psi argument, g'); None if p is not
    in the support of the lift."""
    N = len(rows)
    n = N - 2
    M = [list(r) for r in rows]
    r = N - 2
    cols = list(range(N - 1))
    j = _unit_col(M[r], cols, p)
    if j is None:
        return None
    _clear_row(M, r, cols, j)
    z = M[r][N - 1]
    if n == 0:
        return z, ()
    cols = list(range(n))
    j = _unit_col(M[n - 1], cols, p)
    if j is None:
        return None
    _clear_row(M, n - 1, cols, j)
    x = M[n - 1][n]
    g = tuple(tuple(M[i][:n]) for i in range(n))
    return x + z, g


def _eval_phi(ev, node: PhiLift, rows, p):
    split = phi_lift_split(rows, p)
    if split is None:
        return PhaseSum()
    arg, g = split
    if not g:
        return PhaseSum.single(frac_part(arg, p))
    inner = ev.phases(node.child, g, p)
    return inner.scaled(shift_r=frac_part(arg, p))


# ------------------------------------------------------------------------------
# theta at level 4


def _eta4(rows):
    """eta = diag(h_3, 1) permutes rows 2 and 3."""
    return (rows[0], rows[2], rows[1], rows[3])


def _minval(rows, p):
    return min((vq(x, p) for r in rows for x in r if x), default=0)


def _kappa(rows, p) -> int:
    """Smallest k with g^{-1} (1 + p^k M_n(o)) g inside M_n(o)."""
    inv = inverse_rows(rows)
    return int(-_minval(rows, p) - _minval(inv, p))


def _wedge(a, b, S):
    i, j = S
    return a[i] * b[j] - a[j] * b[i]


_PAIRS3 = ((0, 1), (0, 2), (1, 2))


def _theta_center(G, p):
    """Valuation of A and the x-ball where the level 4 integrand can live."""
    G1, G2, G3 = G
    w = [(_wedge(G2, G3, S), S) for S in _PAIRS3]
    mo = min(vq(x, p) for x, _ in w if x)
    a0 = -mo
    nz = [(vq(G2[j], p), j) for j in range(3) if G2[j]]
    c = None
    xs = None
    if nz:
        v, j0 = min(nz)
        c = -v
        xs = -G3[j0] / G2[j0]
        for j in range(3):
            if (xs * G2[j] + G3[j]).denominator % p == 0:
                xs = None
                break
    return a0, w, c, xs


def _chi_inv_weight(chi_inv: MultChar, a: int, p: int):
    """(weight, x exponent) of chi_inv(varpi^a)."""
    return Fraction(p) ** (-chi_inv.nu * a), chi_inv.x_power * a


def _theta4_reduced(ev, node: Theta, rows, p) -> PhaseSum:
    g = _eta4(rows)
    G = [g[i][:3] for i in range(3)]
    w = [g[i][3] for i in range(3)]
    G1, G2, G3 = G
    chi = node.chi
    e = chi.e
    a0, w23, c, xs = _theta_center(G, p)
    if 2 * a0 + vq(det_rows(G), p) != 0 or xs is None:
        return PhaseSum()
    W, S = min(((x, S) for x, S in w23 if x), key=lambda t: vq(t[0], p))
    gamma = w[1] + _wedge(G1, G2, S) / W
    beta = w[2] + _wedge(G1, G3, S) / W
    em = max(1, e)
    L = c + em
    if gamma and vq(gamma, p) < -L:
        return PhaseSum()
    pa0 = Fraction(p) ** a0
    step = Fraction(p) ** c
    vol = Fraction(p) ** (-L)
    acc = PhaseSum()
    for t in range(p ** em):
        x = xs + step * t
        row3 = [x * G2[j] + G3[j] for j in range(3)]
        j = _unit_col(row3, [0, 1, 2], p)
        if j is None:
            continue
        b = pa0 * G2[j] / row3[j]
        ob = vq(b, p)
        r = frac_part(gamma * x + beta, p)
        if not e:
            if ob >= 0:
                acc.add_term(r, vol)
            elif ob == -1:
                acc.add_term(r, -vol / (p - 1))
            continue
        if ob != -e:
            continue
        ub = b * Fraction(p) ** e
        jj, Mc = chi.unit_index(ub)
        acc.add_term(r + Fraction(jj, Mc), vol)
    if acc.is_empty():
        return acc
    chi_inv = chi.inverse()
    wt, xe = _chi_inv_weight(chi_inv, a0, p)
    wt *= ev.measure.factor(1, p)
    out = acc.scaled(wt, shift_x=xe)
    if e:
        g0 = unit_shell_sum(chi_inv, Fraction(1, p ** e)) * Fraction(p, p - 1)
        out = out * PhaseSum.from_cyclo(g0)
    return out


def _grid(r: int, L: int, p: int):
    """All offsets in p^{-r} o / p^L o with their levels."""
    scale = Fraction(1, p ** r)
    for t in range(p ** (r + L)):
        if t == 0:
            lev = 0
        else:
            k = 0
            tt = t
            while tt % p == 0 and k < r:
                tt //= p
                k += 1
            lev = max(0, r - k)
        yield t * scale, lev


def _run_shells(ev, shell_fn: Callable[[int], PhaseSum], what: str) -> PhaseSum:
    """Sum shells r = 0, 1, ... until ``shell_depth`` consecutive shells
    beyond the policy radius vanish exactly."""
    pol = ev.trunc
    total = PhaseSum()
    zeros = 0
    r = 0
    while True:
        sh = shell_fn(r)
        if sh.is_empty() or sh.value().is_zero():
            zeros += 1
        else:
            zeros = 0
            total.add(sh)
        if r >= pol.radius + pol.shell_depth and zeros >= pol.shell_depth:
            ev.stats["max_radius"] = max(ev.stats["max_radius"], r - pol.shell_depth)
            return total
        if r >= pol.radius_cap + pol.shell_depth:
            raise TruncationCapExceeded(
                f"{what}: boundary shells still nonzero at radius {r - pol.shell_depth}")
        r += 1


def _theta4_generic(ev, node: Theta, rows, p) -> PhaseSum:
    g = _eta4(rows)
    chi = node.chi
    chi_inv = chi.inverse()
    e = chi.e
    # M2(A(1+d), (1+d)x) = M2(A, x) diag(1+d, 1+d, 1, 1) and
    # M2(A, x+t) = M2(A, x) M2(1, t); conjugating back by g must stay integral.
    ginv = inverse_rows(g)
    gcols = list(zip(*ginv))
    kA = max(-_minval([gcols[i]], p) - _minval([g[i]], p) for i in (0, 1))
    kX = -_minval([gcols[2]], p) - _minval([g[1]], p)
    LA = max(e, 1, kA)
    LX = max(kX, 0)
    a_c, _, _, xs = _theta_center([g[i][:3] for i in range(3)], p)
    x_c = xs if xs is not None else F0
    units = [u for u in range(1, p ** LA) if u % p]
    u_phase = [(u, chi_inv.unit_index(Fraction(u))) for u in units]
    vol = Fraction(1, len(units)) * Fraction(1, p ** LX) * ev.measure.factor(1, p)
    R0, R1, R2, R3 = g
    child = node.child

    def shell(r):
        acc = PhaseSum()
        for a in range(a_c - r, a_c + r + 1):
            edge = abs(a - a_c) == r
            wt, xe = _chi_inv_weight(chi_inv, a, p)
            pa = Fraction(p) ** a
            for dx, lev in _grid(r, LX, p):
                if not edge and lev != r:
                    continue
                x = x_c + dx
                row2 = tuple(x * R1[j] + R2[j] for j in range(4))
                for u, (jj, Mc) in u_phase:
                    A = pa * u
                    pt = (tuple(A * t for t in R0), tuple(A * t for t in R1), row2, R3)
                    val = ev.phases(child, pt, p)
                    if not val.is_empty():
                        acc.add(val, wt * vol, Fraction(jj, Mc), xe)
        return acc

    return _run_shells(ev, shell, "theta")


def _eval_theta(ev, node: Theta, rows, p):
    if node.inner_m != 1:
        raise BadParams("theta is evaluated at level 4 only")
    if node.resolved_method() == "reduced":
        if not _is_xi4(node.child):
            raise BadParams("the reduced theta route needs xi_4 as child")
        return _theta4_reduced(ev, node, rows, p)
    return _theta4_generic(ev, node, rows, p)


# ------------------------------------------------------------------------------
# Xi at level 4


def _eval_xiop(ev, node: XiOp, rows, p):
    if node.size != 4:
        raise BadParams("Xi is evaluated at level 4 only")
    L = max(0, _kappa(rows, p))
    vol = Fraction(1, p ** (2 * L))
    P0, P1, P2, P3 = rows
    child = node.child

    def shell(r):
        acc = PhaseSum()
        grid = list(_grid(r, L, p))
        for y, ly in grid:
            row0 = tuple(P0[j] + y * P2[j] for j in range(4))
            for z, lz in grid:
                if max(ly, lz) != r:
                    continue
                row1 = tuple(P1[j] + z * P2[j] for j in range(4))
                # h_3^{-1} swaps the middle rows
                pt = (row0, P2, row1, P3)
                val = ev.phases(child, pt, p)
                if not val.is_empty():
                    acc.add(val, vol, frac_part(z, p))
        return acc

    return _run_shells(ev, shell, "Xi")


# ------------------------------------------------------------------------------
# translations and the S.P extension


def _eval_translate(ev, node: Translate, rows, p):
    g = node.g.rows
    pt = _mul_rows(g, rows) if node.side == "left" else _mul_rows(rows, g)
    return ev.phases(node.child, pt, p)


def _mul_rows(a, b):
    cols = list(zip(*b))
    return tuple(tuple(sum((x * y for x, y in zip(r, c) if x and y), F0) for c in cols) for r in a)


def _eval_sp(ev, node: SPExtend, rows, p):
    g = MatF(rows, FieldConfig(p))
    try:
        s, pm = factor_s_p(g)
    except NotInProduct as exc:
        raise Indeterminate(str(exc)) from None
    inner = ev.phases(node.child, pm.rows, p)
    if inner.is_empty():
        return inner
    return inner * PhaseSum.from_cyclo(chi_psi_eval(s, node.chi))


_DISPATCH = {
    XiLeaf: _eval_xi,
    PhiLift: _eval_phi,
    Theta: _eval_theta,
    XiOp: _eval_xiop,
    Translate: _eval_translate,
    SPExtend: _eval_sp,
    ClosedForm: _eval_closed,
}


# ------------------------------------------------------------------------------
# builders


def essential_form(n: int, chi: MultChar, method: str = "auto") -> Node:
    """theta_n^{nu chi} phi theta_{n-2}^{nu^2 chi} ... theta_4^{nu^{m-1} chi} phi (xi_2)."""
    if n < 2 or n % 2:
        raise BadParams("n must be even and >= 2")
    node: Node = XiLeaf(2)
    m = n // 2
    for level in range(4, n + 1, 2):
        k = m - level // 2 + 1
        node = Theta(PhiLift(node, 0), chi.twist_nu(k), method)
    return node


def lambda_form(n: int, chi: MultChar, method: str = "auto") -> Node:
    """theta_n^{nu chi} ... theta_4^{nu^{m-1} chi} applied to xi_n."""
    if n < 4 or n % 2:
        raise BadParams("n must be even and >= 4")
    m = n // 2
    node: Node = XiLeaf(n)
    for level in range(4, n + 1, 2):
        k = m - level // 2 + 1
        node = Theta(node, chi.twist_nu(k), method)
    return node


def sp_extend(node: Node, chi: MultChar) -> SPExtend:
    return SPExtend(node, chi)


def omega_apply(n: int, node: Node) -> Node:
    """Xi_4 o ... o Xi_n; only n = 4 (a single Xi) is evaluated."""
    if n < 4 or n % 2 or node.size != n:
        raise BadParams("omega needs an even n >= 4 matching the node size")
    if n != 4:
        raise BadParams("Xi is evaluated at level 4 only")
    return XiOp(node)


# ------------------------------------------------------------------------------
# support of the essential form


def reference_point(n: int, e: int, cfg: FieldConfig) -> MatF:
    """The double coset representative: v^sharp delta^sharp embedded (e > 0),
    the identity for e = 0."""
    if e == 0:
        return MatF.identity(n, cfg)
    return special_element("g_sharp", cfg, m=n // 2, e=e)


def support_test(n: int, e: int, g: MatF, seed: int = 0, budget: int = 20000):
    """Decide g in S_n^o x P_n(o) with x = reference_point(n, e).

    Solves the linear conditions on k' in P_n(o) making g k' x^{-1} a
    Shalika matrix, describes the integral solutions as an affine o-lattice,
    and searches it modulo p for a unit determinant (exhaustive when the
    lattice rank is small, seeded random otherwise).  Returns
    (True, (s, k)) with g = s x k, or (False, None).  For e = 0 the target
    is (S^o cap P^*) P^*(o), and points with non-unit determinant are
    rejected.
    """
    if n % 2 or n < 2 or g.n != n:
        raise BadParams("n must be even and match g")
    if not in_mirabolic(g):
        raise NotInSubgroup("g is not in P_n")
    cfg = g.cfg
    p = cfg.p
    if e == 0 and vq(g.det(), p) != 0:
        return False, None
    x = reference_point(n, e, cfg)
    Y = x.inv().rows
    G = g.rows
    m = n // 2
    idx = [(i, j) for i in range(n - 1) for j in range(n - 1)] + [(i, n - 1) for i in range(n - 1)]
    pos = {ij: t for t, ij in enumerate(idx)}

    def entry(a, b):
        """M[a][b] = coeffs . k' + const."""
        coeffs = [F0] * len(idx)
        for (i, j), t in pos.items():
            if G[a][i] and Y[j][b]:
                coeffs[t] = G[a][i] * Y[j][b]
        return coeffs, G[a][n - 1] * Y[n - 1][b]

    A, rhs = [], []
    for a in range(m, n - 1):
        for b in range(m):
            c, k0 = entry(a, b)
            A.append(c)
            rhs.append(-k0)
    for a in range(m):
        for b in range(m):
            c1, k1 = entry(a + m, b + m)
            c2, k2 = entry(a, b)
            A.append([u - v for u, v in zip(c1, c2)])
            rhs.append(k2 - k1)
    sol = solve_linear(A, rhs)
    if sol is None:
        return False, None
    lat = integral_affine_points(sol[0], sol[1], p)
    if lat is None:
        return False, None
    base, basis = lat
    d = len(basis)

    def kmat(vec):
        rows = [[F0] * n for _ in range(n)]
        for (i, j), t in pos.items():
            rows[i][j] = vec[t]
        rows[n - 1][n - 1] = F1
        return rows

    def det_unit(coef):
        vec = [base[t] + sum((coef[i] * basis[i][t] for i in range(d) if coef[i]), F0)
               for t in range(len(idx))]
        blk = [[residue(vec[pos[(i, j)]], p, 1) for j in range(n - 1)] for i in range(n - 1)]
        return _det_mod_p(blk, p) != 0, vec

    if p ** d <= budget:
        candidates = _all_tuples(d, p)
    else:
        rng = random.Random(seed)
        candidates = ([rng.randrange(p) for _ in range(d)] for _ in range(budget))
    for coef in candidates:
        ok, vec = det_unit(coef)
        if ok:
            kp = MatF(kmat(vec), cfg)
            s = g @ kp @ x.inv()
            k = kp.inv()
            if not in_S_circ(s):
                raise AssertionError("support solver produced a non-Shalika factor")
            return True, (s, k)
    return False, None


def _all_tuples(d, p):
    if d == 0:
        yield []
        return
    for head in range(p):
        for tail in _all_tuples(d - 1, p):
            yield [head] + tail


def _det_mod_p(M, p):
    M = [list(r) for r in M]
    n = len(M)
    det = 1
    for c in range(n):
        piv = next((r for r in range(c, n) if M[r][c] % p), None)
        if piv is None:
            return 0
        if piv != c:
            M[c], M[piv] = M[piv], M[c]
            det = -det
        det = det * M[c][c] % p
        inv = pow(M[c][c], -1, p)
        for r in range(c + 1, n):
            if M[r][c] % p:
                f = M[r][c] * inv % p
                M[r] = [(a - f * b) % p for a, b in zip(M[r], M[c])]
    return det % p


# ------------------------------------------------------------------------------
# P_m \ G_m integrals used by the Whittaker computation


def primitive_row_integral(m: int, v: Sequence[Fraction], cfg: FieldConfig) -> CycloLaurent:
    """Integral of psi(r . v) over primitive rows r in o^m (Lebesgue,
    vol(o^m) = 1), computed cell by cell: rows whose last unit coordinate is
    at position i, the later coordinates in p, the earlier ones in o.

    The integrand must be constant on p^L-cosets with L = max(0, -min o(v_j)).
    """
    p = cfg.p
    v = [Fraction(x) for x in v]
    L = max(0, -min((vq(x, p) for x in v if x), default=0))
    L = max(L, 1)
    mod = p ** L
    acc = PhaseSum()
    for i in range(m):
        # coordinate i a unit, coordinates after i in p o, before i free
        ranges = []
        for j in range(m):
            if j < i:
                ranges.append(range(mod))
            elif j == i:
                ranges.append([t for t in range(mod) if t % p])
            else:
                ranges.append(range(0, mod, p))
        for r in _product(ranges):
            s = sum((Fraction(r[j]) * v[j] for j in range(m)), F0)
            acc.add_term(frac_part(s, p), Fraction(1, mod ** m))
    return acc.value()


def primitive_row_oracle(m: int, v: Sequence[Fraction], cfg: FieldConfig, L: int = None) -> CycloLaurent:
    """Same integral as a flat sum over (o/p^L)^m minus the sum over p^m."""
    p = cfg.p
    v = [Fraction(x) for x in v]
    if L is None:
        L = max(1, -min((vq(x, p) for x in v if x), default=0))
    mod = p ** L
    acc = PhaseSum()
    for r in _product([range(mod)] * m):
        if all(t % p == 0 for t in r):
            continue
        s = sum((Fraction(r[j]) * v[j] for j in range(m)), F0)
        acc.add_term(frac_part(s, p), Fraction(1, mod ** m))
    return acc.value()


def _product(ranges):
    if not ranges:
        yield ()
        return
    for h in ranges[0]:
        for t in _product(ranges[1:]):
            yield (h,) + t


def whittaker_double_integral(m: int, i: int, zstar: Sequence[Fraction], cfg: FieldConfig,
                              y_exp: int = -2, x_exp: int = 1) -> CycloLaurent:
    """Integral over y in S_{i,y_exp} and x in R_{i,x_exp} of
    psi(-zstar . y) psi(x . y), with S_{i,l} = o x .. x p^l x .. x o and
    R_{i,l} = o x .. x varpi^l o^x x .. x o (coordinate i, 1-based).

    Flat residue sum: y modulo p^Ly and x modulo p^Lx with Lx >= -min o(y)
    and Ly >= -min(o(x), o(zstar)), so the integrand is constant on cells.
    """
    p = cfg.p
    zstar = [Fraction(t) for t in zstar]
    i0 = i - 1
    ly = [y_exp if j == i0 else 0 for j in range(m)]
    lx = [x_exp if j == i0 else 0 for j in range(m)]
    oz = min((vq(t, p) for t in zstar if t), default=0)
    Lx = max(1, max(lx) + 1, -min(ly))
    Ly = max(1, max(ly), -min(min(lx), oz))
    P = Fraction(p)
    y_ranges = [[P ** ly[j] * t for t in range(p ** (Ly - ly[j]))] for j in range(m)]
    x_ranges = []
    for j in range(m):
        ts = range(p ** (Lx - lx[j]))
        if j == i0:
            ts = [t for t in ts if t % p]
        x_ranges.append([P ** lx[j] * t for t in ts])
    w = Fraction(1, p ** (m * (Lx + Ly)))
    xs = list(_product(x_ranges))
    acc = PhaseSum()
    for y in _product(y_ranges):
        base = -sum((zstar[j] * y[j] for j in range(m)), F0)
        for x in xs:
            s = base + sum((x[j] * y[j] for j in range(m)), F0)
            acc.add_term(frac_part(s, p), w)
    return acc.value()
