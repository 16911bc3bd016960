"""Characters psi, chi, chi_psi and Gauss sums with exact cyclotomic values.

psi(x) = exp(2 pi i * frac_p(x)) is encoded as zeta_{p^k}^j.  A
multiplicative character chi of conductor e sends the fixed generator of
(Z/p^e)^x to zeta_{phi(p^e)}^k and varpi to the formal symbol X.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Dict, Tuple, Union

from .cyclo import CycloLaurent, GroupRingAccumulator, XRational, lcm
from .errors import BadParams, NotInSubgroup, ZeroArgument
from .matgroup import MatF, det_rows, in_N, inverse_rows, shalika_blocks
from .padic_core import (
    FieldConfig,
    PadicScalar,
    frac_part,
    primitive_root,
    principal_part,
    to_fraction,
    vp_int,
    vq,
)

Number = Union[PadicScalar, Fraction, int]


def _frac(a: Number) -> Fraction:
    if isinstance(a, PadicScalar):
        return a.to_fraction()
    return to_fraction(a)


# ------------------------------------------------------------------------------
# additive character


@dataclass(frozen=True)
class AdditiveCharacter:
    """The standard character of conductor zero on Q_p."""

    cfg: FieldConfig

    def index(self, a: Number) -> Tuple[int, int]:
        """(j, M) with psi(a) = zeta_M^j, M a power of p."""
        if isinstance(a, PadicScalar):
            r = principal_part(a)
        else:
            r = frac_part(_frac(a), self.cfg.p)
        return r.numerator, r.denominator

    def __call__(self, a: Number) -> CycloLaurent:
        j, M = self.index(a)
        return CycloLaurent.root(j, M)


def psi_eval(a: Number, cfg: FieldConfig) -> CycloLaurent:
    return AdditiveCharacter(cfg)(a)


def psi_N_eval(n: MatF, r: int = None) -> CycloLaurent:
    """Product of psi over the superdiagonal of an upper unitriangular n."""
    if r is not None and r != n.n:
        raise NotInSubgroup("size mismatch")
    if not in_N(n):
        raise NotInSubgroup("not upper unitriangular")
    p = n.cfg.p
    s = sum((n.rows[i][i + 1] for i in range(n.n - 1)), Fraction(0))
    r_ = frac_part(s, p)
    return CycloLaurent.root(r_.numerator, r_.denominator)


# ------------------------------------------------------------------------------
# multiplicative characters


@lru_cache(maxsize=None)
def dlog_table(p: int, e: int) -> Dict[int, int]:
    """Discrete logarithms on (Z/p^e)^x w.r.t. the fixed generator."""
    mod = p ** e
    g = primitive_root(p, e)
    out = {}
    x = 1
    order = mod - mod // p
    for k in range(order):
        out[x] = k
        x = (x * g) % mod
    if len(out) != order:
        raise BadParams(f"(Z/{p}^{e})^x is not cyclic")
    return out


@dataclass(frozen=True)
class MultChar:
    """chi(varpi^v u) = q^{-nu v} X^{x_power v} zeta_phi^{k dlog(u)}, phi = phi(p^e).

    ``nu`` records twists by the norm character (nu chi); ``x_power`` is -1
    for chi^{-1}.
    """

    p: int
    e: int = 0
    k: int = 0
    x_power: int = 1
    nu: int = 0

    def __post_init__(self):
        if self.e < 0:
            raise BadParams("conductor must be >= 0")
        if self.e == 0:
            if self.k:
                raise BadParams("unramified character takes k = 0")
            return
        if self.p == 2 and self.e == 1:
            raise BadParams("(Z/2)^x is trivial: no character of conductor 1 for p = 2")
        if self.p == 2 and self.e > 2:
            raise BadParams("(Z/2^e)^x is not cyclic for e > 2; not supported")
        phi = self.phi
        if self.k % phi == 0:
            raise BadParams("k = 0 gives the trivial character on units")
        # conductor exactly e: nontrivial on 1 + p^{e-1}
        if self.e >= 2:
            mod = self.p ** self.e
            u = (1 + self.p ** (self.e - 1)) % mod
            if (self.k * dlog_table(self.p, self.e)[u]) % phi == 0:
                raise BadParams(f"k={self.k} has conductor smaller than e={self.e}")

    @property
    def phi(self) -> int:
        return self.p ** self.e - self.p ** (self.e - 1) if self.e else 1

    @property
    def ramified(self) -> bool:
        return self.e > 0

    def inverse(self) -> "MultChar":
        return MultChar(self.p, self.e, (-self.k) % self.phi if self.e else 0, -self.x_power, -self.nu)

    def twist_nu(self, s: int = 1) -> "MultChar":
        return MultChar(self.p, self.e, self.k, self.x_power, self.nu + s)

    def unit_index(self, u: Fraction) -> Tuple[int, int]:
        """(j, M) with chi(u) = zeta_M^j for a unit u."""
        if not self.e:
            return 0, 1
        mod = self.p ** self.e
        r = (u.numerator * pow(u.denominator, -1, mod)) % mod
        return (self.k * dlog_table(self.p, self.e)[r]) % self.phi, self.phi

    def pi_value(self, v: int) -> CycloLaurent:
        """chi(varpi^v)."""
        return CycloLaurent.X(self.x_power * v) * (Fraction(self.p) ** (-self.nu * v))

    def __call__(self, a: Number) -> CycloLaurent:
        return chi_eval(self, a)

    def to_json(self):
        return {"p": self.p, "e": self.e, "k": self.k, "x_power": self.x_power, "nu": self.nu}


def default_char(p: int, e: int) -> MultChar:
    """Smallest k giving conductor exactly e."""
    if e == 0:
        return MultChar(p, 0, 0)
    phi = p ** e - p ** (e - 1)
    for k in range(1, phi):
        try:
            return MultChar(p, e, k)
        except BadParams:
            continue
    raise BadParams(f"no character of conductor {e} for p={p}")


def chi_eval(chi: MultChar, a: Number) -> CycloLaurent:
    x = _frac(a)
    if x == 0:
        raise ZeroArgument("chi(0) is undefined outside Gauss sums")
    v = vq(x, chi.p)
    u = x / Fraction(chi.p) ** v
    j, M = chi.unit_index(u)
    return chi.pi_value(v) * CycloLaurent.root(j, M)


# ------------------------------------------------------------------------------
# Gauss sums


def unit_shell_sum(chi: MultChar, b: Fraction) -> CycloLaurent:
    """Integral over o^x of chi(u) psi(b u) du (vol(o) = 1), exact.

    For ramified chi the integrand is constant on cosets of 1 + p^L with
    L = max(e, -o(b)); the finite sum over (Z/p^L)^x is taken directly.
    """
    p = chi.p
    if b == 0:
        if chi.e:
            return CycloLaurent.zero()
        return CycloLaurent.const(Fraction(p - 1, p))
    ob = vq(b, p)
    if not chi.e:
        if ob >= 0:
            return CycloLaurent.const(Fraction(p - 1, p))
        if ob == -1:
            return CycloLaurent.const(Fraction(-1, p))
        return CycloLaurent.zero()
    # quick vanishing (conductor argument): only o(b) = -e survives
    if ob != -chi.e:
        return CycloLaurent.zero()
    L = chi.e
    mod = p ** L
    M = lcm(chi.phi, mod)
    acc = GroupRingAccumulator(M)
    w = Fraction(1, mod)
    for u in range(1, mod):
        if u % p == 0:
            continue
        j, Mc = chi.unit_index(Fraction(u))
        r = frac_part(b * u, p)
        acc.add(j * (M // Mc) + r.numerator * (M // r.denominator), w)
    return acc.value()


def gauss_sum(chi: MultChar, a: Number):
    """g(chi, psi_a) = integral over o of chi(x) psi(a x) dx with chi(0) = 0.

    Ramified chi: shell k contributes q^{-k} chi(varpi)^k I(a varpi^k) where
    I is the unit-shell sum, nonzero only when o(a) + k = -e.  Unramified:
    the geometric tail in X/q is summed in closed form and an XRational is
    returned.
    """
    x = _frac(a)
    if x == 0:
        raise ZeroArgument("gauss_sum needs a != 0")
    p = chi.p
    oa = vq(x, p)
    if chi.e:
        k = -chi.e - oa
        if k < 0:
            return CycloLaurent.zero()
        shell = unit_shell_sum(chi, x * Fraction(p) ** k)
        return shell * chi.pi_value(k) * Fraction(1, p ** k)
    # unramified: Y = chi(varpi)/q
    Y = chi.pi_value(1) * Fraction(1, p)
    one = CycloLaurent.one()
    den = one - Y
    c = Fraction(p - 1, p)
    if oa >= 0:
        return XRational(CycloLaurent.const(c), den)
    j = -oa
    num = (Y ** (j - 1)) * Fraction(-1, p) * den + (Y ** j) * c
    return XRational(num, den)


def gauss_residue_oracle(chi: MultChar, a: Number, depth: int = None) -> CycloLaurent:
    """Flat sum over x in o/p^M of chi(x) psi(a x) p^{-M}.

    Classes with o(x) <= M - e carry a constant integrand; the remaining
    classes integrate to zero against a ramified chi.  Used only as a test
    oracle, independent of the shell decomposition.  For unramified chi the
    result is the series truncated below X^M.
    """
    x = _frac(a)
    p = chi.p
    oa = vq(x, p)
    M = depth if depth is not None else max(0, -oa) + max(chi.e, 1)
    mod = p ** M
    Mc = lcm(chi.phi, p ** max(0, -oa))
    acc = GroupRingAccumulator(Mc)
    w = Fraction(1, mod)
    for t in range(1, mod):
        v = vp_int(t, p)
        if v > M - chi.e:
            continue
        if chi.e == 0 and v >= M:
            continue
        u = Fraction(t, p ** v)
        j, Mu = chi.unit_index(u)
        r = frac_part(x * t, p)
        acc.add(j * (Mc // Mu) + r.numerator * (Mc // r.denominator), w * Fraction(p) ** (-chi.nu * v),
                chi.x_power * v)
    return acc.value()


# ------------------------------------------------------------------------------
# chi_psi on the Shalika subgroup


def chi_psi_eval(s: MatF, chi: MultChar, n: int = None) -> CycloLaurent:
    """chi(det a) psi(tr(a^{-1} b')) for s = [[a, b'],[0, a]]."""
    if n is not None and n != s.n:
        raise NotInSubgroup("size mismatch")
    blocks = shalika_blocks(s)
    if blocks is None:
        raise NotInSubgroup("not in the Shalika subgroup")
    a, b = blocks
    ainv = inverse_rows(a)
    m = len(a)
    tr = sum((ainv[i][k] * b[k][i] for i in range(m) for k in range(m)), Fraction(0))
    return chi_eval(chi, det_rows(a)) * psi_eval(tr, s.cfg)
