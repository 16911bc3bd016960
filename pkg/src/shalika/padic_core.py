"""Truncated arithmetic in Q_p.

A nonzero scalar is stored as ``p**v * u`` with ``u`` a unit known modulo
``p**prec``.  ``prec`` starts at the configured precision N and drops when
leading digits cancel in a sum.

Besides the PadicScalar type this module holds small helpers on exact
rationals (``vq``, ``frac_part``) that the matrix and evaluator code use for
its internal arithmetic.
"""
from __future__ import annotations

import math
import re
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from numbers import Rational
from typing import Optional, Union

from .errors import ConfigMismatch, DivisionByZero, PrecisionExhausted

RationalLike = Union[int, Fraction, str]

INF = math.inf


def _is_prime(n: int) -> bool:
    if n < 2:
        return False
    d = 2
    while d * d <= n:
        if n % d == 0:
            return False
        d += 1
    return True


@dataclass(frozen=True)
class FieldConfig:
    """Residue characteristic ``p`` (so q = p, uniformizer p) and precision N."""

    p: int
    precision: int = 12

    def __post_init__(self):
        if not _is_prime(self.p):
            raise ValueError(f"p={self.p} is not prime")
        if self.precision < 1:
            raise ValueError("precision must be >= 1")

    @property
    def q(self) -> int:
        return self.p

    @property
    def modulus(self) -> int:
        return self.p ** self.precision


# --------------------------------------------------------------------------
# helpers on exact rationals


def to_fraction(x: RationalLike) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, (int, Rational)):
        return Fraction(x)
    if isinstance(x, str):
        return Fraction(x.strip())
    if isinstance(x, PadicScalar):
        return x.to_fraction()
    raise TypeError(f"cannot read {x!r} as a rational")


def vp_int(n: int, p: int) -> int:
    """p-adic valuation of a nonzero integer."""
    v = 0
    while n % p == 0:
        n //= p
        v += 1
    return v


def vq(x: Fraction, p: int) -> Union[int, float]:
    """Valuation of a rational; ``math.inf`` for zero."""
    if x == 0:
        return INF
    return vp_int(x.numerator, p) - vp_int(x.denominator, p)


def frac_part(x: Fraction, p: int) -> Fraction:
    """The principal part of ``x`` in Q_p: the r in [0,1) with p-power
    denominator and x - r in Z_p."""
    d = x.denominator
    k = vp_int(d, p)
    if k == 0:
        return Fraction(0)
    pk = p ** k
    dprime = d // pk
    num = (x.numerator * pow(dprime, -1, pk)) % pk
    return Fraction(num, pk)


def is_integral(x: Fraction, p: int) -> bool:
    return x.denominator % p != 0


def is_unit(x: Fraction, p: int) -> bool:
    return x != 0 and x.numerator % p != 0 and x.denominator % p != 0


def unit_part(x: Fraction, p: int) -> Fraction:
    """x / p^o(x)."""
    v = vq(x, p)
    return x / Fraction(p) ** v


def residue(x: Fraction, p: int, k: int) -> int:
    """Image of an integral rational in Z/p^k."""
    pk = p ** k
    return (x.numerator * pow(x.denominator, -1, pk)) % pk


# --------------------------------------------------------------------------
# PadicScalar


@dataclass(frozen=True)
class PadicScalar:
    cfg: FieldConfig
    is_zero: bool
    valuation: int = 0
    unit: int = 0
    prec: int = 0

    # construction -------------------------------------------------------
    @staticmethod
    def zero(cfg: FieldConfig) -> "PadicScalar":
        return PadicScalar(cfg, True, 0, 0, cfg.precision)

    def to_fraction(self) -> Fraction:
        if self.is_zero:
            return Fraction(0)
        return Fraction(self.cfg.p) ** self.valuation * self.unit

    # arithmetic ---------------------------------------------------------
    def _check(self, other: "PadicScalar"):
        if not isinstance(other, PadicScalar):
            raise TypeError("expected PadicScalar")
        if other.cfg != self.cfg:
            raise ConfigMismatch("scalars from different field configurations")

    def __add__(self, other):
        other = _coerce(other, self.cfg)
        return add(self, other)

    __radd__ = __add__

    def __neg__(self):
        return neg(self)

    def __sub__(self, other):
        other = _coerce(other, self.cfg)
        return add(self, neg(other))

    def __rsub__(self, other):
        other = _coerce(other, self.cfg)
        return add(other, neg(self))

    def __mul__(self, other):
        other = _coerce(other, self.cfg)
        return mul(self, other)

    __rmul__ = __mul__

    def __truediv__(self, other):
        other = _coerce(other, self.cfg)
        return mul(self, inv(other))

    def __str__(self):
        return format_scalar(self)


def _coerce(x, cfg: FieldConfig) -> PadicScalar:
    if isinstance(x, PadicScalar):
        return x
    return make_scalar(x, cfg)


def make_scalar(value: RationalLike, cfg: FieldConfig) -> PadicScalar:
    """Write ``value = p^v * u`` and truncate ``u`` modulo p^N."""
    x = to_fraction(value)
    if x == 0:
        return PadicScalar.zero(cfg)
    p, N = cfg.p, cfg.precision
    v = vq(x, p)
    u = x / Fraction(p) ** v
    mod = p ** N
    unit = (u.numerator * pow(u.denominator, -1, mod)) % mod
    return PadicScalar(cfg, False, v, unit, N)


def add(a: PadicScalar, b: PadicScalar) -> PadicScalar:
    a._check(b)
    if a.is_zero:
        return b
    if b.is_zero:
        return a
    p = a.cfg.p
    if a.valuation > b.valuation:
        a, b = b, a
    gap = b.valuation - a.valuation
    if gap > 0:
        prec = min(a.prec, gap + b.prec)
        mod = p ** prec
        s = (a.unit + p ** gap * b.unit) % mod
        return PadicScalar(a.cfg, False, a.valuation, s, prec)
    prec = min(a.prec, b.prec)
    mod = p ** prec
    s = (a.unit + b.unit) % mod
    if s == 0:
        if a.prec == a.cfg.precision and b.prec == b.cfg.precision:
            # Both operands are exact representatives: the sum is zero.
            return PadicScalar.zero(a.cfg)
        raise PrecisionExhausted("sum cancels beyond the known digits")
    k = vp_int(s, p)
    new_prec = prec - k
    s //= p ** k
    return PadicScalar(a.cfg, False, a.valuation + k, s % p ** new_prec, new_prec)


def mul(a: PadicScalar, b: PadicScalar) -> PadicScalar:
    a._check(b)
    if a.is_zero or b.is_zero:
        return PadicScalar.zero(a.cfg)
    prec = min(a.prec, b.prec)
    return PadicScalar(a.cfg, False, a.valuation + b.valuation,
                       (a.unit * b.unit) % a.cfg.p ** prec, prec)


def neg(a: PadicScalar) -> PadicScalar:
    if a.is_zero:
        return a
    return PadicScalar(a.cfg, False, a.valuation, (-a.unit) % a.cfg.p ** a.prec, a.prec)


def inv(a: PadicScalar) -> PadicScalar:
    if a.is_zero:
        raise DivisionByZero("inverse of zero")
    mod = a.cfg.p ** a.prec
    return PadicScalar(a.cfg, False, -a.valuation, pow(a.unit, -1, mod), a.prec)


_ARITH = {"add": add, "mul": mul}


def arith(op: str, a: PadicScalar, b: Optional[PadicScalar] = None) -> PadicScalar:
    """Dispatch ``op`` in {add, mul, neg, inv}."""
    if op in _ARITH:
        if b is None:
            raise TypeError(f"{op} needs two operands")
        return _ARITH[op](a, b)
    if op == "neg":
        return neg(a)
    if op == "inv":
        return inv(a)
    raise ValueError(f"unknown op {op!r}")


def valuation(a: PadicScalar) -> Union[int, float]:
    return INF if a.is_zero else a.valuation


def norm(a: PadicScalar) -> Fraction:
    if a.is_zero:
        return Fraction(0)
    return Fraction(a.cfg.q) ** (-a.valuation)


def principal_part(a: PadicScalar) -> Fraction:
    """r in [0, 1) with a - r integral."""
    if a.is_zero or a.valuation >= 0:
        return Fraction(0)
    k = -a.valuation
    if a.prec < k:
        raise PrecisionExhausted(
            f"need {k} digits for the principal part, only {a.prec} known")
    pk = a.cfg.p ** k
    return Fraction(a.unit % pk, pk)


# --------------------------------------------------------------------------
# text form

_SCALAR_RE = re.compile(r"^\s*(\d+)\^(-?\d+)\s*\*\s*(\d+)\s*mod\s*(\d+)\^(\d+)\s*$")


def format_scalar(a: PadicScalar) -> str:
    if a.is_zero:
        return "0"
    return f"{a.cfg.p}^{a.valuation} * {a.unit} mod {a.cfg.p}^{a.prec}"


def parse_scalar(text: str, cfg: FieldConfig) -> PadicScalar:
    """Accepts ``a/b`` rationals and the ``p^v * u mod p^N`` form."""
    m = _SCALAR_RE.match(text)
    if m:
        p, v, u, p2, n = (int(g) for g in m.groups())
        if p != cfg.p or p2 != cfg.p:
            raise ConfigMismatch("prime in text does not match configuration")
        n = min(n, cfg.precision)
        return PadicScalar(cfg, False, v, u % p ** n, n)
    return make_scalar(Fraction(text.strip()), cfg)


@lru_cache(maxsize=None)
def primitive_root(pk_p: int, k: int) -> int:
    """Smallest generator of (Z/p^k)^x (cyclic for odd p, and for p=2 with k<=2)."""
    p = pk_p
    mod = p ** k
    phi = mod - mod // p
    if phi == 1:
        return 1
    factors = _prime_factors(phi)
    for g in range(2, mod):
        if g % p == 0:
            continue
        if all(pow(g, phi // f, mod) != 1 for f in factors):
            return g
    raise ValueError(f"(Z/{p}^{k})^x is not cyclic")


def _prime_factors(n: int):
    out = []
    d = 2
    while d * d <= n:
        if n % d == 0:
            out.append(d)
            while n % d == 0:
                n //= d
        d += 1
    if n > 1:
        out.append(n)
    return out
