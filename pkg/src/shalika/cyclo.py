"""Exact values in Q(zeta_M)[X, 1/X].

Elements of Q(zeta_M) are coefficient tuples in the power basis
1, z, ..., z^(phi(M)-1), reduced modulo the M-th cyclotomic polynomial.
X is a formal symbol standing for chi(varpi).
"""
from __future__ import annotations

from fractions import Fraction
from functools import lru_cache
from math import gcd
from typing import Dict, Iterable, List, Mapping, Tuple

Poly = Tuple[Fraction, ...]


def lcm(a: int, b: int) -> int:
    return a // gcd(a, b) * b


@lru_cache(maxsize=None)
def cyclotomic_coeffs(M: int) -> Tuple[int, ...]:
    """Coefficients of Phi_M, lowest degree first."""
    from sympy import Poly as SPoly, Symbol, cyclotomic_poly

    z = Symbol("z")
    coeffs = SPoly(cyclotomic_poly(M, z), z).all_coeffs()
    return tuple(int(c) for c in reversed(coeffs))


@lru_cache(maxsize=None)
def _phi_sparse(M: int) -> Tuple[Tuple[int, int], ...]:
    """Nonzero (degree, coeff) pairs of Phi_M below the leading term."""
    c = cyclotomic_coeffs(M)
    return tuple((i, a) for i, a in enumerate(c[:-1]) if a)


def degree(M: int) -> int:
    return len(cyclotomic_coeffs(M)) - 1


def reduce_group_ring(M: int, vec: Iterable) -> Poly:
    """Map sum_k vec[k] z^k (k mod M) to the reduced power basis by long
    division with the (sparse, monic) cyclotomic polynomial."""
    d = degree(M)
    v = [0] * M
    for k, c in enumerate(vec):
        if c:
            v[k % M] += c
    low = _phi_sparse(M)
    for k in range(M - 1, d - 1, -1):
        c = v[k]
        if c:
            base = k - d
            for i, a in low:
                v[base + i] -= c * a
    return tuple(Fraction(x) for x in v[:d])


@lru_cache(maxsize=4096)
def _root_poly(k: int, M: int) -> Poly:
    vec = [0] * M
    vec[k % M] = 1
    return reduce_group_ring(M, vec)


def _poly_is_zero(p: Poly) -> bool:
    return not any(p)


def _lift_poly(p: Poly, M_from: int, M_to: int) -> Poly:
    if M_from == M_to:
        return p
    step = M_to // M_from
    vec: Dict[int, Fraction] = {}
    for j, c in enumerate(p):
        if c:
            k = (j * step) % M_to
            vec[k] = vec.get(k, Fraction(0)) + c
    dense = [Fraction(0)] * M_to
    for k, c in vec.items():
        dense[k] = c
    return reduce_group_ring(M_to, dense)


def _poly_mul(a: Poly, b: Poly, M: int) -> Poly:
    dense = [Fraction(0)] * M
    for i, x in enumerate(a):
        if x:
            for j, y in enumerate(b):
                if y:
                    dense[(i + j) % M] += x * y
    return reduce_group_ring(M, dense)


class CycloLaurent:
    """Finite sum of X^a times elements of Q(zeta_M)."""

    __slots__ = ("M", "terms", "_hash")

    def __init__(self, M: int = 1, terms: Mapping[int, Poly] | None = None):
        self.M = M
        clean = {}
        if terms:
            d = degree(M)
            for a, p in terms.items():
                p = tuple(Fraction(c) for c in p)
                if len(p) != d:
                    raise ValueError("coefficient length does not match phi(M)")
                if not _poly_is_zero(p):
                    clean[int(a)] = p
        self.terms: Dict[int, Poly] = clean
        self._hash = None

    # constructors ----------------------------------------------------------
    @classmethod
    def const(cls, c) -> "CycloLaurent":
        c = Fraction(c)
        return cls(1, {0: (c,)}) if c else cls(1)

    @classmethod
    def zero(cls) -> "CycloLaurent":
        return cls(1)

    @classmethod
    def one(cls) -> "CycloLaurent":
        return cls.const(1)

    @classmethod
    def root(cls, k: int, M: int, x_exp: int = 0, coeff=1) -> "CycloLaurent":
        """coeff * zeta_M^k * X^x_exp."""
        coeff = Fraction(coeff)
        if not coeff:
            return cls(M)
        row = _root_poly(k % M, M)
        return cls(M, {x_exp: tuple(coeff * r for r in row)})

    @classmethod
    def X(cls, a: int = 1) -> "CycloLaurent":
        return cls(1, {a: (Fraction(1),)})

    # structure ---------------------------------------------------------------
    def lift(self, M: int) -> "CycloLaurent":
        if M % self.M:
            raise ValueError(f"cannot lift modulus {self.M} to {M}")
        if M == self.M:
            return self
        return CycloLaurent(M, {a: _lift_poly(p, self.M, M) for a, p in self.terms.items()})

    def is_zero(self) -> bool:
        return not self.terms

    def __bool__(self):
        return not self.is_zero()

    def _common(self, other: "CycloLaurent"):
        M = lcm(self.M, other.M)
        return M, self.lift(M), other.lift(M)

    def __add__(self, other):
        other = _as_cyclo(other)
        M, a, b = self._common(other)
        terms = dict(a.terms)
        for e, p in b.terms.items():
            if e in terms:
                terms[e] = tuple(x + y for x, y in zip(terms[e], p))
            else:
                terms[e] = p
        return CycloLaurent(M, terms)

    __radd__ = __add__

    def __neg__(self):
        return CycloLaurent(self.M, {e: tuple(-c for c in p) for e, p in self.terms.items()})

    def __sub__(self, other):
        return self + (-_as_cyclo(other))

    def __rsub__(self, other):
        return _as_cyclo(other) - self

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)):
            c = Fraction(other)
            return CycloLaurent(self.M, {e: tuple(c * x for x in p) for e, p in self.terms.items()})
        other = _as_cyclo(other)
        M, a, b = self._common(other)
        terms: Dict[int, List[Fraction]] = {}
        for e1, p1 in a.terms.items():
            for e2, p2 in b.terms.items():
                prod = _poly_mul(p1, p2, M)
                acc = terms.setdefault(e1 + e2, [Fraction(0)] * len(prod))
                for i, c in enumerate(prod):
                    acc[i] += c
        return CycloLaurent(M, {e: tuple(v) for e, v in terms.items()})

    __rmul__ = __mul__

    def __pow__(self, n: int):
        if n < 0:
            raise ValueError("negative powers are only defined for monomials; use inverse_monomial")
        out = CycloLaurent.one()
        base = self
        while n:
            if n & 1:
                out = out * base
            base = base * base
            n >>= 1
        return out

    def shift(self, a: int) -> "CycloLaurent":
        """Multiply by X^a."""
        return CycloLaurent(self.M, {e + a: p for e, p in self.terms.items()})

    def conj_root(self) -> "CycloLaurent":
        """Apply zeta -> zeta^{-1} (complex conjugation on the cyclotomic part)."""
        M = self.M
        terms = {}
        for e, p in self.terms.items():
            dense = [Fraction(0)] * M
            for j, c in enumerate(p):
                if c:
                    dense[(-j) % M] += c
            terms[e] = reduce_group_ring(M, dense)
        return CycloLaurent(M, terms)

    def __eq__(self, other):
        if isinstance(other, (int, Fraction)):
            other = CycloLaurent.const(other)
        if not isinstance(other, CycloLaurent):
            return NotImplemented
        return (self - other).is_zero()

    def canonical(self) -> "CycloLaurent":
        """Same value written over the smallest modulus dividing M that holds it."""
        for d in sorted(_divisors(self.M)):
            if d == self.M:
                return self
            cand_terms = {}
            ok = True
            for e, p in self.terms.items():
                q = _descend(p, self.M, d)
                if q is None:
                    ok = False
                    break
                cand_terms[e] = q
            if ok:
                return CycloLaurent(d, cand_terms)
        return self

    def __hash__(self):
        if self._hash is None:
            c = self.canonical()
            self._hash = hash((c.M, tuple(sorted(c.terms.items()))))
        return self._hash

    def x_exponents(self) -> List[int]:
        return sorted(self.terms)

    def rational_value(self):
        """The value as a Fraction if it is a rational constant, else None."""
        c = self.canonical()
        if not c.terms:
            return Fraction(0)
        if c.M == 1 and set(c.terms) == {0}:
            return c.terms[0][0]
        if set(c.terms) == {0} and not any(c.terms[0][1:]):
            return c.terms[0][0]
        return None

    def to_json(self) -> dict:
        return {
            "M": self.M,
            "terms": [
                {"x_exp": e, "poly": [str(c) for c in self.terms[e]]}
                for e in sorted(self.terms)
            ],
        }

    @classmethod
    def from_json(cls, obj: dict) -> "CycloLaurent":
        return cls(int(obj["M"]), {int(t["x_exp"]): tuple(Fraction(c) for c in t["poly"])
                                   for t in obj["terms"]})

    def __repr__(self):
        if not self.terms:
            return "CycloLaurent(0)"
        parts = []
        for e in sorted(self.terms):
            coeffs = " + ".join(f"{c}*z^{i}" for i, c in enumerate(self.terms[e]) if c)
            parts.append(f"({coeffs})*X^{e}")
        return f"CycloLaurent[M={self.M}](" + " + ".join(parts) + ")"


def _divisors(n: int):
    return [d for d in range(1, n + 1) if n % d == 0]


def _descend(p: Poly, M: int, d: int):
    """Try to write a Q(zeta_M) element given by ``p`` inside Q(zeta_d)."""
    if M % d:
        return None
    dd = degree(d)
    # Solve by trial: the image of the Q(zeta_d) power basis spans a subspace;
    # compare after lifting a candidate obtained by Gaussian elimination.
    basis = [_lift_poly(tuple(Fraction(int(i == j)) for i in range(dd)), d, M) for j in range(dd)]
    sol = _solve_span(basis, p)
    if sol is None:
        return None
    return tuple(sol)


def _solve_span(basis: List[Poly], target: Poly):
    n = len(target)
    k = len(basis)
    # augmented matrix rows = coordinates, columns = basis vectors
    rows = [[basis[j][i] for j in range(k)] + [target[i]] for i in range(n)]
    piv_cols = []
    r = 0
    for c in range(k):
        pr = next((i for i in range(r, n) if rows[i][c]), None)
        if pr is None:
            continue
        rows[r], rows[pr] = rows[pr], rows[r]
        inv = 1 / rows[r][c]
        rows[r] = [x * inv for x in rows[r]]
        for i in range(n):
            if i != r and rows[i][c]:
                f = rows[i][c]
                rows[i] = [x - f * y for x, y in zip(rows[i], rows[r])]
        piv_cols.append(c)
        r += 1
    for i in range(r, n):
        if rows[i][k]:
            return None
    sol = [Fraction(0)] * k
    for i, c in enumerate(piv_cols):
        sol[c] = rows[i][k]
    return sol


def _as_cyclo(x) -> CycloLaurent:
    if isinstance(x, CycloLaurent):
        return x
    if isinstance(x, (int, Fraction)):
        return CycloLaurent.const(x)
    raise TypeError(f"cannot combine CycloLaurent with {type(x).__name__}")


class GroupRingAccumulator:
    """Running sum of weight * zeta_M^k * X^a, reduced once at the end.

    Integrals over residue grids add thousands of roots of unity; keeping
    them in Q[Z/M] and reducing mod Phi_M once is much cheaper than reducing
    every term.
    """

    def __init__(self, M: int):
        self.M = M
        self.buckets: Dict[int, List[Fraction]] = {}

    def add(self, k: int, weight, x_exp: int = 0):
        if not weight:
            return
        b = self.buckets.get(x_exp)
        if b is None:
            b = self.buckets[x_exp] = [0] * self.M
        b[k % self.M] += weight

    def value(self) -> CycloLaurent:
        return CycloLaurent(self.M, {a: reduce_group_ring(self.M, vec) for a, vec in self.buckets.items()})


class XRational:
    """Quotient num/den of CycloLaurent values; used for the unramified
    Gauss sum whose X-series is summed in closed form."""

    __slots__ = ("num", "den")

    def __init__(self, num: CycloLaurent, den: CycloLaurent):
        if den.is_zero():
            raise ZeroDivisionError("zero denominator")
        self.num = num
        self.den = den

    def __eq__(self, other):
        if isinstance(other, CycloLaurent):
            other = XRational(other, CycloLaurent.one())
        if not isinstance(other, XRational):
            return NotImplemented
        return (self.num * other.den - other.num * self.den).is_zero()

    def __mul__(self, other):
        if isinstance(other, XRational):
            return XRational(self.num * other.num, self.den * other.den)
        return XRational(self.num * other, self.den)

    __rmul__ = __mul__

    def is_zero(self) -> bool:
        return self.num.is_zero()

    def to_json(self) -> dict:
        return {"num": self.num.to_json(), "den": self.den.to_json()}

    def __repr__(self):
        return f"XRational({self.num!r} / {self.den!r})"


class PhaseSum:
    """Lazy sum of weight * X^a * exp(2 pi i r) with r in Q/Z.

    Kept unreduced (a free group-ring element) while integrals accumulate;
    ``value()`` reduces to a CycloLaurent.  Zero tests must go through
    ``value()``.
    """

    __slots__ = ("terms",)

    def __init__(self, terms: Dict[Tuple[int, Fraction], Fraction] | None = None):
        self.terms: Dict[Tuple[int, Fraction], Fraction] = terms if terms is not None else {}

    @classmethod
    def single(cls, r: Fraction = Fraction(0), weight=1, x_exp: int = 0) -> "PhaseSum":
        r = r - (r.numerator // r.denominator)
        return cls({(x_exp, r): Fraction(weight)})

    def add_term(self, r: Fraction, weight, x_exp: int = 0):
        if not weight:
            return
        r = r - (r.numerator // r.denominator)
        key = (x_exp, r)
        w = self.terms.get(key)
        w = weight if w is None else w + weight
        if w:
            self.terms[key] = w
        else:
            self.terms.pop(key, None)

    def add(self, other: "PhaseSum", weight=1, shift_r: Fraction = Fraction(0), shift_x: int = 0):
        for (a, r), w in other.terms.items():
            self.add_term(r + shift_r, w * weight, a + shift_x)

    def scaled(self, weight=1, shift_r: Fraction = Fraction(0), shift_x: int = 0) -> "PhaseSum":
        out = PhaseSum()
        out.add(self, weight, shift_r, shift_x)
        return out

    def value(self) -> CycloLaurent:
        if not self.terms:
            return CycloLaurent.zero()
        M = 1
        for (_, r) in self.terms:
            M = lcm(M, r.denominator)
        by_x: Dict[int, List] = {}
        for (a, r), w in self.terms.items():
            vec = by_x.setdefault(a, [0] * M)
            vec[(r.numerator * (M // r.denominator)) % M] += w
        return CycloLaurent(M, {a: reduce_group_ring(M, vec) for a, vec in by_x.items()})

    def is_empty(self) -> bool:
        return not self.terms

    @classmethod
    def from_cyclo(cls, c: CycloLaurent) -> "PhaseSum":
        out = cls()
        for a, poly in c.terms.items():
            for k, w in enumerate(poly):
                if w:
                    out.add_term(Fraction(k, c.M), w, a)
        return out

    def __mul__(self, other: "PhaseSum") -> "PhaseSum":
        out = PhaseSum()
        for (a, r), w in self.terms.items():
            for (b, s), v in other.terms.items():
                out.add_term(r + s, w * v, a + b)
        return out

    def __add__(self, other: "PhaseSum") -> "PhaseSum":
        out = PhaseSum(dict(self.terms))
        out.add(other)
        return out


def cyclo_inverse(z: CycloLaurent) -> CycloLaurent:
    """Inverse of a nonzero X-monomial element c X^a (c in Q(zeta_M)), by
    solving c * w = 1 in the power basis."""
    if len(z.terms) != 1:
        raise ValueError("only X-monomials are invertible")
    (a, poly), = z.terms.items()
    M = z.M
    d = degree(M)
    cols = [_poly_mul(poly, _root_poly(j, M), M) for j in range(d)]
    A = [[cols[j][i] for j in range(d)] for i in range(d)]
    b = [Fraction(1)] + [Fraction(0)] * (d - 1)
    # Gauss-Jordan over Q; the multiplication matrix is invertible
    rows = [A[i] + [b[i]] for i in range(d)]
    for c in range(d):
        pr = next(i for i in range(c, d) if rows[i][c])
        rows[c], rows[pr] = rows[pr], rows[c]
        iv = 1 / rows[c][c]
        rows[c] = [t * iv for t in rows[c]]
        for i in range(d):
            if i != c and rows[i][c]:
                f = rows[i][c]
                rows[i] = [s - f * t for s, t in zip(rows[i], rows[c])]
    return CycloLaurent(M, {-a: tuple(rows[i][d] for i in range(d))})
