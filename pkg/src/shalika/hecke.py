"""Hecke operators for GL_r over Q_p at level K and at level Gamma(c).

Cosets are enumerated twice: by a breadth-first orbit of the identity coset
under generators of the level group acting on the left, and directly in
upper triangular normal form (diagonal p^g, entries above the diagonal over
residue systems) filtered by elementary divisors.  The two must agree.
"""
from __future__ import annotations

import itertools
from collections import deque
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Dict, Iterable, List, Optional, Sequence, Tuple

from .cyclo import CycloLaurent, PhaseSum
from .errors import BadParams, BudgetExceeded, EnumerationBudgetExceeded, LengthMismatch
from .matgroup import F0, F1, MatF, cartan, hnf_right, iwasawa_upper
from .padic_core import FieldConfig, frac_part, primitive_root, residue, vq


# ------------------------------------------------------------------------------
# dominant weights


def is_dominant(f: Sequence[int]) -> bool:
    return all(f[i] >= f[i + 1] for i in range(len(f) - 1)) and (not f or f[-1] >= 0)


def lex_compare(f: Sequence[int], g: Sequence[int]) -> int:
    """-1, 0, 1 for f < g, f == g, f > g, comparing from the last coordinate."""
    if len(f) != len(g):
        raise LengthMismatch("weights of different length")
    for a, b in zip(reversed(f), reversed(g)):
        if a != b:
            return -1 if a < b else 1
    return 0


# ------------------------------------------------------------------------------
# descriptors


@dataclass(frozen=True)
class HeckeDescriptor:
    """Level ``K`` with a dominant weight f, or level ``Gamma`` (Gamma(c))
    with the weight a * h_i = (a, .., a, 0, .., 0) (i copies of a)."""

    r: int
    f: Tuple[int, ...]
    level: str = "K"
    c: int = 0
    p: int = 2

    @classmethod
    def maximal(cls, f: Sequence[int], p: int) -> "HeckeDescriptor":
        return cls(len(f), tuple(f), "K", 0, p)

    @classmethod
    def gamma(cls, r: int, a: int, i: int, c: int, p: int) -> "HeckeDescriptor":
        if not 0 <= i <= r:
            raise BadParams("0 <= i <= r")
        return cls(r, tuple([a] * i + [0] * (r - i)), "Gamma", c, p)

    def __post_init__(self):
        if len(self.f) != self.r:
            raise LengthMismatch("weight length differs from r")
        if not is_dominant(self.f):
            raise BadParams("weight must be nonincreasing and nonnegative")
        if self.level not in ("K", "Gamma"):
            raise BadParams("level is 'K' or 'Gamma'")
        if self.level == "Gamma":
            if self.c < 1:
                raise BadParams("Gamma(c) needs c >= 1")
            a = self.f[0] if self.f else 0
            if any(x not in (0, a) for x in self.f):
                raise BadParams("Gamma level supports weights a * h_i only")

    @property
    def cfg(self) -> FieldConfig:
        return FieldConfig(self.p)

    def to_json(self):
        return {"r": self.r, "f": list(self.f), "level": self.level, "c": self.c, "p": self.p}


# ------------------------------------------------------------------------------
# canonical forms of left cosets alpha * (level group)


def _gamma_line(alpha: MatF, H: MatF, c: int) -> Tuple[int, ...]:
    """Class of alpha Gamma(c) inside alpha K: the last row of
    k^{-1} = alpha^{-1} H (k = H^{-1} alpha), up to units, modulo p^c."""
    p = alpha.p
    r = alpha.n
    row = (alpha.inv() @ H).rows[r - 1]
    vals = [residue(x, p, c) for x in row]
    mod = p ** c
    j = max(i for i in range(r) if vals[i] % p)
    inv = pow(vals[j], -1, mod)
    return tuple(v * inv % mod for v in vals)


def coset_key(alpha: MatF, desc: HeckeDescriptor):
    H = hnf_right(alpha)
    if desc.level == "K":
        return H.rows
    return H.rows, _gamma_line(alpha, H, desc.c)


# ------------------------------------------------------------------------------
# generators of the level group modulo a congruence subgroup


def _unit_generators(p: int, N: int) -> List[int]:
    if p == 2:
        if N <= 1:
            return []
        return [3, 5] if N >= 3 else [3]
    return [primitive_root(p, N)]


def level_generators(desc: HeckeDescriptor) -> List[MatF]:
    """Elementary and diagonal generators of K (or Gamma(c)) modulo
    K(N), N = f_1 - f_r + c + 1, enough to generate the action on cosets."""
    r, p = desc.r, desc.p
    cfg = desc.cfg
    N = (desc.f[0] - desc.f[-1] if r else 0) + desc.c + 1
    gens = []
    for i in range(r):
        for j in range(r):
            if i == j:
                continue
            t = F1
            if desc.level == "Gamma" and i == r - 1:
                t = Fraction(p) ** desc.c
            M = [[F1 if a == b else F0 for b in range(r)] for a in range(r)]
            M[i][j] = t
            gens.append(MatF(M, cfg))
    for u in _unit_generators(p, N):
        for i in range(r):
            M = [[F1 if a == b else F0 for b in range(r)] for a in range(r)]
            M[i][i] = Fraction(u)
            gens.append(MatF(M, cfg))
    return gens


# ------------------------------------------------------------------------------
# enumeration


def hecke_cosets_bfs(desc: HeckeDescriptor, budget: int = 20000) -> List[MatF]:
    """Orbit of the coset varpi^f (level) under left multiplication by the
    level generators, deduplicated by ``coset_key``."""
    cfg = desc.cfg
    start = MatF.diag([Fraction(desc.p) ** a for a in desc.f], cfg)
    gens = level_generators(desc)
    seen = {coset_key(start, desc): start}
    queue = deque([start])
    while queue:
        g = queue.popleft()
        for s in gens:
            h = s @ g
            key = coset_key(h, desc)
            if key not in seen:
                if len(seen) >= budget:
                    raise EnumerationBudgetExceeded(f"more than {budget} cosets")
                seen[key] = h
                queue.append(h)
    return [seen[k] for k in sorted(seen, key=repr)]


def _compositions(total: int, r: int, bound: int):
    if r == 0:
        if total == 0:
            yield ()
        return
    for a in range(min(total, bound) + 1):
        for rest in _compositions(total - a, r - 1, bound):
            yield (a,) + rest


def standard_reps_K(f: Sequence[int], p: int, budget: int = 200000) -> List[MatF]:
    """Upper triangular reps of K varpi^f K / K: diagonal p^g with
    sum g = sum f, entry (i, j), i < j, over o / p^{g_i}, kept when the
    elementary divisors equal f."""
    cfg = FieldConfig(p)
    r = len(f)
    target = sorted(f, reverse=True)
    out = []
    count = 0
    for g in _compositions(sum(f), r, f[0] if r else 0):
        slots = [(i, j) for i in range(r) for j in range(i + 1, r)]
        ranges = [range(p ** g[i]) for i, j in slots]
        for vals in itertools.product(*ranges):
            count += 1
            if count > budget:
                raise EnumerationBudgetExceeded(f"more than {budget} candidates")
            M = [[F0] * r for _ in range(r)]
            for i in range(r):
                M[i][i] = Fraction(p) ** g[i]
            for (i, j), v in zip(slots, vals):
                M[i][j] = Fraction(v)
            A = MatF(M, cfg)
            if r == 0 or cartan(A)[1] == target:
                out.append(A)
    return out


def hecke_cosets(desc: HeckeDescriptor, budget: int = 20000) -> List[MatF]:
    """Left coset representatives of the double coset.  Level K returns the
    upper triangular standard reps; level Gamma the BFS orbit."""
    if desc.level == "K":
        return standard_reps_K(desc.f, desc.p, budget=max(budget, 10 * budget))
    return hecke_cosets_bfs(desc, budget)


# ------------------------------------------------------------------------------
# application


def hecke_apply(desc: HeckeDescriptor, ev, g: MatF, reps: Optional[List[MatF]] = None):
    """sum_j ev(g alpha_j); ``ev`` is a callable on matrices or a dict keyed by
    ``coset_key`` (missing keys read as 0)."""
    reps = reps if reps is not None else hecke_cosets(desc)
    total = CycloLaurent.zero()
    for a in reps:
        h = g @ a
        if isinstance(ev, dict):
            v = ev.get(coset_key(h, desc), CycloLaurent.zero())
        else:
            v = ev(h)
        total = total + (v if isinstance(v, CycloLaurent) else CycloLaurent.const(v))
    return total


def whittaker_split(h: MatF) -> Tuple[Tuple[int, ...], Fraction]:
    """h = n varpi^g k (k in K): returns (g, psi argument of n)."""
    b = iwasawa_upper(h).rows
    p = h.p
    r = h.n
    g = tuple(vq(b[i][i], p) for i in range(r))
    # n = b varpi^{-g}: superdiagonal entries b_{i,i+1} / p^{g_{i+1}}
    s = sum((b[i][i + 1] / b[i + 1][i + 1] for i in range(r - 1)), F0)
    return g, s


def collapsed_coefficients(desc: HeckeDescriptor, reps: Optional[List[MatF]] = None
                           ) -> Dict[Tuple[int, ...], CycloLaurent]:
    """For psi-equivariant right-invariant W, (T W)(1) = sum_g c_g W(varpi^g);
    returns the c_g (sums of psi over the reps with torus part g)."""
    reps = reps if reps is not None else hecke_cosets(desc)
    acc: Dict[Tuple[int, ...], PhaseSum] = {}
    for a in reps:
        g, s = whittaker_split(a)
        acc.setdefault(g, PhaseSum()).add_term(frac_part(s, a.p), F1)
    out = {}
    for g, ps in acc.items():
        v = ps.value()
        if not v.is_zero():
            out[g] = v
    return out


# ------------------------------------------------------------------------------
# vanishing predicate


@dataclass
class CharacterOnSubgroup:
    """A subgroup given by a membership test and a character on it."""

    member: Callable[[MatF], bool]
    char: Callable[[MatF], CycloLaurent]
    families: Callable[[int, FieldConfig, int], Iterable[MatF]] = None


def one_parameter_families(n: int, cfg: FieldConfig, span: int = 3) -> Iterable[MatF]:
    """1 + t E_ij with t = u p^k (|k| <= span, u a nonzero residue) and
    diagonal matrices with one entry p^k or a unit residue."""
    p = cfg.p
    for i in range(n):
        for j in range(n):
            if i == j:
                continue
            for k in range(-span, span + 1):
                for u in range(1, p):
                    M = [[F1 if a == b else F0 for b in range(n)] for a in range(n)]
                    M[i][j] = Fraction(p) ** k * u
                    yield MatF(M, cfg)
    for i in range(n):
        for d in [Fraction(p) ** k for k in range(-span, span + 1) if k] + [Fraction(u) for u in range(2, p)]:
            M = [[F1 if a == b else F0 for b in range(n)] for a in range(n)]
            M[i][i] = d
            yield MatF(M, cfg)


def vanishing_predicate(g0: MatF, H: CharacterOnSubgroup, K: CharacterOnSubgroup,
                        budget: int = 5000, span: int = 3, candidates: Iterable[MatF] = None):
    """True when some h in H has g0^{-1} h g0 in K and xi(h) != omega(g0^{-1} h g0).

    Searches the one-parameter families (or ``candidates``).  False means no
    witness among them.  Raises BudgetExceeded when the search would exceed
    ``budget`` candidates."""
    fam = list(candidates) if candidates is not None else list(
        (H.families or one_parameter_families)(g0.n, g0.cfg, span))
    if len(fam) > budget:
        raise BudgetExceeded(f"{len(fam)} candidates exceed the budget {budget}")
    g0inv = g0.inv()
    for h in fam:
        if not H.member(h):
            continue
        c = g0inv @ h @ g0
        if not K.member(c):
            continue
        if H.char(h) != K.char(c):
            return True
    return False
