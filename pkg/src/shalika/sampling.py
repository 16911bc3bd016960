"""Seeded random elements of the groups used by the grids and tests."""
from __future__ import annotations

import random
from fractions import Fraction
from typing import List

from .matgroup import F0, F1, MatF, det_rows
from .padic_core import FieldConfig


def random_padic(rng: random.Random, p: int, vmin: int = 0, vmax: int = 1, digits: int = 2) -> Fraction:
    """A rational p^v * t with t a random integer of a few base-p digits."""
    v = rng.randint(vmin, vmax)
    t = rng.randrange(p ** digits)
    return Fraction(p) ** v * t


def random_gl_integral(m: int, cfg: FieldConfig, rng: random.Random, digits: int = 2) -> List[List[Fraction]]:
    """Uniform-ish element of GL_m(o): resample until the determinant is a unit."""
    p = cfg.p
    while True:
        rows = [[Fraction(rng.randrange(p ** digits)) for _ in range(m)] for _ in range(m)]
        d = det_rows(rows)
        if d and d.numerator % p:
            return rows


def random_P_integral(n: int, cfg: FieldConfig, rng: random.Random, digits: int = 2) -> MatF:
    """Random element of P_n(o)."""
    p = cfg.p
    k = random_gl_integral(n - 1, cfg, rng, digits)
    rows = [list(r) + [Fraction(rng.randrange(p ** digits))] for r in k]
    rows.append([F0] * (n - 1) + [F1])
    return MatF(rows, cfg)


def random_S_circ(n: int, cfg: FieldConfig, rng: random.Random, vmin: int = -1, vmax: int = 1,
                  unit_det: bool = False) -> MatF:
    """Random [[a, b], [0, a]] in P_n: a has last row e_m, b is arbitrary."""
    m = n // 2
    p = cfg.p
    while True:
        a = [[random_padic(rng, p, vmin, vmax) for _ in range(m)] for _ in range(m - 1)]
        a.append([F0] * (m - 1) + [F1])
        d = det_rows(a)
        if not d:
            continue
        if unit_det and (d.numerator % p == 0 or d.denominator % p == 0):
            continue
        break
    b = [[random_padic(rng, p, vmin, vmax) for _ in range(m)] for _ in range(m)]
    rows = [list(a[i]) + list(b[i]) for i in range(m)]
    rows += [[F0] * m + list(a[i]) for i in range(m)]
    return MatF(rows, cfg)


def perturb_mirabolic(g: MatF, rng: random.Random, vmin: int = -2, vmax: int = 1) -> MatF:
    """Right-multiply by a random elementary matrix or torus element of P_n
    that is usually not integral, to step off a double coset."""
    n = g.n
    p = g.p
    rows = [[F1 if i == j else F0 for j in range(n)] for i in range(n)]
    kind = rng.randrange(3)
    if kind == 0:
        i = rng.randrange(n - 1)
        j = rng.randrange(n)
        while j == i:
            j = rng.randrange(n)
        rows[i][j] = Fraction(p) ** rng.randint(vmin, -1) * rng.randrange(1, p)
    elif kind == 1:
        i = rng.randrange(n - 1)
        rows[i][i] = Fraction(p) ** rng.choice([v for v in range(vmin, vmax + 1) if v])
    else:
        i = rng.randrange(n - 1)
        rows[i][n - 1] = Fraction(p) ** rng.randint(vmin, -1) * rng.randrange(1, p)
    return g @ MatF(rows, g.cfg)
