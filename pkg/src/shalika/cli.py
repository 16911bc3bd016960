"""Command-line interface.

Every command prints one JSON document (sorted keys) to stdout or to
``--out``.  Exit codes: 0 when nothing FAILs, 1 when a check FAILs, 2 on
usage errors, 3 when a computation runs out of precision or truncation.
Options read ``SHALIKA_<OPTION>`` environment variables as defaults.
"""
from __future__ import annotations

import functools
import json
import sys
from fractions import Fraction
from typing import List, Optional, Sequence

import click

from . import suites, zeta
from .char_values import default_char, gauss_sum
from .errors import BadParams, PrecisionExhausted, ShalikaError, TruncationCapExceeded
from .hecke import HeckeDescriptor, collapsed_coefficients, hecke_apply, hecke_cosets
from .matgroup import MatF, cartan, in_K, iwasawa, lst_decompose
from .mirabolic import (
    FormEvaluator, TruncationPolicy, essential_form, evaluate, lambda_form, reference_point,
    sp_extend, support_test,
)
from .padic_core import FieldConfig

EXIT_OK, EXIT_FAIL, EXIT_USAGE, EXIT_PRECISION = 0, 1, 2, 3

# status and payload of the last emitted document, read by run_command
_last_status: dict = {}


# ------------------------------------------------------------------------------
# parsing helpers


def parse_vector(text: str) -> List[Fraction]:
    try:
        return [Fraction(t.strip()) for t in text.split(",") if t.strip()]
    except (ValueError, ZeroDivisionError) as exc:
        raise click.BadParameter(f"cannot parse {text!r} as rationals: {exc}") from None


def parse_ints(text: str) -> List[int]:
    try:
        return [int(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise click.BadParameter(f"cannot parse {text!r} as integers") from None


def parse_matrix(text: str, cfg: FieldConfig) -> MatF:
    """Rows separated by ';', entries by ','."""
    rows = [parse_vector(r) for r in text.split(";")]
    if not rows or any(len(r) != len(rows) for r in rows):
        raise click.BadParameter("matrix must be square, rows separated by ';'")
    return MatF(rows, cfg)


def _config(ctx, **extra):
    out = {k: v for k, v in ctx.obj.items() if k not in ("out",)}
    out.update(extra)
    return out


def emit(ctx, payload: dict, status: str = "PASS"):
    payload = suites.to_jsonable(payload)
    _last_status.update(status=status, payload=payload)
    text = json.dumps(payload, sort_keys=True, indent=2)
    out = ctx.obj.get("out")
    if out:
        with open(out, "w") as fh:
            fh.write(text + "\n")
    else:
        click.echo(text)


def emit_report(ctx, rep: suites.Report):
    emit(ctx, rep.to_json(), rep.status)
    click.echo(f"{rep.suite}: {rep.status} {rep.counts()} in {rep.runtime:.1f}s", err=True)


# ------------------------------------------------------------------------------
# shared options


def _opt(*names, **kw):
    envvar = "SHALIKA_" + names[0].lstrip("-").upper().replace("-", "_")
    return click.option(*names, envvar=envvar, show_default=True, **kw)


def common(fn):
    opts = [
        _opt("--p", type=int, default=3, help="residue characteristic"),
        _opt("--e", type=int, default=None, help="conductor exponent of chi"),
        _opt("--precision", type=int, default=12, help="p-adic precision N"),
        _opt("--radius", type=int, default=2, help="first accepted truncation radius"),
        _opt("--mesh", type=int, default=1, help="minimal integration mesh"),
        _opt("--kmax", type=int, default=2, help="last series coefficient"),
        _opt("--seed", type=int, default=0, help="grid seed (point sampling only)"),
        _opt("--workers", type=int, default=1, help="worker processes for grids"),
        _opt("--out", type=click.Path(dir_okay=False), default=None, help="write JSON here"),
    ]

    @functools.wraps(fn)
    def wrapped(**kwargs):
        ctx = click.get_current_context()
        common_keys = ("p", "e", "precision", "radius", "mesh", "kmax", "seed", "workers", "out")
        ctx.obj = {k: kwargs.pop(k) for k in common_keys}
        _cfg(ctx)
        return fn(ctx, **kwargs)

    for o in reversed(opts):
        wrapped = o(wrapped)
    return wrapped


def _cfg(ctx) -> FieldConfig:
    try:
        return FieldConfig(ctx.obj["p"], ctx.obj["precision"])
    except ValueError as exc:
        raise click.BadParameter(str(exc)) from None


def _e(ctx, default: int = 0) -> int:
    return default if ctx.obj["e"] is None else ctx.obj["e"]


def _policy(ctx) -> TruncationPolicy:
    r = ctx.obj["radius"]
    return TruncationPolicy(radius=r, mesh=ctx.obj["mesh"], radius_cap=max(r + 6, 8))


# ------------------------------------------------------------------------------
# commands


@click.group()
def cli():
    """Shalika newform toolkit: exact evaluation and verification suites."""


@cli.command()
@common
@click.option("--a", "a_text", default="1/3", show_default=True, help="argument a of psi_a")
def gauss(ctx, a_text):
    """Gauss sum g(chi, psi_a) for the default character of conductor e."""
    chi = default_char(ctx.obj["p"], _e(ctx, 1))
    a = parse_vector(a_text)[0]
    emit(ctx, {"config": _config(ctx), "chi": chi.to_json(), "a": a, "value": gauss_sum(chi, a)})


@cli.group()
def decompose():
    """Matrix decompositions."""


@decompose.command("lst")
@common
@click.option("--x", "x_text", required=True, help="vector x, comma separated")
@click.option("--f", "f_text", required=True, help="integer weight f, comma separated")
def decompose_lst(ctx, x_text, f_text):
    """ubar_x = h u d k with h in H_f and k in K^1."""
    x, f = parse_vector(x_text), parse_ints(f_text)
    if len(x) != len(f):
        raise click.BadParameter("x and f must have the same length")
    res = lst_decompose(x, f, _cfg(ctx))
    emit(ctx, {"config": _config(ctx), "x": x, "f": f, "h": res.h, "u": res.u, "d": res.d, "k": res.k,
               "sigma": res.sigma, "tau": res.tau})


@decompose.command("cartan")
@common
@click.option("--g", "g_text", required=True, help="matrix, rows ';' entries ','")
def decompose_cartan(ctx, g_text):
    """g = k1 p^f k2 with f nonincreasing."""
    g = parse_matrix(g_text, _cfg(ctx))
    k1, f, k2 = cartan(g)
    emit(ctx, {"config": _config(ctx), "g": g, "k1": k1, "f": f, "k2": k2})


@decompose.command("iwasawa")
@common
@click.option("--g", "g_text", required=True, help="matrix, rows ';' entries ','")
def decompose_iwasawa(ctx, g_text):
    """g = b k with b upper triangular and k in K."""
    g = parse_matrix(g_text, _cfg(ctx))
    b, k = iwasawa(g)
    emit(ctx, {"config": _config(ctx), "g": g, "b": b, "k": k})


@cli.group()
def essential():
    """The essential form J at level 4."""


def _point(ctx, n, point_text):
    cfg = _cfg(ctx)
    if point_text:
        g = parse_matrix(point_text, cfg)
        if g.n != n:
            raise click.BadParameter(f"point must be {n}x{n}")
        return g
    return reference_point(n, _e(ctx), cfg)


@essential.command("eval")
@common
@click.option("--n", type=int, default=4, show_default=True)
@click.option("--point", "point_text", default=None, help="matrix in P_n (default: reference point)")
@click.option("--route", type=click.Choice(["tower", "lambda"]), default="lambda", show_default=True,
              help="lifted tower (generic integrator) or Lambda tree (reduced)")
def essential_eval(ctx, n, point_text, route):
    """J(g) exactly."""
    chi = default_char(ctx.obj["p"], _e(ctx))
    node = essential_form(n, chi, "generic") if route == "tower" else lambda_form(n, chi, "reduced")
    ev = FormEvaluator(node, _policy(ctx))
    g = _point(ctx, n, point_text)
    emit(ctx, {"config": _config(ctx, n=n, route=route), "point": g, "value": evaluate(ev, g),
               "stats": ev.stats})


@essential.command("support")
@common
@click.option("--n", type=int, default=4, show_default=True)
@click.option("--point", "point_text", default=None, help="matrix in P_n (default: reference point)")
def essential_support(ctx, n, point_text):
    """Is g in S^o x P_n(o)?  Returns the witness (s, k) when it is."""
    g = _point(ctx, n, point_text)
    ok, wit = support_test(n, _e(ctx), g, seed=ctx.obj["seed"])
    payload = {"config": _config(ctx, n=n), "point": g, "in_support": ok}
    if ok:
        payload["s"], payload["k"] = wit
    emit(ctx, payload)


@essential.command("grid")
@common
@click.option("--points", type=int, default=200, show_default=True)
def essential_grid(ctx, points):
    """Support law and equivariance of J on a seeded grid (n = 4)."""
    emit_report(ctx, suites.support4_suite(ctx.obj["p"], _e(ctx), points, ctx.obj["seed"], ctx.obj["workers"]))


@cli.group()
def hecke():
    """Hecke operators."""


def _descriptor(ctx, f_text, level, c):
    f = parse_ints(f_text)
    p = ctx.obj["p"]
    if level == "K":
        return HeckeDescriptor.maximal(f, p)
    a = f[0] if f else 0
    return HeckeDescriptor.gamma(len(f), a, sum(1 for x in f if x), c, p)


@hecke.command("reps")
@common
@click.option("--r", type=int, default=None, help="size (checked against --f)")
@click.option("--f", "f_text", required=True, help="dominant weight, comma separated")
@click.option("--level", type=click.Choice(["K", "Gamma"]), default="K", show_default=True)
@click.option("--c", type=int, default=1, show_default=True, help="Gamma(c) level")
def hecke_reps(ctx, r, f_text, level, c):
    """Left coset representatives of the double coset of p^f."""
    desc = _descriptor(ctx, f_text, level, c)
    if r is not None and r != desc.r:
        raise click.BadParameter(f"--r {r} does not match --f of length {desc.r}")
    reps = hecke_cosets(desc)
    emit(ctx, {"config": _config(ctx), "descriptor": desc.to_json(), "count": len(reps), "reps": reps})


@hecke.command("apply")
@common
@click.option("--f", "f_text", required=True, help="dominant weight, comma separated")
@click.option("--level", type=click.Choice(["K", "Gamma"]), default="K", show_default=True)
@click.option("--c", type=int, default=1, show_default=True)
@click.option("--point", "point_text", default=None, help="matrix g (default: identity)")
def hecke_apply_cmd(ctx, f_text, level, c, point_text):
    """T_f applied to the indicator of K at g, and the collapsed
    coefficients of T_f on psi-Whittaker functions at 1."""
    desc = _descriptor(ctx, f_text, level, c)
    cfg = _cfg(ctx)
    g = parse_matrix(point_text, cfg) if point_text else MatF.identity(desc.r, cfg)
    reps = hecke_cosets(desc)
    value = hecke_apply(desc, lambda h: 1 if in_K(h) else 0, g, reps)
    coeffs = collapsed_coefficients(desc, reps)
    emit(ctx, {"config": _config(ctx), "descriptor": desc.to_json(), "point": g, "value": value,
               "collapsed": [{"g": list(k), "c": v} for k, v in sorted(coeffs.items())]})


@cli.group()
def cosets():
    """Coset enumerations."""


@cosets.command("bmk")
@common
@click.option("--m", type=int, default=2, show_default=True)
@click.option("--k", type=int, default=2, show_default=True)
@click.option("--variant", type=click.Choice(["standard", "e_variant"]), default="standard", show_default=True)
@click.option("--lprime", type=int, default=0, show_default=True)
def cosets_bmk(ctx, m, k, variant, lprime):
    """Representatives of B_{m,k} / B_{m,0}."""
    reps = zeta.bmk_reps(m, k, ctx.obj["p"], variant, lprime)
    emit(ctx, {"config": _config(ctx, m=m, k=k, variant=variant, lprime=lprime), "count": len(reps),
               "reps": reps})


@cli.group()
def fourier():
    """Finite Fourier transforms of lattice functions."""


@fourier.command("check")
@common
@click.option("--c", type=int, default=1, show_default=True)
def fourier_check(ctx, c):
    """phi_c^# against its explicit form, and Fourier inversion (n = 2)."""
    emit_report(ctx, suites.fourier_suite(ctx.obj["p"], _e(ctx), c, ctx.obj["seed"]))


@cli.group()
def zeta_group():
    """Zeta-series coefficients."""


@zeta_group.command("series")
@common
@click.option("--c", type=int, default=None, help="level for ramified chi (default m e)")
def zeta_series(ctx, c):
    """c_k, k <= kmax, of the level-4 form (normalized average when ramified)."""
    p, e = ctx.obj["p"], _e(ctx)
    chi = default_char(p, e)
    if e == 0:
        ev = FormEvaluator(lambda_form(4, chi, "reduced"), _policy(ctx))
    else:
        c = 2 * e if c is None else c
        ev = zeta.j_pi_average(sp_extend(lambda_form(4, chi, "reduced"), chi), chi, 2, c)
    ser = zeta.c_series(ev, 2, ctx.obj["kmax"], p)
    emit(ctx, {"config": _config(ctx, c=c), "series": ser.to_json(), "is_one": ser.is_one()})


cli.add_command(zeta_group, "zeta")


VERIFY_NAMES = ["all", "gauss", "lst", "support4", "xi-value", "fourier", "hecke", "bmk",
                "coset-integrals", "prop-equivalence", "witness", "series"]
_CRITERIA = {
    "gauss": [1], "lst": [2], "hecke": [3], "coset-integrals": [4], "xi-value": [5],
    "support4": [6, 7], "prop-equivalence": [8], "fourier": [9], "bmk": [10], "witness": [11],
    "series": [12],
}


def _verify_with_params(ctx, name):
    """Suites that take --p/--e run once for the given values."""
    p, e, seed, workers = ctx.obj["p"], ctx.obj["e"], ctx.obj["seed"], ctx.obj["workers"]
    if name == "gauss":
        return suites.gauss_suite(p, 1 if e is None else e, seed=seed)
    if name == "support4":
        return suites.support4_suite(p, 1 if e is None else e, seed=seed, workers=workers)
    if name == "prop-equivalence":
        return suites.prop_equivalence_suite(p, 1 if e is None else e, seed=seed, workers=workers)
    if name == "fourier":
        return suites.fourier_suite(p, 0 if e is None else e, seed=seed)
    if name == "hecke":
        return suites.hecke_suite(primes=(p,))
    if name == "bmk":
        return suites.bmk_suite(primes=(p,))
    if name == "coset-integrals":
        return suites.coset_integral_suite(primes=(p,))
    if name == "xi-value":
        return suites.xi_value_suite(primes=(p,))
    if name == "series":
        return suites.series_suite(primes=(p,), kmax=ctx.obj["kmax"])
    if name == "witness":
        return suites.witness_suite(p, 1 if e is None else e, seed=seed)
    return suites.lst_suite(seed=seed, primes=(p,))


@cli.command()
@common
@click.argument("suite", type=click.Choice(VERIFY_NAMES))
@click.option("--acceptance/--single", default=None,
              help="acceptance parameter sets (default unless --p or --e is given)")
def verify(ctx, suite, acceptance):
    """Run a verification suite and report PASS/FAIL/INDETERMINATE per check."""
    src = click.get_current_context().get_parameter_source
    explicit = any(src(k) not in (click.core.ParameterSource.DEFAULT, None) for k in ("p", "e"))
    if acceptance is None:
        acceptance = suite == "all" or not explicit
    names = [n for n in VERIFY_NAMES if n != "all"] if suite == "all" else [suite]
    parts = []
    for name in names:
        if acceptance:
            for k in _CRITERIA[name]:
                rep = suites.run_criterion(k, ctx.obj["workers"])
                rep.suite = f"criterion {k:02d} {rep.suite}"
                parts.append(rep)
        else:
            parts.append(_verify_with_params(ctx, name))
    rep = parts[0] if len(parts) == 1 else suites.merge(suite, parts)
    emit_report(ctx, rep)


# ------------------------------------------------------------------------------
# entry points


def run_command(argv: Optional[Sequence[str]] = None):
    """Run the CLI on ``argv``; returns (exit code, report dict or None)."""
    _last_status.clear()
    try:
        ctx = cli.make_context("shalika", list(argv if argv is not None else sys.argv[1:]))
        with ctx:
            cli.invoke(ctx)
    except click.exceptions.Exit as exc:
        return exc.exit_code, None
    except click.UsageError as exc:
        exc.show()
        return EXIT_USAGE, None
    except (PrecisionExhausted, TruncationCapExceeded) as exc:
        click.echo(f"error: {type(exc).__name__}: {exc}", err=True)
        return EXIT_PRECISION, None
    except (BadParams, ShalikaError, ValueError) as exc:
        click.echo(f"error: {type(exc).__name__}: {exc}", err=True)
        return EXIT_USAGE, None
    return (EXIT_FAIL if _last_status.get("status") == "FAIL" else EXIT_OK), _last_status.get("payload")


def main(argv: Optional[Sequence[str]] = None) -> int:
    code, _ = run_command(argv)
    sys.exit(code)
