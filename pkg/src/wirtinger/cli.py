"""Command-line front end.

Subcommands: constant, jscan, region-scan, profile, verify, perturb, oracle.
Exit codes: 0 on success, 1 when a verification fails, 2 on input or domain
errors (including unreadable or unwritable files).
"""

from __future__ import annotations

import argparse
import os
import sys
import warnings

import numpy as np

from . import scan
from .errors import DomainError, IdentityError, WirtingerError
from .jfun import j_sample, j_second_at_zero, minimize_j
from .output import csv_text, dumps
from .params import classify, derive
from .perturb import DEFAULT_EPS, coefficients, piecewise_fit, second_order_fit
from .profiles import build_model, eval_u_p, eval_u_w, verify_moment_identities
from .quad import DEFAULT_SPEC, QuadratureSpec
from .roots import domain_contains
from .verify import BatteryReport, identities_battery, symmetry_battery

EXIT_OK = 0
EXIT_FAILED = 1
EXIT_INPUT = 2

MOMENT_TOL = 1e-8
FIT_TOL = 0.05
DEFAULT_SYMMETRIC = (2.0, 5.0, 2.0)
DEFAULT_ASYMMETRIC = (2.0, 8.0, 2.0)
MOMENT_TRIPLES = ((2.0, 2.0, 2.0), (2.0, 4.0, 2.0), (2.0, 8.0, 2.0), (3.0, 4.0, 1.5), (1.5, 9.0, 3.0), (2.0, 3.5, 1.5))

JSCAN_HEADER = ("mu", "j", "j_prime", "quad_error")
PROFILE_HEADER = ("x", "u_p", "u_w")


class InputError(Exception):
    """Bad combination of flags."""


# helpers ------------------------------------------------------------------


def _spec(args) -> QuadratureSpec:
    return QuadratureSpec(
        abs_tol=args.tol_abs if args.tol_abs is not None else DEFAULT_SPEC.abs_tol,
        rel_tol=args.tol_rel if args.tol_rel is not None else DEFAULT_SPEC.rel_tol,
    )


def _params(args, default=None):
    values = (args.p, args.q, args.r)
    if all(v is None for v in values):
        if default is None:
            raise InputError("--p, --q and --r are required")
        return derive(*default)
    if any(v is None for v in values):
        raise InputError("give all of --p, --q and --r")
    return derive(*values)


def _emit(args, text: str) -> None:
    if not text.endswith("\n"):
        text += "\n"
    if args.output:
        with open(args.output, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _format(args, default: str = "json") -> str:
    return args.format or default


# subcommands --------------------------------------------------------------


def cmd_constant(args) -> int:
    params = _params(args)
    res = minimize_j(params, args.mu_max, _spec(args))
    report = {
        "params": params.as_dict(),
        "lambda_w": res.lambda_w,
        "lambda_p": res.lambda_p,
        "mu_star": res.mu_star,
        "class": classify(params).tag,
        "j_min": res.j_min,
        "j_at_zero": res.j_at_zero,
        "interior": res.interior,
    }
    if _format(args) == "csv":
        header = ("p", "q", "r", "lambda_w", "lambda_p", "mu_star", "class", "j_min", "j_at_zero", "interior")
        row = (params.p, params.q, params.r) + tuple(report[k] for k in header[3:])
        _emit(args, csv_text(header, [row]))
    else:
        _emit(args, dumps(report))
    return EXIT_OK


def cmd_jscan(args) -> int:
    params = _params(args)
    if args.grid < 2:
        raise InputError("--grid must be at least 2")
    spec = _spec(args)
    rows = []
    for mu in np.linspace(0.0, args.mu_max, args.grid):
        if not domain_contains(params, float(mu)):
            continue
        s = j_sample(params, float(mu), spec)
        rows.append((s.mu, s.j, s.j_prime, s.quad_error))
    if _format(args) == "csv":
        _emit(args, csv_text(JSCAN_HEADER, rows))
    else:
        _emit(args, dumps({"params": params.as_dict(), "rows": [dict(zip(JSCAN_HEADER, r)) for r in rows]}))
    return EXIT_OK


def _axis(name, single, rng, steps):
    if rng is not None:
        lo, hi = rng
        if not (1.0 < lo <= hi):
            raise InputError(f"--{name}-range needs 1 < LO <= HI")
        if hi > lo and steps < 2:
            raise InputError(f"--{name} steps must be at least 2 for a range")
        return scan.axis(lo, hi, steps if hi > lo else 1)
    if single is None:
        raise InputError(f"give --{name} or --{name}-range")
    return np.array([float(single)])


def cmd_region_scan(args) -> int:
    np_, nq, nr = args.steps
    p_vals = _axis("p", args.p, args.p_range, np_)
    q_vals = _axis("q", args.q, args.q_range, nq)
    r_vals = _axis("r", args.r, args.r_range, nr)
    for name, vals in (("p", p_vals), ("q", q_vals), ("r", r_vals)):
        if np.any(vals <= 1.0):
            raise DomainError(f"{name} values must exceed 1")
    threads = args.threads if args.threads else (os.cpu_count() or 1)
    points = scan.grid_points(p_vals, q_vals, r_vals)
    cells = scan.run_scan(points, mu_max=args.mu_max, spec=_spec(args), threads=threads, checkpoint=args.resume)
    summ = scan.summary(cells)
    if _format(args) == "csv":
        line = f"agree {summ['agree']}/{summ['cells']}; outside band {summ['agree_outside_band']}/{summ['outside_band']}"
        _emit(args, csv_text(scan.CSV_HEADER, [c.row() for c in cells], comments=[line]))
    else:
        report = {
            "grid": {"p": p_vals, "q": q_vals, "r": r_vals},
            "rows": cells,
            "summary": summ,
            "boundaries": scan.observed_boundaries(cells),
        }
        _emit(args, dumps(report))
    return EXIT_OK


def cmd_profile(args) -> int:
    params = _params(args)
    if args.points < 2:
        raise InputError("--points must be at least 2")
    model = build_model(params, _spec(args))
    x = np.linspace(-model.T, model.T, args.points)
    up, uw = eval_u_p(model, x), eval_u_w(model, x)
    if _format(args, "csv") == "csv":
        _emit(args, csv_text(PROFILE_HEADER, zip(x, up, uw)))
    else:
        _emit(args, dumps({"params": params.as_dict(), "T": model.T, "x": x, "u_p": up, "u_w": uw}))
    return EXIT_OK


def _moment_checks(rep: BatteryReport, triples, spec) -> None:
    for triple in triples:
        params = derive(*triple)
        model = build_model(params, spec)
        for s in (0.0, 1.0, params.r - 1.0):
            r1, r2 = verify_moment_identities(model, s, spec)
            rep.record("moment_identity", max(r1, r2) <= MOMENT_TOL, params=params.as_dict(), s=s, residual_q=r1, residual_p=r2)
        try:
            disc = coefficients(params, model, spec).max_discrepancy
            ok = True
        except IdentityError as exc:
            disc, ok = str(exc), False
        rep.record("coefficient_identities", ok, params=params.as_dict(), max_discrepancy=disc)


def _asymmetry_battery(params, spec, mu_max) -> BatteryReport:
    rep = BatteryReport("asymmetry")
    if classify(params).symmetric:
        rep.record("regime", False, params=params.as_dict(), reason="q does not exceed (2r-1)p; the asymmetry suite does not apply")
        return rep
    res = minimize_j(params, mu_max, spec)
    rep.record("interior_minimum", res.mu_star > 1e-3 and res.j_min < res.j_at_zero,
               params=params.as_dict(), mu_star=res.mu_star, j_min=res.j_min, j_at_zero=res.j_at_zero)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        d2 = j_second_at_zero(params, spec=spec)
    rep.record("concave_at_zero", d2 < 0.0, params=params.as_dict(), j_second_at_zero=d2)
    fit = second_order_fit(build_model(params, spec), spec=spec)
    rep.record("perturbation_sign", fit.fitted_c < 0.0 and fit.relative_error <= FIT_TOL,
               params=params.as_dict(), fitted_c=fit.fitted_c, predicted_c=fit.predicted_c, relative_error=fit.relative_error)
    return rep


def cmd_verify(args) -> int:
    spec = _spec(args)
    given = None if all(v is None for v in (args.p, args.q, args.r)) else _params(args)
    reports = []
    suites = ("identities", "symmetry", "asymmetry") if args.suite == "all" else (args.suite,)
    if "identities" in suites:
        base = given or derive(*DEFAULT_SYMMETRIC)
        rep = identities_battery(base, seed=args.seed, samples=args.samples)
        _moment_checks(rep, [(base.p, base.q, base.r)] if given else MOMENT_TRIPLES, spec)
        reports.append(rep)
    if "symmetry" in suites and (args.suite != "all" or given is None or classify(given).symmetric):
        reports.append(symmetry_battery(given or derive(*DEFAULT_SYMMETRIC), spec))
    if "asymmetry" in suites and (args.suite != "all" or given is None or not classify(given).symmetric):
        reports.append(_asymmetry_battery(given or derive(*DEFAULT_ASYMMETRIC), spec, args.mu_max))
    passed = all(r.passed for r in reports)
    failures = [dict(c, suite=r.name) for r in reports for c in r.checks if not c["ok"]]
    _emit(args, dumps({"passed": passed, "suites": [r.as_dict() for r in reports], "failures": failures}))
    return EXIT_OK if passed else EXIT_FAILED


def cmd_perturb(args) -> int:
    params = _params(args)
    eps = tuple(args.eps) if args.eps else DEFAULT_EPS
    if any(not 0.0 < e < 0.5 for e in eps):
        raise InputError("--eps values must lie in (0, 0.5)")
    spec = _spec(args)
    model = build_model(params, spec)
    fit = piecewise_fit(model, eps, spec) if args.variant == "piecewise" else second_order_fit(model, eps, spec)
    report = {
        "params": params.as_dict(),
        "variant": args.variant,
        "eps_list": list(fit.eps_list),
        "fitted_c": fit.fitted_c,
        "predicted_c": fit.predicted_c,
        "relative_error": fit.relative_error,
    }
    _emit(args, dumps(report))
    return EXIT_OK


def cmd_oracle(args) -> int:
    from .oracle import minimize_rayleigh

    params = _params(args)
    result = minimize_rayleigh(params, n=args.n, starts=args.starts, iters=args.iters, seed=args.seed)
    lam = minimize_j(params, args.mu_max, _spec(args)).lambda_w
    report = {
        "params": params.as_dict(),
        "n": args.n,
        "lambda_est": result.lambda_est,
        "lambda_jfun": lam,
        "rel_diff": (result.lambda_est - lam) / lam,
    }
    _emit(args, dumps(report))
    if args.u_output:
        with open(args.u_output, "w", encoding="utf-8") as fh:
            fh.write(csv_text(("x", "u"), zip(result.nodes, result.u_best)))
    return EXIT_OK


# parser -------------------------------------------------------------------


def _common(parser, params=True):
    if params:
        parser.add_argument("--p", type=float, help="exponent on the derivative")
        parser.add_argument("--q", type=float, help="exponent on the function")
        parser.add_argument("--r", type=float, help="exponent of the constraint")
    parser.add_argument("--mu-max", type=float, default=10.0, help="initial search window for mu")
    parser.add_argument("--tol-abs", type=float, default=None, help="absolute quadrature tolerance")
    parser.add_argument("--tol-rel", type=float, default=None, help="relative quadrature tolerance")
    parser.add_argument("--format", choices=("json", "csv"), default=None)
    parser.add_argument("--output", metavar="PATH", help="write here instead of stdout")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="wirtinger", description="Optimal constants in generalized Wirtinger inequalities.")
    sub = ap.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("constant", help="lambda_W, lambda_P and the minimizer of J")
    _common(sp)
    sp.set_defaults(func=cmd_constant)

    sp = sub.add_parser("jscan", help="table of J and J' on [0, mu_max]")
    _common(sp)
    sp.add_argument("--grid", type=int, default=41, help="number of mu samples")
    sp.set_defaults(func=cmd_jscan)

    sp = sub.add_parser("region-scan", help="phase diagram over a (p, q, r) grid")
    _common(sp)
    sp.add_argument("--p-range", type=float, nargs=2, metavar=("LO", "HI"))
    sp.add_argument("--q-range", type=float, nargs=2, metavar=("LO", "HI"))
    sp.add_argument("--r-range", type=float, nargs=2, metavar=("LO", "HI"))
    sp.add_argument("--steps", type=int, nargs=3, default=(20, 40, 2), metavar=("NP", "NQ", "NR"),
                    help="grid points per axis; ignored for fixed axes")
    sp.add_argument("--threads", type=int, default=None, help="worker processes (default: all cores)")
    sp.add_argument("--resume", metavar="PATH", help="JSON-lines checkpoint, appended as cells finish")
    sp.set_defaults(func=cmd_region_scan)

    sp = sub.add_parser("profile", help="u_P and u_W on [-T, T] (CSV by default)")
    _common(sp)
    sp.add_argument("--points", type=int, default=101)
    sp.set_defaults(func=cmd_profile)

    sp = sub.add_parser("verify", help="run verification batteries")
    _common(sp)
    sp.add_argument("--suite", choices=("symmetry", "asymmetry", "identities", "all"), default="all")
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--samples", type=int, default=200, help="random samples for the identities suite")
    sp.set_defaults(func=cmd_verify)

    sp = sub.add_parser("perturb", help="second-order coefficient of the perturbed quotient")
    _common(sp)
    sp.add_argument("--eps", type=float, nargs="+", help="positive perturbation sizes")
    sp.add_argument("--variant", choices=("optimal", "piecewise"), default="optimal")
    sp.set_defaults(func=cmd_perturb)

    sp = sub.add_parser("oracle", help="discrete Rayleigh quotient minimization")
    _common(sp)
    sp.add_argument("--n", type=int, default=400, help="grid cells on [-1, 1]")
    sp.add_argument("--starts", type=int, default=3)
    sp.add_argument("--iters", type=int, default=400)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--u-output", metavar="PATH", help="CSV of the best discrete profile")
    sp.set_defaults(func=cmd_oracle)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (DomainError, InputError, ValueError, OSError) as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except WirtingerError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_FAILED
    except KeyboardInterrupt:
        print("interrupted; completed cells are in the checkpoint", file=sys.stderr)
        return 130


if __name__ == "__main__":
    raise SystemExit(main())
