"""Reproducible experiment runner: one subcommand per verifiable claim family.

Each run writes a machine-readable report (JSON or CSV) whose rows share a
fixed column set; the process exit code is 0 only when every row passes.
Numbers are serialized with 17 significant digits so the text round-trips
losslessly to the original doubles.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
import time

import numpy as np

from .errors import DomainError, NonConvergenceError
from .functionals import (
    DEFAULT_CONFIG,
    MinimizeOptions,
    ball_extremal_family,
    ckn_power_family,
    equivalence_norms,
    evaluate,
    hardy_trial_family,
    minimize_quotient,
    strict_chain,
    truncated_at_family,
)
from .geometry import (
    RadialMap,
    det_by_elimination,
    embedded_gradient,
    gradient_split,
    jacobian_det,
    jacobian_matrix,
    pushforward_gradient_sq,
)
from .params import InequalityId, make_params, sobolev_params
from .profiles import (
    AngularFactor,
    ExtremalParams,
    RadialProfile,
    ZonalFunction,
    ball_extremal,
    bump,
    gaussian,
    truncated_aubin_talenti,
)
from .special import alvino_constant, ball_constant, hardy_ball_constant, sobolev_constant
from .transforms import ScalingSpec, scale_ball
from .quad import QuadratureConfig

SCHEMA_VERSION = "1"
ROW_FIELDS = ["inequality", "n", "p", "theta", "sigma", "R", "lambda",
              "lhs", "rhs", "constant", "quotient", "deficit", "quad_error", "pass"]


def _row(inequality, params=None, lam=None, lhs=None, rhs=None, constant=None,
         quotient=None, deficit=None, quad_error=None, ok=False, n=None, p=None):
    return {
        "inequality": str(inequality),
        "n": params.n if params is not None else n,
        "p": params.p if params is not None else p,
        "theta": params.theta if params is not None else None,
        "sigma": params.sigma if params is not None else None,
        "R": params.R if params is not None else None,
        "lambda": lam,
        "lhs": lhs,
        "rhs": rhs,
        "constant": constant,
        "quotient": quotient,
        "deficit": deficit,
        "quad_error": quad_error,
        "pass": bool(ok),
    }


def _report_row(rep, params, tol, lam=None):
    ok = rep.deficit >= -tol * max(rep.rhs, 1e-300)
    return _row(rep.inequality.value, params, lam=lam, lhs=rep.lhs, rhs=rep.rhs,
                constant=rep.constant, quotient=rep.quotient, deficit=rep.deficit,
                quad_error=rep.quad_error, ok=ok)


# ---------------------------------------------------------------------------
# experiments (shared with the test suite)
# ---------------------------------------------------------------------------


def run_constants(n, p, tol=1e-12):
    rows = []
    entries = [
        ("sobolev-rn", sobolev_constant(n, p)),
        ("ball-sobolev-radial", ball_constant(n, p)),
        ("alvino", alvino_constant(n)),
        ("hardy-ball", hardy_ball_constant(p) ** (1.0 / p)),
        ("hardy-critical", (n - 1.0) / n),
    ]
    for tag, value in entries:
        rows.append(_row(tag, n=n, p=p, constant=value,
                         ok=math.isfinite(value) and value > 0.0))
    return rows


def run_attain(n, p, R, a, b, tol=1e-6, ineq=InequalityId.BALL_SOBOLEV_RADIAL):
    params = sobolev_params(n, p, R)
    u = ball_extremal(ExtremalParams(a, b), n, p, R)
    rep = evaluate(ineq, u, params)
    ok = abs(rep.quotient / rep.constant - 1.0) <= tol
    row = _report_row(rep, params, tol)
    row["pass"] = ok
    return [row]


def _invariance_trial(ineq: InequalityId, params):
    R = params.R
    if ineq is InequalityId.BALL_CKN:
        return ZonalFunction(
            radial=bump(R, 0.45 * R, 0.25 * R),
            angular=AngularFactor(
                value=lambda t: 1.0 + 0.5 * np.asarray(t, dtype=float) ** 2,
                deriv=lambda t: np.asarray(t, dtype=float)))
    if ineq is InequalityId.BALL_SOBOLEV_RADIAL:
        return ball_extremal(ExtremalParams(1.0, 1.0), params.n, params.p, R)
    return bump(R, 0.45 * R, 0.25 * R)


def run_invariance(ineq, params, lambdas, tol=1e-6, trial=None):
    from .functionals import side_lhs, side_rhs

    u = trial if trial is not None else _invariance_trial(ineq, params)
    base_lhs = side_lhs(ineq, u, params)
    base_rhs = side_rhs(ineq, u, params)
    rows = []
    for lam in lambdas:
        u_lam = scale_ball(u, ScalingSpec(lam), params)
        lhs = side_lhs(ineq, u_lam, params)
        rhs = side_rhs(ineq, u_lam, params)
        drift = max(abs(lhs / base_lhs - 1.0), abs(rhs / base_rhs - 1.0))
        rows.append(_row(ineq.value, params, lam=lam, lhs=lhs, rhs=rhs,
                         quotient=rhs / lhs, deficit=drift, ok=drift <= tol))
    return rows


def run_equiv(params, tol=1e-6):
    n, p = params.n, params.p
    from .profiles import aubin_talenti

    trial_list = [
        ("aubin-talenti(1,1)", aubin_talenti(ExtremalParams(1.0, 1.0), n, p)),
        ("aubin-talenti(2,0.5)", aubin_talenti(ExtremalParams(2.0, 0.5), n, p)),
        ("gaussian", gaussian(1.0)),
    ]
    rows = []
    for name, v in trial_list:
        for tag, space_val, ball_val in equivalence_norms(v, params):
            rel = abs(ball_val / space_val - 1.0)
            rows.append(_row(f"{tag}[{name}]", params, lhs=space_val, rhs=ball_val,
                             quotient=ball_val / space_val, deficit=rel,
                             ok=rel <= tol))
    return rows


_JACOBIAN_MAPS = [
    ("dilation", lambda s: 1.7 * s, lambda s: 1.7 + 0.0 * s),
    ("square", lambda s: s * s, lambda s: 2.0 * s),
    ("rational", lambda s: s * (1.0 + 0.3 * s), lambda s: 1.0 + 0.6 * s),
]


def _jacobian_zonal(n):
    f = RadialProfile(
        value=lambda r: np.exp(-np.asarray(r, dtype=float) ** 2),
        derivative=lambda r: -2.0 * np.asarray(r, dtype=float)
        * np.exp(-np.asarray(r, dtype=float) ** 2),
        support=(0.0, math.inf))
    if n == 2:
        ang = AngularFactor(
            value=lambda s: 1.0 + 0.5 * np.cos(np.asarray(s, dtype=float)),
            deriv=lambda s: -0.5 * np.sin(np.asarray(s, dtype=float)),
            variable="angle")
    else:
        ang = AngularFactor(
            value=lambda t: 1.0 + np.asarray(t, dtype=float)
            + np.asarray(t, dtype=float) ** 2 / 3.0,
            deriv=lambda t: 1.0 + 2.0 * np.asarray(t, dtype=float) / 3.0)
    return ZonalFunction(radial=f, angular=ang)


def run_jacobian(dims=(2, 3, 5), samples=100, seed=42, tol=1e-9):
    rows = []
    for n in dims:
        rng = np.random.default_rng(seed)
        u = _jacobian_zonal(n)
        worst_det = 0.0
        worst_push = 0.0
        for _ in range(samples):
            y = rng.normal(size=n)
            while np.linalg.norm(y) < 1e-3:
                y = rng.normal(size=n)
            name, phi, dphi = _JACOBIAN_MAPS[rng.integers(len(_JACOBIAN_MAPS))]
            m = RadialMap(phi=phi, phi_prime=dphi)
            jac = jacobian_matrix(m, y)
            det_closed = jacobian_det(m, y)
            det_elim = det_by_elimination(jac)
            worst_det = max(worst_det, abs(det_closed - det_elim) / abs(det_elim))

            r_y = float(np.linalg.norm(y))
            x = float(phi(r_y)) * y / r_y
            if u.angular.variable == "cos":
                t = x[-1] / np.linalg.norm(x)
            else:
                t = math.atan2(x[1], x[0])
            split = gradient_split(u, n, float(np.linalg.norm(x)), float(t))
            push_closed = pushforward_gradient_sq(m, split, y)
            grad = embedded_gradient(u, x)
            push_matrix = float(np.dot(jac @ grad, jac @ grad))
            scale = max(abs(push_matrix), 1e-30)
            worst_push = max(worst_push, abs(push_closed - push_matrix) / scale)
        rows.append(_row("jacobian", n=n, lhs=worst_det, rhs=worst_push,
                         ok=worst_det <= tol and worst_push <= tol))
    return rows


def run_limit(n=3, ps=(2.5, 2.9, 2.99, 2.999), final_fraction=0.05):
    target = alvino_constant(n)
    rows = []
    gaps = []
    for p in ps:
        value = ball_constant(n, p)
        gap = abs(value - target)
        ok = not gaps or gap < gaps[-1]
        gaps.append(gap)
        rows.append(_row("ball-sobolev-radial", n=n, p=p, lhs=value, rhs=target,
                         deficit=gap, ok=ok))
    rows.append(_row("limit-summary", n=n, deficit=gaps[-1] / gaps[0],
                     ok=gaps[-1] <= final_fraction * gaps[0]))
    return rows


def run_hardy(n, p, R=1.0, tol=1e-8, within=0.10, max_evals=400):
    params = make_params(n, p, p, p, R)
    family = hardy_trial_family(params)
    constant = hardy_ball_constant(p) ** (1.0 / p)
    rows = []
    trials = [
        ("bump-mid", bump(R, 0.45 * R, 0.25 * R)),
        ("bump-inner", bump(R, 0.2 * R, 0.15 * R)),
        ("extremal", ball_extremal(ExtremalParams(1.0, 1.0), n, p, R)),
        ("family(0.6,0.2R)", family.builder(((p - 1.0) / p + 0.1, 0.2 * R))),
        ("family(0.52,0.05R)", family.builder(((p - 1.0) / p + 0.02, 0.05 * R))),
    ]
    for name, u in trials:
        rep = evaluate(InequalityId.HARDY_BALL, u, params)
        ok = rep.quotient >= constant - tol
        rows.append(_row(f"hardy-ball[{name}]", params, lhs=rep.lhs, rhs=rep.rhs,
                         constant=constant, quotient=rep.quotient,
                         deficit=rep.deficit, quad_error=rep.quad_error, ok=ok))
    res = minimize_quotient(InequalityId.HARDY_BALL, family, params,
                            family.center(), MinimizeOptions(max_evals=max_evals))
    ok = constant - tol <= res.quotient <= constant * (1.0 + within)
    rows.append(_row("hardy-ball[minimum]", params, quotient=res.quotient,
                     constant=constant, deficit=res.quotient - constant, ok=ok))
    return rows


_FAMILIES = {
    "ball-extremal": lambda params: ball_extremal_family(params.n, params.p, params.R),
    "hardy": hardy_trial_family,
    "ckn-power": ckn_power_family,
    "truncated-at": lambda params: truncated_at_family(params.n, params.p, params.R),
}


def run_optimize(ineq, params, family_name="ball-extremal", max_evals=600, tol=1e-6):
    family = _FAMILIES[family_name](params)
    res = minimize_quotient(ineq, family, params, family.center(),
                            MinimizeOptions(max_evals=max_evals))
    rep = evaluate(ineq, family.builder(res.argmin), params)
    ok = res.quotient >= rep.constant * (1.0 - tol)
    row = _report_row(rep, params, tol)
    row["quotient"] = res.quotient
    row["pass"] = ok
    return [row]


def monotone_bump(R, plateau_end, width):
    """A nonincreasing smooth bump: 1 on (0, plateau_end], then the decaying
    half of the standard kernel down to 0 at plateau_end + width."""
    if plateau_end <= 0.0 or plateau_end + width >= R:
        raise DomainError("monotone bump support must lie inside (0, R)")

    def val(r):
        z = (np.asarray(r, dtype=float) - plateau_end) / width
        zc = np.clip(z, 0.0, 1.0 - 1e-14)
        core = np.exp(1.0 - 1.0 / (1.0 - zc**2))
        return np.where(z <= 0.0, 1.0, np.where(z < 1.0, core, 0.0))

    def der(r):
        z = (np.asarray(r, dtype=float) - plateau_end) / width
        zc = np.clip(z, 0.0, 1.0 - 1e-14)
        core = np.exp(1.0 - 1.0 / (1.0 - zc**2))
        grad = core * (-2.0 * zc / (1.0 - zc**2) ** 2) / width
        return np.where((z <= 0.0) | (z >= 1.0), 0.0, grad)

    return RadialProfile(val, der, (0.0, R),
                         breakpoints=(plateau_end, plateau_end + width),
                         outer_radius=plateau_end + width)


def run_chain(n, p, R=1.0, margin=1e-8, mus=(1.0, 10.0, 100.0)):
    from .profiles import schwarz_rearrange

    params = sobolev_params(n, p, R)
    rows = []
    trials = [(f"bump{i}", monotone_bump(R, c * R, w * R))
              for i, (c, w) in enumerate(
 [(0.2, 0.3), (0.3, 0.25), (0.4, 0.35), (0.1, 0.6), (0.55, 0.2)])]
    trials.append(("rearranged-bump", schwarz_rearrange(bump(R, 0.45 * R, 0.25 * R), n)))
    # interpolation-backed rearrangements carry finite-difference derivative
    # noise well above the default quadrature tolerance
    loose = QuadratureConfig(rel_tol=1e-6, abs_tol=1e-10, boundary_substitution=True)
    for name, u in trials:
        cfg = DEFAULT_CONFIG if u.derivative is not None else loose
        first, second, third = strict_chain(u, params, cfg)
        ok = (second - first > margin * second) and (third - second > margin * third)
        rows.append(_row(f"chain[{name}]", params, lhs=first, constant=second,
                         rhs=third, quotient=third / first, deficit=third - second,
                         ok=ok))
    u = ball_extremal(ExtremalParams(1.0, 1.0), n, p, R)
    first, second, third = strict_chain(u, params)
    ok = (second - first > margin * second) and abs(third / second - 1.0) <= 1e-6
    rows.append(_row("chain[extremal]", params, lhs=first, constant=second, rhs=third,
                     quotient=third / first, deficit=third - second, ok=ok))

    S = sobolev_constant(n, p)
    params_rn = sobolev_params(n, p, R)
    prev = math.inf
    for mu in mus:
        u = truncated_aubin_talenti(ExtremalParams(1.0, 1.0), n, p, R, mu=mu)
        rep = evaluate(InequalityId.SOBOLEV_RN, u, params_rn)
        ok = S < rep.quotient < prev
        prev = rep.quotient
        rows.append(_row("sobolev-rn[concentration]", params_rn, lam=mu,
                         lhs=rep.lhs, rhs=rep.rhs, constant=S, quotient=rep.quotient,
                         deficit=rep.quotient - S, ok=ok))
    return rows


# ---------------------------------------------------------------------------
# report assembly and argument parsing
# ---------------------------------------------------------------------------


def _json_default(obj):
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    raise TypeError(f"not serializable: {obj!r}")


def _format_number(x):
    if x is None:
        return ""
    if isinstance(x, bool):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return f"{float(x):.17g}"


def write_report(report: dict, fmt: str, out_path):
    if fmt == "json":
        text = json.dumps(report, indent=2, default=_json_default, allow_nan=False)
    else:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(ROW_FIELDS)
        for row in report["rows"]:
            writer.writerow([_format_number(row[k]) for k in ROW_FIELDS])
        text = buf.getvalue()
    if out_path:
        with open(out_path, "w", encoding="utf-8") as handle:
            handle.write(text)
    else:
        sys.stdout.write(text + ("\n" if not text.endswith("\n") else ""))


def _assemble(config: dict, rows: list, t0: float) -> dict:
    n_pass = sum(1 for r in rows if r["pass"])
    return {
        "schema_version": SCHEMA_VERSION,
        "experiment": config,
        "rows": rows,
        "summary": {"pass": n_pass, "fail": len(rows) - n_pass},
        "wall_time_s": time.perf_counter() - t0,
    }


def _float_list(text):
    return [float(tok) for tok in text.split(",") if tok.strip()]


def _int_list(text):
    return [int(tok) for tok in text.split(",") if tok.strip()]


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ballineq",
        description="Verify sharp Sobolev/Hardy/CKN inequalities on balls")
    sub = parser.add_subparsers(dest="subcommand", required=True)

    def common(sp, theta_sigma=False):
        sp.add_argument("--n", type=int, default=3)
        sp.add_argument("--p", type=float, default=2.0)
        if theta_sigma:
            sp.add_argument("--theta", type=float, default=None)
            sp.add_argument("--sigma", type=float, default=None)
        sp.add_argument("--R", type=float, default=1.0)
        sp.add_argument("--tol", type=float, default=None)
        sp.add_argument("--seed", type=int, default=42)
        sp.add_argument("--format", choices=("json", "csv"), default="json")
        sp.add_argument("--out", default=None)

    sp = sub.add_parser("constants", help="closed-form sharp constants")
    common(sp)

    sp = sub.add_parser("attain", help="extremal attainment of the ball constant")
    common(sp)
    sp.add_argument("--a", type=float, default=1.0)
    sp.add_argument("--b", type=float, default=1.0)

    sp = sub.add_parser("invariance", help="scale invariance of both sides")
    common(sp, theta_sigma=True)
    sp.add_argument("--ineq", default="ball-sobolev-radial",
                    choices=[i.value for i in InequalityId])
    sp.add_argument("--lambdas", type=_float_list, default=[0.25, 0.5, 2.0, 4.0])

    sp = sub.add_parser("equiv", help="ball <-> whole-space norm equalities")
    common(sp, theta_sigma=True)

    sp = sub.add_parser("jacobian", help="radial-map Jacobian identities")
    common(sp)
    sp.add_argument("--dims", type=_int_list, default=[2, 3, 5])
    sp.add_argument("--samples", type=int, default=100)

    sp = sub.add_parser("limit", help="the critical limit of the ball constant")
    common(sp)
    sp.add_argument("--ps", type=_float_list, default=[2.5, 2.9, 2.99, 2.999])

    sp = sub.add_parser("hardy", help="Hardy sharpness probes")
    common(sp)
    sp.add_argument("--max-evals", type=int, default=400)

    sp = sub.add_parser("optimize", help="quotient minimization over a family")
    common(sp, theta_sigma=True)
    sp.add_argument("--ineq", default="ball-sobolev-radial",
                    choices=[i.value for i in InequalityId])
    sp.add_argument("--family", default="ball-extremal", choices=sorted(_FAMILIES))
    sp.add_argument("--max-evals", type=int, default=600)

    sp = sub.add_parser("chain", help="strict chain and non-attainment probes")
    common(sp)
    return parser


def _params_from_args(args):
    theta = getattr(args, "theta", None)
    sigma = getattr(args, "sigma", None)
    if theta is None and sigma is None:
        return sobolev_params(args.n, args.p, args.R)
    theta = theta if theta is not None else args.p
    if sigma is None:
        sigma = args.n * args.p / (args.n - args.p)
    return make_params(args.n, args.p, theta, sigma, args.R)


def run(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    config = {k: v for k, v in sorted(vars(args).items()) if k not in ("out", "format")}
    t0 = time.perf_counter()
    exit_code = 0
    try:
        if args.subcommand == "constants":
            rows = run_constants(args.n, args.p)
        elif args.subcommand == "attain":
            rows = run_attain(args.n, args.p, args.R, args.a, args.b,
                              tol=args.tol or 1e-6)
        elif args.subcommand == "invariance":
            params = _params_from_args(args)
            rows = run_invariance(InequalityId(args.ineq), params, args.lambdas,
                                  tol=args.tol or 1e-6)
        elif args.subcommand == "equiv":
            rows = run_equiv(_params_from_args(args), tol=args.tol or 1e-6)
        elif args.subcommand == "jacobian":
            rows = run_jacobian(tuple(args.dims), args.samples, args.seed,
                                tol=args.tol or 1e-9)
        elif args.subcommand == "limit":
            rows = run_limit(args.n, tuple(args.ps))
        elif args.subcommand == "hardy":
            rows = run_hardy(args.n, args.p, args.R, tol=args.tol or 1e-8,
                             max_evals=args.max_evals)
        elif args.subcommand == "optimize":
            params = _params_from_args(args)
            rows = run_optimize(InequalityId(args.ineq), params, args.family,
                                args.max_evals, tol=args.tol or 1e-6)
        elif args.subcommand == "chain":
            rows = run_chain(args.n, args.p, args.R)
        else:  # pragma: no cover
            parser.error(f"unknown subcommand {args.subcommand}")
    except DomainError as exc:
        print(f"parameter error: {exc}", file=sys.stderr)
        return 2
    except NonConvergenceError as exc:
        report = _assemble(config, [], t0)
        report["error"] = str(exc)
        write_report(report, args.format, args.out)
        return 1

    report = _assemble(config, rows, t0)
    write_report(report, args.format, args.out)
    if any(not r["pass"] for r in rows):
        exit_code = 1
    return exit_code


def entry():  # console-script hook
    sys.exit(run())


if __name__ == "__main__":
    sys.exit(run())
