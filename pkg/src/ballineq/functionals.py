"""Left/right-side evaluators for the ten inequalities, quotients, deficits,
and derivative-free quotient minimization over trial families.

Every inequality is handled in root-normalized form: constant * lhs <= rhs
where lhs and rhs are first powers (the printed integrals raised to 1/sigma,
1/theta, 1/p or 1/p* as appropriate), so quotients are comparable across
inequalities and scale invariance is a single assertion per side.

Ball-side integrands carry weights that are powers of
w(r) = (q-1) log_q(R/r) = 1 - (r/R)^(q-1), singular at r = R.  When a
profile reaches the boundary and the weight exponent exceeds 0.5 (or the
net endpoint power is negative), the integral is evaluated in the
substituted variable s = w(r), where the weight is an exact power of s; a
further graded map s = s_mid * z^m flattens strongly singular powers.
Profiles that vanish at the boundary like a low power (the Hardy
near-extremal family) carry exact s-space evaluators for this path, since
r-space evaluation loses the boundary layer to rounding.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from functools import lru_cache
from typing import Callable, NamedTuple, Optional, Sequence

import numpy as np
from scipy.optimize import minimize as _nelder_mead

from .errors import DomainError, NonConvergenceError
from .geometry import sphere_area
from .params import InequalityId, InequalityParams
from .profiles import RadialProfile, ZonalFunction, _is_nonincreasing, support_lower_edge
from .quad import QuadratureConfig, integrate, integrate_semi_infinite
from .special import alvino_constant, ball_constant, sobolev_constant

__all__ = [
    "SideReport",
    "TrialFamily",
    "MinimizeOptions",
    "MinimizeResult",
    "side_lhs",
    "side_rhs",
    "evaluate",
    "strict_chain",
    "minimize_quotient",
    "alvino_moser_exact",
    "ball_extremal_family",
    "hardy_trial_family",
    "ckn_power_family",
    "truncated_at_family",
    "DEFAULT_CONFIG",
]

# functionals default: the boundary substitution is on; flip it off to force
# the raw r-space path (used by the debug cross-check)
DEFAULT_CONFIG = QuadratureConfig(boundary_substitution=True)

_ZONAL_IDS = (InequalityId.BALL_SOBOLEV_GENERAL, InequalityId.BALL_CKN)
_BALL_IDS = (
    InequalityId.BALL_SOBOLEV_RADIAL,
    InequalityId.BALL_SOBOLEV_GENERAL,
    InequalityId.BALL_CKN,
    InequalityId.BALL_CKN_HOMOG,
    InequalityId.HARDY_BALL,
    InequalityId.HARDY_CRITICAL,
    InequalityId.ALVINO,
)


@dataclass(frozen=True)
class SideReport:
    """Both sides of one inequality instance, root-normalized."""

    inequality: InequalityId
    lhs: float
    rhs: float
    constant: float
    quotient: float
    deficit: float
    quad_error: float
    constant_estimated: bool = False


class _Integral(NamedTuple):
    value: float
    error: float
    evaluations: int


def _w_of_r(r, q: float, R: float):
    """(q-1) log_q(R/r) = 1 - (r/R)^(q-1), computed without cancellation."""
    r_arr = np.asarray(r, dtype=float)
    with np.errstate(divide="ignore"):
        return -np.expm1((q - 1.0) * np.log(r_arr / R))


def _r_of_w(s, q: float, R: float):
    s_arr = np.asarray(s, dtype=float)
    return R * np.exp(np.log1p(-s_arr) / (q - 1.0))


def _term_callable(u: RadialProfile, kind: str) -> Callable:
    return u if kind == "value" else u.diff


def _term_edge(u: RadialProfile, kind: str) -> Optional[float]:
    if u.edge_power is None:
        return None
    if math.isinf(u.edge_power):
        return math.inf
    return u.edge_power if kind == "value" else u.edge_power - 1.0


def _term_s_callable(u: RadialProfile, kind: str, q: float) -> Optional[Callable]:
    if getattr(u, "s_weight_q", None) is None:
        return None
    if abs(u.s_weight_q - q) > 1e-9 * max(1.0, q):
        return None
    return u.s_value if kind == "value" else u.s_deriv


def _ratio_power(term_vals, w_vals, B: float, E: float, weight_scale: float):
    """(|term| * (w/scale)^(-E/B))^B with the 0 * inf corner forced to 0."""
    t = np.abs(np.asarray(term_vals, dtype=float))
    if E == 0.0:
        return t**B
    with np.errstate(divide="ignore", over="ignore", under="ignore", invalid="ignore"):
        ratio = t * (np.asarray(w_vals) / weight_scale) ** (-E / B)
    return np.where(t == 0.0, 0.0, ratio) ** B


def _radial_power_integral(u: RadialProfile, kind: str, A: float, B: float, E: float,
                           q: float, R: float, cfg: QuadratureConfig,
                           weight_scale: float = 1.0) -> _Integral:
    """integral over (0, R) of r^(A-1) (|term(r)| (w/scale)^(-E/B))^B dr.

    ``kind`` selects the profile value or its radial derivative as the term.
    """
    term = _term_callable(u, kind)
    upper = min(u.outer_radius, R)
    pts = [b for b in u.breakpoints if 0.0 < b < upper]

    edge = _term_edge(u, kind)
    gamma_s = math.inf if (edge is not None and math.isinf(edge)) else (
        B * (edge if edge is not None else 0.0) - E)
    reaches_boundary = upper >= R * (1.0 - 1e-12)
    if reaches_boundary and gamma_s <= -1.0:
        raise DomainError("integrand is non-integrable at the boundary")
    singular = reaches_boundary and (E > 0.5 or gamma_s < -0.05)

    def f_plain(r):
        r_arr = np.asarray(r, dtype=float)
        return _ratio_power(term(r_arr), _w_of_r(r_arr, q, R), B, E, weight_scale) \
            * r_arr ** (A - 1.0)

    if not (singular and cfg.boundary_substitution):
        plain_cfg = replace(cfg, boundary_substitution=False)
        res = integrate(f_plain, 0.0, upper, plain_cfg, points=pts)
        return _Integral(res.value, res.error_estimate, res.evaluations)

    # split at w = 1/2; the inner region is regular, the outer is integrated
    # in s.  For q very close to 1 the w = 1/2 radius underflows to 0 and the
    # whole integral runs in s over (0, 1).
    s_mid = 0.5
    r_mid = float(_r_of_w(s_mid, q, R))
    plain_cfg = replace(cfg, boundary_substitution=False)
    if r_mid > 1e-12 * R:
        inner = integrate(f_plain, 0.0, r_mid, plain_cfg,
                          points=[b for b in pts if b < r_mid])
        s_pts = [b for b in pts if b >= r_mid]
    else:
        s_mid = 1.0
        r_mid = 0.0
        inner = None
        s_pts = pts

    m = 1 if gamma_s >= -0.05 else min(256, math.ceil(1.5 / (1.0 + gamma_s)))
    term_s = _term_s_callable(u, kind, q)
    if m > 1 and term_s is None:
        raise DomainError(
            "strongly singular boundary weight needs a profile with exact "
            "s-space evaluators (s_value/s_deriv)")

    def f_sub(z):
        z_arr = np.asarray(z, dtype=float)
        s = s_mid * z_arr**m
        ok = (s > 1e-300) & (s < 1.0)
        s = np.where(ok, s, 0.5)
        r_arr = _r_of_w(s, q, R)
        tv = term_s(s) if term_s is not None else term(r_arr)
        core = _ratio_power(tv, s, B, E, weight_scale) * r_arr ** (A - 1.0)
        # dr = -R/(q-1) (1-s)^(1/(q-1)-1) ds, ds = s_mid m z^(m-1) dz
        jac = (R / (q - 1.0)) * np.exp((1.0 / (q - 1.0) - 1.0) * np.log1p(-s)) \
            * s_mid * m * z_arr ** (m - 1.0)
        return np.where(ok, core * jac, 0.0)

    z_pts = [float((_w_of_r(b, q, R) / s_mid) ** (1.0 / m)) for b in s_pts]
    outer = integrate(f_sub, 0.0, 1.0, plain_cfg, points=z_pts)
    if inner is None:
        return _Integral(outer.value, outer.error_estimate, outer.evaluations)
    return _Integral(inner.value + outer.value,
                     inner.error_estimate + outer.error_estimate,
                     inner.evaluations + outer.evaluations)


def _space_power_integral(u: RadialProfile, kind: str, A: float, B: float,
                          cfg: QuadratureConfig) -> _Integral:
    """integral over (0, outer) or (0, infinity) of rho^(A-1) |term|^B d rho.

    Both endpoints are pulled through log substitutions: power behavior at
    rho = 0 or slow power decay at infinity becomes exponential decay in the
    log variable, which the compactified rule resolves even for margins far
    too small for direct integration (the near-extremal trial tails).
    """
    term = _term_callable(u, kind)

    def f_log(log_rho):
        # |term(rho)|^B rho^(A_eff - 1) * rho assembled in log space: the
        # substitution rho = e^(+-xi) visits magnitudes where the direct
        # product would overflow or hit 0 * inf before the integrand decays
        log_rho = np.asarray(log_rho, dtype=float)
        with np.errstate(divide="ignore", over="ignore", under="ignore", invalid="ignore"):
            rho = np.exp(log_rho)
            tv = np.abs(np.asarray(term(rho), dtype=float))
            lg = B * np.log(tv) + A * log_rho
        lg = np.where(np.isnan(lg), -np.inf, lg)
        return np.exp(np.minimum(lg, 709.0))

    plain_cfg = replace(cfg, boundary_substitution=False)
    outer = u.outer_radius
    mid = 1.0 if math.isinf(outer) else 0.5 * outer
    log_mid = math.log(mid)
    pts = [b for b in u.breakpoints if 0.0 < b < outer]

    # (0, mid] in xi = log(mid/rho)
    low = integrate_semi_infinite(lambda xi: f_log(log_mid - np.asarray(xi, dtype=float)),
                                  0.0, plain_cfg,
                                  points=[math.log(mid / b) for b in pts if b < mid])
    if math.isinf(outer):
        # [mid, infinity) in xi = log(rho/mid)
        high = integrate_semi_infinite(
            lambda xi: f_log(log_mid + np.asarray(xi, dtype=float)),
            0.0, plain_cfg, points=[math.log(b / mid) for b in pts if b > mid])
    else:
        def f_plain(rho):
            rho_arr = np.asarray(rho, dtype=float)
            tv = np.abs(np.asarray(term(rho_arr), dtype=float))
            return tv**B * rho_arr ** (A - 1.0)

        high = integrate(f_plain, mid, outer, plain_cfg,
                         points=[b for b in pts if b > mid])
    return _Integral(low.value + high.value,
                     low.error_estimate + high.error_estimate,
                     low.evaluations + high.evaluations)


def _zonal_tensor_integral(u: ZonalFunction, n: int, A: float, B: float,
                           divide_by_w: bool, q: float, R: float,
                           cfg: QuadratureConfig) -> _Integral:
    """Tensor integral of r^(A-1) |L u|^B (or |grad u|^B) over the ball.

    |L u|^2 = radial^2 + (tangential / w)^2 with w = (q-1) log_q(R/|x|);
    without the division this is the plain gradient magnitude.
    """
    f = u.radial
    h_val, h_der = u.angular.value, u.angular.deriv
    upper = min(f.outer_radius, R)
    pts = [b for b in f.breakpoints if 0.0 < b < upper]
    if upper >= R * (1.0 - 1e-12) and divide_by_w and (
            f.edge_power is None or (not math.isinf(f.edge_power) and f.edge_power < 1.0)):
        raise DomainError("zonal trials must vanish at the boundary at least linearly")

    if n == 2 and u.angular.variable == "angle":
        t_lo, t_hi = 0.0, 2.0 * math.pi
        factor = 1.0
        ang_w = lambda t: 1.0
        tan_geom = lambda t: 1.0
    else:
        t_lo, t_hi = -1.0, 1.0
        factor = sphere_area(n - 1)
        expo = 0.5 * (n - 3)
        ang_w = lambda t: (1.0 - t * t) ** expo
        tan_geom = lambda t: np.sqrt(np.maximum(0.0, 1.0 - t * t))

    plain_cfg = replace(cfg, boundary_substitution=False)
    stats = {"evals": 0, "worst_rel": 0.0}

    def outer(r_arr):
        r_arr = np.atleast_1d(np.asarray(r_arr, dtype=float))
        out = np.empty_like(r_arr)
        for i, r in enumerate(r_arr):
            fv = float(f(r))
            fd = float(f.diff(r))
            wv = float(_w_of_r(r, q, R)) if divide_by_w else 1.0

            def g(t):
                t_arr = np.asarray(t, dtype=float)
                rad = fd * h_val(t_arr)
                tan = fv * h_der(t_arr) * tan_geom(t_arr) / r
                mag = np.sqrt(rad**2 + (tan / wv) ** 2)
                return mag**B * ang_w(t_arr)

            res = integrate(g, t_lo, t_hi, plain_cfg)
            stats["evals"] += res.evaluations
            if res.value != 0.0:
                stats["worst_rel"] = max(stats["worst_rel"],
                                         res.error_estimate / abs(res.value))
            out[i] = res.value * r ** (A - 1.0)
        return out

    res = integrate(outer, 0.0, upper, plain_cfg, points=pts)
    err = factor * (res.error_estimate + stats["worst_rel"] * abs(res.value))
    return _Integral(factor * res.value, err, res.evaluations + stats["evals"])


def _angular_norm_integral(u: ZonalFunction, n: int, B: float,
                           cfg: QuadratureConfig) -> _Integral:
    """integral of |h|^B over the sphere factor (without the omega constant)."""
    plain_cfg = replace(cfg, boundary_substitution=False)
    if n == 2 and u.angular.variable == "angle":
        res = integrate(lambda t: np.abs(u.angular.value(np.asarray(t, dtype=float))) ** B,
                        0.0, 2.0 * math.pi, plain_cfg)
    else:
        expo = 0.5 * (n - 3)
        res = integrate(
            lambda t: np.abs(u.angular.value(np.asarray(t, dtype=float))) ** B
            * (1.0 - np.asarray(t, dtype=float) ** 2) ** expo,
            -1.0, 1.0, plain_cfg)
    return _Integral(res.value, res.error_estimate, res.evaluations)


# ---------------------------------------------------------------------------
# per-inequality exponent tables
# ---------------------------------------------------------------------------


def _require(cond: bool, msg: str):
    if not cond:
        raise DomainError(msg)


def _check_compat(ineq: InequalityId, u, params: InequalityParams):
    if isinstance(u, ZonalFunction) and ineq not in _ZONAL_IDS:
        raise DomainError(f"zonal trials are only admissible for {[i.value for i in _ZONAL_IDS]}")
    radial = u.radial if isinstance(u, ZonalFunction) else u
    n, p = params.n, params.p
    if ineq in _BALL_IDS:
        _require(math.isfinite(radial.support[1]), f"{ineq.value} needs a ball-supported trial")
    if ineq in (InequalityId.BALL_SOBOLEV_RADIAL, InequalityId.BALL_SOBOLEV_GENERAL,
                InequalityId.HARDY_BALL):
        _require(abs(params.theta - p) <= 1e-9, f"{ineq.value} requires theta = p")
    if ineq in (InequalityId.BALL_SOBOLEV_RADIAL, InequalityId.BALL_SOBOLEV_GENERAL):
        _require(abs(params.sigma - params.p_star) <= 1e-9 * params.p_star,
                 f"{ineq.value} requires sigma = p*")
    if ineq is InequalityId.HARDY_BALL:
        _require(abs(params.sigma - p) <= 1e-9, "hardy-ball requires sigma = p")
    if ineq in (InequalityId.CKN_RN_HOMOG, InequalityId.BALL_CKN_HOMOG):
        _require(abs(1.0 / params.theta - 1.0 / params.sigma) <= 1e-12,
                 f"{ineq.value} requires theta = sigma")


def _alvino_sup(u: RadialProfile, n: int, R: float) -> float:
    """sup over the ball of |u| / (log(R/r))^((n-1)/n), by grid plus golden section."""
    expo = (n - 1.0) / n
    upper = min(u.outer_radius, R)
    tau_lo = max(math.log(R / upper), 1e-9) if upper < R else 1e-9
    tau_hi = math.log(R / max(support_lower_edge(u), R * math.exp(-40.0)))
    taus = np.exp(np.linspace(math.log(tau_lo), math.log(tau_hi), 4096))

    def ratio(tau):
        tau_arr = np.asarray(tau, dtype=float)
        return np.abs(np.asarray(u(R * np.exp(-tau_arr)))) * tau_arr**-expo

    vals = ratio(taus)
    i = int(np.argmax(vals))
    a = taus[max(i - 1, 0)]
    b = taus[min(i + 1, len(taus) - 1)]
    # golden-section refinement of the bracket around the best grid point
    invphi = (math.sqrt(5.0) - 1.0) / 2.0
    c = b - invphi * (b - a)
    d = a + invphi * (b - a)
    fc, fd = float(ratio(c)), float(ratio(d))
    while b - a > 1e-10 * (1.0 + abs(b)):
        if fc > fd:
            b, d, fd = d, c, fc
            c = b - invphi * (b - a)
            fc = float(ratio(c))
        else:
            a, c, fc = c, d, fd
            d = a + invphi * (b - a)
            fd = float(ratio(d))
    return max(float(vals[i]), fc, fd)


def _hardy_critical_lhs_integral(u: RadialProfile, n: int, R: float,
                                 cfg: QuadratureConfig) -> _Integral:
    """integral of |u|^n / (r log(R/r))^n over the ball, in tau = log(R/r)."""
    upper = min(u.outer_radius, R)
    tau_min = math.log(R / upper) if upper < R else 0.0
    pts = [math.log(R / b) for b in u.breakpoints if 0.0 < b < upper]

    def f(tau):
        tau_arr = np.asarray(tau, dtype=float)
        r = R * np.exp(-tau_arr)
        return np.abs(np.asarray(u(r))) ** n * tau_arr ** (-float(n))

    plain_cfg = replace(cfg, boundary_substitution=False)
    lower_edge = support_lower_edge(u)
    if lower_edge > 0.0:
        res = integrate(f, max(tau_min, 1e-300), math.log(R / lower_edge), plain_cfg,
                        points=pts)
    else:
        res = integrate_semi_infinite(lambda t: f(t + max(tau_min, 1e-12)),
                                      0.0, plain_cfg,
                                      points=[p - tau_min for p in pts])
    return _Integral(res.value, res.error_estimate, res.evaluations)


def _root(integral: _Integral, omega: float, B: float):
    """(omega * I)^(1/B) with the propagated quadrature error."""
    total = omega * integral.value
    if total <= 0.0:
        return 0.0, omega * integral.error, integral.evaluations
    value = total ** (1.0 / B)
    err = value * (integral.error / max(integral.value, 1e-300)) / B
    return value, err, integral.evaluations


def _side(ineq: InequalityId, u, params: InequalityParams, cfg: QuadratureConfig,
          which: str):
    """Root-normalized side value with its quadrature error estimate."""
    _check_compat(ineq, u, params)
    n, p, theta, sigma, R, q = (params.n, params.p, params.theta, params.sigma,
                                params.R, params.q)
    p_star = params.p_star
    omega = sphere_area(n)
    zonal = isinstance(u, ZonalFunction)
    radial = u.radial if zonal else u

    if ineq is InequalityId.SOBOLEV_RN:
        if which == "lhs":
            return _root(_space_power_integral(radial, "value", float(n), p_star, cfg),
                         omega, p_star)
        return _root(_space_power_integral(radial, "deriv", float(n), p, cfg), omega, p)

    if ineq is InequalityId.CKN_RN:
        if which == "lhs":
            return _root(_space_power_integral(radial, "value", n * sigma / p_star, sigma, cfg),
                         omega, sigma)
        return _root(_space_power_integral(radial, "deriv", n * theta / p, theta, cfg),
                     omega, theta)

    if ineq is InequalityId.CKN_RN_HOMOG:
        if which == "lhs":
            return _root(_space_power_integral(radial, "value", n * theta / p_star, theta, cfg),
                         omega, theta)
        return _root(_space_power_integral(radial, "deriv", n * theta / p, theta, cfg),
                     omega, theta)

    if ineq in (InequalityId.BALL_SOBOLEV_RADIAL, InequalityId.BALL_SOBOLEV_GENERAL):
        if which == "lhs":
            # weight [log_q(R/r)]^(p(n-1)/(n-p)); the per-point ratio
            # |u| (log_q)^(-(n-1)/n) stays bounded even for p close to n
            E = p * (n - 1.0) / (n - p)
            if zonal:
                rad_int = _radial_power_integral(radial, "value", float(n), p_star, E,
                                                 q, R, cfg, weight_scale=q - 1.0)
                ang = _angular_norm_integral(u, n, p_star, cfg)
                total = _Integral(rad_int.value * ang.value,
                                  rad_int.error * ang.value + ang.error * abs(rad_int.value),
                                  rad_int.evaluations + ang.evaluations)
                return _root(total, sphere_area(n - 1), p_star)
            return _root(_radial_power_integral(radial, "value", float(n), p_star, E,
                                                q, R, cfg, weight_scale=q - 1.0),
                         omega, p_star)
        if ineq is InequalityId.BALL_SOBOLEV_RADIAL or not zonal:
            return _root(_radial_power_integral(radial, "deriv", float(n), p, 0.0,
                                                q, R, cfg), omega, p)
        return _root(_zonal_tensor_integral(u, n, float(n), p, True, q, R, cfg), 1.0, p)

    if ineq in (InequalityId.BALL_CKN, InequalityId.BALL_CKN_HOMOG):
        if which == "lhs":
            E = theta if ineq is InequalityId.BALL_CKN_HOMOG else 1.0 + sigma * (theta - 1.0) / theta
            B = theta if ineq is InequalityId.BALL_CKN_HOMOG else sigma
            A = n * theta / p_star if ineq is InequalityId.BALL_CKN_HOMOG else n * sigma / p_star
            if zonal:
                rad_int = _radial_power_integral(radial, "value", A, B, E, q, R, cfg)
                ang = _angular_norm_integral(u, n, B, cfg)
                total = _Integral(rad_int.value * ang.value,
                                  rad_int.error * ang.value + ang.error * abs(rad_int.value),
                                  rad_int.evaluations + ang.evaluations)
                return _root(total, sphere_area(n - 1), B)
            return _root(_radial_power_integral(radial, "value", A, B, E, q, R, cfg),
                         omega, B)
        A = n * theta / p
        if ineq is InequalityId.BALL_CKN_HOMOG or not zonal:
            return _root(_radial_power_integral(radial, "deriv", A, theta, 0.0, q, R, cfg),
                         omega, theta)
        return _root(_zonal_tensor_integral(u, n, A, theta, True, q, R, cfg), 1.0, theta)

    if ineq is InequalityId.HARDY_BALL:
        if which == "lhs":
            return _root(_radial_power_integral(radial, "value", float(n - p), p, p,
                                                q, R, cfg, weight_scale=q - 1.0),
                         omega, p)
        return _root(_radial_power_integral(radial, "deriv", float(n), p, 0.0, q, R, cfg),
                     omega, p)

    if ineq is InequalityId.HARDY_CRITICAL:
        if which == "lhs":
            return _root(_hardy_critical_lhs_integral(radial, n, R, cfg), omega, float(n))
        return _root(_radial_power_integral(radial, "deriv", float(n), float(n), 0.0,
                                            q, R, cfg), omega, float(n))

    if ineq is InequalityId.ALVINO:
        if which == "lhs":
            return _alvino_sup(radial, n, R), 0.0, 4096
        return _root(_radial_power_integral(radial, "deriv", float(n), float(n), 0.0,
                                            q, R, cfg), omega, float(n))

    raise DomainError(f"unknown inequality id {ineq}")


def _side_checked(ineq, u, params, cfg, which, debug):
    value, err, evals = _side(ineq, u, params, cfg, which)
    if debug and cfg.boundary_substitution:
        raw = _side(ineq, u, params, replace(cfg, boundary_substitution=False), which)
        if abs(raw[0] - value) > 1e-7 * max(abs(value), 1.0):
            raise RuntimeError(
                f"raw and substituted evaluations disagree: {raw[0]!r} vs {value!r}")
    return value, err, evals


def side_lhs(ineq: InequalityId, u, params: InequalityParams,
             cfg: QuadratureConfig = DEFAULT_CONFIG, debug: bool = False) -> float:
    """The root-normalized left side (excluding the constant)."""
    return _side_checked(ineq, u, params, cfg, "lhs", debug)[0]


def side_rhs(ineq: InequalityId, u, params: InequalityParams,
             cfg: QuadratureConfig = DEFAULT_CONFIG, debug: bool = False) -> float:
    """The root-normalized right side."""
    return _side_checked(ineq, u, params, cfg, "rhs", debug)[0]


def _closed_form_constant(ineq: InequalityId, params: InequalityParams):
    """Root-normalized sharp constant, or None when only an estimate exists."""
    n, p = params.n, params.p
    if ineq is InequalityId.SOBOLEV_RN:
        return sobolev_constant(n, p)
    if ineq in (InequalityId.BALL_SOBOLEV_RADIAL, InequalityId.BALL_SOBOLEV_GENERAL):
        return ball_constant(n, p)
    if ineq in (InequalityId.CKN_RN_HOMOG, InequalityId.BALL_CKN_HOMOG):
        return (n - p) / p  # theta-th root of ((n-p)/p)^theta
    if ineq is InequalityId.HARDY_BALL:
        return (p - 1.0) / p  # p-th root of ((p-1)/p)^p
    if ineq is InequalityId.HARDY_CRITICAL:
        return (n - 1.0) / n
    if ineq is InequalityId.ALVINO:
        return alvino_constant(n)
    # ckn-rn / ball-ckn share the whole-space CKN constant
    if abs(params.theta - p) <= 1e-9 and abs(params.sigma - params.p_star) <= 1e-9 * params.p_star:
        return sobolev_constant(n, p)
    if abs(1.0 / params.theta - 1.0 / params.sigma) <= 1e-12:
        return (n - p) / p
    return None


@lru_cache(maxsize=32)
def _estimated_ckn_constant(n: int, p: float, theta: float, sigma: float) -> float:
    """Minimization estimate of the general CKN constant (no closed form exists)."""
    from .params import make_params

    params = make_params(n, p, theta, sigma, 1.0)
    opts = MinimizeOptions(max_evals=600, quad_rel_tol=1e-7)
    best = math.inf
    for family in (ckn_power_family(params), _at_like_family(n, p)):
        res = minimize_quotient(InequalityId.CKN_RN, family,
                                params, family.center(), opts)
        best = min(best, res.quotient)
    return best


def evaluate(ineq: InequalityId, u, params: InequalityParams,
             cfg: QuadratureConfig = DEFAULT_CONFIG,
             estimate_constant: bool = True) -> SideReport:
    """Evaluate both sides, attach the sharp constant, quotient, and deficit.

    Constants for ckn-rn/ball-ckn outside the Sobolev and homogeneous
    specializations have no closed form; they are estimated by quotient
    minimization and flagged ``constant_estimated``.
    """
    lhs, lhs_err, _ = _side_checked(ineq, u, params, cfg, "lhs", False)
    rhs, rhs_err, _ = _side_checked(ineq, u, params, cfg, "rhs", False)
    constant = _closed_form_constant(ineq, params)
    estimated = False
    if constant is None:
        estimated = True
        constant = _estimated_ckn_constant(params.n, params.p, params.theta,
                                           params.sigma) if estimate_constant else math.nan
    quotient = rhs / lhs if lhs > 0.0 else math.inf
    return SideReport(inequality=ineq, lhs=lhs, rhs=rhs, constant=constant,
                      quotient=quotient, deficit=rhs - constant * lhs,
                      quad_error=lhs_err + rhs_err, constant_estimated=estimated)


def strict_chain(u: RadialProfile, params: InequalityParams,
                 cfg: QuadratureConfig = DEFAULT_CONFIG):
    """The strict comparison chain for a nonincreasing radial trial on the ball.

    Returns (S ||u||_{p*}, S ||u||_{p*,weighted}, ||grad u||_p); the first is
    strictly below the second (the weight exceeds 1 inside the ball) and the
    second is at most the third, with equality exactly on the extremal family.
    """
    if not _is_nonincreasing(u):
        raise DomainError("strict_chain requires a nonincreasing profile")
    n, p, R, q = params.n, params.p, params.R, params.q
    p_star = params.p_star
    omega = sphere_area(n)
    S = sobolev_constant(n, p)
    E = p * (n - 1.0) / (n - p)
    plain, _, _ = _root(_radial_power_integral(u, "value", float(n), p_star, 0.0,
                                               q, R, cfg), omega, p_star)
    weighted, _, _ = _root(_radial_power_integral(u, "value", float(n), p_star, E,
                                                  q, R, cfg), omega, p_star)
    grad, _, _ = _root(_radial_power_integral(u, "deriv", float(n), p, 0.0, q, R, cfg),
                       omega, p)
    return S * plain, S * weighted, grad


def equivalence_norms(v: RadialProfile, params: InequalityParams,
                      cfg: QuadratureConfig = DEFAULT_CONFIG):
    """The three norm equalities between a whole-space profile and its ball image.

    Returns (tag, whole_space_value, ball_value) triples for the weighted
    value norm, the gradient norm against the ball operator, and the radial
    gradient norm; for radial profiles the operator reduces to the radial
    derivative, so the last two ball values coincide by construction and
    the content of the check is space-side vs ball-side quadrature.
    """
    from .transforms import to_ball

    n, p, theta, sigma = params.n, params.p, params.theta, params.sigma
    omega = sphere_area(n)
    u = to_ball(v, params)
    x_rn, _, _ = _root(_space_power_integral(v, "value", n * sigma / params.p_star,
                                             sigma, cfg), omega, sigma)
    y_rn, _, _ = _root(_space_power_integral(v, "deriv", n * theta / p, theta, cfg),
                       omega, theta)
    x_ball, _, _ = _side(InequalityId.BALL_CKN, u, params, cfg, "lhs")
    y_ball, _, _ = _side(InequalityId.BALL_CKN, u, params, cfg, "rhs")
    yr_ball, _, _ = _root(_radial_power_integral(u, "deriv", n * theta / p, theta,
                                                 0.0, params.q, params.R, cfg),
                          omega, theta)
    return [
        ("equiv-value-norm", x_rn, x_ball),
        ("equiv-gradient-norm", y_rn, y_ball),
        ("equiv-radial-gradient-norm", y_rn, yr_ball),
    ]


def alvino_moser_exact(n: int, R: float, rho: float) -> SideReport:
    """Piecewise-analytic evaluation of the critical inequality on a Moser function.

    The sup on the left is attained at the plateau edge with value 1 and the
    gradient integral telescopes to the sphere area, so the quotient equals
    the sharp constant exactly.
    """
    if not (0.0 < rho < R):
        raise DomainError("need 0 < rho < R")
    lhs = 1.0
    # |grad|^n integrates to omega_{n-1} (log(R/rho))^{-1} * int_rho^R dr/r
    rhs = (sphere_area(n) * (1.0 / math.log(R / rho)) * math.log(R / rho)) ** (1.0 / n)
    constant = alvino_constant(n)
    return SideReport(inequality=InequalityId.ALVINO, lhs=lhs, rhs=rhs,
                      constant=constant, quotient=rhs / lhs,
                      deficit=rhs - constant * lhs, quad_error=0.0)


# ---------------------------------------------------------------------------
# trial families and quotient minimization
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class TrialFamily:
    """A parametric family of trial functions over a box of parameters."""

    builder: Callable
    bounds: tuple
    log_scale: tuple

    def encode(self, x):
        return np.array([math.log(v) if lg else v
                         for v, lg in zip(x, self.log_scale)])

    def decode(self, z):
        return np.array([math.exp(v) if lg else v
                         for v, lg in zip(z, self.log_scale)])

    def center(self):
        out = []
        for (lo, hi), lg in zip(self.bounds, self.log_scale):
            out.append(math.sqrt(lo * hi) if lg else 0.5 * (lo + hi))
        return np.array(out)


@dataclass(frozen=True)
class MinimizeOptions:
    max_evals: int = 2000
    xtol: float = 1e-8
    quad_rel_tol: float = 1e-7
    max_restarts: int = 5


class MinimizeResult(NamedTuple):
    quotient: float
    argmin: np.ndarray
    evaluations: int
    converged: bool


def minimize_quotient(ineq: InequalityId, family: TrialFamily,
                      params: InequalityParams, init,
                      opts: MinimizeOptions = MinimizeOptions()) -> MinimizeResult:
    """Minimize the quotient rhs/lhs over the family by Nelder-Mead with restarts.

    Runs in encoded (log where flagged) coordinates; out-of-box parameters
    are penalized.  Terminates when the simplex collapses below ``xtol``
    or the evaluation budget runs out, in which case the best-so-far pair
    is returned with ``converged=False``.
    """
    cfg = QuadratureConfig(rel_tol=opts.quad_rel_tol, abs_tol=1e-13,
                           boundary_substitution=True)
    counter = {"evals": 0}

    def objective(z):
        counter["evals"] += 1
        x = family.decode(z)
        worst = 0.0
        for v, (lo, hi) in zip(x, family.bounds):
            if v < lo:
                worst = max(worst, (lo - v) / max(abs(lo), 1.0))
            if v > hi:
                worst = max(worst, (v - hi) / max(abs(hi), 1.0))
        if worst > 0.0:
            return 1e3 * (1.0 + worst)
        try:
            u = family.builder(x)
            lhs, _, _ = _side(ineq, u, params, cfg, "lhs")
            rhs, _, _ = _side(ineq, u, params, cfg, "rhs")
        except NonConvergenceError:
            return 1e3
        if lhs <= 0.0:
            return 1e3
        return rhs / lhs

    z = family.encode(np.asarray(init, dtype=float))
    best_z = z
    best_f = objective(z)
    converged = False
    for restart in range(opts.max_restarts):
        budget = opts.max_evals - counter["evals"]
        if budget <= 2:
            break
        res = _nelder_mead(objective, best_z, method="Nelder-Mead",
                           options={"maxfev": budget, "xatol": opts.xtol,
                                    "fatol": 1e-12})
        improved = res.fun < best_f - 1e-12 * (1.0 + abs(best_f))
        if res.fun < best_f:
            best_f, best_z = res.fun, res.x
        if res.status == 0 and not improved:
            # a restarted simplex collapsed onto the same point
            converged = True
            break
    return MinimizeResult(quotient=float(best_f), argmin=family.decode(best_z),
                          evaluations=counter["evals"], converged=converged)


def ball_extremal_family(n: int, p: float, R: float) -> TrialFamily:
    """The two-parameter extremal family (a, b), searched in log space."""
    from .profiles import ExtremalParams, ball_extremal

    return TrialFamily(
        builder=lambda x: ball_extremal(ExtremalParams(x[0], x[1]), n, p, R),
        bounds=((1e-3, 1e3), (1e-3, 1e3)),
        log_scale=(True, True))


def _hardy_profile(beta: float, delta: float, q: float, R: float) -> RadialProfile:
    """min(w(r), w(delta))^beta with w = (q-1) log_q(R/r); exact s-space forms."""
    wd = float(-math.expm1((q - 1.0) * math.log(delta / R)))
    dw_scale = (q - 1.0) / R

    def val(r):
        return np.minimum(_w_of_r(r, q, R), wd) ** beta

    def der(r):
        r_arr = np.asarray(r, dtype=float)
        w = _w_of_r(r_arr, q, R)
        dw = -dw_scale * (r_arr / R) ** (q - 2.0)
        with np.errstate(divide="ignore", over="ignore"):
            out = beta * w ** (beta - 1.0) * dw
        return np.where(w < wd, out, 0.0)

    def s_val(s):
        return np.minimum(np.asarray(s, dtype=float), wd) ** beta

    def s_der(s):
        s_arr = np.asarray(s, dtype=float)
        dw = -dw_scale * np.exp(np.log1p(-s_arr) * (q - 2.0) / (q - 1.0))
        with np.errstate(divide="ignore", over="ignore"):
            out = beta * s_arr ** (beta - 1.0) * dw
        return np.where(s_arr < wd, out, 0.0)

    return RadialProfile(val, der, (0.0, R), breakpoints=(delta,), edge_power=beta,
                         s_value=s_val, s_deriv=s_der, s_weight_q=q)


def hardy_trial_family(params: InequalityParams) -> TrialFamily:
    """Truncated near-extremal family for the ball Hardy inequality.

    The profile w^beta has a log-divergent gradient integral at
    beta = (p-1)/p exactly; the box keeps beta slightly above it, where the
    quotient approaches the sharp constant from above as beta decreases.
    """
    p, q, R = params.p, params.q, params.R
    beta_min = (p - 1.0) / p + 0.005
    return TrialFamily(
        builder=lambda x: _hardy_profile(x[0], x[1], q, R),
        bounds=((beta_min, 0.95), (1e-3 * R, 0.45 * R)),
        log_scale=(False, True))


def _power_pair_profile(a: float, b: float) -> RadialProfile:
    """rho^a below 1 and rho^-b above; the classic CKN/Hardy trial shape."""

    def val(rho):
        rho_arr = np.asarray(rho, dtype=float)
        return np.where(rho_arr <= 1.0, rho_arr**a, rho_arr**-b)

    def der(rho):
        rho_arr = np.asarray(rho, dtype=float)
        return np.where(rho_arr <= 1.0, a * rho_arr ** (a - 1.0),
                        -b * rho_arr ** (-b - 1.0))

    return RadialProfile(val, der, (0.0, math.inf), breakpoints=(1.0,),
                         decay_power=b)


def ckn_power_family(params: InequalityParams) -> TrialFamily:
    """Two-sided power trials for the whole-space CKN quotients."""
    decay_min = params.n / params.p_star + 0.005
    return TrialFamily(
        builder=lambda x: _power_pair_profile(x[0], x[1]),
        bounds=((0.05, 6.0), (decay_min, decay_min + 4.0)),
        log_scale=(False, False))


def _at_like_family(n: int, p: float) -> TrialFamily:
    from .profiles import ExtremalParams, aubin_talenti

    return TrialFamily(
        builder=lambda x: aubin_talenti(ExtremalParams(x[0], x[1]), n, p),
        bounds=((1e-3, 1e3), (1e-3, 1e3)),
        log_scale=(True, True))


def truncated_at_family(n: int, p: float, R: float) -> TrialFamily:
    """Concentration family: dilated whole-space extremals cut to the ball."""
    from .profiles import ExtremalParams, truncated_aubin_talenti

    return TrialFamily(
        builder=lambda x: truncated_aubin_talenti(ExtremalParams(1.0, 1.0), n, p, R,
                                                  mu=x[0]),
        bounds=((0.1, 1e4),),
        log_scale=(True,))
