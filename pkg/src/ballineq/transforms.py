"""The three function transformations: dilation, nonlinear ball scaling, and
the ball <-> whole-space change of variables, plus the scaling ODE residual
and the intertwining identity.

The ball scaling composes the radial map

    phi_lam(r) = R exp_q(lam log_q(r/R))
              = [lam r^-(q-1) + (1-lam) R^-(q-1)]^(-1/(q-1))

with the amplitude factor lam^(-(theta-1)/theta).  On the critical branch
(q -> 1) the map degenerates to R (r/R)^lam with amplitude exponent
(n-1)/n.  Endpoints are handled analytically: phi_lam(R) = R exactly and
the maps send 0+ to 0+.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .errors import DomainError
from .params import InequalityParams
from .profiles import RadialProfile, ZonalFunction
from .special import QIndex

__all__ = [
    "ScalingSpec",
    "phi_lambda",
    "phi_lambda_prime",
    "scale_ball",
    "critical_scale",
    "dilate",
    "to_ball",
    "from_ball",
    "ode_residual",
    "intertwine_gap",
]


@dataclass(frozen=True)
class ScalingSpec:
    """A positive scale factor driving dilations and ball scalings."""

    lam: float

    def __post_init__(self):
        if not self.lam > 0.0:
            raise DomainError("scale factor must be positive")

    @classmethod
    def coerce(cls, s) -> "ScalingSpec":
        if isinstance(s, ScalingSpec):
            return s
        return cls(float(s))


def phi_lambda(r, s, q, R: float):
    """Radial part of the ball scaling; maps (0, R] onto (0, R] with phi(R) = R."""
    lam = ScalingSpec.coerce(s).lam
    q = QIndex.coerce(q)
    r_arr = np.asarray(r, dtype=float)
    if np.any(r_arr <= 0.0) or np.any(r_arr > R * (1.0 + 1e-12)):
        raise DomainError("phi_lambda requires 0 < r <= R")
    if q.critical:
        out = R * (r_arr / R) ** lam
    else:
        k = q.q - 1.0
        bracket = lam * r_arr**-k + (1.0 - lam) * R**-k
        out = bracket ** (-1.0 / k)
    return float(out) if out.ndim == 0 else out


def phi_lambda_prime(r, s, q, R: float):
    """d/dr of phi_lambda: lam (phi/r)^q, which degenerates to lam phi/r at q = 1."""
    lam = ScalingSpec.coerce(s).lam
    q = QIndex.coerce(q)
    phi = phi_lambda(r, s, q, R)
    r_arr = np.asarray(r, dtype=float)
    expo = 1.0 if q.critical else q.q
    out = lam * (np.asarray(phi) / r_arr) ** expo
    return float(out) if np.ndim(out) == 0 else out


def _scaled_radial(f: RadialProfile, lam: float, q, R: float, amplitude: float) -> RadialProfile:
    qi = QIndex.coerce(q)

    def val(r):
        return amplitude * np.asarray(f(phi_lambda(np.asarray(r, dtype=float), lam, qi, R)))

    def der(r):
        r_arr = np.asarray(r, dtype=float)
        phi = phi_lambda(r_arr, lam, qi, R)
        return amplitude * np.asarray(f.diff(phi)) * np.asarray(phi_lambda_prime(r_arr, lam, qi, R))

    inv = 1.0 / lam
    new_breaks = tuple(float(phi_lambda(b, inv, qi, R)) for b in f.breakpoints if 0.0 < b <= R)
    outer = f.outer_radius
    new_outer = R if outer >= R else float(phi_lambda(outer, inv, qi, R))
    return RadialProfile(val, der, (0.0, R), breakpoints=new_breaks,
                         edge_power=f.edge_power, outer_radius=new_outer)


def scale_ball(u, s, params: InequalityParams):
    """The norm-preserving nonlinear scaling u -> lam^(-(theta-1)/theta) u(phi_lam(.)).

    Acts on the radial argument only; the angular factor of a zonal function
    is untouched.  scale_ball(scale_ball(u, l1), l2) = scale_ball(u, l1*l2).
    """
    lam = ScalingSpec.coerce(s).lam
    amplitude = lam ** (-(params.theta - 1.0) / params.theta)
    if isinstance(u, ZonalFunction):
        return ZonalFunction(
            radial=_scaled_radial(u.radial, lam, params.q, params.R, amplitude),
            angular=u.angular)
    return _scaled_radial(u, lam, params.q, params.R, amplitude)


def critical_scale(u, s, n: int, R: float):
    """The critical-case scaling lam^(-(n-1)/n) u(R (r/R)^lam); fixes Moser functions
    up to a move of their plateau radius."""
    lam = ScalingSpec.coerce(s).lam
    amplitude = lam ** (-(n - 1.0) / n)
    qc = QIndex.critical_index()
    if isinstance(u, ZonalFunction):
        return ZonalFunction(radial=_scaled_radial(u.radial, lam, qc, R, amplitude),
                             angular=u.angular)
    return _scaled_radial(u, lam, qc, R, amplitude)


def dilate(v: RadialProfile, s, n: int, p: float) -> RadialProfile:
    """The classical dilation v -> mu^((n-p)/p) v(mu .), norm-preserving on R^n."""
    mu = ScalingSpec.coerce(s).lam
    c = mu ** ((n - p) / p)

    def val(rho):
        return c * np.asarray(v(mu * np.asarray(rho, dtype=float)))

    def der(rho):
        return c * mu * np.asarray(v.diff(mu * np.asarray(rho, dtype=float)))

    return RadialProfile(val, der, (0.0, math.inf),
                         breakpoints=tuple(b / mu for b in v.breakpoints),
                         decay_power=v.decay_power,
                         outer_radius=(v.outer_radius / mu
                                       if math.isfinite(v.outer_radius) else math.inf))


def _rho_of_r(r, q: float, R: float):
    """The ball -> whole-space radial map rho = R ((R/r)^(q-1) - 1)^(-1/(q-1))."""
    r_arr = np.asarray(r, dtype=float)
    k = q - 1.0
    x = np.expm1(k * np.log(R / r_arr))  # (R/r)^(q-1) - 1, accurate near r = R
    return R * x ** (-1.0 / k)


def _r_of_rho(rho, q: float, R: float):
    """Inverse map r = R (1 + (R/rho)^(q-1))^(-1/(q-1))."""
    rho_arr = np.asarray(rho, dtype=float)
    k = q - 1.0
    return R * np.exp(np.log1p((R / rho_arr) ** k) * (-1.0 / k))


def to_ball(v: RadialProfile, params: InequalityParams) -> RadialProfile:
    """Pull a whole-space profile back to the ball: u(r) = v(rho(r)).

    rho maps (0, R) onto (0, infinity) with rho(0+) = 0 and rho(R-) = infinity;
    composed with the extremal family it reproduces the ball extremals.
    """
    q, R = params.q, params.R
    if not math.isfinite(params.C):
        raise DomainError("transformation constant overflowed; p is too close to n")

    def val(r):
        return np.asarray(v(_rho_of_r(r, q, R)))

    def der(r):
        r_arr = np.asarray(r, dtype=float)
        rho = _rho_of_r(r_arr, q, R)
        return np.asarray(v.diff(rho)) * (rho / r_arr) ** q

    breaks = tuple(float(_r_of_rho(b, q, R)) for b in v.breakpoints if b > 0.0)
    if v.decay_power is None:
        edge = None
    elif math.isinf(v.decay_power):
        edge = math.inf
    else:
        edge = v.decay_power / (q - 1.0)
    return RadialProfile(val, der, (0.0, R), breakpoints=breaks, edge_power=edge)


def from_ball(u: RadialProfile, params: InequalityParams) -> RadialProfile:
    """Push a ball profile to the whole space: v(rho) = u(r(rho)); inverse of to_ball."""
    q, R = params.q, params.R
    if not math.isfinite(params.C):
        raise DomainError("transformation constant overflowed; p is too close to n")

    def val(rho):
        return np.asarray(u(_r_of_rho(rho, q, R)))

    def der(rho):
        rho_arr = np.asarray(rho, dtype=float)
        r = _r_of_rho(rho_arr, q, R)
        return np.asarray(u.diff(r)) * (r / rho_arr) ** q

    breaks = tuple(float(_rho_of_r(b, q, R)) for b in u.breakpoints if 0.0 < b < R)
    decay = None if u.edge_power is None else (
        math.inf if math.isinf(u.edge_power) else u.edge_power * (q - 1.0))
    return RadialProfile(val, der, (0.0, math.inf), breakpoints=breaks,
                         decay_power=decay)


def ode_residual(s, params: InequalityParams, r: float) -> float:
    """Residual of the scaling ODE in its original parameterization.

    The ODE reads lam^theta r^((n/p)theta - 1) (phi')^(theta-1)
    = phi^((n/p)theta - 1), with phi the separation-of-variables solution
    under phi(R) = R.  Here ``s`` carries the pre-relabeling lam; the
    published scaling uses the substitution lam -> lam^(-(theta-1)/theta).
    """
    lam = ScalingSpec.coerce(s).lam
    n, p, theta, R, q = params.n, params.p, params.theta, params.R, params.q
    if not (0.0 < r <= R):
        raise DomainError("ode_residual requires 0 < r <= R")
    mu = lam ** (-theta / (theta - 1.0))
    phi = float(phi_lambda(r, mu, q, R))
    dphi = mu * (phi / r) ** q
    expo = (n / p) * theta - 1.0
    return lam**theta * r**expo * dphi ** (theta - 1.0) - phi**expo


def intertwine_gap(v: RadialProfile, s, params: InequalityParams, r: float,
                   alpha: float = None, q: float = None) -> float:
    """|S_lam(T v)(r) - T(D_{lam^-alpha} v)(r)|: scaling and dilation intertwine.

    S_lam is the unweighted radial substitution u(phi_lam(.)), T the
    whole-space-to-ball transformation with exponent alpha, and D the
    unweighted dilation.  Defaults take the coupled (alpha, q) of ``params``;
    the identity holds for any alpha > 0, q > 1.
    """
    lam = ScalingSpec.coerce(s).lam
    R = params.R
    if alpha is None:
        alpha = params.alpha
    if q is None:
        q = params.q
    if not (0.0 < r < R):
        raise DomainError("intertwine_gap requires 0 < r < R")

    def rho_t(rr):
        # T's radial map R (-(q-1) log_q(rr/R))^(-alpha)
        x = math.expm1((q - 1.0) * math.log(R / rr))
        return R * x**-alpha

    phi = float(phi_lambda(r, lam, q, R))
    lhs = float(v(rho_t(phi)))
    rhs = float(v(lam**-alpha * rho_t(r)))
    return abs(lhs - rhs)
