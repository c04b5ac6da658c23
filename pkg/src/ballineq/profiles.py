"""Radial and zonal trial functions, extremal families, and Schwarz rearrangement.

Profiles evaluate elementwise on numpy arrays and are zero outside their
support.  Factories attach analytic derivatives where available; otherwise
:meth:`RadialProfile.diff` falls back to a central difference with step
h = eps^(1/3) * max(1, r), valid away from breakpoints.

``edge_power`` annotates the power of (R - r) with which a ball profile
vanishes at the boundary and ``decay_power`` the power of rho^(-1) decay of
a whole-space profile; the functionals module uses them to pick graded
substitutions for singular weights.  ``math.inf`` means faster-than-power.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Callable, Optional

import numpy as np

from .errors import DomainError
from .geometry import sphere_area

__all__ = [
    "RadialProfile",
    "AngularFactor",
    "ZonalFunction",
    "ExtremalParams",
    "aubin_talenti",
    "ball_extremal",
    "moser",
    "bump",
    "gaussian",
    "truncated_aubin_talenti",
    "support_lower_edge",
    "distribution_function",
    "schwarz_rearrange",
]

_FD_STEP = float(np.finfo(float).eps) ** (1.0 / 3.0)


@dataclass(frozen=True)
class RadialProfile:
    """An evaluable radial function r -> value with optional analytic derivative.

    ``s_value``/``s_deriv``, when present, evaluate the profile and its radial
    derivative as exact functions of the boundary variable
    s = 1 - (r/R)^(q-1) for the deformation index ``s_weight_q``; they let
    singular-weight quadrature resolve boundary layers that are lost to
    rounding when parameterized by r.
    """

    value: Callable
    derivative: Optional[Callable]
    support: tuple
    breakpoints: tuple = ()
    edge_power: Optional[float] = None
    decay_power: Optional[float] = None
    outer_radius: Optional[float] = None
    s_value: Optional[Callable] = None
    s_deriv: Optional[Callable] = None
    s_weight_q: Optional[float] = None

    def __post_init__(self):
        if self.outer_radius is None:
            object.__setattr__(self, "outer_radius", self.support[1])

    def __call__(self, r):
        r_arr = np.asarray(r, dtype=float)
        lo, hi = self.support
        with np.errstate(divide="ignore", over="ignore", under="ignore", invalid="ignore"):
            raw = np.asarray(self.value(r_arr), dtype=float)
        out = np.where((r_arr >= lo) & (r_arr <= hi), raw, 0.0)
        return float(out) if out.ndim == 0 else out

    def diff(self, r):
        """Derivative: analytic when attached, otherwise a central difference."""
        r_arr = np.asarray(r, dtype=float)
        if self.derivative is not None:
            lo, hi = self.support
            with np.errstate(divide="ignore", over="ignore", under="ignore", invalid="ignore"):
                raw = np.asarray(self.derivative(r_arr), dtype=float)
            out = np.where((r_arr > lo) & (r_arr < hi), raw, 0.0)
        else:
            h = _FD_STEP * np.maximum(1.0, np.abs(r_arr))
            out = (self(r_arr + h) - self(r_arr - h)) / (2.0 * h)
        return float(out) if out.ndim == 0 else out


@dataclass(frozen=True)
class AngularFactor:
    """The angular factor h of a zonal function, with its derivative.

    ``variable`` is "cos" (h of the polar cosine t, n >= 3) or "angle"
    (h of the full angle psi, the n = 2 convention).
    """

    value: Callable
    deriv: Callable
    variable: str = "cos"

    def __post_init__(self):
        if self.variable not in ("cos", "angle"):
            raise DomainError("angular variable must be 'cos' or 'angle'")


CONSTANT_ANGULAR = AngularFactor(
    value=lambda t: np.ones_like(np.asarray(t, dtype=float)),
    deriv=lambda t: np.zeros_like(np.asarray(t, dtype=float)),
)


@dataclass(frozen=True)
class ZonalFunction:
    """A product-form function u(x) = f(|x|) h(angular coordinate)."""

    radial: RadialProfile
    angular: AngularFactor = CONSTANT_ANGULAR

    def value(self, r, t):
        return self.radial(r) * self.angular.value(t)


@dataclass(frozen=True)
class ExtremalParams:
    """The (a, b) pair of the two-parameter extremal families."""

    a: float
    b: float

    def __post_init__(self):
        if not (self.a > 0.0 and self.b > 0.0):
            raise DomainError("extremal parameters must be positive")


def aubin_talenti(e: ExtremalParams, n: int, p: float) -> RadialProfile:
    """The whole-space extremal rho -> (a + b rho^(p/(p-1)))^(1 - n/p)."""
    if not (1.0 < p < n):
        raise DomainError("aubin_talenti requires 1 < p < n")
    a, b = e.a, e.b
    pp = p / (p - 1.0)
    expo = 1.0 - n / p

    def val(rho):
        return (a + b * rho**pp) ** expo

    def der(rho):
        return expo * (a + b * rho**pp) ** (expo - 1.0) * b * pp * rho ** (pp - 1.0)

    return RadialProfile(val, der, (0.0, math.inf),
                         decay_power=(n - p) / (p - 1.0))


def ball_extremal(e: ExtremalParams, n: int, p: float, R: float) -> RadialProfile:
    """The ball extremal attaining the scale-invariant Sobolev constant.

    r -> [a + b (r^(-(n-p)/(p-1)) - R^(-(n-p)/(p-1)))^(-p/(n-p))]^(1-n/p),
    continuously extended by 0 at r = R.
    """
    if not (1.0 < p < n):
        raise DomainError("ball_extremal requires 1 < p < n")
    if not R > 0.0:
        raise DomainError("R must be positive")
    a, b = e.a, e.b
    m = (n - p) / (p - 1.0)
    k = p / (n - p)
    expo = 1.0 - n / p

    def inner(r):
        return (r**-m - R**-m) ** -k

    def val(r):
        return (a + b * inner(r)) ** expo

    def der(r):
        g = inner(r)
        dg = k * m * r ** (-m - 1.0) * (r**-m - R**-m) ** (-k - 1.0)
        return expo * (a + b * g) ** (expo - 1.0) * b * dg

    return RadialProfile(val, der, (0.0, R), edge_power=1.0)


def moser(n: int, R: float, rho: float) -> RadialProfile:
    """The log-plateau Moser function, equality case of the critical inequality.

    Value (log(R/rho))^((n-1)/n) on (0, rho], then log(R/r)/(log(R/rho))^(1/n)
    down to 0 at r = R; the kink at r = rho is a declared breakpoint.
    """
    if not (0.0 < rho < R):
        raise DomainError("moser requires 0 < rho < R")
    L = math.log(R / rho)
    plateau = L ** ((n - 1.0) / n)
    slope_norm = L ** (1.0 / n)

    def val(r):
        r = np.asarray(r, dtype=float)
        return np.where(r <= rho, plateau, np.log(R / np.maximum(r, 1e-300)) / slope_norm)

    def der(r):
        r = np.asarray(r, dtype=float)
        return np.where(r <= rho, 0.0, -1.0 / (np.maximum(r, 1e-300) * slope_norm))

    return RadialProfile(val, der, (0.0, R), breakpoints=(rho,), edge_power=1.0)


def bump(R: float, center: float, width: float) -> RadialProfile:
    """A smooth compactly supported profile exp(1 - 1/(1-z^2)), z = (r-center)/width.

    Support (center - width, center + width) must sit strictly inside (0, R).
    """
    if width <= 0.0 or center - width <= 0.0 or center + width >= R:
        raise DomainError("bump support must lie strictly inside (0, R)")

    def val(r):
        z = (np.asarray(r, dtype=float) - center) / width
        safe = np.where(np.abs(z) < 1.0, z, 0.0)
        core = np.exp(1.0 - 1.0 / (1.0 - safe**2))
        return np.where(np.abs(z) < 1.0, core, 0.0)

    def der(r):
        z = (np.asarray(r, dtype=float) - center) / width
        safe = np.where(np.abs(z) < 1.0, z, 0.0)
        core = np.exp(1.0 - 1.0 / (1.0 - safe**2))
        grad = core * (-2.0 * safe / (1.0 - safe**2) ** 2) / width
        return np.where(np.abs(z) < 1.0, grad, 0.0)

    return RadialProfile(val, der, (0.0, R),
                         breakpoints=(center - width, center, center + width),
                         outer_radius=center + width)


def gaussian(scale: float = 1.0) -> RadialProfile:
    """A smooth decaying whole-space trial exp(-(rho/scale)^2)."""
    if scale <= 0.0:
        raise DomainError("scale must be positive")

    def val(rho):
        return np.exp(-((np.asarray(rho, dtype=float) / scale) ** 2))

    def der(rho):
        rho = np.asarray(rho, dtype=float)
        return -2.0 * rho / scale**2 * np.exp(-((rho / scale) ** 2))

    return RadialProfile(val, der, (0.0, math.inf), decay_power=math.inf)


def truncated_aubin_talenti(e: ExtremalParams, n: int, p: float, R: float,
                            mu: float = 1.0) -> RadialProfile:
    """Dilated whole-space extremal cut to the ball: mu^((n-p)/p) (U(mu r) - U(mu R))_+.

    The concentration parameter mu drives the Sobolev quotient down toward
    the whole-space constant without ever reaching it.
    """
    if mu <= 0.0:
        raise DomainError("mu must be positive")
    base = aubin_talenti(e, n, p)
    c = mu ** ((n - p) / p)
    floor = float(base(mu * R))

    def val(r):
        return c * np.maximum(np.asarray(base(mu * np.asarray(r, dtype=float))) - floor, 0.0)

    def der(r):
        return c * mu * np.asarray(base.diff(mu * np.asarray(r, dtype=float)))

    return RadialProfile(val, der, (0.0, R), edge_power=1.0)


def support_lower_edge(f: RadialProfile) -> float:
    """Largest L with f identically zero on (0, L); 0 when f is active at the origin."""
    edge = f.support[0]
    for b in sorted(f.breakpoints):
        probe = np.linspace(edge + 1e-12 * max(1.0, b), b * (1.0 - 1e-12), 17)
        if np.max(np.abs(np.asarray(f(probe)))) > 0.0:
            break
        edge = b
    return edge


# ---------------------------------------------------------------------------
# Schwarz rearrangement
# ---------------------------------------------------------------------------

_PIECE_BISECT_ITERS = 60
_REARRANGE_GRID = 262145


def _piece_knots(f: RadialProfile):
    lo, hi = f.support
    hi = min(hi, f.outer_radius) if math.isfinite(f.outer_radius) else hi
    if not math.isfinite(hi):
        raise DomainError("rearrangement requires a bounded support")
    knots = [lo] + [b for b in sorted(f.breakpoints) if lo < b < hi] + [hi]
    return knots


def _piece_data(f: RadialProfile):
    """Classify each monotone piece; raises if a piece is not monotone."""
    knots = _piece_knots(f)
    pieces = []
    for a, b in zip(knots[:-1], knots[1:]):
        eps = 1e-9 * (b - a)
        fa = abs(float(f(a + eps)))
        fb = abs(float(f(b - eps)))
        fm = abs(float(f(0.5 * (a + b))))
        scale = max(fa, fb, fm, 1e-30)
        if abs(fa - fb) <= 1e-10 * scale and abs(fm - fa) <= 1e-10 * scale:
            pieces.append((a, b, "const", 0.5 * (fa + fb)))
            continue
        if not (min(fa, fb) - 1e-9 * scale <= fm <= max(fa, fb) + 1e-9 * scale):
            raise DomainError(
                f"piece ({a}, {b}) is not monotone; declare interior extrema as breakpoints")
        pieces.append((a, b, "inc" if fb > fa else "dec", (fa, fb)))
    return pieces


def _crossing(f, a, b, lam, increasing):
    """Vectorized bisection for |f(c)| = lam on a strictly monotone piece."""
    lam = np.asarray(lam, dtype=float)
    lo = np.full(lam.shape, a)
    hi = np.full(lam.shape, b)
    for _ in range(_PIECE_BISECT_ITERS):
        mid = 0.5 * (lo + hi)
        below = np.abs(f(mid)) < lam
        if increasing:
            lo = np.where(below, mid, lo)
            hi = np.where(below, hi, mid)
        else:
            hi = np.where(below, mid, hi)
            lo = np.where(below, lo, mid)
    return 0.5 * (lo + hi)


def _distribution(f: RadialProfile, n: int, lam):
    """Measure of the superlevel set {x in B : |f(|x|)| > lam}, vectorized in lam."""
    lam = np.asarray(lam, dtype=float)
    coeff = sphere_area(n) / n
    vol = lambda r: coeff * np.asarray(r, dtype=float) ** n
    total = np.zeros(lam.shape)
    for a, b, kind, data in _piece_data(f):
        if kind == "const":
            total += np.where(lam < data, vol(b) - vol(a), 0.0)
            continue
        fa, fb = data
        c = _crossing(f, a, b, lam, increasing=(kind == "inc"))
        if kind == "inc":
            part = np.where(lam >= fb, 0.0,
                            np.where(lam < fa, vol(b) - vol(a), vol(b) - vol(c)))
        else:
            part = np.where(lam >= fa, 0.0,
                            np.where(lam < fb, vol(b) - vol(a), vol(c) - vol(a)))
        total += part
    return total


def distribution_function(f: RadialProfile, n: int, lam: float) -> float:
    """mu_f(lam): volume of {|f| > lam} for a piecewise strictly monotone profile."""
    if lam < 0.0:
        raise DomainError("the distribution function is defined for lam >= 0")
    return float(_distribution(f, n, np.asarray(float(lam))))


def _is_nonincreasing(f: RadialProfile) -> bool:
    knots = _piece_knots(f)
    grid = np.unique(np.concatenate([
        np.linspace(a, b, 33) for a, b in zip(knots[:-1], knots[1:])]))
    vals = np.abs(np.asarray(f(grid)))
    scale = max(float(vals.max()), 1e-30)
    return bool(np.all(np.diff(vals) <= 1e-12 * scale))


def _rearrange_numeric(f: RadialProfile, n: int) -> RadialProfile:
    """Invert the distribution function on a dense level grid."""
    knots = _piece_knots(f)
    sample = np.unique(np.concatenate([
        np.linspace(a, b, 257) for a, b in zip(knots[:-1], knots[1:])]))
    fmax = float(np.abs(np.asarray(f(sample))).max())
    if fmax == 0.0:
        return RadialProfile(lambda r: np.zeros_like(np.asarray(r, dtype=float)),
                             None, f.support, outer_radius=0.0)
    levels = np.linspace(0.0, fmax * (1.0 + 1e-12), _REARRANGE_GRID)
    mu = _distribution(f, n, levels)
    mu0 = float(mu[0])
    coeff = sphere_area(n) / n
    r_star = (mu0 / coeff) ** (1.0 / n)
    # mu is nonincreasing in lam, so -mu is an increasing interpolation grid
    neg_mu = -mu

    def val(r):
        v = coeff * np.asarray(r, dtype=float) ** n
        return np.interp(-v, neg_mu, levels)

    return RadialProfile(val, None, f.support,
                         breakpoints=(r_star,) if r_star < f.support[1] else (),
                         outer_radius=r_star)


def schwarz_rearrange(f: RadialProfile, n: int) -> RadialProfile:
    """The nonincreasing equimeasurable rearrangement f* of |f|.

    Nonincreasing inputs are their own rearrangement and are returned as-is
    (exact fixed point, analytic derivative preserved); otherwise f* is
    computed by inverting the distribution function, with a finite-difference
    derivative fallback.
    """
    _piece_data(f)  # validates monotone pieces
    if _is_nonincreasing(f):
        return f
    return _rearrange_numeric(f, n)
