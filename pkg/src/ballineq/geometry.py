"""Sphere measures, the radial/tangential gradient split, and radial-map Jacobians."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import DomainError
from .special import gamma

__all__ = [
    "GradientSplit",
    "RadialMap",
    "sphere_area",
    "gradient_split",
    "jacobian_matrix",
    "jacobian_det",
    "pushforward_gradient_sq",
    "det_by_elimination",
    "embedded_gradient",
]


def sphere_area(n: int) -> float:
    """Surface measure of the unit sphere S^{n-1}: 2 pi^{n/2} / Gamma(n/2)."""
    if isinstance(n, bool) or not isinstance(n, (int, np.integer)) or n < 1:
        raise DomainError("sphere_area requires an integer n >= 1")
    return 2.0 * math.pi ** (0.5 * n) / gamma(0.5 * n)


@dataclass(frozen=True)
class GradientSplit:
    """Orthogonal decomposition |grad u|^2 = radial_mag^2 + tangential_mag^2."""

    radial_mag: float
    tangential_mag: float

    @property
    def gradient_sq(self) -> float:
        return self.radial_mag**2 + self.tangential_mag**2


@dataclass(frozen=True)
class RadialMap:
    """A direction-preserving map x = phi(|y|) y/|y| with phi' > 0."""

    phi: Callable[[float], float]
    phi_prime: Callable[[float], float]


def gradient_split(u, n: int, r: float, t: float) -> GradientSplit:
    """Split the gradient of a zonal function u = f(r) h into radial/tangential parts.

    ``t`` is the polar-angle cosine when u.angular.variable == "cos"
    (the sphere factor contributes sqrt(1-t^2)/r) and the full angle psi
    for the n = 2 "angle" convention (factor 1/r).
    """
    f = u.radial
    for b in f.breakpoints:
        if abs(r - b) < 1e-13 * max(1.0, abs(b)):
            raise DomainError(f"gradient_split evaluated at breakpoint r = {b}")
    fv = float(f(r))
    fd = float(f.diff(r))
    hv = float(u.angular.value(t))
    hd = float(u.angular.deriv(t))
    radial = abs(fd * hv)
    if u.angular.variable == "cos":
        if not -1.0 <= t <= 1.0:
            raise DomainError("polar cosine t must lie in [-1, 1]")
        tangential = abs(fv * hd) * math.sqrt(max(0.0, 1.0 - t * t)) / r
    else:
        tangential = abs(fv * hd) / r
    return GradientSplit(radial_mag=radial, tangential_mag=tangential)


def _radius(y: np.ndarray) -> float:
    y = np.asarray(y, dtype=float)
    r = float(np.linalg.norm(y))
    if r == 0.0:
        raise DomainError("radial maps are singular at y = 0")
    return r


def jacobian_matrix(m: RadialMap, y) -> np.ndarray:
    """Jacobian d x_i / d y_j of x = phi(|y|) y/|y|: a rank-one update of identity."""
    y = np.asarray(y, dtype=float)
    r = _radius(y)
    x_mag = float(m.phi(r))
    dphi = float(m.phi_prime(r))
    unit = y / r
    scale = x_mag / r
    return scale * (np.eye(len(y)) + ((r / x_mag) * dphi - 1.0) * np.outer(unit, unit))


def jacobian_det(m: RadialMap, y) -> float:
    """Closed-form determinant (|y|/|x|) phi'(|y|) (|x|/|y|)^n."""
    y = np.asarray(y, dtype=float)
    r = _radius(y)
    x_mag = float(m.phi(r))
    dphi = float(m.phi_prime(r))
    return (r / x_mag) * dphi * (x_mag / r) ** len(y)


def pushforward_gradient_sq(m: RadialMap, split: GradientSplit, y) -> float:
    """|J grad u|^2 from the split: (|x|/|y|)^2 (tan^2 + ((|y|/|x|) phi')^2 rad^2)."""
    y = np.asarray(y, dtype=float)
    r = _radius(y)
    x_mag = float(m.phi(r))
    dphi = float(m.phi_prime(r))
    return (x_mag / r) ** 2 * (
        split.tangential_mag**2 + ((r / x_mag) * dphi) ** 2 * split.radial_mag**2
    )


def det_by_elimination(matrix) -> float:
    """Determinant by Gaussian elimination with partial pivoting.

    Kept independent of the closed form so it can serve as the oracle side
    of the Jacobian checks.
    """
    a = np.array(matrix, dtype=float, copy=True)
    n = a.shape[0]
    det = 1.0
    for col in range(n):
        pivot = col + int(np.argmax(np.abs(a[col:, col])))
        if a[pivot, col] == 0.0:
            return 0.0
        if pivot != col:
            a[[col, pivot]] = a[[pivot, col]]
            det = -det
        det *= a[col, col]
        a[col + 1:, col:] -= np.outer(a[col + 1:, col] / a[col, col], a[col, col:])
    return det


def embedded_gradient(u, x) -> np.ndarray:
    """Full gradient vector of a zonal function at a point x in R^n.

    The zonal axis is the last coordinate for the "cos" convention; for the
    n = 2 "angle" convention the angular variable is atan2(x1, x0).
    """
    x = np.asarray(x, dtype=float)
    r = _radius(x)
    unit = x / r
    f = u.radial
    fv = float(f(r))
    fd = float(f.diff(r))
    if u.angular.variable == "cos":
        t = unit[-1]
        hv = float(u.angular.value(t))
        hd = float(u.angular.deriv(t))
        axis = np.zeros_like(x)
        axis[-1] = 1.0
        return fd * hv * unit + fv * hd * (axis - t * unit) / r
    psi = math.atan2(x[1], x[0])
    hv = float(u.angular.value(psi))
    hd = float(u.angular.deriv(psi))
    tangent = np.array([-math.sin(psi), math.cos(psi)])
    return fd * hv * unit + fv * hd / r * tangent
