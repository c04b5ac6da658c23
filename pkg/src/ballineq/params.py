"""Validated parameter bundles shared by every inequality evaluator."""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .errors import DomainError

__all__ = ["InequalityId", "InequalityParams", "make_params", "sobolev_params"]

# absolute slack on the exponent window so that sigma = p* passes despite rounding
WINDOW_SLACK = 1e-12


class InequalityId(str, Enum):
    """Tags for the ten inequalities handled by the functionals module."""

    SOBOLEV_RN = "sobolev-rn"
    CKN_RN = "ckn-rn"
    CKN_RN_HOMOG = "ckn-rn-homog"
    BALL_SOBOLEV_RADIAL = "ball-sobolev-radial"
    BALL_SOBOLEV_GENERAL = "ball-sobolev-general"
    BALL_CKN = "ball-ckn"
    BALL_CKN_HOMOG = "ball-ckn-homog"
    HARDY_BALL = "hardy-ball"
    HARDY_CRITICAL = "hardy-critical"
    ALVINO = "alvino"


@dataclass(frozen=True)
class InequalityParams:
    """The tuple (n, p, theta, sigma, R) plus every derived exponent.

    Immutable after construction; always build through :func:`make_params`
    so the derived fields and invariants hold.  ``C`` overflows to ``inf``
    for p extremely close to n (alpha^alpha exceeds double range); the
    ball <-> whole-space transforms reject such bundles.
    """

    n: int
    p: float
    theta: float
    sigma: float
    R: float
    p_star: float
    q: float
    alpha: float
    C: float


def make_params(n: int, p: float, theta: float, sigma: float, R: float) -> InequalityParams:
    """Validate raw inputs and derive (p*, q, alpha, C).

    Constraints: n integer >= 2, 1 < p < n, theta > 1,
    0 <= 1/theta - 1/sigma <= 1/n, R > 0.
    """
    if isinstance(n, bool) or not isinstance(n, (int, np.integer)):
        raise DomainError("n must be an integer >= 2")
    n = int(n)
    if n < 2:
        raise DomainError("n must be an integer >= 2")
    p = float(p)
    theta = float(theta)
    sigma = float(sigma)
    R = float(R)
    if not (1.0 < p < n):
        raise DomainError("p not in (1,n)")
    if not theta > 1.0:
        raise DomainError("theta must exceed 1")
    if not sigma > 0.0:
        raise DomainError("sigma must be positive")
    window = 1.0 / theta - 1.0 / sigma
    if window < -WINDOW_SLACK or window > 1.0 / n + WINDOW_SLACK:
        raise DomainError("σ window violated")
    if not R > 0.0:
        raise DomainError("R must be positive")

    p_star = n * p / (n - p)
    k = ((n - p) / p) * (theta / (theta - 1.0))
    q = 1.0 + k
    alpha = 1.0 / k  # alpha * (q - 1) == 1 to one rounding
    log_c = math.log(R) + alpha * math.log(alpha)
    C = R * alpha**alpha if log_c < 700.0 else math.inf
    return InequalityParams(n=n, p=p, theta=theta, sigma=sigma, R=R,
                            p_star=p_star, q=q, alpha=alpha, C=C)


def sobolev_params(n: int, p: float, R: float = 1.0) -> InequalityParams:
    """The Sobolev specialization theta = p, sigma = p* (window boundary case)."""
    n_f = int(n)
    return make_params(n, p, p, n_f * p / (n_f - p), R)
