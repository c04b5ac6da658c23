"""Numerical verification toolkit for scale-invariant sharp Sobolev, Hardy,
and Caffarelli-Kohn-Nirenberg inequalities on balls."""

from .errors import DomainError, NonConvergenceError
from .functionals import (
    MinimizeOptions,
    MinimizeResult,
    SideReport,
    TrialFamily,
    alvino_moser_exact,
    ball_extremal_family,
    ckn_power_family,
    equivalence_norms,
    evaluate,
    hardy_trial_family,
    minimize_quotient,
    side_lhs,
    side_rhs,
    strict_chain,
    truncated_at_family,
)
from .geometry import (
    GradientSplit,
    RadialMap,
    det_by_elimination,
    embedded_gradient,
    gradient_split,
    jacobian_det,
    jacobian_matrix,
    pushforward_gradient_sq,
    sphere_area,
)
from .params import InequalityId, InequalityParams, make_params, sobolev_params
from .profiles import (
    AngularFactor,
    ExtremalParams,
    RadialProfile,
    ZonalFunction,
    aubin_talenti,
    ball_extremal,
    bump,
    distribution_function,
    gaussian,
    moser,
    schwarz_rearrange,
    truncated_aubin_talenti,
)
from .quad import (
    QuadratureConfig,
    QuadratureResult,
    integrate,
    integrate_semi_infinite,
    radial_integral,
    zonal_integral,
)
from .special import (
    QIndex,
    alvino_constant,
    ball_constant,
    ckn_homog_constant,
    gamma,
    hardy_ball_constant,
    q_exp,
    q_log,
    sobolev_constant,
)
from .transforms import (
    ScalingSpec,
    critical_scale,
    dilate,
    from_ball,
    intertwine_gap,
    ode_residual,
    phi_lambda,
    scale_ball,
    to_ball,
)

__version__ = "0.1.0"
