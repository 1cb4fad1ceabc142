"""Finsler (Kropina) and Zermelo geometry of quantum hydrodynamic motion."""

from .errors import *  # noqa: F401,F403
from .expr import Expression, parse_expression
from .fields import (
    AnalyticField,
    Box,
    Constants,
    GridField,
    GridSpec,
    MadelungState,
    VectorField,
    continuity_residual,
    gauge_residual,
    load_grid,
    madelung_decompose,
    quantum_potential,
    save_grid,
    velocity_field,
)
from .scenario import Scenario
from .geometry import (
    ConstantMetric,
    KropinaGeometry,
    MatrixField,
    TangentSample,
    assemble_associated_metric,
    det_identity_gap,
    fundamental_tensor,
    inverse_metric,
    kropina_F,
)
from .connection import (
    beta_quantities,
    christoffel,
    christoffel_analytic_em,
    kropina_spray,
    riemann_spray,
)
from .dynamics import (
    Trajectory,
    integrate_finsler_geodesic,
    integrate_newton,
    integrate_riemann_geodesic,
    reparametrize_by_time,
    trajectory_deviation,
)
from .zermelo import (
    NavigationData,
    inverse_navigation,
    killing_check,
    navigation_data,
    quantum_wind,
    zermelo_condition_residual,
)
from .oracle import OracleReport, euler_lagrange_residual, fd_directional, fd_hessian_F2

__version__ = "0.1.0"
