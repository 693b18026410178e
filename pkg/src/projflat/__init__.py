"""Projective flatness of two-dimensional connections and metrics."""

from .errors import (
    ChartError, DegenerateFrameError, DegenerateMetricError, DegenerateParamsError, DomainError,
    GeometryError, IntegrationError, NotProjectivelyFlatError, PreconditionError,
)
from .geodesics import (
    Curve, IntegratorSettings, affine_residual, collinearity_residual, geodesic_ivp, integrate_geodesics,
    jacobi_f_solutions, trace_hausdorff, unparam_geodesic_residual,
)
from .geometry import (
    ConnectionField, CovectorField, MetricField, Point, christoffel_from_metric, gaussian_curvature,
    levi_civita, metric_compat_residual, projective_change, ricci, ricci_change, symmetrizing_upsilon,
    y_tensor,
)
from .jets import Jet
from .liouville import LiouvilleParams, domain_contains, k_formula, liouville_metric, random_params
from .metrics import METRIC_NAMES, builtin_metric
from .tractor import (
    ParallelFrame, ProjectivePoint, TractorValue, affine_chart, developing_map, developing_map_batch,
    holonomy, parallel_frame, straightening_coordinates, tractor_curvature_residual, tractor_derivative,
    transport_along,
    transport_tractor,
)

__version__ = "0.1.0"
