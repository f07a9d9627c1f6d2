"""Numerical geometry of almost-Fuchsian manifolds over closed hyperbolic surfaces."""

from .epstein import SupportFunction, boundary_conformal_factor, epstein_embed, equivariance_residual
from .foliation import (
    MetricField,
    complex_dilatation,
    intermediate_leaf_dilatation,
    leaf_dilatation_pair,
    parallel_metric,
    parallel_principal_curvatures,
    teich_bound,
)
from .gauss import MinimalSurfaceData, NonConvergence, solve_gauss
from .moebius import FuchsianGroup, MobiusTransform, bolza_group, enumerate_group
from .poincare import QuadDifferentialField, default_basis, poincare_basis, poincare_series
from .surface import SampledSurface, ScalarField, build_sampled_surface
from .wp import WpReport, area, second_variation_fd, wp_pairing

__version__ = "0.1.0"
