"""Numerical toolkit for chord integrals, Riesz potentials and the
nonlocal Gauss curvature flow of convex bodies."""

from ._backend import BACKEND, set_threads
from .body import (ConvexBody, SupportField, body_from_support, boundary_normal, boundary_point, cast_rays,
                   gauss_curvature, make_canonical_body, ray_cast, read_body, rescale, validate, volume,
                   write_body)
from .chord import (chord_integral_dual, chord_integral_measure, chord_measure_density, cone_chord_density,
                    ma_residual, target_chord_integral)
from .errors import (ChordFlowError, CoverageError, DegenerateConvexityError, DomainError, FitError, GridError,
                     ParameterError, StallError, UnsupportedError)
from .flow import FlowConfig, FlowState, FlowTrace, chord_law_check, functional_J, normalize_initial, run, step
from .oracle import McEstimate, fd_derivative, mc_chord_integral, mc_volume_potential
from .riesz import (PotentialSpec, dual_quermassintegral, dual_querm_gradient, dual_querm_hessian,
                    dual_querm_sphere_derivs, dual_querm_time_derivative, holder_exponent_estimate,
                    potential_boundary_form, potential_volume_form)
from .sphere import SphereGrid, integrate, make_circle_grid, make_s2_grid

__version__ = "0.1.0"
