"""Divergence-free spectral Galerkin solver for incompressible Navier-Stokes on boxes,
with checks of the energy, decay, uniqueness and regularity estimates."""
from .domain import BoxDomain, ModeIndex, chi, enumerate_modes
from .field import (ScalarField, SpectralField, analyze, from_function, leray_project,
                    lp_norm, synthesize)
from .operators import (apply_A, apply_B, b_form, recover_pressure, stokes_solve,
                        trilinear_bound_check)
from .solver import GalerkinSystem, NumericalInstabilityError, TrajectoryRecord, evolve, rhs, step
from .certificates import (Certificate, check_existence_condition, check_regularity_condition,
                           estimate_C1, search_C1)
from .analysis import (DecayReport, perturbation_experiment, steklov_check, ut_estimates,
                       verify_decay)

__version__ = "0.1.0"
