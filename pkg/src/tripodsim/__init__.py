"""Adiabatic propagation of three-component resonant pulses through a
tripod-level atomic medium.

The package has two independent routes to the same physics: a reduced
angle-variable solver (reduced) built on the dark-state decomposition
in core, and a first-principles atom-field integrator (oracle) that
knows nothing about that reduction.  families constructs and detects
the shape-preserving pulse classes, scenario/runner/cli wrap everything
in a reproducible file-driven workflow.
"""

from .core import (C_LIGHT, HBAR, DegenerateAnglesError, MediumParams,
                   angles_to_rabi, coupling_constant, dark_states,
                   group_delay, group_velocity, hamiltonian_apply,
                   intensity_from_rabi, mixing_matrix, rabi_from_intensity,
                   rabi_to_angles, state_from_mixing, superposition_angle)
from .families import (FamilyAngleProfile, FamilyError, FamilyParams,
                       FitResult, PulseClassification, SuperposedProfile,
                       classify, fit_constants, generate_family)
from .kernels import BACKEND, HAS_NUMBA
from .oracle import (DEPTH_STEP_PRODUCT, RATE_LIMIT, TAU_STEP_LIMIT,
                     AdiabaticityReport, AtomTrajectory, CompareReport,
                     ConservationReport, FullField, OracleGrid,
                     adiabaticity_report, atom_evolve, compare_to_reduced,
                     conservation_check, entrance_fields, field_step,
                     propagate_full)
from .profiles import (BoundaryProfile, ConstantProfile, Grid, Profile,
                       Segment, smoothstep, smoothstep_deriv)
from .reduced import (COS_PHI_FLOOR, ReducedField, SingularityError,
                      invert_nonlinear_time, mixed_state_propagate,
                      nonlinear_time, propagate, quasilinear_rhs,
                      solvability_residual, update_nu)
from .scenario import (Scenario, ScenarioError, list_presets,
                       load_preset, load_scenario, parse_scenario,
                       resolve_scenario)

__version__ = "0.1.0"

__all__ = [
    "AdiabaticityReport", "AtomTrajectory", "BACKEND", "BoundaryProfile",
    "C_LIGHT", "COS_PHI_FLOOR", "CompareReport", "ConservationReport",
    "ConstantProfile", "DEPTH_STEP_PRODUCT", "DegenerateAnglesError",
    "FamilyAngleProfile", "FamilyError", "FamilyParams", "FitResult",
    "FullField", "Grid", "HAS_NUMBA", "HBAR", "MediumParams",
    "OracleGrid", "RATE_LIMIT", "TAU_STEP_LIMIT",
    "PulseClassification", "Profile", "ReducedField", "Scenario",
    "ScenarioError", "Segment", "SingularityError", "SuperposedProfile",
    "adiabaticity_report",
    "angles_to_rabi", "atom_evolve", "classify", "compare_to_reduced",
    "conservation_check", "coupling_constant", "dark_states",
    "entrance_fields", "field_step", "fit_constants", "generate_family",
    "group_delay", "group_velocity", "hamiltonian_apply",
    "intensity_from_rabi", "invert_nonlinear_time", "list_presets",
    "load_preset", "load_scenario", "mixed_state_propagate",
    "mixing_matrix", "nonlinear_time", "parse_scenario", "propagate",
    "propagate_full", "quasilinear_rhs", "rabi_from_intensity",
    "rabi_to_angles", "resolve_scenario", "smoothstep",
    "smoothstep_deriv", "solvability_residual", "state_from_mixing",
    "superposition_angle", "update_nu",
]
