"""Pseudo-spectral laboratory for the final-state problem of NLS.

Solves (D_t + Delta + V) u = sigma |u|^{p-1} u on a periodic box standing in
for R^n (n = 1, 2, 3), prescribing the asymptotic profile at t -> +infinity,
and provides the symmetry-module norms, pseudoconformal (lens) frame,
split-step evolution and diagnostic probes needed to check the computable
properties of the solution at desk scale.
"""

from .grid import Grid, Field
from .propagator import ProfileSpec, propagate, poisson
from .modules import ModuleId, GeneratorTag, apply_generator, module_norm, onecusp_norm
from .lens import LensFrame, remove_phase, add_phase, lens_profile, lens_invert, final_state_error
from .potentials import PotentialSpec, eval_potential, admissibility_bound
from .solver import TimeMesh, Trajectory, SolverConfig, ContractionReport, phi_apply, solve_final_state
from .evolver import Observables, strang_step, extend_backward, compute_f_minus, observables
from .config import ExperimentConfig
from .runner import run_experiment
from . import diagnostics

__all__ = [
    "Grid", "Field",
    "ProfileSpec", "propagate", "poisson",
    "ModuleId", "GeneratorTag", "apply_generator", "module_norm", "onecusp_norm",
    "LensFrame", "remove_phase", "add_phase", "lens_profile", "lens_invert", "final_state_error",
    "PotentialSpec", "eval_potential", "admissibility_bound",
    "TimeMesh", "Trajectory", "SolverConfig", "ContractionReport", "phi_apply", "solve_final_state",
    "Observables", "strang_step", "extend_backward", "compute_f_minus", "observables",
    "ExperimentConfig", "run_experiment",
    "diagnostics",
]
