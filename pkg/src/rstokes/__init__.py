"""Finite elements + convolution quadrature for the fractional Rayleigh-Stokes problem."""

from .mesh import Mesh, build_interval_mesh, build_square_mesh
from .fem import InitialDatum, FemSpace, assemble, l2_project, ritz_project, error_norms
from .cq import weights, discrete_convolution
from .stepper import SchemeConfig, step_be, step_sbd, run_scheme
from .oracle import build_modal_solution, exact_solution, uj_eval, KernelDensity

__all__ = [
    "Mesh",
    "build_interval_mesh",
    "build_square_mesh",
    "InitialDatum",
    "FemSpace",
    "assemble",
    "l2_project",
    "ritz_project",
    "error_norms",
    "weights",
    "discrete_convolution",
    "SchemeConfig",
    "step_be",
    "step_sbd",
    "run_scheme",
    "build_modal_solution",
    "exact_solution",
    "uj_eval",
    "KernelDensity",
]
