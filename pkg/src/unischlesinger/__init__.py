"""Numerical toolkit for matrix Riemann-Hilbert factorization on the unit circle
and its isomonodromic deformations under circle diffeomorphisms."""

from .birkhoff import BirkhoffPair, DetFormula, factorize, jump_residual, sl_reduce
from .circle_diffeo import Diffeo, identity, lie_derivative, make_diffeo, pushforward_loop, rotation
from .config import ConfigError, ExperimentConfig, load_config, parse_config
from .errors import LoopError
from .fourier_circle import CauchySide, Loop, analyze, cauchy_project, from_function, synthesize
from .fuchsian_bridge import FuchsianData, ks_identity_residual, winning_convention
from .isomonodromy import DeformationContext, deformation_jet, schlesinger_residual
from .jump_residue import CoefficientTable, compute_jump_density, eval_field, eval_omega, fourier_coefficients_B

__all__ = [
    "BirkhoffPair", "DetFormula", "factorize", "jump_residual", "sl_reduce",
    "Diffeo", "identity", "lie_derivative", "make_diffeo", "pushforward_loop", "rotation",
    "ConfigError", "ExperimentConfig", "load_config", "parse_config",
    "LoopError",
    "CauchySide", "Loop", "analyze", "cauchy_project", "from_function", "synthesize",
    "FuchsianData", "ks_identity_residual", "winning_convention",
    "DeformationContext", "deformation_jet", "schlesinger_residual",
    "CoefficientTable", "compute_jump_density", "eval_field", "eval_omega", "fourier_coefficients_B",
]
