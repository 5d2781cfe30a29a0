"""Spinor lifts of magnetostatic fields, the fixed-point iteration
H -> s curl A[H] for the Seiberg-Witten (s = +1) and Freund (s = -1)
systems, residual verification and planar Liouville solutions."""

__version__ = "0.1.0"

from .fields import SampleConfig, SampleSet, VectorField, curl, divergence, gradient, sample_points
from .iterate import EquationSystem, IterationConfig, IterationTrace, Status, run, step
from .lift import Section, SpinorField, bilinear, lift_potential, lift_spinor
from .verify import VerificationReport, VerifyConfig, holonomy, verify_solution, verify_tuple

__all__ = [
    "EquationSystem", "IterationConfig", "IterationTrace", "SampleConfig", "SampleSet", "Section",
    "SpinorField", "Status", "VectorField", "VerificationReport", "VerifyConfig", "bilinear", "curl",
    "divergence", "gradient", "holonomy", "lift_potential", "lift_spinor", "run", "sample_points",
    "step", "verify_solution", "verify_tuple",
]
