"""Singlet-triplet qubits in square quantum dots."""
from .exact import ConvergenceError, EffectiveParams, SquareDotSolver
from .units import GAAS, MaterialParams

__version__ = "0.1.0"
