"""Microscopic two-electron problem in a square dot."""
from .basis import SINGLET, TRIPLET, SquareDot, build_pair_basis, build_sp_basis
from .coulomb import ConvergenceError, CoulombTensor, coulomb_tensor
from .hamiltonian import assemble_hamiltonian, sector_operators
from .solver import (DensityGrid, EffectiveParams, SpectrumResult, SquareDotSolver, charge_density,
                     extract_effective, quadrant_probability)
