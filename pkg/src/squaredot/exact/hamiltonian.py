"""Two-electron Hamiltonian in a pair basis of box modes."""
from dataclasses import dataclass

import numpy as np

from .basis import PairBasis, SinglePartBasis, SquareDot, build_pair_basis, gate_matrix_elements
from .coulomb import CoulombTensor


@dataclass(frozen=True, eq=False)
class SectorOperators:
    """``H(V) = H0 + V * gate`` for one spin sector.

    ``gate`` is the pair-space matrix of ``chi_bd(r1) + chi_bd(r2)``, so half its
    expectation value is the probability of finding an electron in quadrants b, d.
    """

    pairs: PairBasis
    H0: np.ndarray
    gate: np.ndarray

    def hamiltonian(self, V):
        return self.H0 + V * self.gate


def _one_body(o, ir, jr, kc, lc, sign):
    def term(a, b, c, d):
        return o[a[:, None], c[None, :]] * (b[:, None] == d[None, :])
    direct = term(ir, jr, kc, lc) + term(jr, ir, lc, kc)
    exchange = term(ir, jr, lc, kc) + term(jr, ir, kc, lc)
    return direct + sign * exchange


def _coulomb_block(B, idx, coef, ir, jr, kc, lc, sign):
    def v(i, j, k, l):
        sel = idx[j[:, None], l[None, :]]
        c = coef[j[:, None], l[None, :]]
        ii = i[:, None, None]
        kk = k[None, :, None]
        return np.sum(c * B[ii, kk, sel], axis=-1)
    return v(ir, jr, kc, lc) + sign * v(ir, jr, lc, kc)


def sector_operators(basis: SinglePartBasis, tensor: CoulombTensor, sector: str,
                     chunk: int = 128) -> SectorOperators:
    """Assemble kinetic + Coulomb (``H0``) and the gate operator for ``sector``."""
    if tensor.size != basis.size:
        raise ValueError(f"basis has {basis.size} modes but tensor has {tensor.size}")
    pairs = build_pair_basis(basis.size, sector)
    P = pairs.size
    sign = pairs.sign
    norms = pairs.norms
    G1 = gate_matrix_elements(basis)
    B = tensor.half_contracted()
    H0 = np.empty((P, P))
    gate = np.empty((P, P))
    kc, lc = pairs.i, pairs.j
    for start in range(0, P, chunk):
        rows = slice(start, min(start + chunk, P))
        ir, jr = pairs.i[rows], pairs.j[rows]
        # <ij|O|kl> over symmetrized pairs = 2 N_ij N_kl (O_ij,kl +- O_ij,lk) for exchange-symmetric O
        w = 2.0 * norms[rows, None] * norms[None, :]
        gate[rows] = w * _one_body(G1, ir, jr, kc, lc, sign)
        H0[rows] = w * _coulomb_block(B, tensor.idx, tensor.coef, ir, jr, kc, lc, sign)
    H0[np.diag_indices(P)] += basis.energies[pairs.i] + basis.energies[pairs.j]
    H0 = 0.5 * (H0 + H0.T)
    gate = 0.5 * (gate + gate.T)
    return SectorOperators(pairs, H0, gate)


def assemble_hamiltonian(dot: SquareDot, sector: str, basis: SinglePartBasis,
                         tensor: CoulombTensor) -> np.ndarray:
    if abs(dot.L - basis.L) > 1e-12 * dot.L:
        raise ValueError("dot and basis side lengths differ")
    return sector_operators(basis, tensor, sector).hamiltonian(dot.V)
