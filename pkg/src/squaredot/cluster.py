"""Cluster states on small 2D arrays of dot qubits.

Sites are numbered row-major, ``a = r * cols + c``; site 0 is the most
significant bit of the basis index. Row bonds join horizontal neighbours and
use ``row_coupling``; column bonds use ``col_coupling``. Next-nearest
(diagonal) couplings are neglected.
"""
from dataclasses import dataclass, field

import numpy as np

from .gate import (CZCorrection, CouplingParams, cz_correction, cz_invariant, entangling_time,
                   ideal_phases)

MAX_QUBITS = 12


def _check_shape(rows, cols):
    if rows < 1 or cols < 1:
        raise ValueError("array needs at least one row and one column")
    if rows * cols > MAX_QUBITS:
        raise ValueError(f"{rows}x{cols} array exceeds the {MAX_QUBITS}-qubit cap")


def bonds(rows, cols):
    """Nearest-neighbour bonds as ``(a, b, orientation)`` with ``a < b``."""
    out = []
    for r in range(rows):
        for c in range(cols):
            a = r * cols + c
            if c + 1 < cols:
                out.append((a, a + 1, "row"))
            if r + 1 < rows:
                out.append((a, a + cols, "col"))
    return out


def neighbours(rows, cols):
    nb = [[] for _ in range(rows * cols)]
    for a, b, _ in bonds(rows, cols):
        nb[a].append(b)
        nb[b].append(a)
    return nb


def _bits(n):
    idx = np.arange(2**n)
    return (idx[:, None] >> np.arange(n - 1, -1, -1)[None, :]) & 1


def plus_state(n):
    return np.full(2**n, 2.0 ** (-n / 2), dtype=complex)


def ideal_cluster_state(rows, cols):
    """``prod CZ |+>^n`` over all nearest-neighbour bonds."""
    _check_shape(rows, cols)
    n = rows * cols
    x = _bits(n)
    parity = np.zeros(2**n, dtype=int)
    for a, b, _ in bonds(rows, cols):
        parity += x[:, a] * x[:, b]
    return plus_state(n) * (-1.0) ** parity


@dataclass(frozen=True, eq=False)
class QubitArray:
    rows: int
    cols: int
    row_coupling: CouplingParams
    col_coupling: CouplingParams
    state: np.ndarray
    corrections: dict = field(default_factory=dict)

    def __post_init__(self):
        _check_shape(self.rows, self.cols)
        if self.state.shape != (2 ** (self.rows * self.cols),):
            raise ValueError("state length does not match the array size")
        if abs(np.linalg.norm(self.state) - 1.0) > 1e-10:
            raise ValueError("state is not normalized")

    @property
    def n_qubits(self):
        return self.rows * self.cols

    def fidelity(self, target=None) -> float:
        target = ideal_cluster_state(self.rows, self.cols) if target is None else target
        return float(abs(np.vdot(target, self.state)) ** 2)


def _bond_phase(x, a, b, phases, corr: CZCorrection | None):
    """Diagonal phase of one bond gate (plus its local correction) on every basis state."""
    k = 2 * x[:, a] + x[:, b]
    out = np.asarray(phases)[k]
    if corr is not None:
        out = out + corr.alpha_left * x[:, a] + corr.alpha_right * x[:, b] + corr.global_phase
    return out


def build_cluster(rows, cols, row_coupling: CouplingParams, col_coupling: CouplingParams = None,
                  order=("row", "col"), correct=True, t_I_row=None, t_I_col=None) -> QubitArray:
    """All qubits in ``|+>``, then simultaneous row and column gates with local corrections.

    Every gate is diagonal, so each bond contributes a phase per basis state;
    ``order`` only fixes the sequence in which those phases are applied.
    """
    _check_shape(rows, cols)
    col_coupling = row_coupling if col_coupling is None else col_coupling
    if sorted(order) != ["col", "row"]:
        raise ValueError("order must contain 'row' and 'col' once each")
    couplings = {"row": row_coupling, "col": col_coupling}
    times = {"row": t_I_row, "col": t_I_col}
    phases = {k: ideal_phases(c, times[k]) for k, c in couplings.items()}
    corrs = {k: cz_correction(c, times[k]) for k, c in couplings.items()} if correct else {}

    n = rows * cols
    x = _bits(n)
    psi = plus_state(n)
    all_bonds = bonds(rows, cols)
    for orient in order:
        for a, b, o in all_bonds:
            if o == orient:
                psi = psi * np.exp(1j * _bond_phase(x, a, b, phases[o], corrs.get(o)))
    return QubitArray(rows, cols, row_coupling, col_coupling, psi, corrs)


@dataclass(frozen=True, eq=False)
class StabilizerReport:
    values: np.ndarray  # <K_a> per site

    def all_plus_one(self, atol=1e-10) -> bool:
        return bool(np.all(np.abs(self.values - 1.0) <= atol))


def stabilizer_expectation(state, site, nbrs, n) -> float:
    """``<psi| X_site prod_b Z_b |psi>``."""
    x = _bits(n)
    flipped = np.arange(2**n) ^ (1 << (n - 1 - site))
    sign = (-1.0) ** np.sum(x[:, nbrs], axis=1) if len(nbrs) else 1.0
    return float(np.real(np.vdot(state, sign * state[flipped])))


def stabilizer_report(array: QubitArray) -> StabilizerReport:
    nb = neighbours(array.rows, array.cols)
    n = array.n_qubits
    vals = np.array([stabilizer_expectation(array.state, a, nb[a], n) for a in range(n)])
    return StabilizerReport(np.clip(vals, -1.0, 1.0))


def stabilizer_matrix(rows, cols, site) -> np.ndarray:
    """Dense ``K_a`` (for commutation checks on small arrays)."""
    _check_shape(rows, cols)
    X = np.array([[0.0, 1.0], [1.0, 0.0]])
    Z = np.diag([1.0, -1.0])
    nb = neighbours(rows, cols)[site]
    K = np.ones((1, 1))
    for q in range(rows * cols):
        K = np.kron(K, X if q == site else Z if q in nb else np.eye(2))
    return K


@dataclass(frozen=True)
class GateComparison:
    row_phases: tuple
    col_phases: tuple
    row_invariant: float
    col_invariant: float
    row_correction: CZCorrection
    col_correction: CZCorrection
    identical: bool
    flagged: tuple  # orientations whose invariant is not pi

    @property
    def ok(self):
        return not self.flagged


def asymmetric_gate_check(row_c: CouplingParams, col_c: CouplingParams, t_I_row=None,
                          t_I_col=None, atol=1e-9) -> GateComparison:
    """Compare row and column gates; both must be CZ up to (different) local z phases."""
    pr = ideal_phases(row_c, t_I_row)
    pc = ideal_phases(col_c, t_I_col)
    ir, ic = cz_invariant(pr), cz_invariant(pc)
    flagged = tuple(o for o, inv in (("row", ir), ("col", ic)) if abs(abs(inv) - np.pi) > atol)
    cr = cz_correction(row_c, t_I_row, atol=np.inf)
    cc = cz_correction(col_c, t_I_col, atol=np.inf)
    same = bool(np.allclose(np.exp(1j * pr), np.exp(1j * pc), atol=atol, rtol=0))
    return GateComparison(tuple(pr), tuple(pc), ir, ic, cr, cc, same, flagged)


def gate_times(row_c: CouplingParams, col_c: CouplingParams):
    return entangling_time(row_c), entangling_time(col_c)
