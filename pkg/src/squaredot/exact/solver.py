"""Exact diagonalization of two electrons in a gated square dot.

:class:`SquareDotSolver` caches the Coulomb table and the per-sector operators
``H(V) = H0 + V * gate`` so that spectra at many gate voltages only cost an
eigensolve each.
"""
import logging
import warnings
from dataclasses import dataclass
from functools import cached_property

import numpy as np
import scipy.linalg
import scipy.sparse.linalg

from ..units import GAAS, HBAR, MaterialParams
from .basis import SINGLET, TRIPLET, PairBasis, SquareDot, build_sp_basis, gate_matrix_elements
from .coulomb import ConvergenceError, coulomb_tensor
from .hamiltonian import SectorOperators, sector_operators

log = logging.getLogger(__name__)

DENSE_LIMIT = 3000
RESIDUAL_RTOL = 1e-8


@dataclass(frozen=True, eq=False)
class SpectrumResult:
    energies: np.ndarray
    vectors: np.ndarray  # columns over the pair basis
    sector: str
    V: float
    pairs: PairBasis
    residual: float = 0.0

    def __len__(self):
        return len(self.energies)


@dataclass(frozen=True)
class EffectiveParams:
    """Constants of the reduced four-level model of one dot, energies in ueV."""

    E0S: float
    E0T: float
    Delta0: float
    p_S: float
    p_T: float
    a_S: float = 0.0

    def __post_init__(self):
        if not self.Delta0 > 0:
            raise ValueError("Delta0 must be positive")
        for name in ("p_S", "p_T"):
            p = getattr(self, name)
            if not 0 <= p <= 0.5:
                raise ValueError(f"{name} must lie in [0, 1/2], got {p}")

    @property
    def t_R(self):
        """Time for full vertical-to-horizontal conversion at V=0, ns."""
        return np.pi * HBAR / (2 * self.Delta0)


@dataclass(frozen=True, eq=False)
class DensityGrid:
    """Charge density on a uniform grid including the walls.

    With more than ``2 n_max`` intervals per axis the trapezoid weights integrate
    products of box modes exactly.
    """

    x: np.ndarray
    y: np.ndarray
    rho: np.ndarray  # shape (len(x), len(y)), 1/nm^2

    def weights(self):
        wx = np.full(len(self.x), self.x[1] - self.x[0])
        wx[[0, -1]] *= 0.5
        wy = np.full(len(self.y), self.y[1] - self.y[0])
        wy[[0, -1]] *= 0.5
        return np.outer(wx, wy)

    def integral(self):
        return float(np.sum(self.rho * self.weights()))


def lowest_spectrum(H, k: int, sector=None, V=None, pairs=None) -> SpectrumResult:
    """Lowest ``k`` eigenpairs of a real symmetric matrix, ascending.

    Dense LAPACK below ``DENSE_LIMIT`` rows, implicitly restarted Lanczos above.
    Raises :class:`ConvergenceError` when the worst residual exceeds
    ``1e-8 * ||H||_1``.
    """
    n = H.shape[0]
    if not 0 < k <= n:
        raise ValueError(f"k={k} outside 1..{n}")
    if n <= DENSE_LIMIT or k >= n - 1:
        E, X = scipy.linalg.eigh(H, subset_by_index=[0, k - 1])
    else:
        v0 = np.ones(n) / np.sqrt(n)
        E, X = scipy.sparse.linalg.eigsh(H, k=k, which="SA", v0=v0, tol=1e-13,
                                         ncv=min(n, max(2 * k + 1, k + 40)))
        order = np.argsort(E)
        E, X = E[order], X[:, order]
        # re-orthonormalize within clusters
        X, _ = np.linalg.qr(X)
        Hr = X.T @ (H @ X)
        E, R = np.linalg.eigh(0.5 * (Hr + Hr.T))
        X = X @ R
    norm = np.max(np.sum(np.abs(H), axis=0))
    residual = float(np.max(np.linalg.norm(H @ X - X * E, axis=0)))
    if residual > RESIDUAL_RTOL * norm:
        raise ConvergenceError(f"eigensolver residual {residual:.3e} exceeds {RESIDUAL_RTOL:g} * ||H||")
    return SpectrumResult(E, X, sector, V, pairs, residual)


def _fix_signs(X):
    """Make the largest-magnitude entry of each column positive."""
    idx = np.argmax(np.abs(X), axis=0)
    s = np.sign(X[idx, np.arange(X.shape[1])])
    s[s == 0] = 1.0
    return X * s


@dataclass(frozen=True, eq=False)
class Trajectory:
    t: np.ndarray
    P_ac: np.ndarray
    P_bd: np.ndarray
    norm: np.ndarray
    amplitudes: np.ndarray  # projections on the reference states, shape (len(t), n_ref)


class SquareDotSolver:
    """Two electrons in a hard-wall square dot with gates on quadrants b and d.

    Parameters
    ----------
    L : float
        Side length in nm.
    n_max : int
        Box modes per axis; the single-particle basis has ``n_max**2`` states.
    quadrature_order : int
        Gauss-Legendre nodes per panel for the Coulomb table.
    spectrum_cutoff : int
        Eigenstates per sector and gate voltage kept for time evolution.
    """

    def __init__(self, L=400.0, n_max=10, quadrature_order=32, material: MaterialParams = GAAS,
                 spectrum_cutoff=30):
        self.dot = SquareDot(L)
        self.n_max = int(n_max)
        self.quadrature_order = int(quadrature_order)
        self.material = material
        self.spectrum_cutoff = int(spectrum_cutoff)
        self.basis = build_sp_basis(self.dot, self.n_max, material)
        self._ops = {}
        self._spectra = {}

    @property
    def L(self):
        return self.dot.L

    @cached_property
    def tensor(self):
        return coulomb_tensor(self.basis, self.quadrature_order)

    def operators(self, sector) -> SectorOperators:
        if sector not in self._ops:
            log.info("assembling %s sector for L=%g nm, n_max=%d", sector, self.L, self.n_max)
            self._ops[sector] = sector_operators(self.basis, self.tensor, sector)
        return self._ops[sector]

    def dimension(self, sector):
        return self.operators(sector).pairs.size

    def spectrum(self, V=0.0, sector=SINGLET, k=6) -> SpectrumResult:
        V = float(V)
        cached = self._spectra.get((sector, V))
        if cached is not None and len(cached) >= k:
            return _truncate(cached, k)
        ops = self.operators(sector)
        res = lowest_spectrum(ops.hamiltonian(V), k, sector, V, ops.pairs)
        res = SpectrumResult(res.energies, _fix_signs(res.vectors), sector, V, ops.pairs, res.residual)
        self._spectra[(sector, V)] = res
        return res

    # --- configuration states -------------------------------------------------

    def p_bd(self, sector, vec):
        """Probability that an electron sits in quadrants b or d."""
        ops = self.operators(sector)
        return 0.5 * float(vec @ ops.gate @ vec)

    @cached_property
    def configuration_states(self):
        """V=0 localized states ``{'Sv', 'Sh', 'Tv', 'Th'}`` as pair-basis vectors.

        Singlets follow ``Sv = (S1 - S2)/sqrt(2)``, ``Sh = (S1 + S2)/sqrt(2)`` with
        the sign of S2 chosen so that ``Sv`` lives in quadrants a, c. The
        degenerate triplet pair is rotated to diagonalize the gate operator.
        """
        s = self.spectrum(0.0, SINGLET, 2)
        S1, S2 = s.vectors[:, 0], s.vectors[:, 1]
        Sv = (S1 - S2) / np.sqrt(2)
        if self.p_bd(SINGLET, Sv) > 0.5:
            S2 = -S2
            Sv = (S1 - S2) / np.sqrt(2)
        Sh = (S1 + S2) / np.sqrt(2)

        t = self.spectrum(0.0, TRIPLET, 2)
        X = t.vectors
        g = X.T @ self.operators(TRIPLET).gate @ X
        _, R = np.linalg.eigh(0.5 * (g + g.T))
        Tv, Th = (X @ R).T
        Tv, Th = _fix_signs(np.column_stack([Tv, Th])).T
        return {"S1": S1, "S2": S2, "Sv": Sv, "Sh": Sh, "Tv": Tv, "Th": Th}

    def effective_params(self) -> EffectiveParams:
        s = self.spectrum(0.0, SINGLET, 2).energies
        t = self.spectrum(0.0, TRIPLET, 2).energies
        delta0 = 0.5 * (s[1] - s[0])
        split = abs(t[1] - t[0])
        if split > 1e-3 * delta0:
            warnings.warn(f"triplet pair split by {split:.3g} ueV at V=0; square symmetry broken numerically")
        cs = self.configuration_states
        return EffectiveParams(
            E0S=float(0.5 * (s[0] + s[1])),
            E0T=float(0.5 * (t[0] + t[1])),
            Delta0=float(delta0),
            p_S=self.p_bd(SINGLET, cs["Sv"]),
            p_T=self.p_bd(TRIPLET, cs["Tv"]),
            a_S=0.0,
        )

    def mixing_integral(self):
        """``a_S`` evaluated numerically; zero up to round-off by symmetry."""
        cs = self.configuration_states
        return 0.5 * float(cs["Sv"] @ self.operators(SINGLET).gate @ cs["Sh"])

    # --- densities --------------------------------------------------------------

    def coefficient_matrix(self, sector, vec):
        return self.operators(sector).pairs.to_matrix(vec)

    def charge_density(self, sector, vec, n_grid=101) -> DensityGrid:
        if n_grid - 1 <= 2 * self.n_max:
            raise ValueError(f"n_grid must exceed 2 n_max + 1 = {2 * self.n_max + 1}")
        x = np.linspace(0.0, self.L, n_grid)
        X, Y = np.meshgrid(x, x, indexing="ij")
        phi = self.basis.evaluate(X, Y).reshape(self.basis.size, -1)
        C = self.coefficient_matrix(sector, vec)
        D = C @ C.T
        rho = 2.0 * np.einsum("ig,ik,kg->g", phi, D, phi, optimize=True)
        return DensityGrid(x, x.copy(), rho.reshape(n_grid, n_grid))

    def quadrant_probability(self, sector, vec, quadrants="bd"):
        """``int_{quadrants} dr1 int dr2 |Psi|^2`` from closed-form indicator elements."""
        G = gate_matrix_elements(self.basis, quadrants)
        C = self.coefficient_matrix(sector, vec)
        return float(np.sum((C @ C.T) * G))

    # --- dynamics ---------------------------------------------------------------

    def evolve_piecewise(self, initial, schedule, sector=SINGLET, samples=200, reference=None,
                         cutoff=None) -> Trajectory:
        """Propagate ``initial`` through ``[(V, duration), ...]`` segments.

        The state is evolved exactly inside the span of the lowest ``cutoff``
        eigenstates at every gate voltage in the schedule (plus the initial
        state), so leakage out of the lowest multiplet is retained while the
        propagation stays unitary.
        """
        cutoff = self.spectrum_cutoff if cutoff is None else int(cutoff)
        dim = self.dimension(sector)
        if cutoff > dim:
            raise ValueError(f"cutoff {cutoff} exceeds the {sector} dimension {dim}")
        if not schedule:
            raise ValueError("empty schedule")
        for V, dt in schedule:
            if not dt > 0:
                raise ValueError(f"segment durations must be positive, got {dt}")
        psi0 = np.asarray(initial, dtype=float)
        n0 = np.linalg.norm(psi0)
        if abs(n0 - 1) > 1e-10:
            raise ValueError(f"initial state not normalized (norm {n0})")
        ops = self.operators(sector)
        cols = [psi0[:, None]]
        for V in sorted({float(V) for V, _ in schedule}):
            cols.append(self.spectrum(V, sector, cutoff).vectors)
        Q, _ = np.linalg.qr(np.hstack(cols))
        H0 = Q.T @ ops.H0 @ Q
        G = Q.T @ ops.gate @ Q
        H0, G = 0.5 * (H0 + H0.T), 0.5 * (G + G.T)
        ref = [] if reference is None else list(reference)
        R = Q.T @ np.column_stack(ref) if ref else np.zeros((Q.shape[1], 0))

        c = (Q.T @ psi0).astype(complex)
        total = sum(dt for _, dt in schedule)
        t_grid = np.linspace(0.0, total, samples)
        ts, cs = [], []
        t0 = 0.0
        for n, (V, dt) in enumerate(schedule):
            E, U = np.linalg.eigh(H0 + V * G)
            last = n == len(schedule) - 1
            inside = (t_grid >= t0) & ((t_grid <= t0 + dt) if last else (t_grid < t0 + dt))
            tau = t_grid[inside] - t0
            a = U.T @ c
            seg = (U @ (a[:, None] * np.exp(-1j * np.outer(E, tau) / HBAR))).T
            ts.append(t_grid[inside])
            cs.append(seg)
            c = U @ (a * np.exp(-1j * E * dt / HBAR))
            t0 += dt
        t = np.concatenate(ts)
        C = np.vstack(cs)
        P_bd = 0.5 * np.real(np.einsum("ti,ij,tj->t", C.conj(), G, C))
        norm = np.linalg.norm(C, axis=1)
        amps = C @ R.conj() if R.shape[1] else np.zeros((len(t), 0), complex)
        return Trajectory(t, norm**2 - P_bd, P_bd, norm, amps)

    def compare_spectra(self, V_list, eff: EffectiveParams = None):
        """Rows ``(V, exact S1, S2, T1, T2, model S1, S2, T_low, T_high)`` in ueV."""
        from ..effective import singlet_spectrum, triplet_energies

        eff = eff or self.effective_params()
        rows = []
        for V in V_list:
            s = self.spectrum(V, SINGLET, 2).energies
            t = self.spectrum(V, TRIPLET, 2).energies
            es = singlet_spectrum(eff, V)
            et = sorted(triplet_energies(eff, V))
            rows.append((float(V), s[0], s[1], t[0], t[1], es[0], es[1], et[0], et[1]))
        return np.array(rows)


def _truncate(res: SpectrumResult, k):
    return SpectrumResult(res.energies[:k], res.vectors[:, :k], res.sector, res.V, res.pairs, res.residual)


def extract_effective(solver: SquareDotSolver) -> EffectiveParams:
    return solver.effective_params()


def charge_density(solver: SquareDotSolver, result: SpectrumResult, which: int, n_grid=101) -> DensityGrid:
    if which >= len(result):
        raise IndexError(f"state {which} not among the {len(result)} computed")
    return solver.charge_density(result.sector, result.vectors[:, which], n_grid)


def quadrant_probability(solver: SquareDotSolver, result: SpectrumResult, which: int, quadrants="bd"):
    if which >= len(result):
        raise IndexError(f"state {which} not among the {len(result)} computed")
    return solver.quadrant_probability(result.sector, result.vectors[:, which], quadrants)
