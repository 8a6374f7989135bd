"""Capacitive two-qubit gate between neighbouring dots.

Two-dot states live in the 16-dim product of the configuration bases
``(Sv, Sh, Tv, Th)``; index ``4 * left + right``. The qubit subspace is spanned
by ``Sv`` (``|0>``) and ``Tv`` (``|1>``) on each dot.
"""
import warnings
from dataclasses import dataclass

import numpy as np
import scipy.optimize

from .effective import SH, SV, TH, TV, config_hamiltonian
from .exact.solver import EffectiveParams
from .units import GAAS, HBAR, MaterialParams

QUBIT_LEVELS = (SV, TV)
QUBIT_INDEX = np.array([4 * a + b for a in QUBIT_LEVELS for b in QUBIT_LEVELS])
HORIZONTAL = np.array([0.0, 1.0, 0.0, 1.0])
VERTICAL = np.array([1.0, 0.0, 1.0, 0.0])


class LeakageError(ValueError):
    """State carries weight outside the two-qubit subspace."""


class NotCZEquivalentError(ValueError):
    """Diagonal phases cannot be mapped to CZ by local z rotations."""


@dataclass(frozen=True)
class CouplingParams:
    """Electrostatic energies (ueV) of the ``<->,<->`` (u0) and vertical-vertical (u1) configurations."""

    u0: float
    u1: float
    d: float = float("nan")
    L: float = float("nan")

    def __post_init__(self):
        if not (self.u0 > 0 and self.u1 > 0):
            if not (self.u0 == 0 and self.u1 == 0):
                raise ValueError("u0 and u1 must both be positive (or both zero for the decoupled limit)")
        if not (np.isnan(self.d) or np.isnan(self.L)) and self.d <= self.L:
            raise ValueError(f"dots overlap: d={self.d} <= L={self.L}")

    @property
    def total(self):
        return self.u0 + self.u1


@dataclass(frozen=True)
class PointChargeCoupling:
    """Exact corner point-charge couplings; unlike :class:`CouplingParams` either sign is allowed."""

    u0: float
    u1: float
    energies: dict
    d: float
    L: float

    @property
    def total(self):
        return self.u0 + self.u1


def _check_geometry(L, d):
    if not d > L:
        raise ValueError(f"dot spacing d={d} must exceed the dot size L={L}")


def coupling_energies(L, d, mat: MaterialParams = GAAS) -> CouplingParams:
    """Leading ``(L/d)^2`` order of the corner point-charge estimate."""
    _check_geometry(L, d)
    k = mat.coulomb_scale / d
    r = (L / d) ** 2
    return CouplingParams(3.0 * k * r, k * r, d, L)


def _corners(config, L, x0):
    """Electron pair of a dot centred at ``(x0, 0)``.

    The inter-dot axis runs along a diagonal of each square, so the two
    diagonal configurations point along (``h``) or across (``v``) that axis.
    Corners sit ``L / sqrt(2)`` from the centre.
    """
    s = L / np.sqrt(2.0)
    if config == "h":
        return np.array([[x0 - s, 0.0], [x0 + s, 0.0]])
    return np.array([[x0, -s], [x0, s]])


def configuration_energies(L, d, mat: MaterialParams = GAAS):
    """Inter-dot Coulomb energy of point charges for ``vv, vh, hv, hh`` (ueV)."""
    _check_geometry(L, d)
    out = {}
    for left in "vh":
        for right in "vh":
            a = _corners(left, L, 0.0)
            b = _corners(right, L, d)
            r = np.linalg.norm(a[:, None, :] - b[None, :, :], axis=-1)
            out[left + right] = mat.coulomb_scale * float(np.sum(1.0 / r))
    return out


def point_charge_oracle(L, d, mat: MaterialParams = GAAS) -> PointChargeCoupling:
    """Exact corner point-charge energies, offset so the mixed configurations sit at zero.

    To order ``(L/d)^2`` the four energies are additive in the two dots, so
    ``u1`` comes out near ``-u0`` and ``u0 + u1`` only survives at ``(L/d)^4``.
    """
    e = configuration_energies(L, d, mat)
    offset = 0.5 * (e["vh"] + e["hv"])
    return PointChargeCoupling(e["hh"] - offset, e["vv"] - offset, e, d, L)


def interaction_hamiltonian(c: CouplingParams) -> np.ndarray:
    diag = c.u0 * np.kron(HORIZONTAL, HORIZONTAL) + c.u1 * np.kron(VERTICAL, VERTICAL)
    return np.diag(diag)


def local_hamiltonian(eff: EffectiveParams, V_left, V_right=None, rotating=False) -> np.ndarray:
    """``H_L + H_R``; ``rotating`` drops the static energies ``E0S``, ``E0T``."""
    V_right = V_left if V_right is None else V_right
    shift = np.diag([eff.E0S, eff.E0S, eff.E0T, eff.E0T]) if rotating else 0.0
    hl = config_hamiltonian(eff, V_left) - shift
    hr = config_hamiltonian(eff, V_right) - shift
    one = np.eye(4)
    return np.kron(hl, one) + np.kron(one, hr)


def propagator(H, t):
    E, U = np.linalg.eigh(H)
    return (U * np.exp(-1j * E * t / HBAR)) @ U.conj().T


def rotation_time(eff: EffectiveParams):
    return eff.t_R


def entangling_time(c: CouplingParams) -> float:
    """``pi hbar / (u0 + u1)`` in ns."""
    return np.pi * HBAR / c.total


def gate_unitary(eff: EffectiveParams, c: CouplingParams, t_I, rotating=True) -> np.ndarray:
    """Idealized ``exp(-i H0 t_R) exp(-i H_I t_I) exp(-i H0 t_R)`` at V=0.

    ``H_I`` is ignored while the pairs rotate and ``H0`` is switched off while
    they interact. In the rotating frame (default) the static energies are
    dropped, which only removes local z phases.
    """
    U0 = propagator(local_hamiltonian(eff, 0.0, rotating=rotating), eff.t_R)
    UI = np.diag(np.exp(-1j * np.diag(interaction_hamiltonian(c)) * t_I / HBAR))
    return U0 @ UI @ U0


def qubit_block(U) -> np.ndarray:
    return U[np.ix_(QUBIT_INDEX, QUBIT_INDEX)]


def qubit_phases(U):
    """Phases ``phi_xy = arg <xy|U|xy>`` on the qubit basis ``00, 01, 10, 11``."""
    U = np.asarray(U)
    block = U if U.shape == (4, 4) else qubit_block(U)
    return np.angle(np.diag(block))


def ideal_phases(c: CouplingParams, t_I=None) -> np.ndarray:
    """Closed-form qubit phases of the idealized gate (rotating frame)."""
    t_I = entangling_time(c) if t_I is None else t_I
    return np.array([-c.u0 * t_I / HBAR, np.pi, np.pi, -c.u1 * t_I / HBAR])


def cz_invariant(phases) -> float:
    """``phi_00 + phi_11 - phi_01 - phi_10`` wrapped to ``(-pi, pi]``; local z rotations leave it unchanged."""
    p00, p01, p10, p11 = phases
    return float(_wrap(p00 + p11 - p01 - p10))


def _wrap(x):
    return np.pi - np.mod(np.pi - np.asarray(x), 2.0 * np.pi)


@dataclass(frozen=True)
class CZCorrection:
    """Phases ``alpha`` added to ``|1>`` of each qubit plus a global phase."""

    alpha_left: float
    alpha_right: float
    global_phase: float

    def matrix(self):
        zl = np.array([1.0, np.exp(1j * self.alpha_left)])
        zr = np.array([1.0, np.exp(1j * self.alpha_right)])
        return np.exp(1j * self.global_phase) * np.diag(np.kron(zl, zr))


def cz_correction(U, t_I=None, atol=1e-9) -> CZCorrection:
    """Local z phases turning the diagonal qubit block of ``U`` into CZ.

    ``U`` may be a 16x16 or 4x4 unitary, or a :class:`CouplingParams`, in
    which case the idealized phases at ``t_I`` are used.
    """
    phases = ideal_phases(U, t_I) if isinstance(U, CouplingParams) else qubit_phases(U)
    inv = cz_invariant(phases)
    if abs(abs(inv) - np.pi) > atol:
        raise NotCZEquivalentError(f"phase invariant {inv:.6g} differs from pi")
    p00, p01, p10, _ = phases
    return CZCorrection(float(_wrap(p00 - p10)), float(_wrap(p00 - p01)), float(_wrap(-p00)))


def corrected_gate(U, corr: CZCorrection = None):
    """Qubit block of ``U`` after the local correction."""
    corr = corr or cz_correction(U)
    return corr.matrix() @ qubit_block(U)


CZ = np.diag([1.0, 1.0, 1.0, -1.0]).astype(complex)


def plus_plus() -> np.ndarray:
    psi = np.zeros(16, dtype=complex)
    psi[QUBIT_INDEX] = 0.5
    return psi


def concurrence(state, leakage_tol=1e-6) -> float:
    """Concurrence of a pure two-qubit state (16 amplitudes or 4 qubit amplitudes)."""
    psi = np.asarray(state, dtype=complex)
    if psi.shape == (16,):
        outside = np.delete(psi, QUBIT_INDEX)
        leak = float(np.sum(np.abs(outside) ** 2))
        if leak > leakage_tol:
            raise LeakageError(f"{leak:.3g} of the weight lies outside the qubit subspace")
        psi = psi[QUBIT_INDEX]
    if psi.shape != (4,):
        raise ValueError("expected 4 or 16 amplitudes")
    psi = psi / np.linalg.norm(psi)
    return float(2.0 * abs(psi[0] * psi[3] - psi[1] * psi[2]))


@dataclass(frozen=True, eq=False)
class GateTrajectory:
    t: np.ndarray
    states: np.ndarray  # (len(t), 16)
    unitary: np.ndarray  # full 16x16 propagator of the schedule


def gate_schedule(eff: EffectiveParams, c: CouplingParams, V_freeze=None, t_I=None):
    """Rotate, freeze horizontally (negative V), rotate back."""
    V_freeze = -3.0 * eff.Delta0 if V_freeze is None else V_freeze
    t_I = entangling_time(c) if t_I is None else t_I
    return [(0.0, eff.t_R), (V_freeze, t_I), (0.0, eff.t_R)]


def full_dynamics(eff: EffectiveParams, c: CouplingParams, schedule=None, initial=None,
                  samples=0) -> GateTrajectory:
    """Piecewise-exact evolution under ``H_L + H_R + H_I`` (no idealization)."""
    schedule = gate_schedule(eff, c) if schedule is None else schedule
    HI = interaction_hamiltonian(c)
    psi = plus_plus() if initial is None else np.asarray(initial, dtype=complex)
    total = sum(dt for _, dt in schedule)
    grid = np.linspace(0.0, total, samples) if samples else np.zeros(0)
    ts, states = [], []
    U = np.eye(16, dtype=complex)
    t0 = 0.0
    for n, (V, dt) in enumerate(schedule):
        H = local_hamiltonian(eff, V) + HI
        E, W = np.linalg.eigh(H)
        last = n == len(schedule) - 1
        inside = (grid >= t0) & ((grid <= t0 + dt) if last else (grid < t0 + dt))
        tau = grid[inside] - t0
        a = W.conj().T @ (U @ psi)
        if len(tau):
            states.append((W @ (a[:, None] * np.exp(-1j * np.outer(E, tau) / HBAR))).T)
            ts.append(grid[inside])
        U = (W * np.exp(-1j * E * dt / HBAR)) @ W.conj().T @ U
        t0 += dt
    t = np.concatenate(ts) if ts else np.zeros(0)
    S = np.vstack(states) if states else np.zeros((0, 16), complex)
    return GateTrajectory(t, S, U)


def gate_fidelity(U_target, U_actual, optimize_local_phases=True) -> float:
    """``|Tr(A^dag B)|^2 / 16`` on the qubit subspace.

    With ``optimize_local_phases`` the best local z correction on ``U_actual``
    is applied first; such phases are fixed by the same local rotations that
    turn the gate into CZ.
    """
    M = qubit_block(U_target).conj().T @ qubit_block(U_actual)
    d = np.diag(M)
    if not optimize_local_phases:
        return float(abs(np.sum(d)) ** 2 / 16.0)
    bits = np.array([[0, 0], [0, 1], [1, 0], [1, 1]])

    def neg(alpha):
        return -abs(np.sum(d * np.exp(1j * bits @ alpha))) ** 2 / 16.0

    best = min((scipy.optimize.minimize(neg, x0, method="Nelder-Mead",
                                        options={"xatol": 1e-10, "fatol": 1e-14})
                for x0 in ([0.0, 0.0], [np.pi, 0.0], [0.0, np.pi], [np.pi, np.pi])),
               key=lambda r: r.fun)
    return float(-best.fun)


# --- first-order perturbation theory --------------------------------------------


@dataclass(frozen=True, eq=False)
class PerturbedSpectrum:
    a: float
    b: float
    c: float
    labels: tuple
    vectors: np.ndarray  # (16, 8) normalized columns
    unperturbed: np.ndarray  # (16, 8) zeroth-order columns


def _eigenbasis_v0(eff: EffectiveParams):
    """Single-dot vectors S1, S2 (sign with ``S2 = (Sv - Sh)/sqrt(2)``), Tv in the config basis."""
    S1 = np.zeros(4)
    S1[[SV, SH]] = 1 / np.sqrt(2)
    S2 = np.zeros(4)
    S2[SV], S2[SH] = 1 / np.sqrt(2), -1 / np.sqrt(2)
    T = np.zeros(4)
    T[TV] = 1.0
    return S1, S2, T


def perturbed_eigenvectors(eff: EffectiveParams, c: CouplingParams) -> PerturbedSpectrum:
    """First-order eigenvectors of ``H0 + H_I`` at V=0 near the qubit-relevant states.

    ``S2`` carries the sign ``(Sv - Sh)/sqrt(2)``; with that choice the
    coefficients are ``a = (u0 - u1)/(8 Delta0)``, ``b = (u0 + u1)/(16 Delta0)``,
    ``c = u1/(4 Delta0)``.
    """
    if max(c.u0, c.u1) > 0.3 * eff.Delta0:
        warnings.warn("couplings above 0.3 Delta0; first-order eigenvectors are unreliable")
    a = (c.u0 - c.u1) / (8 * eff.Delta0)
    b = (c.u0 + c.u1) / (16 * eff.Delta0)
    cc = c.u1 / (4 * eff.Delta0)
    S1, S2, T = _eigenbasis_v0(eff)

    def k(x, y):
        return np.kron(x, y)

    r2 = np.sqrt(2)
    zeroth = [k(S1, S1), (k(S1, S2) + k(S2, S1)) / r2, (k(S1, S2) - k(S2, S1)) / r2, k(S2, S2),
              k(S1, T), k(T, S1), k(S2, T), k(T, S2)]
    first = [
        k(S1, S1) + a * k(S1, S2) + a * k(S2, S1) - b * k(S2, S2),
        (k(S1, S2) + k(S2, S1)) / r2 - a * r2 * (k(S1, S1) - k(S2, S2)),
        (k(S1, S2) - k(S2, S1)) / r2,
        k(S2, S2) + b * k(S1, S1) - a * k(S1, S2) - a * k(S2, S1),
        k(S1, T) - cc * k(S2, T),
        k(T, S1) - cc * k(T, S2),
        k(S2, T) + cc * k(S1, T),
        k(T, S2) + cc * k(T, S1),
    ]
    V = np.column_stack(first)
    V /= np.linalg.norm(V, axis=0)
    labels = ("S1S1", "S1S2+S2S1", "S1S2-S2S1", "S2S2", "S1T", "TS1", "S2T", "TS2")
    return PerturbedSpectrum(a, b, cc, labels, V, np.column_stack(zeroth))


def total_hamiltonian(eff: EffectiveParams, c: CouplingParams, V=0.0):
    return local_hamiltonian(eff, V) + interaction_hamiltonian(c)


def eigenspace_overlaps(H, vectors, tol=1e-9):
    """Weight of each column of ``vectors`` inside the exact eigenspace it overlaps most."""
    E, W = np.linalg.eigh(H)
    out = []
    for v in vectors.T:
        w = np.abs(W.conj().T @ v) ** 2
        e = E[np.argmax(w)]
        out.append(float(np.sum(w[np.abs(E - e) < tol * max(1.0, abs(e))])))
    return np.array(out)


def perturbation_residuals(H, vectors):
    """``||(H - <H>) v||`` for each normalized column."""
    Hv = H @ vectors
    e = np.real(np.sum(vectors.conj() * Hv, axis=0))
    return np.linalg.norm(Hv - vectors * e, axis=0)
