"""Reduced four-level model of one dot, single-qubit operations and readout.

Configuration basis, in order: ``Sv, Sh, Tv, Th`` (singlet/triplet in the
vertical a-c or horizontal b-d corner configuration). The qubit is
``|0> = Sv``, ``|1> = Tv``.

Sign convention: with ``S1 = (Sv + Sh)/sqrt(2)`` the V=0 ground singlet, the
tunneling element ``<Sh|H|Sv>`` is ``-Delta0``; the mixing angle is then
``tan(theta) = (sqrt(eps^2 + Delta0^2) - eps) / Delta0`` with
``eps = V (1 - 2 p_S)``, which is ``+pi/4`` at V=0 and vanishes for large V.
"""
from dataclasses import dataclass

import numpy as np

from .exact.solver import EffectiveParams
from .units import HBAR, MU_B

SV, SH, TV, TH = range(4)
CONFIG_LABELS = ("Sv", "Sh", "Tv", "Th")
SINGLET_OUTCOME = "singlet"
TRIPLET_OUTCOME = "triplet"

__all__ = [
    "EffectiveParams", "SingleQubitKnobs", "singlet_hamiltonian", "singlet_spectrum", "mixing_angle",
    "triplet_energies", "config_hamiltonian", "singlet_evolution", "filter_probability", "exchange_J",
    "exchange_J_asymptote", "rotate_z", "rotate_x", "initialize_plus", "measure_filter",
    "sample_filter", "switching_error", "freeze_release_schedule",
]


@dataclass(frozen=True)
class SingleQubitKnobs:
    J: float = 0.0  # ueV
    dBz: float = 0.0  # mT
    g_factor: float = -0.44


def _detuning(eff, V):
    return V * (1.0 - 2.0 * eff.p_S)


def singlet_hamiltonian(eff: EffectiveParams, V: float) -> np.ndarray:
    """2x2 singlet Hamiltonian over ``(Sv, Sh)``."""
    tunnel = eff.Delta0 + 2.0 * V * eff.a_S
    return np.array([
        [eff.E0S + 2.0 * V * eff.p_S, -tunnel],
        [-tunnel, eff.E0S + 2.0 * V * (1.0 - eff.p_S)],
    ])


def singlet_spectrum(eff: EffectiveParams, V: float):
    root = np.hypot(_detuning(eff, V), eff.Delta0)
    return eff.E0S + V - root, eff.E0S + V + root


def mixing_angle(eff: EffectiveParams, V: float) -> float:
    """Angle with ``S1(V) = cos(theta) Sv + sin(theta) Sh``."""
    eps = _detuning(eff, V)
    return float(np.arctan2(np.hypot(eps, eff.Delta0) - eps, eff.Delta0))


def triplet_energies(eff: EffectiveParams, V: float):
    """``(E_Tv, E_Th)``; the two triplet configurations are uncoupled."""
    return eff.E0T + 2.0 * V * eff.p_T, eff.E0T + 2.0 * V * (1.0 - eff.p_T)


def config_hamiltonian(eff: EffectiveParams, V: float) -> np.ndarray:
    """4x4 Hamiltonian over ``(Sv, Sh, Tv, Th)``."""
    H = np.zeros((4, 4))
    H[:2, :2] = singlet_hamiltonian(eff, V)
    H[TV, TV], H[TH, TH] = triplet_energies(eff, V)
    return H


def singlet_evolution(eff: EffectiveParams, V: float, t: float) -> np.ndarray:
    """State at time ``t`` (ns) starting from ``Sv``, as 4 configuration amplitudes.

    ``exp(-i (E0S + V) t/hbar) [(cos wt + i cos 2theta sin wt) Sv + i sin 2theta sin wt Sh]``
    with ``hbar w = sqrt(Delta0^2 + eps^2)``, ``cos 2theta = eps / (hbar w)``.
    """
    if t < 0:
        raise ValueError("t must be non-negative")
    eps = _detuning(eff, V)
    hw = np.hypot(eps, eff.Delta0)
    wt = hw * t / HBAR
    cos2, sin2 = eps / hw, eff.Delta0 / hw
    out = np.zeros(4, dtype=complex)
    out[SV] = np.cos(wt) + 1j * cos2 * np.sin(wt)
    out[SH] = 1j * sin2 * np.sin(wt)
    return np.exp(-1j * (eff.E0S + V) * t / HBAR) * out


def filter_probability(eff: EffectiveParams, V: float, t: float, spin=SINGLET_OUTCOME) -> float:
    """Probability that a vertical pair of the given spin has turned horizontal."""
    if spin == TRIPLET_OUTCOME:
        return 0.0
    if spin != SINGLET_OUTCOME:
        raise ValueError(f"spin must be 'singlet' or 'triplet', got {spin!r}")
    return float(abs(singlet_evolution(eff, V, t)[SH]) ** 2)


def exchange_J(eff: EffectiveParams, V: float) -> float:
    """``E_Tv(V) - E_S1(V)``."""
    return triplet_energies(eff, V)[0] - singlet_spectrum(eff, V)[0]


def exchange_J_asymptote(eff: EffectiveParams, V: float) -> float:
    """Large-V expansion of :func:`exchange_J` (V > 0)."""
    return (eff.E0T - eff.E0S) + 2.0 * V * (eff.p_T - eff.p_S) + eff.Delta0**2 / (2.0 * _detuning(eff, V))


def freeze_release_schedule(eff: EffectiveParams, V_freeze=None, cycle=None, hold=None, after=None):
    """Segments ``[(V, duration), ...]``: release at V=0, freeze, release again.

    Defaults: one full filtering cycle (``2 t_R``) before the freeze at
    ``+3 Delta0``, a ``2 t_R`` hold, and another full cycle afterwards.
    """
    V_freeze = 3.0 * eff.Delta0 if V_freeze is None else V_freeze
    cycle = 2.0 * eff.t_R if cycle is None else cycle
    hold = 2.0 * eff.t_R if hold is None else hold
    after = 2.0 * eff.t_R if after is None else after
    return [(0.0, cycle), (float(V_freeze), hold), (0.0, after)]


def _qubit(state):
    psi = np.asarray(state, dtype=complex)
    if psi.shape != (2,):
        raise ValueError("qubit state must have two amplitudes")
    if abs(np.linalg.norm(psi) - 1.0) > 1e-12:
        raise ValueError("qubit state is not normalized")
    return psi


def rotate_z(state, J: float, t: float) -> np.ndarray:
    """Free evolution with ``|1>`` lying ``J`` above ``|0>``: phase ``exp(-i J t/hbar)`` on ``|1>``."""
    psi = _qubit(state)
    return psi * np.array([1.0, np.exp(-1j * J * t / HBAR)])


def larmor_frequency(knobs: SingleQubitKnobs) -> float:
    """``g mu_B dBz / hbar`` in rad/ns (``dBz`` in mT)."""
    return knobs.g_factor * MU_B * knobs.dBz * 1e-3 / HBAR


def rotate_x(state, knobs: SingleQubitKnobs, t: float) -> np.ndarray:
    """Evolve under ``(g mu_B dBz / 2) sigma_x``: an x rotation by ``Omega t``."""
    psi = _qubit(state)
    half = 0.5 * larmor_frequency(knobs) * t
    U = np.array([[np.cos(half), -1j * np.sin(half)], [-1j * np.sin(half), np.cos(half)]])
    return U @ psi


def initialize_plus() -> np.ndarray:
    return np.array([1.0, 1.0], dtype=complex) / np.sqrt(2.0)


def measure_filter(state, rng=None, flip_probability=0.0):
    """Projective singlet/triplet readout via charge detection after filtering.

    ``rng`` is a seed or :class:`numpy.random.Generator`. ``flip_probability``
    models a detector that reports the wrong outcome; the post-measurement
    state follows the true outcome.
    """
    psi = _qubit(state)
    rng = np.random.default_rng(rng)
    p0 = float(abs(psi[0]) ** 2)
    singlet = rng.random() < p0
    post = np.array([1.0, 0.0], complex) if singlet else np.array([0.0, 1.0], complex)
    if flip_probability and rng.random() < flip_probability:
        singlet = not singlet
    return (SINGLET_OUTCOME if singlet else TRIPLET_OUTCOME), post


def sample_filter(state, shots: int, rng=None, flip_probability=0.0) -> np.ndarray:
    """Vectorized :func:`measure_filter`; returns a boolean array, True for singlet."""
    psi = _qubit(state)
    rng = np.random.default_rng(rng)
    singlet = rng.random(shots) < abs(psi[0]) ** 2
    if flip_probability:
        singlet ^= rng.random(shots) < flip_probability
    return singlet


def switching_error(eff_or_delta0, tau: float) -> float:
    """``sin^2(Delta0 tau / (2 hbar))`` for a linear gate ramp of duration ``tau`` (ns)."""
    if tau < 0:
        raise ValueError("tau must be non-negative")
    delta0 = getattr(eff_or_delta0, "Delta0", eff_or_delta0)
    return float(np.sin(delta0 * tau / (2.0 * HBAR)) ** 2)
