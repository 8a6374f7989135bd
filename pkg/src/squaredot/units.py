"""Physical constants, material parameters and unit conversions.

Working units: lengths in nm, energies in ueV, times in ns, temperatures in mK.
All constants derive from CODATA values shipped with :mod:`scipy.constants`.
"""
from dataclasses import dataclass

from scipy import constants as _c

UEV = 1e-6 * _c.electron_volt  # J
NM = 1e-9  # m
NS = 1e-9  # s

HBAR = _c.hbar / (UEV * NS)  # ueV ns
K_B = _c.Boltzmann / UEV * 1e-3  # ueV / mK
MU_B = _c.physical_constants["Bohr magneton in eV/T"][0] * 1e6  # ueV / T
COULOMB_K = _c.e**2 / (4 * _c.pi * _c.epsilon_0) / (UEV * NM)  # ueV nm
HBAR2_2ME = _c.hbar**2 / (2 * _c.m_e) / (UEV * NM**2)  # ueV nm^2
BOHR_RADIUS = _c.physical_constants["Bohr radius"][0] / NM  # nm


@dataclass(frozen=True)
class MaterialParams:
    """Effective-mass material description.

    The GaAs defaults use ``m_star = 0.067`` and ``g_factor = -0.44``; both are
    configurable since they are not fixed by the model itself.
    """

    m_star: float = 0.067
    eps_r: float = 10.8
    g_factor: float = -0.44

    def __post_init__(self):
        if not self.m_star > 0:
            raise ValueError(f"m_star must be positive, got {self.m_star}")
        if not self.eps_r >= 1:
            raise ValueError(f"eps_r must be >= 1, got {self.eps_r}")

    @property
    def kinetic_scale(self) -> float:
        """hbar^2 / (2 m*) in ueV nm^2."""
        return HBAR2_2ME / self.m_star

    @property
    def coulomb_scale(self) -> float:
        """e^2 / (4 pi eps0 eps_r) in ueV nm."""
        return COULOMB_K / self.eps_r


GAAS = MaterialParams()


@dataclass(frozen=True)
class UnitSystem:
    hbar: float = HBAR
    k_B: float = K_B
    coulomb_k: float = COULOMB_K
    mu_B: float = MU_B
    length_unit: str = "nm"
    energy_unit: str = "ueV"
    time_unit: str = "ns"


UNITS = UnitSystem()


def effective_bohr_radius(mat: MaterialParams) -> float:
    """Hydrogenic Bohr radius rescaled by ``eps_r / m_star``, in nm."""
    return BOHR_RADIUS * mat.eps_r / mat.m_star


def energy_to_temperature(E: float) -> float:
    """Convert an energy in ueV to the equivalent temperature in mK."""
    if E < 0:
        raise ValueError(f"energy must be non-negative, got {E}")
    return E / K_B


def nm_to_m(x):
    return x * NM


def m_to_nm(x):
    return x / NM


def ueV_to_J(E):
    return E * UEV


def J_to_ueV(E):
    return E / UEV
