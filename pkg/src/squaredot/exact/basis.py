"""Hard-wall box modes and the two-electron pair bases built from them."""
from dataclasses import dataclass

import numpy as np

from ..units import GAAS, MaterialParams

SINGLET = "singlet"
TRIPLET = "triplet"
SECTORS = (SINGLET, TRIPLET)

# Quadrants of the square [0, L]^2, counter-clockwise from the origin corner:
#   d | c
#   --+--
#   a | b
# Corners a, c form the vertical configuration; b, d the horizontal one.


@dataclass(frozen=True)
class SquareDot:
    L: float
    V: float = 0.0

    def __post_init__(self):
        if not self.L > 0:
            raise ValueError(f"side length must be positive, got {self.L}")

    def with_V(self, V):
        return SquareDot(self.L, V)


@dataclass(frozen=True, eq=False)
class SinglePartBasis:
    """Box modes ``sqrt(2/L) sin(nx pi x/L) sqrt(2/L) sin(ny pi y/L)``.

    States are sorted by energy, ties broken by ``(nx, ny)``, so the basis for
    ``n_max`` is not a prefix of the one for ``n_max + 1`` but spans a subspace of it.
    """

    L: float
    n_max: int
    nx: np.ndarray
    ny: np.ndarray
    energies: np.ndarray
    material: MaterialParams

    @property
    def size(self) -> int:
        return len(self.nx)

    def evaluate(self, x, y):
        """Mode values on points; returns an array of shape ``(size,) + x.shape``."""
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        k = np.pi / self.L
        norm = 2.0 / self.L
        sx = np.sin(k * np.multiply.outer(self.nx, x))
        sy = np.sin(k * np.multiply.outer(self.ny, y))
        return norm * sx * sy


def build_sp_basis(dot: SquareDot, n_max: int, material: MaterialParams = GAAS) -> SinglePartBasis:
    n_max = int(n_max)
    if n_max < 2:
        raise ValueError("n_max must be >= 2 to hold the lowest multiplet")
    n = np.arange(1, n_max + 1)
    nx, ny = (a.ravel() for a in np.meshgrid(n, n, indexing="ij"))
    order = np.lexsort((ny, nx, nx**2 + ny**2))
    nx, ny = nx[order], ny[order]
    energies = box_energy(nx, ny, dot.L, material)
    return SinglePartBasis(dot.L, n_max, nx, ny, energies, material)


def box_energy(nx, ny, L, material: MaterialParams = GAAS):
    """hbar^2 pi^2 (nx^2 + ny^2) / (2 m* L^2) in ueV."""
    nx = np.asarray(nx)
    ny = np.asarray(ny)
    return material.kinetic_scale * np.pi**2 * (nx**2 + ny**2) / L**2


def _upper_half_1d(n_max):
    """``int_{1/2}^{1} 2 sin(a pi s) sin(c pi s) ds`` for a, c in 1..n_max."""
    a = np.arange(1, n_max + 1)

    def cos_int(k):
        k = np.asarray(k, dtype=float)
        safe = np.where(k == 0, 1.0, k)
        return np.where(k == 0, 0.5, -np.sin(safe * np.pi / 2) / (safe * np.pi))

    diff = a[:, None] - a[None, :]
    summ = a[:, None] + a[None, :]
    return cos_int(diff) - cos_int(summ)


def gate_matrix_elements(basis: SinglePartBasis, quadrants: str = "bd") -> np.ndarray:
    """Matrix of the indicator of quadrants b, d (or a, c) over the box modes.

    The b, d indicator separates as ``h(x) + h(y) - 2 h(x) h(y)`` with ``h`` the
    indicator of the upper half interval, and the a, c one as
    ``1 - h(x) - h(y) + 2 h(x) h(y)``; every element is a product of closed-form
    half-interval sine integrals.
    """
    if quadrants not in ("bd", "ac"):
        raise ValueError(f"quadrants must be 'bd' or 'ac', got {quadrants!r}")
    h = _upper_half_1d(basis.n_max)
    ix = basis.nx - 1
    iy = basis.ny - 1
    hx = h[np.ix_(ix, ix)]
    hy = h[np.ix_(iy, iy)]
    dx = (ix[:, None] == ix[None, :]).astype(float)
    dy = (iy[:, None] == iy[None, :]).astype(float)
    if quadrants == "bd":
        return hx * dy + dx * hy - 2.0 * hx * hy
    return dx * dy - hx * dy - dx * hy + 2.0 * hx * hy


@dataclass(frozen=True, eq=False)
class PairBasis:
    """Normalized (anti)symmetrized products of box modes.

    Pair ``(i, j)`` stands for ``(|ij> + |ji>)/sqrt(2)`` in the singlet sector
    (``|ii>`` when ``i == j``) and ``(|ij> - |ji>)/sqrt(2)`` in the triplet one.
    """

    sector: str
    M: int
    i: np.ndarray
    j: np.ndarray

    @property
    def size(self) -> int:
        return len(self.i)

    @property
    def sign(self) -> float:
        return 1.0 if self.sector == SINGLET else -1.0

    @property
    def norms(self) -> np.ndarray:
        """``1/sqrt(2(1 + delta_ij))`` per pair, the weight of each product term."""
        return 1.0 / np.sqrt(2.0 * (1.0 + (self.i == self.j)))

    def to_matrix(self, vec) -> np.ndarray:
        """Coefficient matrix ``C`` with ``Psi(r1, r2) = sum_ij C_ij phi_i(r1) phi_j(r2)``."""
        vec = np.asarray(vec)
        C = np.zeros((self.M, self.M), dtype=vec.dtype)
        w = vec * self.norms
        np.add.at(C, (self.i, self.j), w)
        np.add.at(C, (self.j, self.i), self.sign * w)
        return C

    def from_matrix(self, C) -> np.ndarray:
        """Inverse of :meth:`to_matrix` for a properly (anti)symmetric ``C``."""
        C = np.asarray(C)
        return (C[self.i, self.j] + self.sign * C[self.j, self.i]) * self.norms


def build_pair_basis(M: int, sector: str) -> PairBasis:
    if sector not in SECTORS:
        raise ValueError(f"unknown sector {sector!r}")
    i, j = np.triu_indices(M, k=0 if sector == SINGLET else 1)
    return PairBasis(sector, M, i, j)
