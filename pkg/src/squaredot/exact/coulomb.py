"""Coulomb matrix elements over hard-wall box modes.

A product of two box modes along one axis is a difference of two cosines,
``2 sin(a pi s) sin(c pi s) = cos(|a-c| pi s) - cos((a+c) pi s)``, so every
matrix element is a signed sum of entries of a single table

    T[(mx1, my1), (mx2, my2)] = int d^2s1 d^2s2  cos(mx1 pi x1) cos(my1 pi y1)
                                   cos(mx2 pi x2) cos(my2 pi y2) / |s1 - s2|

on the unit square. Changing to the relative coordinate ``(u, v) = s1 - s2``
turns each table entry into a 2D integral of closed-form overlap kernels
against ``1/sqrt(u^2 + v^2)``; splitting the quarter square into two
triangles and using polar coordinates cancels the singularity at the origin,
leaving a smooth integrand for composite Gauss-Legendre quadrature.
"""
from dataclasses import dataclass, field

import numpy as np

from .basis import SinglePartBasis


class ConvergenceError(RuntimeError):
    """Numerical result failed its convergence or residual check."""


def _cos_tail(k, phase, u):
    """``int_u^1 cos(k pi s + phase) ds`` for integer ``k`` (broadcasting)."""
    k = np.asarray(k, dtype=float)
    nz = k != 0
    ks = np.where(nz, k, 1.0)
    sign = np.where(np.mod(k, 2) == 0, 1.0, -1.0)
    out = (sign * np.sin(phase) - np.sin(ks * np.pi * u + phase)) / (ks * np.pi)
    return np.where(nz, out, (1.0 - u) * np.cos(phase))


def overlap_kernel(m, n, u):
    """``K_mn(u) = int cos(m pi x) cos(n pi (x - u)) dx`` over ``x, x-u`` in [0, 1], for u >= 0."""
    m = np.asarray(m, dtype=float)
    n = np.asarray(n, dtype=float)
    return 0.5 * (_cos_tail(m + n, -n * np.pi * u, u) + _cos_tail(m - n, n * np.pi * u, u))


def folded_kernel(n_modes, u):
    """``K_mn(u) + K_mn(-u)`` for all ``m, n < n_modes``; shape ``(n_modes, n_modes, len(u))``."""
    m = np.arange(n_modes)[:, None, None]
    n = np.arange(n_modes)[None, :, None]
    u = np.asarray(u, dtype=float)[None, None, :]
    k = overlap_kernel(m, n, u)
    # K_mn(-u) = K_nm(u)
    return k + np.swapaxes(k, 0, 1)


def _composite_gl(a, b, order, panels):
    x, w = np.polynomial.legendre.leggauss(order)
    edges = np.linspace(0.0, 1.0, panels + 1)
    lo, hi = edges[:-1, None], edges[1:, None]
    t = (0.5 * (hi - lo) * (x + 1.0) + lo).ravel()
    wt = (0.5 * (hi - lo) * w).ravel()
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    return a[..., None] + (b - a)[..., None] * t, (b - a)[..., None] * wt


def singular_square_rule(order, panels):
    """Nodes and weights for ``int_[0,1]^2 f(u, v) / sqrt(u^2 + v^2) du dv``.

    Returned weights already contain the ``1/r`` factor, so the rule is applied
    to ``f`` alone. Each triangle uses ``(order * panels)^2`` polar nodes.
    """
    phi, wphi = _composite_gl(0.0, np.pi / 4, order, panels)
    r, wr = _composite_gl(np.zeros_like(phi), 1.0 / np.cos(phi), order, panels)
    u = r * np.cos(phi)[:, None]
    v = r * np.sin(phi)[:, None]
    w = wr * wphi[:, None]
    u, v, w = u.ravel(), v.ravel(), w.ravel()
    return np.concatenate([u, v]), np.concatenate([v, u]), np.concatenate([w, w])


def default_panels(n_max):
    return max(2, int(n_max) // 2)


def cosine_table(n_max, order, panels=None, chunk=8192):
    """The table ``T`` (dimensionless, unit square) over cosine indices ``0..2 n_max``.

    Returned as a symmetric matrix indexed by ``mx * n_modes + my``.
    """
    n_modes = 2 * n_max + 1
    if panels is None:
        panels = default_panels(n_max)
    u, v, w = singular_square_rule(order, panels)
    acc = np.zeros((n_modes * n_modes, n_modes * n_modes))
    for start in range(0, len(w), chunk):
        sl = slice(start, start + chunk)
        kx = folded_kernel(n_modes, u[sl]).reshape(n_modes * n_modes, -1)
        ky = folded_kernel(n_modes, v[sl]).reshape(n_modes * n_modes, -1)
        acc += (kx * w[sl]) @ ky.T
    # acc is indexed [(mx1, mx2), (my1, my2)]; reorder to [(mx1, my1), (mx2, my2)]
    T = acc.reshape(n_modes, n_modes, n_modes, n_modes).transpose(0, 2, 1, 3)
    T = T.reshape(n_modes * n_modes, n_modes * n_modes)
    return 0.5 * (T + T.T)


def density_modes(basis: SinglePartBasis):
    """Cosine-mode expansion of every mode product ``phi_i phi_k``.

    Returns ``(idx, coef)``, each of shape ``(M, M, 4)``: ``L^2 phi_i phi_k`` equals
    ``sum_s coef[i, k, s] cos(mx pi x/L) cos(my pi y/L)`` with
    ``idx = mx * n_modes + my``.
    """
    n_modes = 2 * basis.n_max + 1
    ax, ay = basis.nx, basis.ny
    mx = np.stack([np.abs(ax[:, None] - ax[None, :]), ax[:, None] + ax[None, :]], axis=-1)
    my = np.stack([np.abs(ay[:, None] - ay[None, :]), ay[:, None] + ay[None, :]], axis=-1)
    sgn = np.array([1.0, -1.0])
    idx = (mx[..., :, None] * n_modes + my[..., None, :]).reshape(basis.size, basis.size, 4)
    coef = np.broadcast_to(np.multiply.outer(sgn, sgn).ravel(), idx.shape).copy()
    return idx, coef


@dataclass(frozen=True, eq=False)
class CoulombTensor:
    """Factorized ``V_ijkl = <phi_i phi_j | e^2/(4 pi eps r12) | phi_k phi_l>`` in ueV.

    ``V_ijkl = prefactor * sum_{s,t} coef[i,k,s] T[idx[i,k,s], idx[j,l,t]] coef[j,l,t]``.
    The symmetries ``V_ijkl = V_jilk = V_klij`` hold exactly because ``T`` is
    symmetric and the density expansion is symmetric in its two indices.
    """

    basis: SinglePartBasis
    quadrature_order: int
    table: np.ndarray
    prefactor: float
    idx: np.ndarray = field(repr=False)
    coef: np.ndarray = field(repr=False)

    @property
    def size(self):
        return self.basis.size

    def half_contracted(self):
        """``B[i, k, beta] = prefactor * sum_s coef[i,k,s] T[idx[i,k,s], beta]``."""
        B = np.einsum("iks,iksb->ikb", self.coef, self.table[self.idx])
        return self.prefactor * B

    def _raw(self, i, j, k, l):
        a = self.idx[i, k][..., :, None]
        b = self.idx[j, l][..., None, :]
        ca = self.coef[i, k][..., :, None]
        cb = self.coef[j, l][..., None, :]
        return self.prefactor * np.sum(ca * cb * self.table[a, b], axis=(-2, -1))

    def elements(self, i, j, k, l):
        """Vectorized elements, averaged over the symmetry orbit.

        The pairwise averages are exactly invariant under ``(ij)(kl)`` swaps and
        particle exchange, since floating-point addition is commutative.
        """
        i, j, k, l = np.broadcast_arrays(*(np.asarray(a) for a in (i, j, k, l)))
        a, b = self._raw(i, j, k, l), self._raw(j, i, l, k)
        c, d = self._raw(k, l, i, j), self._raw(l, k, j, i)
        return 0.5 * (0.5 * (a + b) + 0.5 * (c + d))

    def element(self, i, j, k, l) -> float:
        return float(self.elements(i, j, k, l))

    def dense(self):
        """Full ``(M, M, M, M)`` array; only sensible for small bases."""
        M = self.size
        if M > 50:
            raise MemoryError(f"dense Coulomb tensor for M={M} is too large")
        B = self.half_contracted()
        A = np.zeros((M, M, self.table.shape[0]))
        np.add.at(A, (np.arange(M)[:, None, None], np.arange(M)[None, :, None], self.idx), self.coef)
        V = np.einsum("ikb,jlb->ijkl", B, A)
        V = 0.5 * (V + V.transpose(1, 0, 3, 2))
        return 0.5 * (V + V.transpose(2, 3, 0, 1))


def coulomb_tensor(basis: SinglePartBasis, quadrature_order: int = 32, panels=None,
                   check_convergence=False, rtol=1e-4) -> CoulombTensor:
    if quadrature_order < 16:
        raise ValueError("quadrature_order must be >= 16")
    table = cosine_table(basis.n_max, quadrature_order, panels)
    if check_convergence:
        finer = cosine_table(basis.n_max, 2 * quadrature_order, panels)
        change = np.max(np.abs(finer - table)) / np.max(np.abs(finer))
        if change > rtol:
            raise ConvergenceError(
                f"Coulomb quadrature not converged: doubling the order changes the table by {change:.2e}")
    idx, coef = density_modes(basis)
    prefactor = basis.material.coulomb_scale / basis.L
    return CoulombTensor(basis, quadrature_order, table, prefactor, idx, coef)
