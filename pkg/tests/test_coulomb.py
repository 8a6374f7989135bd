import numpy as np
import pytest

from squaredot.exact.basis import SquareDot, build_sp_basis
from squaredot.exact.coulomb import (coulomb_tensor, cosine_table, folded_kernel, overlap_kernel,
                                     singular_square_rule)
from squaredot.units import GAAS


@pytest.fixture(scope="module")
def small():
    basis = build_sp_basis(SquareDot(400.0), 3)
    return basis, coulomb_tensor(basis, 24)


def test_table_origin_entry_closed_form():
    # int over two unit squares of 1/|s1 - s2| = (4/3)(1 - sqrt 2 + 3 asinh 1)
    exact = 4.0 / 3.0 * (1 - np.sqrt(2) + 3 * np.arcsinh(1.0))
    assert cosine_table(2, 16)[0, 0] == pytest.approx(exact, rel=1e-12)


def test_singular_rule_integrates_inverse_distance():
    u, v, w = singular_square_rule(16, 2)
    exact = 2 * np.arcsinh(1.0)  # int_[0,1]^2 du dv / sqrt(u^2+v^2)
    assert np.sum(w) == pytest.approx(exact, rel=1e-13)


def test_overlap_kernel_against_quadrature():
    x, wx = np.polynomial.legendre.leggauss(80)
    for m, n, u in [(0, 0, 0.3), (2, 1, 0.45), (3, 5, 0.1), (4, 4, 0.0)]:
        # K_mn(u) = int_u^1 cos(m pi x) cos(n pi (x - u)) dx
        xs = u + (1 - u) * (x + 1) / 2
        ref = np.sum(wx * (1 - u) / 2 * np.cos(m * np.pi * xs) * np.cos(n * np.pi * (xs - u)))
        assert float(overlap_kernel(m, n, np.array([u]))[0]) == pytest.approx(ref, abs=1e-13)


def test_folded_kernel_is_even_sum():
    u = np.array([0.2, 0.7])
    F = folded_kernel(4, u)
    for m in range(4):
        for n in range(4):
            direct = overlap_kernel(m, n, u) + overlap_kernel(n, m, u)
            np.testing.assert_allclose(F[m, n], direct, atol=1e-14)


def test_symmetry_orbits_exact(small):
    _, t = small
    V = t.dense()
    np.testing.assert_array_equal(V, V.transpose(1, 0, 3, 2))  # particle exchange
    np.testing.assert_array_equal(V, V.transpose(2, 3, 0, 1))  # (ij) <-> (kl)
    i, j, k, l = np.random.default_rng(0).integers(0, V.shape[0], (4, 50))
    e = t.elements(i, j, k, l)
    np.testing.assert_array_equal(e, t.elements(j, i, l, k))
    np.testing.assert_array_equal(e, t.elements(k, l, i, j))
    np.testing.assert_allclose(e, V[i, j, k, l], rtol=1e-13)
    d = np.einsum("ijij->ij", V)
    assert np.all(d > 0)


def test_quadrature_converged(small):
    basis, t = small
    finer = coulomb_tensor(basis, 32)
    np.testing.assert_allclose(finer.dense(), t.dense(), atol=1e-9 * np.abs(t.dense()).max())


def test_rejects_low_order(small):
    basis, _ = small
    with pytest.raises(ValueError):
        coulomb_tensor(basis, 8)


def test_ground_direct_element_against_monte_carlo(small):
    """V_1111 by importance-sampled Monte Carlo in relative polar coordinates.

    For fixed r1 the Coulomb integral over r2 in polar coordinates around r1
    has a bounded integrand, so sampling (rho, angle) uniformly removes the
    singularity. 10^7 samples, 4 sigma acceptance.
    """
    basis, t = small
    L = basis.L
    rng = np.random.default_rng(12345)
    n = 10_000_000
    chunks = []
    R = np.sqrt(2.0) * L
    for _ in range(10):
        m = n // 10
        x1, y1 = rng.random(m) * L, rng.random(m) * L
        rho = rng.random(m) * R
        ang = rng.random(m) * 2 * np.pi
        x2, y2 = x1 + rho * np.cos(ang), y1 + rho * np.sin(ang)
        inside = (x2 > 0) & (x2 < L) & (y2 > 0) & (y2 < L)

        def dens(x, y):
            return (2 / L * np.sin(np.pi * x / L) * np.sin(np.pi * y / L)) ** 2

        f = np.where(inside, dens(x1, y1) * dens(np.clip(x2, 0, L), np.clip(y2, 0, L)), 0.0)
        chunks.append(f * L * L * R * 2 * np.pi)
    samples = np.concatenate(chunks) * GAAS.coulomb_scale
    mc, err = samples.mean(), samples.std() / np.sqrt(n)
    assert abs(t.element(0, 0, 0, 0) - mc) < 4 * err
    assert err / mc < 2e-3
