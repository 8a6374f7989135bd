import itertools

import numpy as np
import pytest

from squaredot import cluster as cl
from squaredot.gate import CZ, CouplingParams, concurrence, entangling_time

ROW = CouplingParams(3.0, 1.0)
COL = CouplingParams(1.0, 1.0)


def _dense_cz(n, a, b):
    """CZ between qubits a, b of n as an explicit 2^n matrix (site 0 most significant)."""
    d = np.ones(2**n)
    for idx in range(2**n):
        bits = [(idx >> (n - 1 - q)) & 1 for q in range(n)]
        if bits[a] and bits[b]:
            d[idx] = -1
    return np.diag(d)


def _brute_cluster(rows, cols):
    n = rows * cols
    psi = np.ones(2**n) / 2 ** (n / 2)
    for a, b, _ in cl.bonds(rows, cols):
        psi = _dense_cz(n, a, b) @ psi
    return psi


def test_single_site():
    arr = cl.build_cluster(1, 1, ROW)
    np.testing.assert_allclose(arr.state, [1 / np.sqrt(2)] * 2)
    assert cl.stabilizer_report(arr).values[0] == pytest.approx(1.0)


def test_pair_is_cz_plus_plus():
    arr = cl.build_cluster(1, 2, ROW)
    ref = CZ @ (np.ones(4) / 2)
    assert abs(np.vdot(ref, arr.state)) ** 2 == pytest.approx(1.0, abs=1e-12)
    assert concurrence(arr.state) == pytest.approx(1.0, abs=1e-12)


@pytest.mark.parametrize("shape", [(2, 2), (2, 3), (3, 3), (3, 4)])
def test_stabilizers_all_plus_one(shape):
    arr = cl.build_cluster(*shape, ROW, COL)
    rep = cl.stabilizer_report(arr)
    assert len(rep.values) == shape[0] * shape[1]
    assert rep.all_plus_one(1e-10)
    assert arr.fidelity() == pytest.approx(1.0, abs=1e-10)


@pytest.mark.parametrize("shape", [(2, 2), (2, 3)])
def test_ideal_state_against_dense_gates(shape):
    np.testing.assert_allclose(cl.ideal_cluster_state(*shape), _brute_cluster(*shape), atol=1e-14)


def test_stabilizers_by_dense_operators():
    psi = _brute_cluster(2, 2)
    for a in range(4):
        K = cl.stabilizer_matrix(2, 2, a)
        assert np.real(np.vdot(psi, K @ psi)) == pytest.approx(1.0, abs=1e-12)
        assert cl.stabilizer_expectation(psi, a, cl.neighbours(2, 2)[a], 4) == pytest.approx(1.0, abs=1e-12)


def test_pre_gate_expectations_vanish():
    n = 4
    plus = cl.plus_state(n)
    for a, nb in enumerate(cl.neighbours(2, 2)):
        assert cl.stabilizer_expectation(plus, a, nb, n) == pytest.approx(0.0, abs=1e-14)
    assert cl.stabilizer_expectation(cl.plus_state(1), 0, [], 1) == pytest.approx(1.0)


def test_stabilizers_commute():
    Ks = [cl.stabilizer_matrix(2, 3, a) for a in range(6)]
    for A, B in itertools.combinations(Ks, 2):
        np.testing.assert_array_equal(A @ B, B @ A)


def test_gate_order_invariance():
    a = cl.build_cluster(3, 3, ROW, COL, order=("row", "col"))
    b = cl.build_cluster(3, 3, ROW, COL, order=("col", "row"))
    np.testing.assert_allclose(a.state, b.state, atol=1e-12)
    with pytest.raises(ValueError):
        cl.build_cluster(2, 2, ROW, order=("row", "row"))


def test_uncorrected_gates_are_not_a_cluster():
    arr = cl.build_cluster(2, 2, ROW, COL, correct=False)
    assert not cl.stabilizer_report(arr).all_plus_one()


def test_dimension_cap():
    with pytest.raises(ValueError):
        cl.build_cluster(4, 4, ROW)
    with pytest.raises(ValueError):
        cl.build_cluster(0, 2, ROW)


def test_symmetric_couplings_give_identical_gates():
    cmp = cl.asymmetric_gate_check(COL, COL)
    assert cmp.identical and cmp.ok
    assert cmp.row_correction == cmp.col_correction


def test_asymmetric_couplings_need_different_corrections():
    cmp = cl.asymmetric_gate_check(ROW, COL)
    assert not cmp.identical and cmp.ok
    assert cmp.row_correction != cmp.col_correction
    assert abs(cmp.row_invariant) == pytest.approx(np.pi, abs=1e-12)
    assert abs(cmp.col_invariant) == pytest.approx(np.pi, abs=1e-12)
    # both orientations end up as CZ once corrected
    assert cl.stabilizer_report(cl.build_cluster(2, 2, ROW, COL)).all_plus_one()


def test_wrong_interaction_time_is_flagged():
    cmp = cl.asymmetric_gate_check(ROW, COL, t_I_row=0.7 * entangling_time(ROW))
    assert cmp.flagged == ("row",)
    assert not cmp.ok


def test_gate_times():
    tr, tc = cl.gate_times(ROW, COL)
    assert tr == pytest.approx(entangling_time(ROW))
    assert tc == pytest.approx(2 * tr)


def test_array_validation():
    with pytest.raises(ValueError):
        cl.QubitArray(1, 2, ROW, ROW, np.ones(4))
    with pytest.raises(ValueError):
        cl.QubitArray(1, 2, ROW, ROW, np.ones(2) / np.sqrt(2))
