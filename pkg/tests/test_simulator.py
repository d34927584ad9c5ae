import numpy as np
import pytest

from core.spectral import build_ising_hamiltonian
from quantum.simulator import (
    Circuit,
    Gate,
    StateVector,
    apply_cqft,
    centered_qft_matrix,
    exact_unitary,
    load_amplitudes,
    measure_all,
    qft_circuit,
    qft_matrix,
    trotter_circuit,
    trotter_step_ising,
)


def _random_circuit(n, depth, rng):
    c = Circuit(n)
    for _ in range(depth):
        q = int(rng.integers(n))
        c.add(Gate.rx(q, rng.uniform(-np.pi, np.pi)))
        c.add(Gate.ry(int(rng.integers(n)), rng.uniform(-np.pi, np.pi)))
        a, b = rng.choice(n, size=2, replace=False)
        c.add(Gate.cnot(int(a), int(b)))
        c.add(Gate.zz(int(a), int(b), rng.uniform(-1, 1)))
    c.add(Gate.cqft(0, n))
    return c


@pytest.mark.parametrize("n", [2, 3, 5])
def test_norm_preserved(n):
    rng = np.random.default_rng(n)
    state = _random_circuit(n, 10, rng).run()
    assert state.norm() == pytest.approx(1.0, abs=1e-12)


def test_big_endian_layout():
    state = Circuit(3).add(Gate.x(0)).run()
    assert np.argmax(np.abs(state.amps)) == 4
    assert StateVector.from_bitstring("011").amps[3] == 1.0


def test_ry_pi_flips():
    state = Circuit(1).add(Gate.ry(0, np.pi)).run()
    assert np.allclose(state.amps, [0, 1])


def test_cnot_truth_table():
    c = Circuit(2).add(Gate.cnot(0, 1))
    assert np.argmax(np.abs(c.run(StateVector.from_bitstring("10")).amps)) == 3
    assert np.argmax(np.abs(c.run(StateVector.from_bitstring("01")).amps)) == 1
    reverse = Circuit(2).add(Gate.cnot(1, 0))
    assert np.argmax(np.abs(reverse.run(StateVector.from_bitstring("01")).amps)) == 3


def test_controlled_matrix_matches_cnot():
    X = np.array([[0, 1], [1, 0]])
    for ctrl, tgt in [(0, 2), (2, 0), (1, 2)]:
        expected = Circuit(3).add(Gate.cnot(ctrl, tgt)).unitary()
        got = Circuit(3).add(Gate.controlled_matrix(ctrl, tgt, tgt + 1, X)).unitary()
        assert np.allclose(got, expected)


def test_zz_phases():
    lam = 0.3
    U = Circuit(2).add(Gate.zz(0, 1, lam)).unitary()
    assert np.allclose(np.diag(U), np.exp(1j * lam * np.array([1, -1, -1, 1])))


@pytest.mark.parametrize("n", range(1, 7))
def test_qft_matches_matrix(n):
    F = qft_matrix(n)
    assert np.allclose(qft_circuit(n).unitary(), F)
    assert np.allclose(Circuit(n).add(Gate.qft(0, n)).unitary(), F)
    assert np.allclose(qft_circuit(n, inverse=True).unitary(), F.conj().T)


@pytest.mark.parametrize("n", [1, 3, 4])
def test_centered_qft_matches_matrix(n):
    assert np.allclose(Circuit(n).add(Gate.cqft(0, n)).unitary(), centered_qft_matrix(n))


def test_cqft_puts_zero_momentum_at_center():
    n = 4
    flat = load_amplitudes(np.ones(1 << n))
    out = apply_cqft(flat)
    assert np.argmax(np.abs(out.amps)) == 1 << (n - 1)


def test_qft_on_sub_register():
    n = 4
    U = Circuit(n).add(Gate.qft(1, 3)).unitary()
    expected = np.kron(np.kron(np.eye(2), qft_matrix(2)), np.eye(2))
    assert np.allclose(U, expected)


def test_load_amplitudes_validation():
    with pytest.raises(ValueError):
        load_amplitudes(np.zeros(4))
    with pytest.raises(ValueError):
        load_amplitudes(np.ones(3))
    state = load_amplitudes([3.0, 4.0])
    assert np.allclose(state.amps, [0.6, 0.8])


def test_circuit_rejects_bad_qubits():
    with pytest.raises(ValueError):
        Circuit(2).add(Gate.h(2))
    with pytest.raises(ValueError):
        Circuit(2).add(Gate.cnot(1, 1))


def test_global_phase_applied():
    state = Circuit(1, global_phase=np.pi).run()
    assert np.allclose(state.amps, [-1, 0])


def test_trotter_step_converges_to_exact():
    Ns, J, gamma, dt = 3, 1.0, 0.1, 0.01
    U_exact = exact_unitary(build_ising_hamiltonian(Ns, J, gamma), dt)
    U_trot = trotter_step_ising(Ns, J, gamma, dt).unitary()
    assert np.max(np.abs(U_trot - U_exact)) < 1e-3


def test_trotter_error_shrinks_with_steps():
    Ns, J, gamma, t = 3, 1.0, 0.5, 1.0
    U_exact = exact_unitary(build_ising_hamiltonian(Ns, J, gamma), t)
    coarse = np.max(np.abs(trotter_circuit(Ns, J, gamma, t, 4).unitary() - U_exact))
    fine = np.max(np.abs(trotter_circuit(Ns, J, gamma, t, 32).unitary() - U_exact))
    assert fine < coarse / 4


def test_trotter_needs_two_spins():
    with pytest.raises(ValueError):
        trotter_step_ising(1, 1.0, 0.1, 0.1)


def test_measure_all_is_seeded():
    state = load_amplitudes(np.arange(1, 9, dtype=float))
    counts = measure_all(state, 1000, seed=7)
    assert counts.sum() == 1000
    assert np.array_equal(counts, measure_all(state, 1000, seed=7))
    with pytest.raises(ValueError):
        measure_all(state, 0)


def test_circuit_json():
    c = Circuit(2).add(Gate.ry(0, 0.5)).add(Gate.cnot(0, 1))
    data = c.to_dict()
    assert [g["kind"] for g in data["gates"]] == ["ry", "cnot"]
    assert '"n_qubits": 2' in c.to_json()


def test_norm_preserved_over_long_random_circuits():
    rng = np.random.default_rng(11)
    state = _random_circuit(4, 250, rng).run()
    assert abs(state.norm() - 1.0) < 1e-8


def test_cqft_then_inverse_is_identity():
    rng = np.random.default_rng(3)
    amps = rng.standard_normal(32) + 1j * rng.standard_normal(32)
    state = load_amplitudes(amps)
    original = state.amps.copy()
    apply_cqft(state)
    assert not np.allclose(state.amps, original)
    apply_cqft(state, inverse=True)
    assert np.allclose(state.amps, original, atol=1e-12)
    round_trip = Circuit(5).add(Gate.cqft(0, 5)).add(Gate.cqft(0, 5, inverse=True)).unitary()
    assert np.allclose(round_trip, np.eye(32), atol=1e-12)


def test_exact_unitary_group_property():
    H = build_ising_hamiltonian(3, 1.0, 0.4)
    t1, t2 = 0.37, 1.21
    U1, U2 = exact_unitary(H, t1), exact_unitary(H, t2)
    assert np.allclose(U1 @ U2, exact_unitary(H, t1 + t2), atol=1e-12)
    assert np.allclose(U1 @ U1.conj().T, np.eye(8), atol=1e-12)
    assert np.allclose(exact_unitary(H, 0.0), np.eye(8), atol=1e-12)


def test_measure_all_uniform_counts_within_binomial_bound():
    state = Circuit(2).add(Gate.h(0)).add(Gate.h(1)).run()
    shots = 1_000_000
    counts = measure_all(state, shots, seed=2024)
    sigma = np.sqrt(shots * 0.25 * 0.75)
    assert np.all(np.abs(counts - shots / 4) < 4 * sigma)
