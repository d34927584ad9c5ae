"""
Testing the variational ground-state search.
"""
import numpy as np
import pytest

from core.grid import Grid
from core.potentials import EffectiveKind, Potential
from core.spectral import build_effective_hamiltonian, diagonalize
from quantum.simulator import StateVector
from quantum.vqe import (
    OptimizerSettings,
    VqeConfig,
    VqeTarget,
    build_ansatz,
    depth_sweep,
    estimate_energy,
    n_parameters,
    optimize,
    parameter_shift_gradient,
)


def _target(n=3, L=4.0, T=0.3, kind=EffectiveKind.PLAIN):
    return VqeTarget.from_potential(Potential.double_well(), T, Grid(n, L), kind)


def _energy(target, depth, params, shots=None, seed=None):
    state = build_ansatz(target.n, depth, params).run()
    return estimate_energy(state, target.v_diag, target.grid, target.mass, shots, seed)


def test_parameter_count_and_validation():
    assert n_parameters(4, 3) == 16
    with pytest.raises(ValueError):
        build_ansatz(3, 1, np.zeros(5))


def test_zero_angles_give_all_zero_state():
    state = build_ansatz(3, 2, np.zeros(9)).run()
    assert state.amps[0] == pytest.approx(1.0)


def test_ansatz_amplitudes_are_real():
    rng = np.random.default_rng(0)
    state = build_ansatz(4, 3, rng.uniform(-np.pi, np.pi, 16)).run()
    assert np.max(np.abs(state.amps.imag)) < 1e-12


def test_exact_estimator_matches_eigenvalue():
    target = _target(n=4)
    H = build_effective_hamiltonian(Potential.double_well(), 0.3, target.grid)
    spec = diagonalize(H)
    for k in range(3):
        state = StateVector(4, spec.eigenvectors[:, k])
        assert estimate_energy(state, target.v_diag, target.grid, target.mass) == pytest.approx(spec.eigenvalues[k], abs=1e-9)


def test_variational_bound_and_phase_invariance():
    target = _target()
    rng = np.random.default_rng(1)
    for _ in range(10):
        params = rng.uniform(-np.pi, np.pi, n_parameters(3, 2))
        state = build_ansatz(3, 2, params).run()
        e = estimate_energy(state, target.v_diag, target.grid, target.mass)
        assert e >= target.exact_energy - 1e-10
        rotated = StateVector(3, state.amps * np.exp(0.7j))
        assert estimate_energy(rotated, target.v_diag, target.grid, target.mass) == pytest.approx(e)


def test_shot_estimates_are_seeded():
    target = _target()
    params = np.full(n_parameters(3, 1), 0.3)
    assert _energy(target, 1, params, shots=500, seed=4) == _energy(target, 1, params, shots=500, seed=4)


def test_shot_noise_scaling():
    target = _target()
    params = np.linspace(-1, 1, n_parameters(3, 1))
    shots = np.array([100, 1000, 10_000, 100_000])
    spread = [np.std([_energy(target, 1, params, int(s), seed) for seed in range(60)]) for s in shots]
    slope = np.polyfit(np.log(shots), np.log(spread), 1)[0]
    assert -0.6 <= slope <= -0.4


def test_parameter_shift_matches_finite_differences():
    target = _target()
    rng = np.random.default_rng(2)
    params = rng.uniform(-1, 1, n_parameters(3, 2))
    grad = parameter_shift_gradient(target, 2, params)
    eps = 1e-6
    for i in range(params.size):
        step = np.zeros_like(params)
        step[i] = eps
        fd = (_energy(target, 2, params + step) - _energy(target, 2, params - step)) / (2 * eps)
        assert grad[i] == pytest.approx(fd, abs=1e-5)


def test_optimize_improves_on_start():
    target = _target()
    cfg = VqeConfig(target, optimizer=OptimizerSettings(restarts=2, max_iters=800, seed=0, threads=2))
    result = optimize(cfg, 2)
    start = _energy(target, 2, np.zeros(n_parameters(3, 2)))
    assert target.exact_energy - 1e-10 <= result.energy < start
    assert result.best_history[-1] <= result.best_history[0]
    assert result.relative_error is not None


def test_depth_sweep_never_gets_worse():
    target = _target()
    cfg = VqeConfig(target, optimizer=OptimizerSettings(restarts=2, max_iters=500, seed=0))
    results = depth_sweep(cfg, [0, 1, 2])
    energies = [r.energy for r in results]
    assert [r.depth for r in results] == [0, 1, 2]
    assert all(b <= a + 1e-12 for a, b in zip(energies, energies[1:]))


def test_shot_mode_runs_spsa():
    target = _target()
    cfg = VqeConfig(target, shots=2000, optimizer=OptimizerSettings(restarts=1, max_iters=60, seed=0))
    result = optimize(cfg, 1)
    assert np.isfinite(result.energy)
    assert result.evaluations > 0


def test_invalid_shots():
    with pytest.raises(ValueError):
        VqeConfig(_target(), shots=0)


@pytest.mark.slow
def test_depth_four_reaches_target_accuracy():
    target = _target(n=5, T=0.2, kind=EffectiveKind.SUPERSYMMETRIC)
    cfg = VqeConfig(target, optimizer=OptimizerSettings(restarts=8, seed=1234))
    errors = [r.relative_error for r in depth_sweep(cfg, [1, 2, 3, 4])]
    assert errors[-1] <= 3e-3
    assert all(b <= a + 1e-12 for a, b in zip(errors, errors[1:]))
