"""Textbook phase estimation over exact controlled unitaries.

Register layout: the n_eps counting qubits come first (qubit 0 is the most
significant phase bit), the system register follows. Counting qubit with
weight 2**j controls U_j = exp(i 2**j t H), so an eigenphase E t / 2 pi is
read out as the integer k = round(2**n_eps E t / 2 pi) mod 2**n_eps.

Three backends share the same output law:

- "statevector": the full circuit on the dense simulator;
- "spectral": the exact joint distribution written in the eigenbasis of H,
  O(dim * 2**n_eps) per input state;
- "trotter": the statevector circuit with controlled powers of a Trotterized
  Ising step instead of the exact exponential.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Any, Dict, Iterable, List, Optional, Sequence

import numpy as np

from core.errors import NumericError
from core.spectral import DenseHamiltonian, Provenance, SpectralResult, diagonalize
from quantum.simulator import (
    Circuit,
    Gate,
    StateVector,
    apply_gate,
    exact_unitary,
    sample_indices,
    trotter_circuit,
)

BACKENDS = ("statevector", "spectral", "trotter")


def required_counting_qubits(eps: float, n_prec: int) -> int:
    """Counting qubits for n_prec precision bits with failure probability eps."""
    if not (0.0 < eps < 1.0):
        raise ValueError(f"eps must lie in (0, 1), got {eps}")
    return int(n_prec + math.ceil(math.log2(2.0 + 1.0 / (2.0 * eps))))


def phase_to_energy(k: int, n_eps: int, t: float) -> float:
    if not (0 <= k < (1 << n_eps)):
        raise ValueError(f"phase integer {k} outside [0, {1 << n_eps})")
    return 2.0 * np.pi * k / ((1 << n_eps) * t)


def default_time(spectrum: SpectralResult) -> float:
    """Largest time that keeps the whole spectrum inside one phase period."""
    lam = float(np.max(np.abs(spectrum.eigenvalues)))
    return 0.9 * 2.0 * np.pi / lam if lam > 0 else 1.0


@dataclass
class QpeConfig:
    hamiltonian: DenseHamiltonian
    n_eps: int
    t: float
    initial: StateVector
    shots: int = 1024
    seed: Optional[int] = None
    backend: str = "statevector"
    trotter_steps: int = 4
    check_aliasing: bool = True
    alias_tolerance: float = 1e-3
    spectrum: Optional[SpectralResult] = field(default=None, repr=False)

    def __post_init__(self):
        if self.n_eps < 1:
            raise ValueError(f"n_eps must be >= 1, got {self.n_eps}")
        if self.shots < 1:
            raise ValueError(f"shots must be >= 1, got {self.shots}")
        if self.t <= 0:
            raise ValueError(f"evolution time must be positive, got {self.t}")
        if self.backend not in BACKENDS:
            raise ValueError(f"unknown QPE backend {self.backend!r}, expected one of {BACKENDS}")
        if self.initial.amps.size != self.hamiltonian.dim:
            raise ValueError(
                f"initial state has {self.initial.amps.size} amplitudes, Hamiltonian has dim {self.hamiltonian.dim}"
            )
        if self.backend == "trotter" and self.hamiltonian.provenance is not Provenance.ISING:
            raise ValueError("the Trotterized backend is available for Ising Hamiltonians only")

    def eigen(self) -> SpectralResult:
        if self.spectrum is None:
            self.spectrum = diagonalize(self.hamiltonian)
        return self.spectrum


def check_aliasing(cfg: QpeConfig) -> None:
    """Energies carrying weight in the input must satisfy |E| t < 2 pi."""
    spec = cfg.eigen()
    weights = np.abs(spec.eigenvectors.conj().T @ cfg.initial.amps) ** 2
    support = spec.eigenvalues[weights > cfg.alias_tolerance]
    if support.size and float(np.max(np.abs(support))) * cfg.t >= 2.0 * np.pi:
        raise NumericError(
            f"phase aliasing: max |E| t = {np.max(np.abs(support)) * cfg.t:.4f} >= 2 pi; reduce t"
        )


def _trotter_power(cfg: QpeConfig, power: int) -> np.ndarray:
    params = cfg.hamiltonian.params
    step = trotter_circuit(params["Ns"], params["J"], params["gamma"], cfg.t / cfg.trotter_steps, 1)
    return np.linalg.matrix_power(step.unitary(), cfg.trotter_steps * power)


def build_qpe_circuit(cfg: QpeConfig) -> Circuit:
    """Hadamards on the counting register, controlled U^(2^j) ladder, inverse QFT."""
    if cfg.check_aliasing:
        check_aliasing(cfg)
    n_eps, n_sys = cfg.n_eps, cfg.hamiltonian.n_qubits
    circuit = Circuit(n_eps + n_sys)
    for q in range(n_eps):
        circuit.add(Gate.h(q))
    spec = None if cfg.backend == "trotter" else cfg.eigen()
    for j in range(n_eps):
        power = 1 << j
        if cfg.backend == "trotter":
            U = _trotter_power(cfg, power)
        else:
            U = exact_unitary(cfg.hamiltonian, power * cfg.t, spectrum=spec)
        circuit.add(Gate.controlled_matrix(n_eps - 1 - j, n_eps, n_eps + n_sys, U, power=power))
    circuit.add(Gate.qft(0, n_eps, inverse=True))
    return circuit


class SpectralQpeSampler:
    """Exact QPE output law in the eigenbasis of H.

    amplitude(k, x) = sum_n c_n A(k, theta_n) psi_n(x),
    A(k, theta) = (1/M) sum_tau exp(2 pi i tau (theta - k / M)).
    """

    def __init__(self, spectrum: SpectralResult, n_eps: int, t: float):
        self.spectrum = spectrum
        self.n_eps = int(n_eps)
        self.t = float(t)
        M = 1 << self.n_eps
        theta = spectrum.eigenvalues * self.t / (2.0 * np.pi)
        tau = np.arange(M)
        ramp = np.exp(2j * np.pi * np.outer(tau, theta))
        # (M, dim): column n is the counting-register amplitude for eigenphase theta_n
        self.window = np.fft.fft(ramp, axis=0) / M
        self.window_prob = np.abs(self.window) ** 2

    def coefficients(self, amps: np.ndarray) -> np.ndarray:
        return self.spectrum.eigenvectors.conj().T @ amps

    def joint_amplitudes(self, amps: np.ndarray) -> np.ndarray:
        c = self.coefficients(amps)
        return (self.window * c[None, :]) @ self.spectrum.eigenvectors.T

    def joint_probabilities(self, amps: np.ndarray) -> np.ndarray:
        p = np.abs(self.joint_amplitudes(amps)) ** 2
        return p / p.sum()

    def sample_one(self, amps: np.ndarray, rng: np.random.Generator):
        """One shot: phase readout first, then the collapsed system register."""
        c = self.coefficients(amps)
        p_k = self.window_prob @ (np.abs(c) ** 2)
        k = int(rng.choice(p_k.size, p=p_k / p_k.sum()))
        sys_amps = self.spectrum.eigenvectors @ (self.window[k] * c)
        p_x = np.abs(sys_amps) ** 2
        x = int(rng.choice(p_x.size, p=p_x / p_x.sum()))
        return k, x


@dataclass
class QpeOutcome:
    n_eps: int
    n_system: int
    t: float
    phases: np.ndarray
    system: np.ndarray

    @property
    def shots(self) -> int:
        return int(self.phases.size)

    def histogram(self) -> np.ndarray:
        """Joint counts, shape (2**n_eps, 2**n_system)."""
        counts = np.zeros((1 << self.n_eps, 1 << self.n_system), dtype=np.int64)
        np.add.at(counts, (self.phases, self.system), 1)
        return counts

    def system_counts(self) -> np.ndarray:
        return np.bincount(self.system, minlength=1 << self.n_system)

    def phase_counts(self) -> np.ndarray:
        return np.bincount(self.phases, minlength=1 << self.n_eps)

    def modal_phase(self) -> int:
        return int(np.argmax(self.phase_counts()))

    def modal_energy(self) -> float:
        return phase_to_energy(self.modal_phase(), self.n_eps, self.t)

    def rows(self) -> List[Dict[str, Any]]:
        counts = self.histogram()
        ks, xs = np.nonzero(counts)
        return [
            {
                "phase": int(k),
                "energy": phase_to_energy(int(k), self.n_eps, self.t),
                "system": int(x),
                "bits": format(int(x), f"0{self.n_system}b"),
                "count": int(counts[k, x]),
            }
            for k, x in zip(ks, xs)
        ]


def run_qpe(cfg: QpeConfig) -> QpeOutcome:
    """Sample (phase readout, system readout) pairs from the QPE output state."""
    n_eps, n_sys = cfg.n_eps, cfg.hamiltonian.n_qubits
    rng = np.random.default_rng(cfg.seed)
    if cfg.backend == "spectral":
        if cfg.check_aliasing:
            check_aliasing(cfg)
        sampler = SpectralQpeSampler(cfg.eigen(), n_eps, cfg.t)
        probs = sampler.joint_probabilities(cfg.initial.amps).reshape(-1)
        flat = rng.choice(probs.size, size=cfg.shots, p=probs)
    else:
        circuit = build_qpe_circuit(cfg)
        counting = StateVector(n_eps)
        state = counting.tensor(cfg.initial)
        for gate in circuit.gates:
            apply_gate(state, gate)
        flat = sample_indices(state, cfg.shots, rng)
    phases, system = np.divmod(flat, 1 << n_sys)
    outcome = QpeOutcome(n_eps, n_sys, cfg.t, phases.astype(np.int64), system.astype(np.int64))
    logging.debug("QPE %s n_eps=%d shots=%d modal phase=%d", cfg.backend, n_eps, cfg.shots, outcome.modal_phase())
    return outcome


def hopping_probability(outcome: QpeOutcome, target_set: Iterable[int]) -> float:
    if outcome.shots == 0:
        raise ValueError("no shots recorded")
    targets = np.fromiter(set(int(i) for i in target_set), dtype=np.int64)
    return float(np.isin(outcome.system, targets).mean())


def predicted_system_distribution(
    H: DenseHamiltonian,
    initial: StateVector,
    n_eps: int,
    t: float,
    spectrum: Optional[SpectralResult] = None,
) -> np.ndarray:
    """System-register marginal after QPE.

    Tracing out the counting register leaves the input evolved for a time
    drawn uniformly from {0, t, ..., (2**n_eps - 1) t}.
    """
    spec = diagonalize(H) if spectrum is None else spectrum
    c = spec.eigenvectors.conj().T @ initial.amps
    tau = np.arange(1 << n_eps) * t
    evolved = (np.exp(1j * np.outer(tau, spec.eigenvalues)) * c[None, :]) @ spec.eigenvectors.T
    p = (np.abs(evolved) ** 2).mean(axis=0)
    return p / p.sum()


def predicted_hopping_probability(
    H: DenseHamiltonian,
    initial: StateVector,
    target_set: Sequence[int],
    n_eps: int,
    t: float,
    spectrum: Optional[SpectralResult] = None,
) -> float:
    p = predicted_system_distribution(H, initial, n_eps, t, spectrum)
    return float(p[list(target_set)].sum())
