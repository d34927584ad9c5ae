"""Dense statevector simulator.

Qubit 0 is the most significant bit of the basis index, so the bitstring
"011" is index 3 and a contiguous register reads as an unsigned integer.
Gates mutate the state in place.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np

from config import MAX_UNITARY_QUBITS

_SQRT2_INV = 1.0 / np.sqrt(2.0)
_X = np.array([[0, 1], [1, 0]], dtype=complex)
_H = np.array([[1, 1], [1, -1]], dtype=complex) * _SQRT2_INV


def _rx(theta: float) -> np.ndarray:
    c, s = np.cos(theta / 2), np.sin(theta / 2)
    return np.array([[c, -1j * s], [-1j * s, c]], dtype=complex)


def _ry(theta: float) -> np.ndarray:
    c, s = np.cos(theta / 2), np.sin(theta / 2)
    return np.array([[c, -s], [s, c]], dtype=complex)


def _rz(theta: float) -> np.ndarray:
    return np.array([[np.exp(-0.5j * theta), 0], [0, np.exp(0.5j * theta)]], dtype=complex)


class GateKind(str, Enum):
    RX = "rx"
    RY = "ry"
    RZ = "rz"
    X = "x"
    H = "h"
    CNOT = "cnot"
    CPHASE = "cphase"
    SWAP = "swap"
    ZZ = "zz"
    QFT = "qft"
    CQFT = "cqft"
    CONTROLLED_MATRIX = "controlled_matrix"


_SINGLE = {GateKind.RX, GateKind.RY, GateKind.RZ, GateKind.X, GateKind.H}
_REGISTER = {GateKind.QFT, GateKind.CQFT}


@dataclass(frozen=True, eq=False)
class Gate:
    """One circuit instruction.

    Register gates (QFT, CQFT) act on the contiguous qubits listed in `qubits`.
    CONTROLLED_MATRIX applies `matrix` (already raised to `power`) to the
    contiguous target qubits `qubits[1:]` when `qubits[0]` is set.
    """

    kind: GateKind
    qubits: Tuple[int, ...]
    angle: float = 0.0
    inverse: bool = False
    matrix: Optional[np.ndarray] = None
    power: int = 1

    @classmethod
    def rx(cls, q: int, theta: float) -> "Gate":
        return cls(GateKind.RX, (q,), angle=float(theta))

    @classmethod
    def ry(cls, q: int, theta: float) -> "Gate":
        return cls(GateKind.RY, (q,), angle=float(theta))

    @classmethod
    def rz(cls, q: int, theta: float) -> "Gate":
        return cls(GateKind.RZ, (q,), angle=float(theta))

    @classmethod
    def x(cls, q: int) -> "Gate":
        return cls(GateKind.X, (q,))

    @classmethod
    def h(cls, q: int) -> "Gate":
        return cls(GateKind.H, (q,))

    @classmethod
    def cnot(cls, ctrl: int, tgt: int) -> "Gate":
        return cls(GateKind.CNOT, (ctrl, tgt))

    @classmethod
    def cphase(cls, ctrl: int, tgt: int, phi: float) -> "Gate":
        return cls(GateKind.CPHASE, (ctrl, tgt), angle=float(phi))

    @classmethod
    def swap(cls, a: int, b: int) -> "Gate":
        return cls(GateKind.SWAP, (a, b))

    @classmethod
    def zz(cls, q1: int, q2: int, lam: float) -> "Gate":
        """exp(i lam Z Z)."""
        return cls(GateKind.ZZ, (q1, q2), angle=float(lam))

    @classmethod
    def qft(cls, start: int, stop: int, inverse: bool = False) -> "Gate":
        return cls(GateKind.QFT, tuple(range(start, stop)), inverse=inverse)

    @classmethod
    def cqft(cls, start: int, stop: int, inverse: bool = False) -> "Gate":
        return cls(GateKind.CQFT, tuple(range(start, stop)), inverse=inverse)

    @classmethod
    def controlled_matrix(cls, ctrl: int, start: int, stop: int, matrix: np.ndarray, power: int = 1) -> "Gate":
        matrix = np.asarray(matrix, dtype=complex)
        m = stop - start
        if matrix.shape != (1 << m, 1 << m):
            raise ValueError(f"matrix shape {matrix.shape} does not match {m} target qubits")
        return cls(GateKind.CONTROLLED_MATRIX, (ctrl,) + tuple(range(start, stop)), matrix=matrix, power=int(power))

    def single_qubit_matrix(self) -> np.ndarray:
        if self.kind is GateKind.RX:
            return _rx(self.angle)
        if self.kind is GateKind.RY:
            return _ry(self.angle)
        if self.kind is GateKind.RZ:
            return _rz(self.angle)
        if self.kind is GateKind.X:
            return _X
        if self.kind is GateKind.H:
            return _H
        raise ValueError(f"{self.kind.value} is not a single-qubit gate")

    def to_dict(self) -> Dict[str, Any]:
        data: Dict[str, Any] = {"kind": self.kind.value, "qubits": list(self.qubits)}
        if self.kind in (GateKind.RX, GateKind.RY, GateKind.RZ, GateKind.CPHASE, GateKind.ZZ):
            data["angle"] = self.angle
        if self.kind in _REGISTER:
            data["inverse"] = self.inverse
        if self.kind is GateKind.CONTROLLED_MATRIX:
            data["dim"] = int(self.matrix.shape[0])
            data["power"] = self.power
        return data


class StateVector:
    """Unit-norm amplitudes over 2**n basis states."""

    def __init__(self, n: int, amps: Optional[np.ndarray] = None):
        self.n = int(n)
        if amps is None:
            amps = np.zeros(1 << self.n, dtype=complex)
            amps[0] = 1.0
        amps = np.array(amps, dtype=complex)
        if amps.shape != (1 << self.n,):
            raise ValueError(f"expected {1 << self.n} amplitudes, got {amps.shape}")
        self.amps = amps

    @classmethod
    def basis(cls, n: int, index: int) -> "StateVector":
        if not (0 <= index < (1 << n)):
            raise ValueError(f"basis index {index} outside register of {n} qubits")
        amps = np.zeros(1 << n, dtype=complex)
        amps[index] = 1.0
        return cls(n, amps)

    @classmethod
    def from_bitstring(cls, bits: str) -> "StateVector":
        return cls.basis(len(bits), int(bits, 2))

    def copy(self) -> "StateVector":
        return StateVector(self.n, self.amps.copy())

    def norm(self) -> float:
        return float(np.linalg.norm(self.amps))

    def probabilities(self) -> np.ndarray:
        p = np.abs(self.amps) ** 2
        return p / p.sum()

    def tensor(self, other: "StateVector") -> "StateVector":
        """self is the high-order register."""
        return StateVector(self.n + other.n, np.kron(self.amps, other.amps))


def load_amplitudes(v: Sequence[complex]) -> StateVector:
    """Normalized copy of an amplitude vector whose length is a power of two."""
    amps = np.array(v, dtype=complex)
    size = amps.size
    if size == 0 or size & (size - 1):
        raise ValueError(f"amplitude vector length must be a power of two, got {size}")
    norm = np.linalg.norm(amps)
    if norm == 0 or not np.isfinite(norm):
        raise ValueError("cannot load a zero (or non-finite) amplitude vector")
    return StateVector(size.bit_length() - 1, amps / norm)


@dataclass
class Circuit:
    n_qubits: int
    gates: List[Gate] = field(default_factory=list)
    global_phase: float = 0.0

    def add(self, gate: Gate) -> "Circuit":
        for q in gate.qubits:
            if not (0 <= q < self.n_qubits):
                raise ValueError(f"gate {gate.kind.value} touches qubit {q}, circuit has {self.n_qubits}")
        if len(set(gate.qubits)) != len(gate.qubits):
            raise ValueError(f"gate {gate.kind.value} repeats a qubit: {gate.qubits}")
        self.gates.append(gate)
        return self

    def extend(self, gates) -> "Circuit":
        for g in gates:
            self.add(g)
        return self

    def compose(self, other: "Circuit") -> "Circuit":
        if other.n_qubits != self.n_qubits:
            raise ValueError("cannot compose circuits of different widths")
        self.extend(other.gates)
        self.global_phase += other.global_phase
        return self

    def run(self, state: Optional[StateVector] = None) -> StateVector:
        state = StateVector(self.n_qubits) if state is None else state
        if state.n != self.n_qubits:
            raise ValueError(f"state has {state.n} qubits, circuit expects {self.n_qubits}")
        for g in self.gates:
            apply_gate(state, g)
        if self.global_phase:
            state.amps *= np.exp(1j * self.global_phase)
        return state

    def unitary(self) -> np.ndarray:
        """Dense matrix of the circuit, global phase included."""
        if self.n_qubits > MAX_UNITARY_QUBITS:
            raise ValueError(f"unitary of {self.n_qubits} qubits exceeds the dense cap")
        dim = 1 << self.n_qubits
        cols = np.empty((dim, dim), dtype=complex)
        for i in range(dim):
            cols[:, i] = self.run(StateVector.basis(self.n_qubits, i)).amps
        return cols

    def to_dict(self) -> Dict[str, Any]:
        return {
            "n_qubits": self.n_qubits,
            "global_phase": self.global_phase,
            "gates": [g.to_dict() for g in self.gates],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)


def _check_qubits(state: StateVector, gate: Gate) -> None:
    for q in gate.qubits:
        if not (0 <= q < state.n):
            raise ValueError(f"gate {gate.kind.value} touches qubit {q}, state has {state.n}")


def _apply_single(state: StateVector, q: int, m: np.ndarray) -> None:
    view = state.amps.reshape(1 << q, 2, 1 << (state.n - q - 1))
    state.amps = np.einsum("ab,ibj->iaj", m, view).reshape(-1)


def _apply_register_fourier(state: StateVector, qubits: Tuple[int, ...], inverse: bool, centered: bool) -> None:
    start, m = qubits[0], len(qubits)
    if qubits != tuple(range(start, start + m)):
        raise ValueError("QFT register must be contiguous")
    view = state.amps.reshape(1 << start, 1 << m, 1 << (state.n - start - m))
    half = (1 << m) // 2
    if not inverse:
        out = np.fft.ifft(view, axis=1, norm="ortho")
        if centered:
            out = np.roll(out, half, axis=1)
    else:
        if centered:
            view = np.roll(view, -half, axis=1)
        out = np.fft.fft(view, axis=1, norm="ortho")
    state.amps = np.ascontiguousarray(out).reshape(-1)


def _apply_controlled_matrix(state: StateVector, gate: Gate) -> None:
    ctrl, targets = gate.qubits[0], gate.qubits[1:]
    start, m = targets[0], len(targets)
    if targets != tuple(range(start, start + m)):
        raise ValueError("controlled-matrix targets must be contiguous")
    psi = state.amps.reshape((2,) * state.n)
    index = [slice(None)] * state.n
    index[ctrl] = 1
    sub = psi[tuple(index)]
    local_start = start - 1 if ctrl < start else start
    block = sub.reshape(1 << local_start, 1 << m, -1)
    sub[...] = np.einsum("ab,ibj->iaj", gate.matrix, block).reshape(sub.shape)


def apply_gate(state: StateVector, gate: Gate) -> StateVector:
    _check_qubits(state, gate)
    kind = gate.kind
    if kind in _SINGLE:
        _apply_single(state, gate.qubits[0], gate.single_qubit_matrix())
        return state
    if kind in _REGISTER:
        _apply_register_fourier(state, gate.qubits, gate.inverse, centered=kind is GateKind.CQFT)
        return state
    if kind is GateKind.CONTROLLED_MATRIX:
        _apply_controlled_matrix(state, gate)
        return state

    a, b = gate.qubits
    psi = state.amps.reshape((2,) * state.n)
    if kind is GateKind.CNOT:
        index = [slice(None)] * state.n
        index[a] = 1
        sub = psi[tuple(index)]
        axis = b - 1 if a < b else b
        sub[...] = np.flip(sub, axis=axis).copy()
    elif kind is GateKind.CPHASE:
        index = [slice(None)] * state.n
        index[a], index[b] = 1, 1
        psi[tuple(index)] *= np.exp(1j * gate.angle)
    elif kind is GateKind.SWAP:
        state.amps = np.ascontiguousarray(np.swapaxes(psi, a, b)).reshape(-1)
    elif kind is GateKind.ZZ:
        for za in (0, 1):
            for zb in (0, 1):
                index = [slice(None)] * state.n
                index[a], index[b] = za, zb
                sign = 1.0 if za == zb else -1.0
                psi[tuple(index)] *= np.exp(1j * sign * gate.angle)
    else:
        raise ValueError(f"unsupported gate kind {kind}")
    return state


def apply_cqft(state: StateVector, inverse: bool = False) -> StateVector:
    """Centered QFT on the whole register: zero momentum lands on index 2**(n-1)."""
    return apply_gate(state, Gate.cqft(0, state.n, inverse=inverse))


def qft_matrix(n: int) -> np.ndarray:
    """F[k, x] = exp(2 pi i x k / N) / sqrt(N)."""
    size = 1 << n
    k = np.arange(size)
    return np.exp(2j * np.pi * np.outer(k, k) / size) / np.sqrt(size)


def centered_qft_matrix(n: int) -> np.ndarray:
    """Cyclic half-shift of the QFT rows."""
    return np.roll(qft_matrix(n), (1 << n) // 2, axis=0)


def qft_circuit(n: int, start: int = 0, stop: Optional[int] = None, inverse: bool = False) -> Circuit:
    """Hadamard / controlled-phase / swap decomposition of the QFT."""
    stop = n if stop is None else stop
    qubits = list(range(start, stop))
    m = len(qubits)
    gates: List[Gate] = []
    for i in range(m):
        gates.append(Gate.h(qubits[i]))
        for j in range(i + 1, m):
            gates.append(Gate.cphase(qubits[j], qubits[i], np.pi / (1 << (j - i))))
    for i in range(m // 2):
        gates.append(Gate.swap(qubits[i], qubits[m - 1 - i]))
    if inverse:
        gates = [_adjoint(g) for g in reversed(gates)]
    return Circuit(n).extend(gates)


def _adjoint(gate: Gate) -> Gate:
    if gate.kind in (GateKind.RX, GateKind.RY, GateKind.RZ, GateKind.CPHASE, GateKind.ZZ):
        return Gate(gate.kind, gate.qubits, angle=-gate.angle)
    if gate.kind in _REGISTER:
        return Gate(gate.kind, gate.qubits, inverse=not gate.inverse)
    if gate.kind is GateKind.CONTROLLED_MATRIX:
        return Gate(gate.kind, gate.qubits, matrix=gate.matrix.conj().T, power=gate.power)
    return gate


def _hermitian_matrix(H) -> np.ndarray:
    return np.asarray(getattr(H, "matrix", H), dtype=complex)


def exact_unitary(H, t: float, spectrum=None) -> np.ndarray:
    """U = exp(i H t) through the eigenbasis of H.

    `spectrum` may carry a precomputed (eigenvalues, eigenvectors) pair so that
    ladders of scaled times reuse one diagonalization.
    """
    if spectrum is None:
        matrix = _hermitian_matrix(H)
        dim = matrix.shape[0]
        if dim > (1 << MAX_UNITARY_QUBITS):
            raise ValueError(f"dimension {dim} exceeds the unitary cap 2**{MAX_UNITARY_QUBITS}")
        evals, evecs = np.linalg.eigh(matrix)
    else:
        evals, evecs = spectrum.eigenvalues, spectrum.eigenvectors
        if evecs.shape[0] > (1 << MAX_UNITARY_QUBITS):
            raise ValueError(f"dimension {evecs.shape[0]} exceeds the unitary cap 2**{MAX_UNITARY_QUBITS}")
    phases = np.exp(1j * np.asarray(evals) * t)
    return (evecs * phases) @ evecs.conj().T


def trotter_step_ising(Ns: int, J: float, gamma: float, dt: float) -> Circuit:
    """First-order step of exp(i H dt) for the shifted open-chain transverse Ising model.

    The constant J*Ns shift becomes the circuit's global phase.
    """
    if Ns < 2:
        raise ValueError(f"Trotter step needs at least two spins, got {Ns}")
    circuit = Circuit(Ns, global_phase=J * Ns * dt)
    if dt == 0:
        return circuit
    for s in range(Ns):
        circuit.add(Gate.rx(s, 2.0 * gamma * dt))
    for s in range(Ns - 1):
        # exp(-i J dt Z_s Z_s+1): parity onto s+1, rotate, uncompute
        circuit.add(Gate.cnot(s, s + 1))
        circuit.add(Gate.rz(s + 1, 2.0 * J * dt))
        circuit.add(Gate.cnot(s, s + 1))
    return circuit


def trotter_circuit(Ns: int, J: float, gamma: float, t: float, steps: int) -> Circuit:
    if steps < 1:
        raise ValueError(f"need at least one Trotter step, got {steps}")
    circuit = Circuit(Ns)
    step = trotter_step_ising(Ns, J, gamma, t / steps)
    for _ in range(steps):
        circuit.compose(step)
    return circuit


def sample_indices(state: StateVector, shots: int, rng: np.random.Generator) -> np.ndarray:
    """Per-shot computational-basis readouts."""
    if shots < 1:
        raise ValueError(f"shots must be >= 1, got {shots}")
    return rng.choice(1 << state.n, size=shots, p=state.probabilities())


def measure_all(state: StateVector, shots: int, seed=None) -> np.ndarray:
    """Histogram of `shots` readouts over all basis indices."""
    if shots < 1:
        raise ValueError(f"shots must be >= 1, got {shots}")
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    return rng.multinomial(shots, state.probabilities())
