"""Dense Hamiltonians and exact spectral analysis.

Real-space Hamiltonians are K + diag(V) on the periodic grid, with the
kinetic term built in the centered momentum basis. Effective Hamiltonians
use the mass m* = 1 / (2T), so K = T p^2.
"""

from __future__ import annotations

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Dict, Iterable, List, Optional, Union

import numpy as np
import scipy.linalg

from config import MAX_DENSE_QUBITS
from core.errors import NumericError
from core.grid import Grid
from core.potentials import (
    EffectiveKind,
    Potential,
    PotentialKind,
    Temperature,
    as_temperature,
    effective_potential,
    kramers_rate,
    susy_potential,
)
from quantum.simulator import centered_qft_matrix

HERMITIAN_TOL = 1e-10
EDGE_THRESHOLD = 1e-6


class Provenance(str, Enum):
    EFFECTIVE = "effective"
    SUSY = "susy"
    ISING = "ising"
    CUSTOM = "custom"


@dataclass
class DenseHamiltonian:
    matrix: np.ndarray
    provenance: Provenance = Provenance.CUSTOM
    mass: Optional[float] = None
    grid: Optional[Grid] = None
    params: Dict[str, Any] = field(default_factory=dict)

    @property
    def dim(self) -> int:
        return int(self.matrix.shape[0])

    @property
    def n_qubits(self) -> int:
        return self.dim.bit_length() - 1

    def hermiticity_error(self) -> float:
        return float(np.max(np.abs(self.matrix - self.matrix.conj().T)))

    def expectation(self, amps: np.ndarray) -> float:
        amps = np.asarray(amps)
        return float(np.real(np.vdot(amps, self.matrix @ amps)))

    def __add__(self, other: "DenseHamiltonian") -> "DenseHamiltonian":
        return DenseHamiltonian(self.matrix + other.matrix, self.provenance, self.mass, self.grid, dict(self.params))


@dataclass
class SpectralResult:
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    def __len__(self) -> int:
        return int(self.eigenvalues.size)

    @property
    def ground_state(self) -> np.ndarray:
        return self.eigenvectors[:, 0]

    def residuals(self, H: DenseHamiltonian) -> np.ndarray:
        M = H.matrix
        diff = M @ self.eigenvectors - self.eigenvectors * self.eigenvalues
        return np.linalg.norm(diff, axis=0)


def build_kinetic(g: Grid, mass: float) -> DenseHamiltonian:
    """K = Fc^dagger diag(p_j^2 / 2m*) Fc on the centered momentum lattice."""
    if mass <= 0:
        raise ValueError(f"effective mass must be positive, got {mass}")
    fc = centered_qft_matrix(g.n)
    energies = g.momenta ** 2 / (2.0 * mass)
    K = fc.conj().T @ (energies[:, None] * fc)
    imag = float(np.max(np.abs(K.imag)))
    if imag > 1e-10:
        raise NumericError(f"kinetic operator is not real (max imag {imag:.3e})")
    return DenseHamiltonian(np.ascontiguousarray(K.real), Provenance.CUSTOM, mass=mass, grid=g)


def potential_diagonal(p: Potential, T: Union[float, Temperature], g: Grid, kind: EffectiveKind) -> np.ndarray:
    kind = EffectiveKind(kind)
    evaluator = susy_potential if kind is EffectiveKind.SUPERSYMMETRIC else effective_potential
    return np.asarray(evaluator(p, T, g.positions), dtype=float)


def build_effective_hamiltonian(
    p: Potential,
    T: Union[float, Temperature],
    g: Grid,
    kind: EffectiveKind = EffectiveKind.PLAIN,
) -> DenseHamiltonian:
    temp = as_temperature(T)
    kind = EffectiveKind(kind)
    K = build_kinetic(g, temp.mass)
    diag = potential_diagonal(p, temp, g, kind)
    matrix = K.matrix.copy()
    matrix[np.diag_indices_from(matrix)] += diag
    provenance = Provenance.SUSY if kind is EffectiveKind.SUPERSYMMETRIC else Provenance.EFFECTIVE
    return DenseHamiltonian(
        matrix,
        provenance,
        mass=temp.mass,
        grid=g,
        params={"potential": p.to_dict(), "T": temp.T, "kind": kind.value},
    )


def build_ising_hamiltonian(Ns: int, J: float, gamma: float) -> DenseHamiltonian:
    """-J sum Z_s Z_s+1 - gamma sum X_s + J Ns, open chain, qubit 0 most significant."""
    if Ns < 1:
        raise ValueError(f"Ising chain needs at least one site, got {Ns}")
    if J <= 0:
        raise ValueError(f"ferromagnetic coupling must be positive, got {J}")
    dim = 1 << Ns
    idx = np.arange(dim)
    spins = 1 - 2 * ((idx[:, None] >> (Ns - 1 - np.arange(Ns))[None, :]) & 1)
    bonds = (spins[:, :-1] * spins[:, 1:]).sum(axis=1) if Ns > 1 else np.zeros(dim)
    matrix = np.diag(-J * bonds + J * Ns).astype(float)
    for s in range(Ns):
        flipped = idx ^ (1 << (Ns - 1 - s))
        matrix[idx, flipped] -= gamma
    return DenseHamiltonian(matrix, Provenance.ISING, params={"Ns": Ns, "J": J, "gamma": gamma})


def build_realspace4_hamiltonian(J: float = 1.0, box_length: float = 10.0, mass: float = 0.5) -> DenseHamiltonian:
    """Two-qubit real-space double well: diagonal (J, 3J, 3J, J) plus the n=2 kinetic hopping."""
    g = Grid(2, box_length)
    K = build_kinetic(g, mass)
    matrix = K.matrix.copy()
    matrix[np.diag_indices_from(matrix)] = np.array([J, 3 * J, 3 * J, J])
    logging.debug("realspace4 bare potential: %s", np.diag(matrix) - np.diag(K.matrix))
    return DenseHamiltonian(matrix, Provenance.CUSTOM, mass=mass, grid=g, params={"J": J, "model": "realspace4"})


def _fix_phases(vecs: np.ndarray) -> np.ndarray:
    cols = np.arange(vecs.shape[1])
    pivot = vecs[np.argmax(np.abs(vecs), axis=0), cols]
    phase = np.conj(pivot) / np.abs(pivot)
    return vecs * phase[None, :]


def diagonalize(H: DenseHamiltonian) -> SpectralResult:
    """Full ascending eigendecomposition; largest component of each vector is real positive."""
    if H.dim > (1 << MAX_DENSE_QUBITS):
        raise ValueError(f"dimension {H.dim} exceeds the dense cap 2**{MAX_DENSE_QUBITS}")
    err = H.hermiticity_error()
    if err > HERMITIAN_TOL:
        raise NumericError(f"matrix is not Hermitian (max |M - M^dagger| = {err:.3e})")
    matrix = H.matrix
    if np.iscomplexobj(matrix) and np.max(np.abs(matrix.imag)) == 0:
        matrix = matrix.real
    try:
        evals, evecs = scipy.linalg.eigh(matrix)
    except (np.linalg.LinAlgError, ValueError) as exc:
        raise NumericError(f"eigendecomposition failed: {exc}") from exc
    if not np.all(np.isfinite(evals)):
        raise NumericError("eigendecomposition returned non-finite energies")
    evecs = _fix_phases(evecs)
    if not np.iscomplexobj(H.matrix) or np.max(np.abs(evecs.imag)) == 0:
        evecs = np.real(evecs)
    return SpectralResult(evals, evecs)


def fundamental_gap(s: SpectralResult) -> float:
    if len(s) < 2:
        raise ValueError("gap needs at least two eigenvalues")
    return float(s.eigenvalues[1] - s.eigenvalues[0])


def reaction_current(psi0: np.ndarray, psi0_susy: np.ndarray) -> np.ndarray:
    """Elementwise product of the plain and supersymmetric ground states."""
    a, b = np.asarray(psi0), np.asarray(psi0_susy)
    if a.shape != b.shape:
        raise ValueError(f"length mismatch: {a.shape} vs {b.shape}")
    return a * b


def edge_amplitude_ratio(psi: np.ndarray) -> float:
    """Largest box-edge amplitude relative to the peak amplitude."""
    mag = np.abs(np.asarray(psi))
    return float(max(mag[0], mag[-1]) / mag.max())


def check_edges(psi: np.ndarray, threshold: float = EDGE_THRESHOLD) -> bool:
    ratio = edge_amplitude_ratio(psi)
    if ratio > threshold:
        logging.warning("ground state reaches the box edge (ratio %.2e); enlarge box_length", ratio)
        return False
    return True


@dataclass
class GapPoint:
    T: float
    E0: float
    gap: float
    excited_gap: float
    E0_susy: float
    kramers: Optional[float]

    def to_dict(self) -> Dict[str, Any]:
        return {
            "T": self.T,
            "E0": self.E0,
            "gap": self.gap,
            "E2_minus_E1": self.excited_gap,
            "E0_susy": self.E0_susy,
            "kramers_rate": self.kramers,
        }


def gap_point(p: Potential, T: float, g: Grid) -> GapPoint:
    plain = diagonalize(build_effective_hamiltonian(p, T, g, EffectiveKind.PLAIN))
    susy = diagonalize(build_effective_hamiltonian(p, T, g, EffectiveKind.SUPERSYMMETRIC))
    ev = plain.eigenvalues
    kramers = kramers_rate(p, T) if p.kind is PotentialKind.DOUBLE_WELL else None
    return GapPoint(
        T=float(T),
        E0=float(ev[0]),
        gap=float(ev[1] - ev[0]),
        excited_gap=float(ev[2] - ev[1]) if ev.size > 2 else float("nan"),
        E0_susy=float(susy.eigenvalues[0]),
        kramers=kramers,
    )


def gap_sweep(p: Potential, temperatures: Iterable[float], g: Grid, threads: Optional[int] = None) -> List[GapPoint]:
    """Independent scan points run on a thread pool; output order follows `temperatures`."""
    temps = [float(T) for T in temperatures]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        points = list(pool.map(lambda T: gap_point(p, T, g), temps))
    for pt in points:
        logging.info("T=%.4f gap=%.6e E0_susy=%.6e", pt.T, pt.gap, pt.E0_susy)
    return points


def fit_log_gap_slope(points: List[GapPoint]) -> float:
    """Slope of ln(gap) against 1/T."""
    if len(points) < 2:
        raise ValueError("slope fit needs at least two temperatures")
    inv_t = np.array([1.0 / pt.T for pt in points])
    log_gap = np.log([pt.gap for pt in points])
    if not np.all(np.isfinite(log_gap)):
        raise NumericError("non-positive gap in sweep")
    slope, _ = np.polyfit(inv_t, log_gap, 1)
    return float(slope)
