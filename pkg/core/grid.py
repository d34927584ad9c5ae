"""Real-space register grid on the symmetric box [-L/2, L/2)."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Union

import numpy as np

from config import MAX_DENSE_QUBITS


@dataclass(frozen=True)
class Grid:
    n: int
    L: float

    def __post_init__(self):
        if not (1 <= int(self.n) <= MAX_DENSE_QUBITS):
            raise ValueError(f"n_qubits must be in [1, {MAX_DENSE_QUBITS}], got {self.n}")
        if not np.isfinite(self.L) or self.L <= 0:
            raise ValueError(f"box_length must be positive, got {self.L}")
        object.__setattr__(self, "n", int(self.n))
        object.__setattr__(self, "L", float(self.L))

    @property
    def size(self) -> int:
        return 1 << self.n

    @property
    def dx(self) -> float:
        return self.L / self.size

    @property
    def dp(self) -> float:
        return 2.0 * np.pi / (self.size * self.dx)

    @property
    def positions(self) -> np.ndarray:
        return -0.5 * self.L + np.arange(self.size) * self.dx

    @property
    def momenta(self) -> np.ndarray:
        """Centered momentum lattice, zero at index 2**(n-1)."""
        return (np.arange(self.size) - self.size // 2) * self.dp

    def _check_index(self, i: int) -> None:
        if not (0 <= i < self.size):
            raise ValueError(f"index {i} outside [0, {self.size})")

    def position_of_index(self, i: int) -> float:
        self._check_index(i)
        return -0.5 * self.L + i * self.dx

    def momentum_of_index_centered(self, j: int) -> float:
        self._check_index(j)
        return (j - self.size // 2) * self.dp

    def nearest_index(self, x: Union[float, np.ndarray]):
        idx = np.rint((np.asarray(x) + 0.5 * self.L) / self.dx).astype(int)
        return np.clip(idx, 0, self.size - 1)

    def contains(self, x: float) -> bool:
        return -0.5 * self.L <= x <= 0.5 * self.L

    def discretize(self, f: Callable[[np.ndarray], np.ndarray]) -> np.ndarray:
        """Sample a scalar function on the grid points."""
        values = np.asarray(f(self.positions), dtype=float)
        if values.ndim == 0:
            values = np.full(self.size, float(values))
        return values

    def to_density(self, probabilities: np.ndarray) -> np.ndarray:
        """Grid probabilities to continuum density (metric factor N/L)."""
        return np.asarray(probabilities) * (self.size / self.L)

    def from_density(self, density: np.ndarray) -> np.ndarray:
        return np.asarray(density) * (self.L / self.size)

    def to_dict(self):
        return {"n_qubits": self.n, "box_length": self.L}


def discretize(f, g: Grid) -> np.ndarray:
    """Sample a potential (or any scalar evaluator) on the grid points."""
    if hasattr(f, "value") and callable(f.value):
        return g.discretize(f.value)
    return g.discretize(f)
