"""Named problem instances for benchmarks and acceptance runs."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Any, Callable, Dict

from core.grid import Grid
from core.potentials import Potential
from core.spectral import DenseHamiltonian, build_effective_hamiltonian


@dataclass
class ModelCase:
    name: str
    hamiltonian: DenseHamiltonian
    potential: Potential | None = None
    grid: Grid | None = None
    T: float | None = None


def _double_well(h: float = 1.0, T: float = 0.2, n: int = 7, box_length: float = 4.0) -> ModelCase:
    p, g = Potential.double_well(h=h), Grid(n, box_length)
    return ModelCase("double_well", build_effective_hamiltonian(p, T, g), p, g, T)


MODELS: Dict[str, Callable[..., ModelCase]] = {
    "double_well": _double_well,
}


def generate_case(kind: str, **params: Any) -> ModelCase:
    """Build a named instance; keyword arguments override its defaults."""
    if kind not in MODELS:
        raise ValueError(f"Unknown model kind: {kind}")
    return MODELS[kind](**params)
