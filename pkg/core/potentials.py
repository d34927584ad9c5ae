"""Classical potentials and their exact map onto effective quantum potentials.

Units follow the overdamped Langevin conventions: Boltzmann constant and
friction are both one, so the temperature fixes the effective mass through
2 m* = 1 / T.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Dict, Tuple, Union

import numpy as np
from numpy.polynomial import Polynomial

ArrayLike = Union[float, np.ndarray]


class PotentialKind(str, Enum):
    DOUBLE_WELL = "double_well"
    HARMONIC = "harmonic"
    POLYNOMIAL = "polynomial"


class EffectiveKind(str, Enum):
    PLAIN = "plain"
    SUPERSYMMETRIC = "susy"


@dataclass(frozen=True)
class Temperature:
    T: float

    def __post_init__(self):
        if not np.isfinite(self.T) or self.T <= 0:
            raise ValueError(f"Temperature must be positive, got {self.T}")

    @property
    def mass(self) -> float:
        """Effective mass of the kinetic term."""
        return 1.0 / (2.0 * self.T)


def as_temperature(T: Union[float, Temperature]) -> Temperature:
    return T if isinstance(T, Temperature) else Temperature(float(T))


@dataclass(frozen=True)
class Potential:
    """Analytic one-dimensional potential v(x).

    double_well: v = h (x^2 - x0^2)^2
    harmonic:    v = k x^2 / 2
    polynomial:  v = sum_i coeffs[i] x^i
    """

    kind: PotentialKind
    h: float = 1.0
    x0: float = 1.0
    k: float = 1.0
    coeffs: Tuple[float, ...] = ()
    _poly: Polynomial = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        kind = PotentialKind(self.kind)
        object.__setattr__(self, "kind", kind)
        if kind is PotentialKind.DOUBLE_WELL:
            if self.h <= 0 or self.x0 <= 0:
                raise ValueError(f"double_well needs h > 0 and x0 > 0, got h={self.h}, x0={self.x0}")
            x0sq = self.x0 ** 2
            poly = self.h * Polynomial([x0sq ** 2, 0.0, -2.0 * x0sq, 0.0, 1.0])
        elif kind is PotentialKind.HARMONIC:
            poly = Polynomial([0.0, 0.0, 0.5 * self.k])
        else:
            if len(self.coeffs) == 0:
                raise ValueError("polynomial potential needs at least one coefficient")
            object.__setattr__(self, "coeffs", tuple(float(c) for c in self.coeffs))
            poly = Polynomial(list(self.coeffs))
        object.__setattr__(self, "_poly", poly)

    @classmethod
    def double_well(cls, h: float = 1.0, x0: float = 1.0) -> "Potential":
        return cls(PotentialKind.DOUBLE_WELL, h=h, x0=x0)

    @classmethod
    def harmonic(cls, k: float = 1.0) -> "Potential":
        return cls(PotentialKind.HARMONIC, k=k)

    @classmethod
    def polynomial(cls, coeffs) -> "Potential":
        return cls(PotentialKind.POLYNOMIAL, coeffs=tuple(coeffs))

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "Potential":
        kind = PotentialKind(data["kind"])
        if kind is PotentialKind.DOUBLE_WELL:
            return cls.double_well(h=float(data.get("h", 1.0)), x0=float(data.get("x0", 1.0)))
        if kind is PotentialKind.HARMONIC:
            return cls.harmonic(k=float(data.get("k", 1.0)))
        return cls.polynomial(data.get("coeffs") or ())

    def to_dict(self) -> Dict[str, Any]:
        if self.kind is PotentialKind.DOUBLE_WELL:
            return {"kind": self.kind.value, "h": self.h, "x0": self.x0}
        if self.kind is PotentialKind.HARMONIC:
            return {"kind": self.kind.value, "k": self.k}
        return {"kind": self.kind.value, "coeffs": list(self.coeffs)}

    def value(self, x: ArrayLike) -> ArrayLike:
        return self._poly(x)

    def first_derivative(self, x: ArrayLike) -> ArrayLike:
        return self._poly.deriv(1)(x)

    def second_derivative(self, x: ArrayLike) -> ArrayLike:
        return self._poly.deriv(2)(x)

    def stationary_points(self) -> Tuple[np.ndarray, np.ndarray]:
        """(minima, maxima) on the real line, both sorted ascending."""
        if self.kind is PotentialKind.DOUBLE_WELL:
            return np.array([-self.x0, self.x0]), np.array([0.0])
        if self.kind is PotentialKind.HARMONIC:
            return (np.array([0.0]), np.array([])) if self.k > 0 else (np.array([]), np.array([0.0]))
        d1 = self._poly.deriv(1)
        if d1.degree() < 1:
            return np.array([]), np.array([])
        roots = d1.roots()
        roots = np.sort(roots[np.abs(roots.imag) < 1e-9].real)
        roots[np.abs(roots) < 1e-12] = 0.0
        curvature = self._poly.deriv(2)(roots)
        return roots[curvature > 0], roots[curvature < 0]


def eval_potential(p: Potential, x: ArrayLike) -> ArrayLike:
    return p.value(x)


def eval_force(p: Potential, x: ArrayLike) -> ArrayLike:
    """f(x) = -v'(x)."""
    return -p.first_derivative(x)


def effective_potential(p: Potential, T: Union[float, Temperature], x: ArrayLike) -> ArrayLike:
    """V = (v')^2 / (4T) - v'' / 2."""
    temp = as_temperature(T)
    d1 = p.first_derivative(x)
    return d1 * d1 / (4.0 * temp.T) - 0.5 * p.second_derivative(x)


def susy_potential(p: Potential, T: Union[float, Temperature], x: ArrayLike) -> ArrayLike:
    """Supersymmetric partner potential V + v''."""
    return effective_potential(p, T, x) + p.second_derivative(x)


def barrier_height(p: Potential) -> float:
    if p.kind is not PotentialKind.DOUBLE_WELL:
        raise ValueError(f"barrier height is defined for double_well only, got {p.kind.value}")
    return float(p.value(0.0) - p.value(p.x0))


def kramers_rate(p: Potential, T: Union[float, Temperature]) -> float:
    """Overdamped escape rate out of one well of a double well.

    Uses the general barrier v(0) - v(x0) = h x0^4 rather than bare h.
    """
    if p.kind is not PotentialKind.DOUBLE_WELL:
        raise ValueError(f"Kramers rate needs a double_well potential, got {p.kind.value}")
    temp = as_temperature(T)
    omega_min = np.sqrt(p.second_derivative(p.x0))
    omega_top = np.sqrt(abs(p.second_derivative(0.0)))
    prefactor = omega_min * omega_top / (2.0 * np.pi)
    return float(prefactor * np.exp(-barrier_height(p) / temp.T))


def boltzmann_density(p: Potential, T: Union[float, Temperature], grid) -> np.ndarray:
    """Grid-normalized canonical weights exp(-v/T)."""
    temp = as_temperature(T)
    v = np.asarray(p.value(grid.positions), dtype=float)
    w = np.exp(-(v - v.min()) / temp.T)
    return w / w.sum()
