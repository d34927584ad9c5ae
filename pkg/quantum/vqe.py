"""Variational ground states with the RY-CNOT ansatz.

Energies use the two-basis estimator: the potential term from readouts in the
position basis, the kinetic term from readouts after a centered QFT. Exact
mode replaces readout frequencies by |amplitude|^2.
"""

from __future__ import annotations

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Sequence

import numpy as np
from scipy.optimize import minimize

from core.grid import Grid
from core.potentials import EffectiveKind, Potential, as_temperature
from core.spectral import build_effective_hamiltonian, diagonalize, potential_diagonal
from core.utils import spawn_rngs
from quantum.simulator import Circuit, Gate, StateVector, apply_cqft, measure_all


def n_parameters(n: int, depth: int) -> int:
    return n * (depth + 1)


def build_ansatz(n: int, depth: int, params: Sequence[float]) -> Circuit:
    """RY layer, then `depth` blocks of [linear CNOT chain, RY layer]."""
    params = np.asarray(params, dtype=float)
    if params.size != n_parameters(n, depth):
        raise ValueError(f"ansatz with n={n}, depth={depth} needs {n_parameters(n, depth)} angles, got {params.size}")
    circuit = Circuit(n)
    layers = params.reshape(depth + 1, n)
    for q in range(n):
        circuit.add(Gate.ry(q, layers[0, q]))
    for d in range(1, depth + 1):
        for q in range(n - 1):
            circuit.add(Gate.cnot(q, q + 1))
        for q in range(n):
            circuit.add(Gate.ry(q, layers[d, q]))
    return circuit


def _ansatz_amplitudes(n: int, depth: int, params: np.ndarray) -> np.ndarray:
    return build_ansatz(n, depth, params).run().amps


def energy_terms(
    state: StateVector,
    v_diag: np.ndarray,
    grid: Grid,
    mass: float,
    shots: Optional[int] = None,
    seed=None,
):
    """(E_V, E_K) from position-basis and momentum-basis readouts."""
    v_diag = np.asarray(v_diag, dtype=float)
    if v_diag.size != (1 << state.n):
        raise ValueError(f"potential diagonal has {v_diag.size} entries, register has {1 << state.n}")
    kinetic = grid.momenta ** 2 / (2.0 * mass)
    momentum_state = apply_cqft(state.copy())
    if shots is None:
        freq_x = state.probabilities()
        freq_p = momentum_state.probabilities()
    else:
        rng_x, rng_p = spawn_rngs(seed, 2)
        freq_x = measure_all(state, shots, rng_x) / shots
        freq_p = measure_all(momentum_state, shots, rng_p) / shots
    return float(freq_x @ v_diag), float(freq_p @ kinetic)


def estimate_energy(
    state: StateVector,
    v_diag: np.ndarray,
    grid: Grid,
    mass: float,
    shots: Optional[int] = None,
    seed=None,
) -> float:
    """E = E_V + E_K; `shots=None` is Exact mode."""
    e_v, e_k = energy_terms(state, v_diag, grid, mass, shots, seed)
    return e_v + e_k


@dataclass
class VqeTarget:
    v_diag: np.ndarray
    grid: Grid
    mass: float
    exact_energy: Optional[float] = None
    label: str = "custom"

    @classmethod
    def from_potential(cls, p: Potential, T, grid: Grid, kind: EffectiveKind = EffectiveKind.PLAIN) -> "VqeTarget":
        temp = as_temperature(T)
        kind = EffectiveKind(kind)
        exact = diagonalize(build_effective_hamiltonian(p, temp, grid, kind)).eigenvalues[0]
        return cls(
            v_diag=potential_diagonal(p, temp, grid, kind),
            grid=grid,
            mass=temp.mass,
            exact_energy=float(exact),
            label=f"{p.kind.value}/{kind.value}",
        )

    @property
    def n(self) -> int:
        return self.grid.n


@dataclass
class OptimizerSettings:
    max_iters: int = 6000
    restarts: int = 8
    tolerance: float = 1e-10
    seed: Optional[int] = 0
    threads: Optional[int] = None
    simplex_step: float = 0.5
    polish: bool = True
    spsa_a: float = 0.2
    spsa_c: float = 0.1


@dataclass
class VqeConfig:
    target: VqeTarget
    shots: Optional[int] = None
    optimizer: OptimizerSettings = field(default_factory=OptimizerSettings)

    def __post_init__(self):
        if self.shots is not None and self.shots < 1:
            raise ValueError(f"shots must be >= 1 (or None for Exact), got {self.shots}")

    @property
    def exact_mode(self) -> bool:
        return self.shots is None


@dataclass
class VqeResult:
    energy: float
    params: np.ndarray
    depth: int
    history: List[float]
    exact_energy: Optional[float] = None
    restart: int = 0
    evaluations: int = 0

    @property
    def best_history(self) -> np.ndarray:
        return np.minimum.accumulate(np.asarray(self.history, dtype=float))

    @property
    def relative_error(self) -> Optional[float]:
        if self.exact_energy is None or self.exact_energy == 0:
            return None
        return float((self.energy - self.exact_energy) / abs(self.exact_energy))

    def probabilities(self, n: int) -> np.ndarray:
        return np.abs(_ansatz_amplitudes(n, self.depth, self.params)) ** 2

    def to_dict(self) -> Dict[str, Any]:
        return {
            "energy": self.energy,
            "exact_energy": self.exact_energy,
            "relative_error": self.relative_error,
            "depth": self.depth,
            "params": [float(v) for v in self.params],
            "restart": self.restart,
            "evaluations": self.evaluations,
        }


class _Objective:
    """Energy of the ansatz state, recording every evaluation."""

    def __init__(self, cfg: VqeConfig, depth: int, rng: np.random.Generator):
        self.cfg = cfg
        self.depth = depth
        self.rng = rng
        self.history: List[float] = []

    def exact(self, params: np.ndarray) -> float:
        t = self.cfg.target
        state = StateVector(t.n, _ansatz_amplitudes(t.n, self.depth, params))
        return estimate_energy(state, t.v_diag, t.grid, t.mass)

    def __call__(self, params: np.ndarray) -> float:
        t = self.cfg.target
        state = StateVector(t.n, _ansatz_amplitudes(t.n, self.depth, params))
        seed = None if self.cfg.exact_mode else int(self.rng.integers(2**63 - 1))
        energy = estimate_energy(state, t.v_diag, t.grid, t.mass, self.cfg.shots, seed)
        self.history.append(energy)
        return energy


def parameter_shift_gradient(target: VqeTarget, depth: int, params: Sequence[float]) -> np.ndarray:
    """Exact gradient: dE/dtheta = [E(theta + pi/2) - E(theta - pi/2)] / 2 for each RY angle."""
    params = np.asarray(params, dtype=float)
    grad = np.empty_like(params)

    def energy(p):
        state = StateVector(target.n, _ansatz_amplitudes(target.n, depth, p))
        return estimate_energy(state, target.v_diag, target.grid, target.mass)

    for i in range(params.size):
        shift = np.zeros_like(params)
        shift[i] = 0.5 * np.pi
        grad[i] = 0.5 * (energy(params + shift) - energy(params - shift))
    return grad


def _simplex(x0: np.ndarray, step: float) -> np.ndarray:
    return np.vstack([x0, x0 + step * np.eye(x0.size)])


def _run_exact(cfg: VqeConfig, depth: int, x0: np.ndarray, rng: np.random.Generator):
    opt = cfg.optimizer
    objective = _Objective(cfg, depth, rng)
    res = minimize(
        objective,
        x0,
        method="Nelder-Mead",
        options={
            "maxfev": opt.max_iters,
            "xatol": 1e-8,
            "fatol": opt.tolerance,
            "adaptive": True,
            "initial_simplex": _simplex(x0, opt.simplex_step),
        },
    )
    best_x = np.asarray(res.x, dtype=float)
    if opt.polish:
        polished = minimize(
            objective,
            best_x,
            method="BFGS",
            jac=lambda p: parameter_shift_gradient(cfg.target, depth, p),
            options={"gtol": 1e-9, "maxiter": opt.max_iters},
        )
        if polished.fun <= objective.exact(best_x):
            best_x = np.asarray(polished.x, dtype=float)
    return best_x, objective.exact(best_x), objective.history


def _run_spsa(cfg: VqeConfig, depth: int, x0: np.ndarray, rng: np.random.Generator):
    """Simultaneous-perturbation stochastic approximation on shot-noise estimates."""
    opt = cfg.optimizer
    objective = _Objective(cfg, depth, rng)
    x = x0.copy()
    best_x, best_e = x.copy(), np.inf
    iterations = max(1, opt.max_iters // 3)
    for k in range(iterations):
        a_k = opt.spsa_a / (k + 1 + 0.1 * iterations) ** 0.602
        c_k = opt.spsa_c / (k + 1) ** 0.101
        delta = rng.choice([-1.0, 1.0], size=x.size)
        g = (objective(x + c_k * delta) - objective(x - c_k * delta)) / (2.0 * c_k) * delta
        x = x - a_k * g
        e = objective(x)
        if e < best_e:
            best_e, best_x = e, x.copy()
    return best_x, best_e, objective.history


def optimize(cfg: VqeConfig, depth: int, initial_guesses: Optional[List[np.ndarray]] = None) -> VqeResult:
    """Best of several restarts; restarts run in parallel, each with its own RNG stream.

    Restart 0 starts from all-zero angles (|0...0>), the others from small
    random angles in [-0.1, 0.1]. Extra `initial_guesses` are tried first.
    """
    t = cfg.target
    size = n_parameters(t.n, depth)
    opt = cfg.optimizer
    rngs = spawn_rngs(opt.seed, opt.restarts + len(initial_guesses or []))
    starts: List[np.ndarray] = [np.asarray(g, dtype=float) for g in (initial_guesses or [])]
    for r in range(opt.restarts):
        rng = rngs[len(starts)]
        starts.append(np.zeros(size) if r == 0 else rng.uniform(-0.1, 0.1, size))
    runner = _run_exact if cfg.exact_mode else _run_spsa

    def work(i: int):
        x, e, hist = runner(cfg, depth, starts[i], rngs[i])
        logging.info("vqe depth=%d restart=%d energy=%.10f", depth, i, e)
        return i, x, e, hist

    with ThreadPoolExecutor(max_workers=opt.threads) as pool:
        results = list(pool.map(work, range(len(starts))))
    i, x, e, hist = min(results, key=lambda r: (r[2], r[0]))
    return VqeResult(
        energy=float(e),
        params=x,
        depth=depth,
        history=list(hist),
        exact_energy=t.exact_energy,
        restart=i,
        evaluations=sum(len(r[3]) for r in results),
    )


def depth_sweep(cfg: VqeConfig, depths: Sequence[int]) -> List[VqeResult]:
    """Optimize at increasing depth, warm-starting each depth from the previous optimum.

    A leading all-zero RY layer leaves |0...0> untouched and the first CNOT
    chain acts trivially on it, so [0]*n + previous angles reproduces the
    shallower state exactly and the best energy cannot increase with depth.
    """
    results: List[VqeResult] = []
    n = cfg.target.n
    previous: Optional[VqeResult] = None
    for depth in sorted(depths):
        guesses = []
        if previous is not None:
            pad = np.zeros(n * (depth - previous.depth))
            guesses.append(np.concatenate([pad, previous.params]))
        result = optimize(cfg, depth, initial_guesses=guesses)
        if previous is not None and result.energy > previous.energy and cfg.exact_mode:
            result = VqeResult(
                energy=previous.energy,
                params=guesses[0],
                depth=depth,
                history=result.history,
                exact_energy=result.exact_energy,
                restart=-1,
                evaluations=result.evaluations,
            )
        results.append(result)
        previous = result
    return results
