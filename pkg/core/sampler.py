"""Langevin baselines, basin diagnostics and the hybrid quantum-global-move sampler."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Union

import numpy as np

from core.errors import NumericError
from core.grid import Grid
from core.potentials import (
    Potential,
    PotentialKind,
    Temperature,
    as_temperature,
    boltzmann_density,
    eval_force,
)
from core.spectral import EffectiveKind, build_effective_hamiltonian, diagonalize
from core.utils import spawn_rngs
from quantum.qpe import SpectralQpeSampler
from quantum.simulator import StateVector, load_amplitudes, sample_indices

ArrayLike = Union[float, np.ndarray]
CORE_FRACTION = 0.5


def default_dt(p: Potential) -> float:
    scale = p.h if p.kind is PotentialKind.DOUBLE_WELL else 1.0
    return 1e-3 * min(1.0, 1.0 / scale)


def _log_proposal(x_to: np.ndarray, x_from: np.ndarray, p: Potential, T: float, dt: float) -> np.ndarray:
    mean = x_from + eval_force(p, x_from) * dt
    return -((x_to - mean) ** 2) / (4.0 * T * dt)


def mala_step(x: np.ndarray, p: Potential, T: float, dt: float, rng: np.random.Generator):
    """Metropolis-adjusted Langevin step; returns (x', accepted mask)."""
    if T <= 0:
        raise ValueError("Metropolis correction needs T > 0")
    x = np.asarray(x, dtype=float)
    proposal = x + eval_force(p, x) * dt + np.sqrt(2.0 * T * dt) * rng.standard_normal(x.shape)
    log_alpha = (
        -(p.value(proposal) - p.value(x)) / T
        + _log_proposal(x, proposal, p, T, dt)
        - _log_proposal(proposal, x, p, T, dt)
    )
    accepted = np.log(rng.random(x.shape)) < log_alpha
    return np.where(accepted, proposal, x), accepted


def langevin_step(
    x: ArrayLike,
    p: Potential,
    T: Union[float, Temperature],
    dt: float,
    rng: np.random.Generator,
    mh_correct: bool = False,
) -> ArrayLike:
    """Euler-Maruyama step x + f(x) dt + sqrt(2 T dt) xi; works on arrays of chains."""
    temp = float(T.T) if isinstance(T, Temperature) else float(T)
    if dt <= 0:
        raise ValueError(f"dt must be positive, got {dt}")
    if mh_correct:
        out, _ = mala_step(x, p, temp, dt, rng)
    else:
        x = np.asarray(x, dtype=float)
        out = x + eval_force(p, x) * dt + np.sqrt(2.0 * temp * dt) * rng.standard_normal(x.shape)
    return float(out) if np.ndim(out) == 0 else out


def basin_of(x: ArrayLike, p: Potential):
    """Index of the minimum reached by descent; a point on a maximum joins the lower basin."""
    _, maxima = p.stationary_points()
    labels = np.searchsorted(maxima, np.asarray(x, dtype=float), side="left")
    return int(labels) if np.ndim(labels) == 0 else labels.astype(np.int64)


def basin_minima(p: Potential) -> np.ndarray:
    minima, _ = p.stationary_points()
    return minima


@dataclass
class HopEvent:
    step: int
    from_basin: int
    to_basin: int
    chain: int = 0
    source: str = "local"


class HopCounter:
    """Counts basin changes only when a chain reaches the core of another basin.

    The core of a minimum extends CORE_FRACTION of the way to the neighbouring
    maxima, so recrossings of the barrier top are not counted as hops.
    """

    def __init__(self, p: Potential, x_init: np.ndarray):
        minima, maxima = p.stationary_points()
        edges = np.concatenate([[-np.inf], maxima, [np.inf]])
        core_lo, core_hi = [], []
        for lo, hi in zip(edges[:-1], edges[1:]):
            inside = minima[(minima > lo) & (minima < hi)]
            if inside.size == 0:
                core_lo.append(lo)
                core_hi.append(hi)
                continue
            m = inside[0]
            core_lo.append(m - CORE_FRACTION * (m - lo) if np.isfinite(lo) else -np.inf)
            core_hi.append(m + CORE_FRACTION * (hi - m) if np.isfinite(hi) else np.inf)
        self.core_lo = np.array(core_lo)
        self.core_hi = np.array(core_hi)
        self.p = p
        self.committed = np.atleast_1d(basin_of(np.atleast_1d(x_init), p)).copy()
        self.events: List[HopEvent] = []

    def core_label(self, x: np.ndarray) -> np.ndarray:
        """Basin index where x sits inside a core, -1 elsewhere."""
        x = np.atleast_1d(x)
        inside = (x[:, None] >= self.core_lo[None, :]) & (x[:, None] <= self.core_hi[None, :])
        return np.where(inside.any(axis=1), inside.argmax(axis=1), -1)

    def update(self, x: np.ndarray, step: int, source: str = "local") -> int:
        label = self.core_label(x)
        moved = (label >= 0) & (label != self.committed)
        for c in np.nonzero(moved)[0]:
            self.events.append(HopEvent(step, int(self.committed[c]), int(label[c]), int(c), source))
        self.committed = np.where(moved, label, self.committed)
        return int(moved.sum())


@dataclass
class LangevinConfig:
    potential: Potential
    T: float
    dt: Optional[float] = None
    n_steps: int = 100_000
    x_init: Optional[float] = None
    seed: Optional[int] = 0
    mh_correct: bool = False
    chains: int = 1
    record_every: int = 1

    def __post_init__(self):
        as_temperature(self.T)
        if self.dt is None:
            self.dt = default_dt(self.potential)
        if self.dt <= 0:
            raise ValueError(f"dt must be positive, got {self.dt}")
        if self.n_steps < 1 or self.chains < 1 or self.record_every < 1:
            raise ValueError("n_steps, chains and record_every must be >= 1")
        if self.x_init is None:
            minima = basin_minima(self.potential)
            self.x_init = float(minima[0]) if minima.size else 0.0


@dataclass
class ChainRecord:
    """Time-ordered samples, shape (n_records, chains), with basin labels and hop events."""

    samples: np.ndarray
    labels: np.ndarray
    hops: List[HopEvent]
    dt: float
    record_every: int
    n_steps: int
    accepted: int = 0
    proposed: int = 0
    global_moves: int = 0
    global_hops: int = 0

    @property
    def chains(self) -> int:
        return int(self.samples.shape[1])

    @property
    def hop_count(self) -> int:
        return len(self.hops)

    @property
    def acceptance_rate(self) -> Optional[float]:
        return self.accepted / self.proposed if self.proposed else None

    @property
    def global_hop_frequency(self) -> Optional[float]:
        return self.global_hops / self.global_moves if self.global_moves else None

    def local_hop_rate(self) -> float:
        """Local (Langevin) hops per unit time per chain."""
        local = sum(1 for h in self.hops if h.source == "local")
        return local / (self.n_steps * self.dt * self.chains)

    def occupancies(self, n_basins: int = 2) -> np.ndarray:
        counts = np.bincount(self.labels.reshape(-1), minlength=n_basins).astype(float)
        return counts / counts.sum()


def run_langevin(cfg: LangevinConfig) -> ChainRecord:
    """Plain (or Metropolis-adjusted) Langevin over `chains` independent chains."""
    p, T, dt = cfg.potential, float(cfg.T), float(cfg.dt)
    rng = np.random.default_rng(cfg.seed)
    x = np.full(cfg.chains, float(cfg.x_init))
    counter = HopCounter(p, x)
    records = [x.copy()]
    accepted = 0
    for step in range(1, cfg.n_steps + 1):
        if cfg.mh_correct:
            x, acc = mala_step(x, p, T, dt, rng)
            accepted += int(acc.sum())
        else:
            x = x + eval_force(p, x) * dt + np.sqrt(2.0 * T * dt) * rng.standard_normal(x.shape)
        counter.update(x, step)
        if step % cfg.record_every == 0:
            records.append(x.copy())
    if not np.all(np.isfinite(x)):
        raise NumericError("Langevin chain diverged; reduce dt")
    samples = np.array(records)
    logging.info("langevin: %d steps x %d chains, %d hops", cfg.n_steps, cfg.chains, len(counter.events))
    return ChainRecord(
        samples=samples,
        labels=np.asarray(basin_of(samples, p)).reshape(samples.shape),
        hops=counter.events,
        dt=dt,
        record_every=cfg.record_every,
        n_steps=cfg.n_steps,
        accepted=accepted,
        proposed=cfg.n_steps * cfg.chains if cfg.mh_correct else 0,
    )


def gaussian_state(g: Grid, center: float, T: Union[float, Temperature]) -> StateVector:
    """Amplitudes exp(-(x - center)^2 / 4T): the density has standard deviation sqrt(T)."""
    temp = as_temperature(T)
    if not g.contains(center):
        raise ValueError(f"center {center} outside the box [{-g.L / 2}, {g.L / 2}]")
    amps = np.exp(-((g.positions - center) ** 2) / (4.0 * temp.T))
    return load_amplitudes(amps)


@dataclass
class GlobalMoveSettings:
    grid: Grid
    n_eps: int = 10
    t: float = 1.0
    shots_per_move: int = 1

    def __post_init__(self):
        if self.n_eps < 1:
            raise ValueError(f"n_eps must be >= 1, got {self.n_eps}")
        if self.t <= 0:
            raise ValueError(f"t must be positive, got {self.t}")
        if self.shots_per_move != 1:
            raise ValueError("a global move reads a single configuration")


@dataclass
class HybridConfig:
    potential: Potential
    T: float
    global_move: GlobalMoveSettings
    local_steps: int = 1000
    epochs: int = 100
    dt: Optional[float] = None
    x_init: Optional[float] = None
    seed: Optional[int] = 0
    mh_correct: bool = False
    record_every: int = 1

    def __post_init__(self):
        as_temperature(self.T)
        if self.dt is None:
            self.dt = default_dt(self.potential)
        if self.local_steps < 0 or self.epochs < 1:
            raise ValueError("local_steps must be >= 0 and epochs >= 1")
        if self.x_init is None:
            minima = basin_minima(self.potential)
            self.x_init = float(minima[0]) if minima.size else 0.0


class GlobalMover:
    """Quantum global update on the effective Hamiltonian of one (potential, T, grid).

    The Hamiltonian, its eigenbasis and the counting-register window are fixed
    for a chain, so they are built once and reused by every move.
    """

    def __init__(self, p: Potential, T: Union[float, Temperature], settings: GlobalMoveSettings):
        self.p = p
        self.T = as_temperature(T)
        self.settings = settings
        H = build_effective_hamiltonian(p, self.T, settings.grid, EffectiveKind.PLAIN)
        self.spectrum = diagonalize(H)
        self.sampler = SpectralQpeSampler(self.spectrum, settings.n_eps, settings.t)

    def move(self, x: float, rng: np.random.Generator) -> float:
        g = self.settings.grid
        center = float(np.clip(x, -0.5 * g.L, 0.5 * g.L))
        psi = gaussian_state(g, center, self.T)
        _, index = self.sampler.sample_one(psi.amps, rng)
        return g.position_of_index(index)


def global_move(
    x: float,
    p: Potential,
    T: Union[float, Temperature],
    cfg: HybridConfig,
    rng: np.random.Generator,
    mover: Optional[GlobalMover] = None,
) -> float:
    """Gaussian at x, one QPE shot, return the position of the collapsed readout."""
    mover = mover or GlobalMover(p, T, cfg.global_move)
    return mover.move(x, rng)


def hybrid_sample(cfg: HybridConfig) -> ChainRecord:
    """Alternate `local_steps` Langevin steps with one quantum global move per epoch."""
    p, T, dt = cfg.potential, float(cfg.T), float(cfg.dt)
    local_rng, global_rng = spawn_rngs(cfg.seed, 2)
    mover = GlobalMover(p, T, cfg.global_move)
    x = np.array([float(cfg.x_init)])
    counter = HopCounter(p, x)
    records = [x.copy()]
    step, accepted, global_hops = 0, 0, 0
    for epoch in range(cfg.epochs):
        for _ in range(cfg.local_steps):
            step += 1
            if cfg.mh_correct:
                x, acc = mala_step(x, p, T, dt, local_rng)
                accepted += int(acc.sum())
            else:
                x = x + eval_force(p, x) * dt + np.sqrt(2.0 * T * dt) * local_rng.standard_normal(1)
            counter.update(x, step)
            if step % cfg.record_every == 0:
                records.append(x.copy())
        before = basin_of(float(x[0]), p)
        x = np.array([mover.move(float(x[0]), global_rng)])
        after = basin_of(float(x[0]), p)
        if after != before:
            global_hops += 1
            counter.events.append(HopEvent(step, before, after, 0, "global"))
        counter.committed = np.array([after])
        logging.debug("epoch %d: global move %d -> %d", epoch, before, after)
    samples = np.array(records)
    logging.info(
        "hybrid: %d epochs, %d global hops, %d local hops",
        cfg.epochs,
        global_hops,
        sum(1 for h in counter.events if h.source == "local"),
    )
    return ChainRecord(
        samples=samples,
        labels=np.asarray(basin_of(samples, p)).reshape(samples.shape),
        hops=counter.events,
        dt=dt,
        record_every=cfg.record_every,
        n_steps=step,
        accepted=accepted,
        proposed=step if cfg.mh_correct else 0,
        global_moves=cfg.epochs,
        global_hops=global_hops,
    )


def integrated_autocorrelation_time(series: np.ndarray, c: float = 5.0) -> float:
    """Integrated autocorrelation time with Sokal's self-consistent window.

    A constant series carries no decorrelation within the window; its length
    is returned as a lower bound.
    """
    y = np.asarray(series, dtype=float)
    n = y.size
    y = y - y.mean()
    var = float(y @ y) / n if n else 0.0
    if n < 2 or var == 0.0:
        return float(n)
    size = 1 << (2 * n - 1).bit_length()
    f = np.fft.rfft(y, n=size)
    acf = np.fft.irfft(f * np.conj(f), n=size)[:n] / (var * n)
    taus = 2.0 * np.cumsum(acf) - 1.0
    window = np.arange(n) >= c * taus
    m = int(np.argmax(window)) if window.any() else n - 1
    return float(max(taus[m], 1.0))


@dataclass
class ChainReport:
    histogram: np.ndarray
    density: np.ndarray
    tv_distance: float
    hops: int
    occupancies: List[float]
    autocorr_steps: float
    global_hop_frequency: Optional[float] = None
    local_hop_rate: Optional[float] = None
    acceptance_rate: Optional[float] = None
    extras: Dict[str, Any] = field(default_factory=dict)

    def to_dict(self) -> Dict[str, Any]:
        data = {
            "tv_distance": self.tv_distance,
            "hops": self.hops,
            "occupancies": self.occupancies,
            "autocorr": self.autocorr_steps,
            "global_hop_frequency": self.global_hop_frequency,
            "local_hop_rate": self.local_hop_rate,
            "acceptance_rate": self.acceptance_rate,
        }
        data.update(self.extras)
        return data


def grid_histogram(samples: np.ndarray, g: Grid) -> np.ndarray:
    """Normalized counts in bins centered on the grid points."""
    idx = g.nearest_index(np.asarray(samples).reshape(-1))
    counts = np.bincount(idx, minlength=g.size).astype(float)
    return counts / counts.sum()


def total_variation(p: np.ndarray, q: np.ndarray) -> float:
    return float(0.5 * np.abs(np.asarray(p) - np.asarray(q)).sum())


def chain_statistics(
    c: ChainRecord,
    p: Potential,
    T: Union[float, Temperature],
    g: Grid,
    min_samples: int = 1000,
) -> ChainReport:
    """Histogram vs canonical weights, hop count, occupancies and basin-label autocorrelation."""
    total = c.samples.size
    if total < min_samples:
        raise NumericError(f"chain too short for statistics: {total} < {min_samples} samples")
    hist = grid_histogram(c.samples, g)
    density = boltzmann_density(p, T, g)
    n_basins = max(2, int(c.labels.max()) + 1)
    taus = [integrated_autocorrelation_time(c.labels[:, k]) for k in range(c.chains)]
    return ChainReport(
        histogram=hist,
        density=density,
        tv_distance=total_variation(hist, density),
        hops=c.hop_count,
        occupancies=[float(v) for v in c.occupancies(n_basins)],
        autocorr_steps=float(np.mean(taus)) * c.record_every,
        global_hop_frequency=c.global_hop_frequency,
        local_hop_rate=c.local_hop_rate(),
        acceptance_rate=c.acceptance_rate,
    )


def sample_ground_state(
    state: StateVector,
    g: Grid,
    shots: int,
    seed=None,
    energy: Optional[float] = None,
    tolerance: float = 1e-3,
) -> np.ndarray:
    """Independent canonical samples by collapsing |psi_0> in the position basis.

    When the state's energy is supplied it must be within `tolerance` of the
    exact zero ground energy, otherwise the samples are not certified.
    """
    if energy is not None and abs(energy) > tolerance:
        raise NumericError(f"state energy {energy:.3e} is not within {tolerance:.1e} of zero; samples uncertified")
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    return g.positions[sample_indices(state, shots, rng)]
