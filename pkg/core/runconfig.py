"""JSON run configuration: one dataclass per section, strict key checking.

Precedence when resolving a run: config file < command-line flags < the
seed environment variable.
"""

from __future__ import annotations

import json
import os
import typing
from dataclasses import asdict, dataclass, field, fields, is_dataclass
from pathlib import Path
from typing import Any, Dict, List, Optional

from config import DEFAULT_SEED, OUTPUT_PATH, SEED_ENV_VAR
from core.errors import ConfigError
from core.grid import Grid
from core.potentials import EffectiveKind, Potential, Temperature

QPE_MODELS = ("ising", "realspace4", "effective")
SAMPLER_MODES = ("langevin", "hybrid")


@dataclass
class PotentialSection:
    kind: str = "double_well"
    h: float = 1.0
    x0: float = 1.0
    k: float = 1.0
    coeffs: List[float] = field(default_factory=list)


@dataclass
class GridSection:
    n_qubits: int = 7
    box_length: float = 4.0


@dataclass
class TemperatureSection:
    T: float = 0.2
    sweep: List[float] = field(default_factory=list)


@dataclass
class VqeSection:
    depth: int = 4
    depths: List[int] = field(default_factory=list)
    shots: Optional[int] = None
    exact: bool = True
    restarts: int = 8
    max_iters: int = 6000
    tolerance: float = 1e-10
    target: str = "susy"


@dataclass
class QpeSection:
    model: str = "ising"
    ns: int = 2
    n: Optional[int] = None
    j: float = 1.0
    gamma: float = 0.1
    neps: int = 10
    neps_sweep: List[int] = field(default_factory=list)
    ns_sweep: List[int] = field(default_factory=list)
    shots: int = 4096
    t: Optional[float] = None
    initial: Optional[str] = None
    backend: str = "statevector"
    trotter_steps: int = 4


@dataclass
class SamplerSection:
    mode: str = "langevin"
    dt: Optional[float] = None
    steps: int = 100_000
    epochs: int = 100
    local_steps: int = 1000
    neps: int = 10
    t: float = 1.0
    mh: bool = False
    chains: int = 1
    decimate: int = 100


@dataclass
class RunConfig:
    potential: PotentialSection = field(default_factory=PotentialSection)
    grid: GridSection = field(default_factory=GridSection)
    temperature: TemperatureSection = field(default_factory=TemperatureSection)
    vqe: VqeSection = field(default_factory=VqeSection)
    qpe: QpeSection = field(default_factory=QpeSection)
    sampler: SamplerSection = field(default_factory=SamplerSection)
    seed: Optional[int] = None
    out: str = OUTPUT_PATH
    threads: Optional[int] = None

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "RunConfig":
        return _build(cls, data, "config")

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)

    # ---------- domain objects ----------

    def build_potential(self) -> Potential:
        try:
            return Potential.from_dict(asdict(self.potential))
        except (ValueError, KeyError) as exc:
            raise ConfigError(f"potential: {exc}") from exc

    def build_grid(self, n_qubits: Optional[int] = None) -> Grid:
        try:
            return Grid(int(n_qubits or self.grid.n_qubits), float(self.grid.box_length))
        except ValueError as exc:
            raise ConfigError(f"grid: {exc}") from exc

    def build_temperature(self, T: Optional[float] = None) -> Temperature:
        try:
            return Temperature(float(self.temperature.T if T is None else T))
        except ValueError as exc:
            raise ConfigError(f"temperature: {exc}") from exc

    def validate(self, command: str) -> None:
        """Range checks for the sections `command` reads; raises ConfigError before any compute."""
        if self.threads is not None and self.threads < 1:
            raise ConfigError(f"threads must be >= 1, got {self.threads}")
        self.build_temperature()
        for T in self.temperature.sweep:
            self.build_temperature(T)
        needs_classical = command in ("spectrum", "rate", "vqe", "sample", "current") or (
            command == "qpe-hop" and self.qpe.model == "effective"
        )
        if needs_classical:
            self.build_potential()
            self.build_grid(self.qpe.n if command == "qpe-hop" else None)
        if command == "vqe":
            _validate_vqe(self.vqe)
        elif command == "qpe-hop":
            _validate_qpe(self.qpe)
        elif command == "sample":
            _validate_sampler(self.sampler)


def _validate_vqe(s: VqeSection) -> None:
    try:
        EffectiveKind(s.target)
    except ValueError as exc:
        raise ConfigError(f"vqe.target: {exc}") from exc
    if s.depth < 0 or any(d < 0 for d in s.depths):
        raise ConfigError("vqe depths must be >= 0")
    if not s.exact and (s.shots is None or s.shots < 1):
        raise ConfigError("vqe shot mode needs shots >= 1")
    if s.restarts < 1 or s.max_iters < 1:
        raise ConfigError("vqe.restarts and vqe.max_iters must be >= 1")


def _validate_qpe(s: QpeSection) -> None:
    if s.model not in QPE_MODELS:
        raise ConfigError(f"qpe.model must be one of {QPE_MODELS}, got {s.model!r}")
    if s.neps < 1 or any(v < 1 for v in s.neps_sweep):
        raise ConfigError("qpe counting qubits must be >= 1")
    if s.ns < 1 or any(v < 1 for v in s.ns_sweep):
        raise ConfigError("qpe.ns must be >= 1")
    if s.shots < 1:
        raise ConfigError(f"qpe.shots must be >= 1, got {s.shots}")
    if s.t is not None and s.t <= 0:
        raise ConfigError(f"qpe.t must be positive, got {s.t}")
    if s.backend == "trotter" and s.model != "ising":
        raise ConfigError("the trotter backend is available for the ising model only")
    if s.initial is not None and s.model != "effective":
        if set(s.initial) - {"0", "1"}:
            raise ConfigError(f"qpe.initial must be a bitstring, got {s.initial!r}")
        widths = set(s.ns_sweep or [s.ns]) | {s.ns} if s.model == "ising" else {2}
        if widths != {len(s.initial)}:
            raise ConfigError(f"qpe.initial {s.initial!r} does not fit a register of {sorted(widths)} qubits")


def _validate_sampler(s: SamplerSection) -> None:
    if s.mode not in SAMPLER_MODES:
        raise ConfigError(f"sampler.mode must be one of {SAMPLER_MODES}, got {s.mode!r}")
    if s.dt is not None and s.dt <= 0:
        raise ConfigError(f"sampler.dt must be positive, got {s.dt}")
    if min(s.steps, s.epochs, s.neps, s.chains, s.decimate) < 1 or s.local_steps < 0:
        raise ConfigError("sampler step counts must be positive")
    if s.t <= 0:
        raise ConfigError(f"sampler.t must be positive, got {s.t}")


def _check_value(value: Any, hint: Any, where: str) -> Any:
    origin = typing.get_origin(hint)
    args = typing.get_args(hint)
    if origin is typing.Union:
        if value is None and type(None) in args:
            return None
        inner = [a for a in args if a is not type(None)]
        return _check_value(value, inner[0], where)
    if origin in (list, List):
        if not isinstance(value, list):
            raise ConfigError(f"{where}: expected a list, got {type(value).__name__}")
        return [_check_value(v, args[0], f"{where}[{i}]") for i, v in enumerate(value)]
    if hint is bool:
        if not isinstance(value, bool):
            raise ConfigError(f"{where}: expected true/false, got {value!r}")
        return value
    if hint is int:
        if isinstance(value, bool) or not isinstance(value, int):
            raise ConfigError(f"{where}: expected an integer, got {value!r}")
        return value
    if hint is float:
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ConfigError(f"{where}: expected a number, got {value!r}")
        return float(value)
    if hint is str:
        if not isinstance(value, str):
            raise ConfigError(f"{where}: expected a string, got {value!r}")
        return value
    if is_dataclass(hint):
        return _build(hint, value, where)
    return value


def _build(cls, data: Any, where: str):
    if not isinstance(data, dict):
        raise ConfigError(f"{where}: expected an object, got {type(data).__name__}")
    hints = typing.get_type_hints(cls)
    known = {f.name for f in fields(cls)}
    unknown = sorted(set(data) - known)
    if unknown:
        raise ConfigError(f"{where}: unknown key(s) {', '.join(unknown)}")
    kwargs = {name: _check_value(value, hints[name], f"{where}.{name}") for name, value in data.items()}
    return cls(**kwargs)


def load_run_config(path: Optional[str | Path]) -> RunConfig:
    """Parse a JSON config file; no path means all defaults."""
    if path is None:
        return RunConfig()
    path = Path(path)
    try:
        data = json.loads(path.read_text(encoding="utf-8"))
    except FileNotFoundError as exc:
        raise ConfigError(f"config file not found: {path}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"malformed JSON in {path}: {exc}") from exc
    return RunConfig.from_dict(data)


def apply_overrides(cfg: RunConfig, overrides: Dict[str, Any]) -> RunConfig:
    """Apply dotted overrides such as {"vqe.depth": 3, "seed": 7}; values are type-checked."""
    for key, value in overrides.items():
        parts = key.split(".")
        target = cfg
        for part in parts[:-1]:
            if not hasattr(target, part):
                raise ConfigError(f"unknown config section {part!r}")
            target = getattr(target, part)
        name = parts[-1]
        hints = typing.get_type_hints(type(target))
        if name not in hints:
            raise ConfigError(f"unknown config key {key!r}")
        setattr(target, name, _check_value(value, hints[name], key))
    return cfg


def resolve_seed(cfg: RunConfig, environ: Optional[Dict[str, str]] = None) -> int:
    """Seed from the environment variable, else the config, else the package default."""
    env = os.environ if environ is None else environ
    raw = env.get(SEED_ENV_VAR)
    if raw is not None and raw.strip():
        try:
            cfg.seed = int(raw)
        except ValueError as exc:
            raise ConfigError(f"{SEED_ENV_VAR} must be an integer, got {raw!r}") from exc
    if cfg.seed is None:
        cfg.seed = DEFAULT_SEED
    return cfg.seed
