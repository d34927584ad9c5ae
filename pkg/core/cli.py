"""Command-line entry point: spectrum, rate, vqe, qpe-hop, sample, current.

Every command validates its configuration before touching the output
directory, writes CSV series and JSON summaries there, and finishes with a
manifest listing each artifact and its sha256.
Exit codes: 0 success, 2 configuration error, 3 numeric failure.
"""

from __future__ import annotations

import argparse
import logging
import sys
from typing import Any, Callable, Dict, List, Optional, Sequence

import numpy as np

from core.bundles import RunBundle
from core.errors import ConfigError, NumericError
from core.logger import RunLogger
from core.potentials import EffectiveKind, PotentialKind, effective_potential, kramers_rate, susy_potential
from core.runconfig import QPE_MODELS, SAMPLER_MODES, RunConfig, apply_overrides, load_run_config, resolve_seed
from core.sampler import (
    GlobalMoveSettings,
    HybridConfig,
    LangevinConfig,
    basin_minima,
    basin_of,
    chain_statistics,
    gaussian_state,
    hybrid_sample,
    run_langevin,
)
from core.spectral import (
    build_effective_hamiltonian,
    build_ising_hamiltonian,
    build_realspace4_hamiltonian,
    check_edges,
    diagonalize,
    edge_amplitude_ratio,
    fit_log_gap_slope,
    fundamental_gap,
    gap_sweep,
    reaction_current,
)
from quantum.qpe import QpeConfig, default_time, hopping_probability, predicted_hopping_probability, run_qpe
from quantum.simulator import StateVector
from quantum.vqe import OptimizerSettings, VqeConfig, VqeTarget, depth_sweep, optimize

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERIC = 3
N_EIGENFUNCTIONS = 7


def _child_seeds(seed: int, count: int) -> List[int]:
    return [int(s.generate_state(1)[0]) for s in np.random.SeedSequence(seed).spawn(count)]


# ---------- commands ----------


def cmd_spectrum(cfg: RunConfig, bundle: RunBundle, log: RunLogger) -> Dict[str, Any]:
    p, g, T = cfg.build_potential(), cfg.build_grid(), cfg.build_temperature()
    plain = diagonalize(build_effective_hamiltonian(p, T, g, EffectiveKind.PLAIN))
    susy = diagonalize(build_effective_hamiltonian(p, T, g, EffectiveKind.SUPERSYMMETRIC))
    log.log_event("diagonalize", f"dim={g.size} E0={plain.eigenvalues[0]:.6e}")
    check_edges(plain.ground_state)

    k = min(N_EIGENFUNCTIONS, g.size)
    x = g.positions
    columns = [x, p.value(x), effective_potential(p, T, x), susy_potential(p, T, x)]
    columns.extend(plain.eigenvectors[:, i].real for i in range(k))
    header = ["x", "v", "V", "V_S"] + [f"psi_{i}" for i in range(k)]
    bundle.write_csv("spectrum.csv", header, zip(*columns))

    summary: Dict[str, Any] = {
        "eigenvalues": plain.eigenvalues[:k],
        "gap": fundamental_gap(plain),
        "E0_susy": float(susy.eigenvalues[0]),
        "kramers_rate": kramers_rate(p, T) if p.kind is PotentialKind.DOUBLE_WELL else None,
        "edge_ratio": edge_amplitude_ratio(plain.ground_state),
    }
    if cfg.temperature.sweep:
        points = gap_sweep(p, cfg.temperature.sweep, g, threads=cfg.threads)
        for pt in points:
            log.log_event("sweep", f"T={pt.T:.6g} gap={pt.gap:.6e}")
        bundle.write_csv(
            "gaps.csv",
            ["T", "inv_T", "gap", "E2_minus_E1", "E0_susy", "kramers_rate"],
            (
                [pt.T, 1.0 / pt.T, pt.gap, pt.excited_gap, pt.E0_susy, "" if pt.kramers is None else pt.kramers]
                for pt in points
            ),
        )
        if len(points) > 1:
            summary["log_gap_slope"] = fit_log_gap_slope(points)
    bundle.write_json("spectrum.json", summary)
    return summary


def cmd_rate(cfg: RunConfig, bundle: RunBundle, log: RunLogger) -> Dict[str, Any]:
    p, g, T = cfg.build_potential(), cfg.build_grid(), cfg.build_temperature()
    plain = diagonalize(build_effective_hamiltonian(p, T, g, EffectiveKind.PLAIN))
    susy = diagonalize(build_effective_hamiltonian(p, T, g, EffectiveKind.SUPERSYMMETRIC))
    delta = fundamental_gap(plain)
    e0s = float(susy.eigenvalues[0])
    kramers = kramers_rate(p, T) if p.kind is PotentialKind.DOUBLE_WELL else None
    result = {
        "E0_susy": e0s,
        "delta_H": delta,
        "kramers": kramers,
        "ratio_susy_to_gap": e0s / delta if delta else None,
        "ratio_gap_to_kramers": delta / kramers if kramers else None,
    }
    log.log_event("rate", f"E0_susy={e0s:.6e} delta={delta:.6e}")
    bundle.write_json("rate.json", result)
    return result


def cmd_vqe(cfg: RunConfig, bundle: RunBundle, log: RunLogger) -> Dict[str, Any]:
    p, g, T = cfg.build_potential(), cfg.build_grid(), cfg.build_temperature()
    s = cfg.vqe
    target = VqeTarget.from_potential(p, T, g, EffectiveKind(s.target))
    settings = OptimizerSettings(
        max_iters=s.max_iters, restarts=s.restarts, tolerance=s.tolerance, seed=cfg.seed, threads=cfg.threads
    )
    vcfg = VqeConfig(target, shots=None if s.exact else s.shots, optimizer=settings)

    if s.depths:
        results = depth_sweep(vcfg, s.depths)
        for r in results:
            log.log_event("vqe", f"depth={r.depth} energy={r.energy:.10e}")
        bundle.write_csv(
            "vqe_depths.csv",
            ["depth", "energy", "exact_energy", "relative_error"],
            ([r.depth, r.energy, r.exact_energy, r.relative_error] for r in results),
        )
        best = results[-1]
    else:
        best = optimize(vcfg, s.depth)
        log.log_event("vqe", f"depth={best.depth} energy={best.energy:.10e}")

    history = best.history
    bundle.write_csv(
        "vqe_history.csv",
        ["evaluation", "energy", "best"],
        ([i, e, b] for i, (e, b) in enumerate(zip(history, best.best_history))),
    )
    exact_density = np.abs(diagonalize(build_effective_hamiltonian(p, T, g, EffectiveKind(s.target))).ground_state) ** 2
    bundle.write_csv(
        "vqe_probabilities.csv",
        ["x", "probability", "exact"],
        zip(g.positions, best.probabilities(g.n), exact_density),
    )
    result = best.to_dict()
    result["mode"] = "exact" if vcfg.exact_mode else "shots"
    bundle.write_json("vqe_result.json", result)
    return result


def _qpe_problem(cfg: RunConfig, ns: int):
    """(Hamiltonian, initial state, target indices, default time) for the configured model."""
    q = cfg.qpe
    if q.model == "ising":
        H = build_ising_hamiltonian(ns, q.j, q.gamma)
        bits = q.initial or "0" * ns
        start = int(bits, 2)
        return H, StateVector.basis(ns, start), [start ^ ((1 << ns) - 1)], 1.0
    if q.model == "realspace4":
        H = build_realspace4_hamiltonian(J=q.j)
        bits = q.initial or "00"
        start = int(bits, 2)
        return H, StateVector.basis(2, start), [start ^ 0b11], 1.0
    p, g, T = cfg.build_potential(), cfg.build_grid(q.n), cfg.build_temperature()
    H = build_effective_hamiltonian(p, T, g, EffectiveKind.PLAIN)
    minima = basin_minima(p)
    try:
        center = float(q.initial) if q.initial is not None else float(minima[0]) if minima.size else 0.0
        psi = gaussian_state(g, center, T)
    except ValueError as exc:
        raise ConfigError(f"qpe.initial: {exc}") from exc
    labels = np.asarray(basin_of(g.positions, p))
    targets = np.nonzero(labels != basin_of(center, p))[0].tolist()
    if not targets:
        raise ConfigError("effective model has a single basin; nothing to hop to")
    return H, psi, targets, None


def _qpe_sizes(q) -> List[int]:
    return (q.ns_sweep or [q.ns]) if q.model == "ising" else [q.ns]


def check_qpe_hop(cfg: RunConfig) -> None:
    """Build every model the run will use, so model-level faults surface before output exists."""
    for ns in _qpe_sizes(cfg.qpe):
        _qpe_problem(cfg, ns)


def cmd_qpe_hop(cfg: RunConfig, bundle: RunBundle, log: RunLogger) -> Dict[str, Any]:
    q = cfg.qpe
    sizes = _qpe_sizes(q)
    counts = q.neps_sweep or [q.neps]
    points = [(ns, neps) for ns in sizes for neps in counts]
    if (q.ns, q.neps) not in points:
        points.append((q.ns, q.neps))
    seeds = _child_seeds(cfg.seed, len(points))

    rows, main = [], None
    for (ns, neps), seed in zip(points, seeds):
        H, psi, targets, t_default = _qpe_problem(cfg, ns)
        spectrum = diagonalize(H)
        t = q.t or t_default or default_time(spectrum)
        qcfg = QpeConfig(
            hamiltonian=H,
            n_eps=neps,
            t=t,
            initial=psi,
            shots=q.shots,
            seed=seed,
            backend=q.backend,
            trotter_steps=q.trotter_steps,
            spectrum=spectrum,
        )
        outcome = run_qpe(qcfg)
        hop = hopping_probability(outcome, targets)
        predicted = predicted_hopping_probability(H, psi, targets, neps, t, spectrum)
        log.log_event("qpe", f"model={q.model} ns={ns} neps={neps} hop={hop:.4f} predicted={predicted:.4f}")
        rows.append([ns, neps, t, hop, predicted, outcome.modal_energy()])
        if (ns, neps) == (q.ns, q.neps):
            main = (outcome, hop, predicted, t)

    outcome, hop, predicted, t = main
    bundle.write_csv(
        "qpe_histogram.csv",
        ["phase", "energy", "system", "bits", "count"],
        ([r["phase"], r["energy"], r["system"], r["bits"], r["count"]] for r in outcome.rows()),
    )
    if len(rows) > 1:
        bundle.write_csv("qpe_sweep.csv", ["ns", "neps", "t", "hopping_probability", "predicted", "modal_energy"], rows)
    summary = {
        "model": q.model,
        "initial": q.initial,
        "hopping_probability": hop,
        "predicted_hopping_probability": predicted,
        "modal_energy": outcome.modal_energy(),
        "t": t,
        "shots": outcome.shots,
    }
    bundle.write_json("qpe_summary.json", summary)
    return summary


def cmd_sample(cfg: RunConfig, bundle: RunBundle, log: RunLogger) -> Dict[str, Any]:
    p, g, T = cfg.build_potential(), cfg.build_grid(), cfg.build_temperature()
    s = cfg.sampler
    if s.mode == "hybrid":
        record = hybrid_sample(
            HybridConfig(
                potential=p,
                T=T.T,
                global_move=GlobalMoveSettings(grid=g, n_eps=s.neps, t=s.t),
                local_steps=s.local_steps,
                epochs=s.epochs,
                dt=s.dt,
                seed=cfg.seed,
                mh_correct=s.mh,
                record_every=s.decimate,
            )
        )
    else:
        record = run_langevin(
            LangevinConfig(
                potential=p,
                T=T.T,
                dt=s.dt,
                n_steps=s.steps,
                seed=cfg.seed,
                mh_correct=s.mh,
                chains=s.chains,
                record_every=s.decimate,
            )
        )
    log.log_event("sample", f"mode={s.mode} steps={record.n_steps} hops={record.hop_count}")
    report = chain_statistics(record, p, T, g)

    times = np.arange(record.samples.shape[0]) * record.record_every * record.dt
    bundle.write_csv(
        "trajectory.csv",
        ["record", "time", "chain", "x", "basin"],
        (
            [i, times[i], c, record.samples[i, c], int(record.labels[i, c])]
            for i in range(record.samples.shape[0])
            for c in range(record.chains)
        ),
    )
    bundle.write_csv("histogram.csv", ["x", "histogram", "boltzmann"], zip(g.positions, report.histogram, report.density))
    bundle.write_csv(
        "hops.csv", ["step", "from", "to", "chain", "source"], ([h.step, h.from_basin, h.to_basin, h.chain, h.source] for h in record.hops)
    )
    result = report.to_dict()
    result["mode"] = s.mode
    result["steps"] = record.n_steps
    if p.kind is PotentialKind.DOUBLE_WELL:
        result["kramers_rate"] = kramers_rate(p, T)
    bundle.write_json("report.json", result)
    return result


def cmd_current(cfg: RunConfig, bundle: RunBundle, log: RunLogger) -> Dict[str, Any]:
    p, g, T = cfg.build_potential(), cfg.build_grid(), cfg.build_temperature()
    plain = diagonalize(build_effective_hamiltonian(p, T, g, EffectiveKind.PLAIN))
    susy = diagonalize(build_effective_hamiltonian(p, T, g, EffectiveKind.SUPERSYMMETRIC))
    psi0, psi0s = plain.ground_state.real, susy.ground_state.real
    j = reaction_current(psi0, psi0s)
    bundle.write_csv("current.csv", ["x", "psi_0", "psi_0_susy", "j"], zip(g.positions, psi0, psi0s, j))
    _, maxima = p.stationary_points()
    peak = int(np.argmax(np.abs(j)))
    result = {
        "argmax_x": g.positions[peak],
        "barrier_x": maxima,
        "E0_susy": float(susy.eigenvalues[0]),
    }
    log.log_event("current", f"peak at x={g.positions[peak]:.4f}")
    bundle.write_json("current.json", result)
    return result


COMMANDS: Dict[str, Callable[[RunConfig, RunBundle, RunLogger], Dict[str, Any]]] = {
    "spectrum": cmd_spectrum,
    "rate": cmd_rate,
    "vqe": cmd_vqe,
    "qpe-hop": cmd_qpe_hop,
    "sample": cmd_sample,
    "current": cmd_current,
}

PRECHECKS: Dict[str, Callable[[RunConfig], None]] = {
    "qpe-hop": check_qpe_hop,
}


# ---------- argument parsing ----------


def _common(sub: argparse.ArgumentParser) -> None:
    sub.add_argument("--config", help="JSON run configuration.")
    sub.add_argument("--out", dest="out", default=argparse.SUPPRESS, help="Output directory.")
    sub.add_argument("--seed", dest="seed", type=int, default=argparse.SUPPRESS, help="Master seed.")
    sub.add_argument("--threads", dest="threads", type=int, default=argparse.SUPPRESS, help="Worker threads.")
    sub.add_argument("--verbose", action="store_true", help="Debug logging.")
    sub.add_argument("--T", dest="temperature.T", type=float, default=argparse.SUPPRESS, help="Temperature.")
    sub.add_argument("--n", dest="grid.n_qubits", type=int, default=argparse.SUPPRESS, help="Grid qubits.")
    sub.add_argument("--box-length", dest="grid.box_length", type=float, default=argparse.SUPPRESS)
    sub.add_argument("--h", dest="potential.h", type=float, default=argparse.SUPPRESS, help="Barrier parameter.")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="rsq", description="Reverse stochastic quantization toolkit.")
    subs = parser.add_subparsers(dest="command", required=True)

    sp = subs.add_parser("spectrum", help="Eigenpairs, gap sweep and Kramers overlay.")
    _common(sp)
    sp.add_argument("--sweep", dest="temperature.sweep", type=float, nargs="+", default=argparse.SUPPRESS)

    _common(subs.add_parser("rate", help="E0 of the SUSY partner, gap and Kramers rate."))
    _common(subs.add_parser("current", help="Reaction current from the two ground states."))

    vp = subs.add_parser("vqe", help="Variational ground state.")
    _common(vp)
    vp.add_argument("--depth", dest="vqe.depth", type=int, default=argparse.SUPPRESS)
    vp.add_argument("--depths", dest="vqe.depths", type=int, nargs="+", default=argparse.SUPPRESS)
    mode = vp.add_mutually_exclusive_group()
    mode.add_argument("--shots", dest="vqe.shots", type=int, default=argparse.SUPPRESS)
    mode.add_argument("--exact", dest="vqe.exact", action="store_true", default=argparse.SUPPRESS)
    vp.add_argument("--restarts", dest="vqe.restarts", type=int, default=argparse.SUPPRESS)
    vp.add_argument("--target", dest="vqe.target", choices=[k.value for k in EffectiveKind], default=argparse.SUPPRESS)

    qp = subs.add_parser("qpe-hop", help="Minima hopping by phase estimation.")
    _common(qp)
    qp.add_argument("--model", dest="qpe.model", choices=QPE_MODELS, default=argparse.SUPPRESS)
    qp.add_argument("--ns", dest="qpe.ns", type=int, default=argparse.SUPPRESS)
    qp.add_argument("--j", dest="qpe.j", type=float, default=argparse.SUPPRESS)
    qp.add_argument("--gamma", dest="qpe.gamma", type=float, default=argparse.SUPPRESS)
    qp.add_argument("--neps", dest="qpe.neps", type=int, default=argparse.SUPPRESS)
    qp.add_argument("--shots", dest="qpe.shots", type=int, default=argparse.SUPPRESS)
    qp.add_argument("--t", dest="qpe.t", type=float, default=argparse.SUPPRESS)
    qp.add_argument("--initial", dest="qpe.initial", default=argparse.SUPPRESS)
    qp.add_argument("--backend", dest="qpe.backend", choices=["statevector", "spectral", "trotter"], default=argparse.SUPPRESS)

    smp = subs.add_parser("sample", help="Langevin or hybrid sampling.")
    _common(smp)
    smp.add_argument("--mode", dest="sampler.mode", choices=SAMPLER_MODES, default=argparse.SUPPRESS)
    smp.add_argument("--dt", dest="sampler.dt", type=float, default=argparse.SUPPRESS)
    smp.add_argument("--steps", dest="sampler.steps", type=int, default=argparse.SUPPRESS)
    smp.add_argument("--epochs", dest="sampler.epochs", type=int, default=argparse.SUPPRESS)
    smp.add_argument("--local-steps", dest="sampler.local_steps", type=int, default=argparse.SUPPRESS)
    smp.add_argument("--neps", dest="sampler.neps", type=int, default=argparse.SUPPRESS)
    smp.add_argument("--chains", dest="sampler.chains", type=int, default=argparse.SUPPRESS)
    smp.add_argument("--mh", dest="sampler.mh", action="store_true", default=argparse.SUPPRESS)
    return parser


def resolve_config(args: argparse.Namespace, environ: Optional[Dict[str, str]] = None) -> RunConfig:
    """Config file, then flags, then the seed environment variable; validated for the command."""
    cfg = load_run_config(args.config)
    skip = {"command", "config", "verbose"}
    overrides = {k: v for k, v in vars(args).items() if k not in skip}
    if overrides.get("vqe.shots") is not None:
        overrides["vqe.exact"] = False
    apply_overrides(cfg, overrides)
    resolve_seed(cfg, environ)
    cfg.validate(args.command)
    return cfg


def run(command: str, cfg: RunConfig) -> Dict[str, Any]:
    """Execute one validated command into `cfg.out`."""
    precheck = PRECHECKS.get(command)
    if precheck is not None:
        precheck(cfg)
    bundle = RunBundle(cfg.out)
    with RunLogger(bundle.out_dir) as log:
        log.log_event("config", f"command={command} seed={cfg.seed}")
        result = COMMANDS[command](cfg, bundle, log)
        log.log_event("done", f"{len(bundle.artifacts)} artifacts")
    for path in (log.log_file, log.jsonl_file):
        if path.exists():
            bundle.add(path)
    bundle.write_manifest(command, cfg.to_dict(), cfg.seed)
    return result


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.INFO,
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        cfg = resolve_config(args)
        run(args.command, cfg)
    except ConfigError as exc:
        logging.error("config error: %s", exc)
        return EXIT_CONFIG
    except (NumericError, np.linalg.LinAlgError) as exc:
        logging.error("numeric failure: %s", exc)
        return EXIT_NUMERIC
    except ValueError as exc:
        logging.error("invalid parameter: %s", exc)
        return EXIT_CONFIG
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
