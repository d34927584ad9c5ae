"""Acceptance runner: one scenario per acceptance criterion, reports under test_reports/.

Run with `python -m tests.runner [--only name ...]`.
"""

from __future__ import annotations

import argparse
import json
import logging
import time
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Callable, Dict, List, Optional

import numpy as np
from scipy.stats import spearmanr

from core.grid import Grid
from core.potentials import EffectiveKind, Potential, boltzmann_density, kramers_rate
from core.sampler import (
    GlobalMoveSettings,
    HybridConfig,
    LangevinConfig,
    hybrid_sample,
    integrated_autocorrelation_time,
    run_langevin,
)
from core.spectral import (
    build_effective_hamiltonian,
    build_ising_hamiltonian,
    build_kinetic,
    build_realspace4_hamiltonian,
    diagonalize,
    fit_log_gap_slope,
    fundamental_gap,
    gap_sweep,
)
from quantum.qpe import QpeConfig, hopping_probability, predicted_hopping_probability, run_qpe
from quantum.simulator import StateVector
from quantum.vqe import OptimizerSettings, VqeConfig, VqeTarget, depth_sweep

SEED = 1234


@dataclass
class Scenario:
    name: str
    run: Callable[[], Dict[str, Any]]
    timeout: float = 20.0


class AcceptanceRunner:
    def __init__(self, seed: int = SEED, report_root: str = "test_reports", progress: Optional[Callable[[str], None]] = None):
        self.seed = seed
        self.report_root = Path(report_root)
        self.report_root.mkdir(exist_ok=True)
        self.progress = progress or logging.info

    def _emit(self, msg: str):
        try:
            self.progress(msg)
        except Exception:
            pass

    # ---------- Scenarios ----------

    def _scenario_stationary_density(self) -> Dict[str, Any]:
        """|psi_0|^2 equals the grid-normalized Boltzmann weights and E0 vanishes."""
        p, g, T = Potential.double_well(), Grid(7, 4.0), 0.2
        spec = diagonalize(build_effective_hamiltonian(p, T, g))
        sup = float(np.max(np.abs(np.abs(spec.ground_state) ** 2 - boltzmann_density(p, T, g))))
        e0 = float(spec.eigenvalues[0])
        return {"passed": sup < 1e-3 and abs(e0) < 1e-3, "sup_distance": sup, "E0": e0}

    def _scenario_gap_law(self) -> Dict[str, Any]:
        """ln(gap) against 1/T has slope -barrier; E2 - E1 stays roughly flat."""
        g = Grid(7, 4.0)
        temps = np.linspace(0.1, 0.25, 6)
        rows = []
        for h in (1.0, 1.5, 2.0):
            points = gap_sweep(Potential.double_well(h=h), temps, g)
            slope = fit_log_gap_slope(points)
            excited = np.array([pt.excited_gap for pt in points])
            spread = float((excited.max() - excited.min()) / excited.max())
            rows.append({"h": h, "slope": slope, "excited_spread": spread})
        passed = all(abs(r["slope"] + r["h"]) <= 0.1 * r["h"] and r["excited_spread"] < 0.5 for r in rows)
        return {"passed": passed, "rows": rows}

    def _scenario_susy_rate(self) -> Dict[str, Any]:
        """Ground energy of the partner equals the fundamental gap."""
        p, g, T = Potential.double_well(), Grid(8, 4.0), 0.2
        delta = fundamental_gap(diagonalize(build_effective_hamiltonian(p, T, g)))
        e0s = float(diagonalize(build_effective_hamiltonian(p, T, g, EffectiveKind.SUPERSYMMETRIC)).eigenvalues[0])
        ratio = e0s / delta
        return {"passed": 0.95 <= ratio <= 1.05, "ratio": ratio, "delta": delta, "E0_susy": e0s}

    def _scenario_vqe_depth(self) -> Dict[str, Any]:
        """Relative error at depth 4 within 3e-3 and never worse with depth."""
        target = VqeTarget.from_potential(Potential.double_well(), 0.2, Grid(5, 4.0), EffectiveKind.SUPERSYMMETRIC)
        cfg = VqeConfig(target, optimizer=OptimizerSettings(restarts=8, seed=self.seed))
        errors = [r.relative_error for r in depth_sweep(cfg, [1, 2, 3, 4])]
        monotone = all(b <= a + 1e-12 for a, b in zip(errors, errors[1:]))
        return {"passed": errors[-1] <= 3e-3 and monotone, "relative_errors": errors}

    def _scenario_kinetic_reconstruction(self) -> Dict[str, Any]:
        K = build_kinetic(Grid(2, 10.0), 0.5).matrix
        t1, t2 = float(K[0, 1]), float(K[0, 2])
        passed = abs(abs(t1) - 0.39) <= 0.005 and abs(t2 - 0.20) <= 0.005 and t1 < 0 < t2
        return {"passed": passed, "t1": t1, "t2": t2}

    def _scenario_ising_hopping(self) -> Dict[str, Any]:
        """Hopping reaches one half for long counting windows; trend in n_eps is monotone."""
        rows = []
        seeds = np.random.SeedSequence(self.seed).spawn(4 * 9)
        it = iter(seeds)
        for ns in (2, 3, 4, 5):
            H = build_ising_hamiltonian(ns, 1.0, 0.1)
            spec = diagonalize(H)
            psi = StateVector.basis(ns, 0)
            target = [(1 << ns) - 1]
            for neps in range(2, 11):
                cfg = QpeConfig(H, neps, 1.0, psi, shots=4096, seed=next(it), backend="spectral", spectrum=spec)
                hop = hopping_probability(run_qpe(cfg), target)
                rows.append(
                    {"ns": ns, "neps": neps, "hop": hop, "predicted": predicted_hopping_probability(H, psi, target, neps, 1.0, spec)}
                )
        by_ns = {ns: [r for r in rows if r["ns"] == ns] for ns in (2, 3, 4, 5)}
        rho = {ns: float(spearmanr([r["neps"] for r in rs], [r["hop"] for r in rs])[0]) for ns, rs in by_ns.items()}
        top = by_ns[2][-1]["hop"]
        agree = all(abs(r["hop"] - r["predicted"]) < 0.04 for r in rows)
        passed = 0.45 <= top <= 0.55 and min(rho.values()) > 0.8 and agree
        return {"passed": passed, "spearman": rho, "rows": rows}

    def _scenario_realspace_hopping(self) -> Dict[str, Any]:
        H = build_realspace4_hamiltonian()
        cfg = QpeConfig(H, 4, 1.0, StateVector.from_bitstring("00"), shots=4096, seed=self.seed)
        hop = hopping_probability(run_qpe(cfg), [0b11])
        return {"passed": 0.40 <= hop <= 0.60, "p11": hop}

    def _scenario_hybrid_speedup(self) -> Dict[str, Any]:
        """Global moves hop half the time; Langevin follows Kramers; hybrid decorrelates >= 10x faster."""
        p, g, T = Potential.double_well(), Grid(7, 4.0), 0.2
        epochs, local_steps = 2000, 100
        hybrid = hybrid_sample(
            HybridConfig(p, T, GlobalMoveSettings(grid=g), local_steps=local_steps, epochs=epochs, seed=self.seed, record_every=10)
        )
        plain = run_langevin(
            LangevinConfig(p, T, n_steps=epochs * local_steps, seed=self.seed, record_every=10)
        )
        many = run_langevin(LangevinConfig(p, T, n_steps=200_000, seed=self.seed + 1, chains=64, record_every=1000))
        k = kramers_rate(p, T)
        rate = many.local_hop_rate()
        tau_h = integrated_autocorrelation_time(hybrid.labels[:, 0])
        tau_l = integrated_autocorrelation_time(plain.labels[:, 0])
        freq = hybrid.global_hop_frequency
        passed = 0.4 <= freq <= 0.6 and k / 3 <= rate <= 3 * k and tau_l / tau_h >= 10
        return {
            "passed": passed,
            "global_hop_frequency": freq,
            "langevin_hop_rate": rate,
            "kramers_rate": k,
            "autocorr_ratio": tau_l / tau_h,
        }

    # ---------- Runner ----------

    def scenarios(self) -> List[Scenario]:
        return [
            Scenario("stationary_density", self._scenario_stationary_density, timeout=5.0),
            Scenario("gap_law", self._scenario_gap_law, timeout=30.0),
            Scenario("susy_rate", self._scenario_susy_rate, timeout=10.0),
            Scenario("vqe_depth", self._scenario_vqe_depth, timeout=120.0),
            Scenario("kinetic_reconstruction", self._scenario_kinetic_reconstruction, timeout=1.0),
            Scenario("ising_hopping", self._scenario_ising_hopping, timeout=120.0),
            Scenario("realspace_hopping", self._scenario_realspace_hopping, timeout=5.0),
            Scenario("hybrid_speedup", self._scenario_hybrid_speedup, timeout=300.0),
        ]

    def run(self, only: Optional[List[str]] = None) -> Dict[str, Any]:
        results = []
        for sc in self.scenarios():
            if only and sc.name not in only:
                continue
            self._emit(f"Running {sc.name} ...")
            start = time.perf_counter()
            try:
                res = sc.run()
            except Exception as exc:
                res = {"passed": False, "error": str(exc)}
            res["name"] = sc.name
            res["duration_sec"] = time.perf_counter() - start
            if res["duration_sec"] > sc.timeout:
                self._emit(f"{sc.name} exceeded its {sc.timeout:.0f}s budget")
                res["over_budget"] = True
            results.append(res)
        report = {"results": results, "passed": all(r.get("passed") for r in results), "seed": self.seed}
        report_path = self.report_root / f"report_seed{self.seed}.json"
        try:
            report_path.write_text(json.dumps(report, indent=2, default=float))
            report["path"] = str(report_path)
        except Exception as exc:
            logging.error("Failed to write report: %s", exc)
        self._emit("Acceptance run complete.")
        return report


def main():
    parser = argparse.ArgumentParser(description="Run the acceptance scenarios.")
    parser.add_argument("--only", nargs="+", help="Scenario names to run.")
    parser.add_argument("--seed", type=int, default=SEED)
    args = parser.parse_args()
    logging.basicConfig(level=logging.INFO, format="%(levelname)s %(name)s: %(message)s")
    report = AcceptanceRunner(seed=args.seed).run(args.only)
    for r in report["results"]:
        print(f"{'PASS' if r['passed'] else 'FAIL'} {r['name']} ({r['duration_sec']:.1f}s)")
    raise SystemExit(0 if report["passed"] else 1)


if __name__ == "__main__":
    main()
