"""Run configured scenarios and write their time series and summaries."""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, fields, replace
from pathlib import Path

import numpy as np

from . import __version__
from .config import ConfigError, ScenarioConfig, validate
from .master import Theory, coherence_measure, integrate, pure_density
from .observables import yields_from_ensemble, yields_from_trace
from .spin import S, T, Basis, initial_state
from .superop import integrate_four_level
from .trajectories import run_ensemble

COLUMNS = ("time", "p_s", "p_t", "coh_mag", "trace", "rho_coh", "flux_s", "flux_t")


@dataclass
class ScenarioOutput:
    csv_path: Path
    summary_path: Path
    summary: dict


def _fmt(x: float) -> str:
    return format(float(x), ".17g")


def _rows(times, states, kS, kT):
    """Time-series rows; 'trace' is the population left in the {S, T} pair subspace."""
    QS = np.zeros_like(states[0])
    QT = np.zeros_like(states[0])
    QS[S, S] = QT[T, T] = 1.0
    for t, rho in zip(times, states):
        p_s, p_t = rho[S, S].real, rho[T, T].real
        yield (t, p_s, p_t, abs(rho[S, T]), p_s + p_t, coherence_measure(rho, QS, QT), kS * p_s, kT * p_t)


def _echo(config: ScenarioConfig) -> dict:
    out = {}
    for f in fields(config):
        v = getattr(config, f.name)
        if hasattr(v, "value"):
            v = v.value
        elif isinstance(v, tuple):
            v = [[a.real, a.imag] for a in v]
        out[f.name] = v
    return out


def simulate(config: ScenarioConfig, workers: int = 1):
    """Run one scenario; returns (times, states, yield report, extra summary fields)."""
    model = config.model()
    psi0 = initial_state(config.initial, config.basis)
    if config.mode == "ode":
        rho0 = pure_density(psi0)
        if config.basis is Basis.FOUR_LEVEL:
            scheme = "jones_hore" if config.theory is Theory.JONES_HORE else "traditional"
            trace = integrate_four_level(model, rho0, config.t_end, config.dt, scheme=scheme)
        else:
            trace = integrate(config.theory, model, rho0, config.t_end, config.dt)
        k = config.record_every
        return trace.times[::k], trace.states[::k], yields_from_trace(trace), {}
    result = run_ensemble(
        config.scheme,
        model,
        psi0,
        config.n_traj,
        config.t_end,
        config.dt,
        seed=config.seed,
        record_every=config.record_every,
        workers=workers,
    )
    extra = {
        "n_traj": result.n_traj,
        "singlet_count": result.singlet_count,
        "triplet_count": result.triplet_count,
        "survival_count": result.survival_count,
        "project_s_count": result.project_s_count,
        "project_t_count": result.project_t_count,
    }
    return result.times, result.mean_rho, yields_from_ensemble(result), extra


def _summary(config, states, report, extra) -> dict:
    final = states[-1]
    summary = {
        "tool": "rpjump",
        "version": __version__,
        "mode": config.mode,
        "model": (config.theory or config.scheme).value,
        "seed": config.seed,
        "parameters": _echo(config),
        "singlet_yield": report.singlet_yield,
        "triplet_yield": report.triplet_yield,
        "survival": report.survival,
        "singlet_population_final": float(final[S, S].real),
        "triplet_population_final": float(final[T, T].real),
        "yield_method": report.method.value,
    }
    summary.update(extra)
    return summary


def _write_csv(path: Path, header, rows) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([_fmt(x) for x in row])


def _write_json(path: Path, obj) -> None:
    with open(path, "w") as fh:
        json.dump(obj, fh, sort_keys=True, indent=2)
        fh.write("\n")


def run_scenario(config: ScenarioConfig, output_dir: str | Path = ".", workers: int = 1) -> ScenarioOutput:
    """Simulate ``config`` and write ``<output>.csv`` and ``<output>_summary.json``."""
    errors = validate(config)
    if errors:
        raise ConfigError(errors)
    times, states, report, extra = simulate(config, workers=workers)
    out = Path(output_dir)
    out.mkdir(parents=True, exist_ok=True)
    csv_path = out / f"{config.output}.csv"
    summary_path = out / f"{config.output}_summary.json"
    _write_csv(csv_path, COLUMNS, _rows(times, states, config.kS, config.kT))
    summary = _summary(config, states, report, extra)
    _write_json(summary_path, summary)
    return ScenarioOutput(csv_path, summary_path, summary)


def compare(config: ScenarioConfig, theories, output_dir: str | Path = ".") -> ScenarioOutput:
    """Run the scenario under several master equations and join the time series."""
    theories = [Theory(t) for t in theories]
    if not theories:
        raise ConfigError(["compare needs at least one theory"])
    configs = [replace(config, theory=t, scheme=None) for t in theories]
    errors = [f"{c.theory.value}: {e}" for c in configs for e in validate(c)]
    if errors:
        raise ConfigError(errors)

    runs = [simulate(c) for c in configs]
    header = ["time"] + [f"{t.value}.{col}" for t in theories for col in COLUMNS[1:]]
    per_theory = [list(_rows(r[0], r[1], config.kS, config.kT)) for r in runs]
    joined = ([rows[0][0]] + [x for row in rows for x in row[1:]] for rows in zip(*per_theory))

    out = Path(output_dir)
    out.mkdir(parents=True, exist_ok=True)
    csv_path = out / f"{config.output}_compare.csv"
    summary_path = out / f"{config.output}_compare_summary.json"
    _write_csv(csv_path, header, joined)
    summary = {
        "tool": "rpjump",
        "version": __version__,
        "theories": {c.theory.value: _summary(c, r[1], r[2], r[3]) for c, r in zip(configs, runs)},
    }
    _write_json(summary_path, summary)
    return ScenarioOutput(csv_path, summary_path, summary)
