"""Experiment drivers: single runs with CSV/JSON artifacts and alpha sweeps.

Artifact layout of a single run (all floats printed with 17 significant
digits so reruns diff bit-identically):

    timeseries.csv             t, N_1..N_k, total, E, R
    snapshot_bond<j>_t<t>.csv  x, re_phi, im_phi, re_chi, im_chi, density
    summary.json               final R, final outgoing fractions, max energy
                               and norm drift, sum-rule residual, vertex factor

A sweep writes sweep.csv (alpha1, R_final) plus sweep_summary.json with the
argmin and any per-point failures.
"""
from __future__ import annotations

import json
import os
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np

from .boundaries import vertex_tbc_factor
from .config import ExperimentConfig
from .graph import sum_rule_residual
from .solver import RunResult, run

__all__ = ["run_experiment", "sweep_alpha1", "SWEEP_THREADS_ENV"]

SWEEP_THREADS_ENV = "DIRACSTAR_SWEEP_THREADS"


def _fmt(x: float) -> str:
    return format(float(x), ".17g")


def _write_csv(path: Path, header: list[str], rows: list[list[float]]) -> None:
    lines = [",".join(header)]
    lines += [",".join(_fmt(v) for v in row) for row in rows]
    path.write_text("\n".join(lines) + "\n")


def _resolve_out_dir(config: ExperimentConfig, out_dir: str | Path | None) -> Path:
    target = out_dir if out_dir is not None else config.output_dir
    if target is None:
        raise ValueError(
            "no output directory: pass out_dir or set [output] directory"
        )
    path = Path(target)
    path.mkdir(parents=True, exist_ok=True)
    return path


def _summary_of(result: RunResult, config: ExperimentConfig) -> dict:
    records = result.records
    final = records[-1]
    e0, n0 = records[0].energy, records[0].total_norm
    max_e_drift = max(
        (abs(r.energy - e0) / abs(e0) if e0 else 0.0) for r in records
    )
    max_n_drift = max(
        (abs(r.total_norm - n0) / n0 if n0 else 0.0) for r in records
    )
    outgoing = np.asarray(final.partial_norms[1:], dtype=float)
    fractions = (
        (outgoing / outgoing.sum()).tolist() if outgoing.sum() > 0 else []
    )
    return {
        "t_final": final.t,
        "final_reflection": final.reflection,
        "final_partial_norms": list(final.partial_norms),
        "final_outgoing_fractions": fractions,
        "max_energy_drift": max_e_drift,
        "max_norm_drift": max_n_drift,
        "sum_rule_residual": sum_rule_residual(result.graph),
        "vertex_factor": vertex_tbc_factor(config.alphas),
        "graph": result.graph.to_dict(),
        "n_steps": config.n_steps,
        "dt": config.dt,
        "mass": config.mass,
        "vertex_mode": config.vertex_mode,
    }


def run_experiment(
    config: ExperimentConfig, out_dir: str | Path | None = None
) -> dict:
    """Run one configured simulation and write its artifacts.

    Returns the summary dictionary (also written to summary.json).  On any
    failure the files created by this call are removed before the exception
    propagates.
    """
    out = _resolve_out_dir(config, out_dir)
    created: list[Path] = []
    try:
        result = run(config)

        ts_path = out / "timeseries.csv"
        k = len(result.records[0].partial_norms)
        header = ["t"] + [f"N_{j + 1}" for j in range(k)] + ["total", "E", "R"]
        rows = [
            [r.t, *r.partial_norms, r.total_norm, r.energy, r.reflection]
            for r in result.records
        ]
        created.append(ts_path)
        _write_csv(ts_path, header, rows)

        for snap in result.snapshots:
            name = f"snapshot_bond{snap.bond_index}_t{snap.time:g}.csv"
            path = out / name
            created.append(path)
            rows = [
                [x, p.real, p.imag, c.real, c.imag, d]
                for x, p, c, d in zip(snap.x, snap.phi, snap.chi, snap.density)
            ]
            _write_csv(
                path,
                ["x", "re_phi", "im_phi", "re_chi", "im_chi", "density"],
                rows,
            )

        summary = _summary_of(result, config)
        summary_path = out / "summary.json"
        created.append(summary_path)
        summary_path.write_text(json.dumps(summary, indent=2, sort_keys=True) + "\n")
        return summary
    except Exception:
        for path in created:
            path.unlink(missing_ok=True)
        raise


def _sweep_point(config: ExperimentConfig, value: float) -> float:
    result = run(config.with_alpha1(value))
    return result.records[-1].reflection


def sweep_alpha1(
    config: ExperimentConfig,
    start: float,
    stop: float,
    points: int,
    out_dir: str | Path | None = None,
    max_workers: int | None = None,
) -> dict:
    """Sweep alpha1 over ``points`` values in [start, stop].

    Each point is an independent simulation of the base config with alpha1
    replaced; rows are emitted in sweep order regardless of completion
    order, so the CSV is deterministic.  Per-point failures are recorded in
    the summary and the sweep continues.  Thread count defaults to the
    DIRACSTAR_SWEEP_THREADS environment variable (1 if unset).
    """
    if points < 2:
        raise ValueError(f"sweep needs at least 2 points, got {points}")
    if start <= 0 or stop <= 0:
        raise ValueError("alpha1 sweep range must be positive")
    out = _resolve_out_dir(config, out_dir)
    if max_workers is None:
        max_workers = int(os.environ.get(SWEEP_THREADS_ENV, "1"))

    values = np.linspace(start, stop, points)
    reflections: list[float] = [float("nan")] * points
    failures: list[dict] = []

    def work(i: int) -> None:
        try:
            reflections[i] = _sweep_point(config, float(values[i]))
        except Exception as exc:  # recorded, sweep continues
            failures.append(
                {"index": i, "alpha1": float(values[i]),
                 "error": f"{type(exc).__name__}: {exc}"}
            )

    if max_workers > 1:
        with ThreadPoolExecutor(max_workers=max_workers) as pool:
            list(pool.map(work, range(points)))
    else:
        for i in range(points):
            work(i)

    created: list[Path] = []
    try:
        csv_path = out / "sweep.csv"
        created.append(csv_path)
        _write_csv(
            csv_path,
            ["alpha1", "R_final"],
            [[float(v), r] for v, r in zip(values, reflections)],
        )

        finite = [
            (r, float(v)) for v, r in zip(values, reflections) if np.isfinite(r)
        ]
        summary: dict = {
            "points": points,
            "from": float(start),
            "to": float(stop),
            "failures": sorted(failures, key=lambda f: f["index"]),
        }
        if finite:
            min_r, argmin = min(finite)
            summary["min_reflection"] = min_r
            summary["argmin_alpha1"] = argmin
        summary_path = out / "sweep_summary.json"
        created.append(summary_path)
        summary_path.write_text(json.dumps(summary, indent=2, sort_keys=True) + "\n")
        return summary
    except Exception:
        for path in created:
            path.unlink(missing_ok=True)
        raise
