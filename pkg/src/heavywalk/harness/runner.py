"""Replica orchestration and report assembly.

Replica ``i`` always draws from streams derived from ``(master_seed, i)``, so
results do not depend on the number of workers (``HEAVYWALK_WORKERS``).
"""
from __future__ import annotations

import math
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from ..seeding import replica_stream
from ..strip import simulate_strip
from ..tails import DomainError
from ..walk import ReplicaAborted, StoppingRecord, dyadic_checkpoints, simulate_passage, simulate_walk
from .checks import CHECKS
from .config import ExperimentConfig
from .io import CsvSink, write_report


@dataclass
class ReplicaResult:
    index: int
    trajectory: object = None
    stopping: StoppingRecord | None = None
    on_boundary: np.ndarray | None = None
    sigma: np.ndarray | None = None
    aborted: str | None = None


@dataclass
class RunContext:
    config: ExperimentConfig
    completed: list
    requested: int

    def level_index(self, level):
        return int(np.searchsorted(np.sort(np.asarray(self.config.levels)), float(level)))


@dataclass
class RunReport:
    payload: dict
    wall_clock: float

    @property
    def passed(self):
        return self.payload["passed"]

    def to_dict(self):
        return {"payload": self.payload, "wall_clock_seconds": self.wall_clock}


def worker_count():
    try:
        return max(1, int(os.environ.get("HEAVYWALK_WORKERS", "1")))
    except ValueError:
        return 1


def _plan(config: ExperimentConfig):
    needs = set()
    for c in config.checks:
        needs |= CHECKS[c.check].needs
    if config.model_type == "walk" and needs <= {"tau"}:
        return "passage", needs
    return "full", needs


def _replica(job):
    config, i, mode, needs = job
    T = config.horizon
    try:
        if config.model_type == "walk":
            rng = replica_stream(config.master_seed, i)
            if mode == "passage":
                tau, cens = simulate_passage(config.model, T, rng, config.levels)
                n = len(tau)
                rec = StoppingRecord(np.sort(np.asarray(config.levels)), tau, cens,
                                     np.full(n, -1, np.int64), np.zeros(n, bool), T)
                return ReplicaResult(i, stopping=rec)
            cps = dyadic_checkpoints(T) if "trajectory" in needs else np.array([0, T], np.int64)
            traj, rec = simulate_walk(config.model, T, rng, config.levels, cps)
            return ReplicaResult(i, traj if "trajectory" in needs else None, rec)
        keep_sigma = config.output_dir is not None
        run = simulate_strip(config.model, T, (config.master_seed, i), keep_sigma=keep_sigma)
        return ReplicaResult(i, run.trajectory, None, run.on_boundary,
                             run.excursions.sigma if keep_sigma else None)
    except (ReplicaAborted, FloatingPointError, OverflowError) as exc:
        return ReplicaResult(i, aborted=str(exc))


def _replicas(config, mode, needs):
    jobs = [(config, i, mode, needs) for i in range(config.replicas)]
    workers = min(worker_count(), config.replicas)
    if workers <= 1:
        for job in jobs:
            yield _replica(job)
        return
    with ProcessPoolExecutor(workers) as pool:
        yield from pool.map(_replica, jobs, chunksize=max(1, len(jobs) // (8 * workers)))


def _clean(obj):
    """JSON-ready copy: numpy scalars to Python, non-finite floats to strings."""
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        f = float(obj)
        return f if math.isfinite(f) else repr(f)
    return obj


def run(config) -> RunReport:
    """Execute every replica, evaluate every check and (with ``output_dir``) write CSVs
    and ``report.json``."""
    if isinstance(config, dict):
        config = ExperimentConfig.from_dict(config)
    start = time.perf_counter()
    mode, needs = _plan(config)
    uses_replicas = config.model_type != "none"

    sink = None
    if config.output_dir is not None and uses_replicas:
        sink = CsvSink(config.output_dir, config.model_type, bool(config.levels))
    completed, aborted = [], []
    try:
        if uses_replicas:
            for rec in _replicas(config, mode, needs):
                if rec.aborted is not None:
                    aborted.append({"replica": rec.index, "reason": rec.aborted})
                    continue
                if sink is not None:
                    sink.write(rec)
                    rec.sigma = None
                completed.append(rec)
    finally:
        if sink is not None:
            sink.close()

    ctx = RunContext(config, completed, config.replicas)
    results = []
    for spec in config.checks:
        entry = {"check": spec.check, "label": spec.label or spec.check,
                 "gating": spec.gating, "params": spec.params}
        if uses_replicas and not completed and CHECKS[spec.check].needs:
            entry.update(passed=False, value=None, error="no completed replicas")
        else:
            try:
                entry.update(CHECKS[spec.check].evaluate(spec.params, ctx))
            except DomainError as exc:
                entry.update(passed=False, value=None, error=str(exc))
        results.append(entry)

    payload = _clean({
        "name": config.name,
        "config_hash": config.config_hash(),
        "master_seed": config.master_seed,
        "replicas_requested": config.replicas if uses_replicas else 0,
        "replicas_completed": len(completed),
        "reduced_replicas": bool(aborted),
        "aborted": aborted,
        "checks": results,
        "passed": all(r["passed"] for r in results if r["gating"]),
    })
    report = RunReport(payload, time.perf_counter() - start)
    if config.output_dir is not None:
        Path(config.output_dir).mkdir(parents=True, exist_ok=True)
        write_report(Path(config.output_dir) / "report.json", report.to_dict())
    return report
