"""Batch experiment running, per-class optimality gaps and CSV reporting."""
from __future__ import annotations

import csv
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

from .construct import construct
from .errors import SolverError
from .exact import brute_force_oracle
from .graph import DeadheadMatrix, Instance, compute_deadhead_matrix
from .local_search import local_search
from .metaheuristics import aco, ea, ils
from .solution import HierarchicalObjective, Solution, Variant, evaluate

import numpy as np

GAP_TOL = 1e-12


@dataclass
class BenchRow:
    instance: str
    algorithm: str
    variant: str
    objective: list[float]
    gap_percent: list[float]  # empty when no reference is available
    time_seconds: float
    seed: int
    status: str = "ok"


def gap_percent(objective, reference) -> list[float]:
    """Per-class 100 * (T_k - ref_k) / ref_k, with 0/0 treated as 0."""
    gaps = []
    for t, ref in zip(objective, reference):
        if abs(ref) <= GAP_TOL:
            gaps.append(0.0 if abs(t) <= GAP_TOL else float("inf"))
        else:
            gaps.append(100.0 * (t - ref) / ref)
    return gaps


def solve_with(
    algorithm: str,
    inst: Instance,
    mat: DeadheadMatrix,
    variant: Variant,
    seed: int,
    threads: int = 1,
    params: dict | None = None,
) -> Solution:
    params = dict(params or {})
    if algorithm == "greedy":
        return construct(inst, mat, variant, np.random.default_rng(seed))
    if algorithm == "ls":
        sol = construct(inst, mat, variant, np.random.default_rng(seed))
        return local_search(inst, mat, sol, variant, threads=threads)
    if algorithm == "ils":
        return ils(inst, mat, variant, seed=seed, threads=threads,
                   k_max=int(params.get("k_max", 10)))
    if algorithm == "ea":
        return ea(inst, mat, variant, seed=seed, threads=threads,
                  k_max=int(params.get("k_max", 100)),
                  population_size=int(params.get("population_size", 200)))
    if algorithm == "aco":
        return aco(inst, mat, variant, seed=seed, threads=threads,
                   n_ant=int(params.get("n_ant", 50)),
                   k_max=int(params.get("k_max", 100)),
                   rho=float(params.get("rho", 0.5)),
                   beta=float(params.get("beta", 2.0)))
    raise ValueError(f"unknown algorithm {algorithm!r}")


def run_bench(
    instances: list[tuple[str, Instance]],
    algorithms: list[str],
    variant: Variant,
    reference: str = "best",
    seed: int = 0,
    params: dict | None = None,
    workers: int = 1,
) -> list[BenchRow]:
    """One row per (instance, algorithm). `reference` picks the gap baseline:
    "oracle" (desk scale only) or "best" across the run's algorithms; gaps are
    omitted when neither is available. Algorithm faults become status rows."""
    rows: list[BenchRow] = []
    for name, inst in instances:
        mat = compute_deadhead_matrix(inst)
        results: dict[str, tuple[HierarchicalObjective | None, float, str]] = {}

        def run_one(algorithm: str):
            start = time.perf_counter()
            try:
                sol = solve_with(algorithm, inst, mat, variant, seed, params=params)
                obj = evaluate(inst, mat, sol, variant)
                return algorithm, (obj, time.perf_counter() - start, "ok")
            except SolverError as exc:
                return algorithm, (None, time.perf_counter() - start, f"error: {exc}")

        if workers > 1:
            with ThreadPoolExecutor(max_workers=workers) as pool:
                for algorithm, result in pool.map(run_one, algorithms):
                    results[algorithm] = result
        else:
            for algorithm in algorithms:
                alg, result = run_one(algorithm)
                results[alg] = result

        ref_obj = None
        if reference == "oracle":
            _, ref_obj = brute_force_oracle(inst, mat, variant)
        elif reference == "best":
            objs = [obj for obj, _, status in results.values() if obj is not None]
            if objs:
                ref_obj = HierarchicalObjective(
                    tuple(min(o[k] for o in objs) for k in range(inst.num_classes))
                )

        for algorithm in algorithms:
            obj, elapsed, status = results[algorithm]
            rows.append(BenchRow(
                instance=name,
                algorithm=algorithm,
                variant=variant.value,
                objective=list(obj) if obj is not None else [],
                gap_percent=gap_percent(obj, ref_obj) if obj is not None and ref_obj is not None else [],
                time_seconds=elapsed,
                seed=seed,
                status=status,
            ))
    return rows


# ---------------------------------------------------------------------------
# CSV round-trip
# ---------------------------------------------------------------------------

_FIELDS = ["instance", "algorithm", "variant", "objective", "gap_percent",
           "time_seconds", "seed", "status"]


def _vec_to_text(vec: list[float]) -> str:
    return ";".join(repr(x) for x in vec)


def _vec_from_text(text: str) -> list[float]:
    return [float(x) for x in text.split(";")] if text else []


def write_bench_csv(rows: list[BenchRow], path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.DictWriter(fh, fieldnames=_FIELDS)
        writer.writeheader()
        for row in rows:
            writer.writerow({
                "instance": row.instance,
                "algorithm": row.algorithm,
                "variant": row.variant,
                "objective": _vec_to_text(row.objective),
                "gap_percent": _vec_to_text(row.gap_percent),
                "time_seconds": repr(row.time_seconds),
                "seed": row.seed,
                "status": row.status,
            })


def read_bench_csv(path) -> list[BenchRow]:
    rows: list[BenchRow] = []
    with open(path, newline="", encoding="utf-8") as fh:
        for rec in csv.DictReader(fh):
            rows.append(BenchRow(
                instance=rec["instance"],
                algorithm=rec["algorithm"],
                variant=rec["variant"],
                objective=_vec_from_text(rec["objective"]),
                gap_percent=_vec_from_text(rec["gap_percent"]),
                time_seconds=float(rec["time_seconds"]),
                seed=int(rec["seed"]),
                status=rec["status"],
            ))
    return rows
