"""Subprocess interface to the routing solver's CLI.

Everything crossing the package boundary goes through the solver's public
surface: instance/solution JSON files and the gen / refine / eval
subcommands.
"""
from __future__ import annotations

import json
import shutil
import subprocess
import sys


class InteropError(RuntimeError):
    pass


def primary_command() -> list[str]:
    exe = shutil.which("hdcarp")
    if exe:
        return [exe]
    return [sys.executable, "-m", "hdcarp.cli"]


def run_primary(*args: str) -> subprocess.CompletedProcess:
    cmd = [*primary_command(), *map(str, args)]
    proc = subprocess.run(cmd, capture_output=True, text=True)
    if proc.returncode != 0:
        raise InteropError(
            f"solver call failed ({proc.returncode}): {' '.join(cmd)}\n"
            f"stdout: {proc.stdout.strip()}\nstderr: {proc.stderr.strip()}"
        )
    return proc


def generate_instance(arcs: int, vehicles: int, seed: int, out_path: str) -> None:
    run_primary("gen", "--arcs", arcs, "--vehicles", vehicles,
                "--seed", seed, "--out", out_path)


def refine_solution(inst_path: str, sol_path: str, variant: str, out_path: str) -> list[float]:
    """Local-search refinement; returns the refined objective vector."""
    proc = run_primary("refine", "--in", inst_path, "--sol", sol_path,
                       "--variant", variant.lower(), "--out", out_path)
    payload = json.loads(proc.stdout)
    return payload["objective"]


def evaluate_solution(inst_path: str, sol_path: str, variant: str) -> list[float]:
    """Objective of a solution file; raises on infeasibility."""
    proc = run_primary("eval", "--in", inst_path, "--sol", sol_path,
                       "--variant", variant.lower())
    payload = json.loads(proc.stdout)
    if not payload.get("feasible", False):
        raise InteropError(f"solver rejected solution: {payload}")
    return payload["objective"]
