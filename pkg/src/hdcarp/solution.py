"""Solution representation, feasibility checks and the hierarchical objective.

A solution assigns every required arc to exactly one vehicle route, as an
ordered list of serviced arc ids (routes implicitly start and end at the
depot). The objective is a vector (T_1, ..., T_p): T_k is the time at which
the last class-k arc anywhere in the fleet finishes service, and vectors are
compared lexicographically. The final return leg to the depot is not counted:
class completion means service completion, not vehicle return.

Two problem variants share this representation:

* P: within each route, serviced classes must be nondecreasing.
* U: service order is free; the hierarchy lives only in the objective.
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from enum import Enum
from typing import Sequence

from .errors import InfeasibleSolutionError
from .graph import DeadheadMatrix, Instance

TOL = 1e-9


class Variant(Enum):
    P = "P"
    U = "U"

    @classmethod
    def parse(cls, text: str) -> "Variant":
        return cls(text.strip().upper())


@dataclass
class Route:
    vehicle: int
    serviced: list[int]

    def copy(self) -> "Route":
        return Route(self.vehicle, list(self.serviced))


@dataclass
class Solution:
    routes: list[Route]

    def copy(self) -> "Solution":
        return Solution([r.copy() for r in self.routes])

    @classmethod
    def empty(cls, num_vehicles: int) -> "Solution":
        return cls([Route(m, []) for m in range(num_vehicles)])

    @classmethod
    def from_lists(cls, lists: Sequence[Sequence[int]]) -> "Solution":
        return cls([Route(m, list(seq)) for m, seq in enumerate(lists)])


@dataclass(frozen=True)
class HierarchicalObjective:
    """Per-class completion times, compared lexicographically."""

    t: tuple[float, ...]

    def __len__(self) -> int:
        return len(self.t)

    def __getitem__(self, k: int) -> float:
        return self.t[k]

    def __iter__(self):
        return iter(self.t)


def lex_compare(a: Sequence[float], b: Sequence[float], tol: float = TOL) -> int:
    """-1 / 0 / +1 for lexicographic less / equal / greater.

    Entries within `tol` of each other are treated as ties.
    """
    if len(a) != len(b):
        raise ValueError(f"objective length mismatch: {len(a)} vs {len(b)}")
    for x, y in zip(a, b):
        if abs(x - y) > tol:
            return -1 if x < y else 1
    return 0


def route_demand(inst: Instance, serviced: Sequence[int]) -> float:
    return sum(inst.arcs[a].q for a in serviced)


def route_class_completions(
    inst: Instance, mat: DeadheadMatrix, serviced: Sequence[int]
) -> list[float]:
    """Per-class completion times of one route (0.0 for classes it skips).

    The vehicle starts at the depot with clock 0; each serviced arc costs the
    shortest-path deadhead to its tail plus its service time, and leaves the
    vehicle at its head.
    """
    comp = [0.0] * inst.num_classes
    sp = mat.sp
    arcs = inst.arcs
    pos = inst.depot
    clock = 0.0
    for arc_id in serviced:
        a = arcs[arc_id]
        clock += float(sp[pos, a.tail]) + a.s
        pos = a.head
        comp[a.p - 1] = clock
    return comp


def combine_completions(per_route: Sequence[Sequence[float]], num_classes: int) -> list[float]:
    """Fleet objective vector: per-class max over routes (0.0 where unserved)."""
    t = [0.0] * num_classes
    for comp in per_route:
        for k in range(num_classes):
            if comp[k] > t[k]:
                t[k] = comp[k]
    return t


def check_feasible(inst: Instance, sol: Solution, variant: Variant) -> list[str]:
    """Coverage, capacity and (variant P) per-route class order violations."""
    v: list[str] = []
    if len(sol.routes) != inst.num_vehicles:
        v.append(
            f"solution has {len(sol.routes)} routes for {inst.num_vehicles} vehicles"
        )

    seen: dict[int, int] = {}
    for r_idx, route in enumerate(sol.routes):
        for arc_id in route.serviced:
            if not (0 <= arc_id < len(inst.arcs)):
                raise ValueError(f"unknown arc id {arc_id} in route {r_idx}")
            if not inst.arcs[arc_id].required:
                raise ValueError(f"arc {arc_id} in route {r_idx} is not a required arc")
            seen[arc_id] = seen.get(arc_id, 0) + 1

    for a in inst.arcs:
        if not a.required:
            continue
        count = seen.pop(a.id, 0)
        if count == 0:
            v.append(f"required arc {a.id} not serviced")
        elif count > 1:
            v.append(f"required arc {a.id} serviced {count} times")

    for r_idx, route in enumerate(sol.routes):
        demand = route_demand(inst, route.serviced)
        if demand > inst.capacity + TOL:
            v.append(
                f"route {r_idx} demand {demand:.6f} exceeds capacity {inst.capacity:.6f}"
            )
        if variant is Variant.P:
            classes = [inst.arcs[a].p for a in route.serviced]
            for i in range(len(classes) - 1):
                if classes[i] > classes[i + 1]:
                    v.append(
                        f"route {r_idx} violates class order at position {i}"
                        f" ({classes[i]} before {classes[i + 1]})"
                    )
                    break
    return v


def evaluate(
    inst: Instance, mat: DeadheadMatrix, sol: Solution, variant: Variant
) -> HierarchicalObjective:
    """Hierarchical objective of a feasible solution; faults if infeasible."""
    violations = check_feasible(inst, sol, variant)
    if violations:
        raise InfeasibleSolutionError(violations)
    per_route = [route_class_completions(inst, mat, r.serviced) for r in sol.routes]
    return HierarchicalObjective(tuple(combine_completions(per_route, inst.num_classes)))


# ---------------------------------------------------------------------------
# Solution JSON format
# ---------------------------------------------------------------------------

def solution_to_dict(sol: Solution, variant: Variant) -> dict:
    return {"variant": variant.value, "routes": [list(r.serviced) for r in sol.routes]}


def solution_from_dict(data: dict) -> tuple[Solution, Variant]:
    variant = Variant.parse(data["variant"])
    sol = Solution.from_lists([[int(a) for a in row] for row in data["routes"]])
    return sol, variant


def save_solution(sol: Solution, variant: Variant, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(solution_to_dict(sol, variant), fh)
        fh.write("\n")


def load_solution(path) -> tuple[Solution, Variant]:
    with open(path, "r", encoding="utf-8") as fh:
        return solution_from_dict(json.load(fh))
