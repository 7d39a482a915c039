"""Greedy randomized construction of an initial feasible solution.

Classes are inserted in priority order; within a class, arcs are taken in
ascending id order for reproducibility. For each arc, every capacity-feasible
vehicle is scored by the completion time of the current class on that route
after receiving the arc, and one vehicle is drawn from a softmax over the
negated scores. The default placement appends the arc at the route end;
best-position insertion is available as a non-default mode.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import ConstructionError
from .graph import DeadheadMatrix, Instance
from .solution import TOL, Route, Solution, route_class_completions


@dataclass(frozen=True)
class InsertionCandidate:
    vehicle: int
    cost: float
    position: int = -1  # insertion index; -1 means append


def softmax_select(candidates: Sequence[InsertionCandidate], rng: np.random.Generator) -> int:
    """Draw a vehicle with probability softmax(-cost); returns the vehicle index."""
    if not candidates:
        raise ValueError("softmax_select: empty candidate list")
    logits = [-c.cost for c in candidates]
    z = max(logits)
    weights = [math.exp(l - z) for l in logits]
    total = sum(weights)
    r = rng.random() * total
    acc = 0.0
    for c, w in zip(candidates, weights):
        acc += w
        if r <= acc:
            return c.vehicle
    return candidates[-1].vehicle


def _feasible_positions(classes: list[int], class_p: int, insertion: str) -> range:
    """Insertion indexes that keep a class-monotone route monotone.

    For append mode only the route end is used. In best-position mode a
    class-p arc may go anywhere between the last class<p arc and the first
    class>p arc.
    """
    if insertion == "append":
        return range(len(classes), len(classes) + 1)
    lo = 0
    for i, c in enumerate(classes):
        if c < class_p:
            lo = i + 1
    hi = len(classes)
    for i, c in enumerate(classes):
        if c > class_p:
            hi = i
            break
    return range(lo, hi + 1)


def construct(
    inst: Instance,
    mat: DeadheadMatrix,
    variant,
    rng: np.random.Generator,
    insertion: str = "append",
) -> Solution:
    """Build a feasible solution; faults when no vehicle can take some arc.

    `variant` only widens the candidate positions in best-position mode (the
    U variant has no order constraint); the default append mode produces the
    same class-monotone routes for both variants.
    """
    from .solution import Variant  # local import to avoid cycle in type hints

    if insertion not in ("append", "best"):
        raise ValueError(f"unknown insertion mode {insertion!r}")

    routes: list[list[int]] = [[] for _ in range(inst.num_vehicles)]
    loads = [0.0] * inst.num_vehicles

    for class_p in range(1, inst.num_classes + 1):
        for arc in sorted(inst.arcs_of_class(class_p), key=lambda a: a.id):
            candidates: list[InsertionCandidate] = []
            for m in range(inst.num_vehicles):
                if loads[m] + arc.q > inst.capacity + TOL:
                    continue
                if insertion == "append":
                    trial = routes[m] + [arc.id]
                    cost = route_class_completions(inst, mat, trial)[class_p - 1]
                    candidates.append(InsertionCandidate(m, cost))
                else:
                    classes = [inst.arcs[a].p for a in routes[m]]
                    positions = (
                        range(len(routes[m]) + 1)
                        if variant is Variant.U
                        else _feasible_positions(classes, class_p, insertion)
                    )
                    best_cost, best_pos = math.inf, len(routes[m])
                    for pos in positions:
                        trial = routes[m][:pos] + [arc.id] + routes[m][pos:]
                        cost = route_class_completions(inst, mat, trial)[class_p - 1]
                        if cost < best_cost - TOL:
                            best_cost, best_pos = cost, pos
                    candidates.append(InsertionCandidate(m, best_cost, best_pos))
            if not candidates:
                raise ConstructionError(
                    f"construction failed: capacity (arc {arc.id}, class {class_p})"
                )
            chosen = softmax_select(candidates, rng)
            cand = next(c for c in candidates if c.vehicle == chosen)
            pos = len(routes[chosen]) if cand.position < 0 else cand.position
            routes[chosen].insert(pos, arc.id)
            loads[chosen] += arc.q

    return Solution([Route(m, seq) for m, seq in enumerate(routes)])
