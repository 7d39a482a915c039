"""Instance representation, validation and shortest-path deadheading support.

An instance is a strongly connected directed graph whose arcs carry traversal
times. A subset of arcs is "required": those additionally carry a demand, a
service time and a priority class in 1..num_classes. A fleet of identical
vehicles of capacity Q is stationed at the depot node.

Vehicles move between serviced arcs along shortest paths, so the travel-time
matrix used everywhere downstream is the all-pairs shortest-path matrix over
arc traversal times, not the raw adjacency matrix.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np

from .errors import NotStronglyConnectedError


@dataclass(frozen=True, slots=True)
class Node:
    id: int
    x: float
    y: float


@dataclass(frozen=True, slots=True)
class Arc:
    id: int
    tail: int
    head: int
    d: float          # traversal time, > 0
    required: bool
    q: float = 0.0    # demand, > 0 iff required
    s: float = 0.0    # service time, > 0 iff required
    p: int = 0        # priority class in 1..num_classes, 0 iff not required


@dataclass(frozen=True)
class Instance:
    nodes: list[Node]
    arcs: list[Arc]
    depot: int
    num_vehicles: int
    capacity: float
    num_classes: int

    @property
    def num_nodes(self) -> int:
        return len(self.nodes)

    @property
    def required_arcs(self) -> list[Arc]:
        return [a for a in self.arcs if a.required]

    def arcs_of_class(self, p: int) -> list[Arc]:
        return [a for a in self.arcs if a.required and a.p == p]


@dataclass(frozen=True)
class DeadheadMatrix:
    """All-pairs shortest-path travel times plus next-hop matrix for paths."""

    sp: np.ndarray        # (n, n) float, sp[i][j] = shortest travel time i -> j
    next_hop: np.ndarray  # (n, n) int, next node after i on a shortest i -> j path

    def path_nodes(self, i: int, j: int) -> list[int]:
        """Node sequence of one shortest path from i to j (inclusive)."""
        path = [i]
        while path[-1] != j:
            path.append(int(self.next_hop[path[-1], j]))
        return path


def _reachable(n: int, out_nbrs: list[list[int]], start: int) -> set[int]:
    seen = {start}
    stack = [start]
    while stack:
        u = stack.pop()
        for v in out_nbrs[u]:
            if v not in seen:
                seen.add(v)
                stack.append(v)
    return seen


def validate_instance(inst: Instance) -> list[str]:
    """Return all invariant violations; an empty list means the instance is usable.

    Violations are data, not exceptions: callers (the CLI in particular) decide
    how to report them.
    """
    v: list[str] = []
    n = len(inst.nodes)

    for i, node in enumerate(inst.nodes):
        if node.id != i:
            v.append(f"node ids not dense: index {i} has id {node.id}")
        if not (math.isfinite(node.x) and math.isfinite(node.y)):
            v.append(f"node {node.id}: non-finite coordinates")

    if not (0 <= inst.depot < n):
        v.append(f"depot {inst.depot} is not a node id")
    if inst.num_vehicles < 1:
        v.append(f"num_vehicles must be >= 1, got {inst.num_vehicles}")
    if inst.num_classes < 1:
        v.append(f"num_classes must be >= 1, got {inst.num_classes}")
    if not (inst.capacity > 0):
        v.append(f"capacity must be positive, got {inst.capacity}")

    for i, a in enumerate(inst.arcs):
        if a.id != i:
            v.append(f"arc ids not dense: index {i} has id {a.id}")
        if not (0 <= a.tail < n) or not (0 <= a.head < n):
            v.append(f"arc {a.id}: endpoint outside node range")
            continue
        if not (a.d > 0) or not math.isfinite(a.d):
            v.append(f"arc {a.id}: traversal time must be positive, got {a.d}")
        if a.required:
            if not (a.q > 0):
                v.append(f"arc {a.id}: required arc needs positive demand")
            if not (a.s > 0):
                v.append(f"arc {a.id}: required arc needs positive service time")
            if not (1 <= a.p <= inst.num_classes):
                v.append(f"arc {a.id}: class {a.p} outside 1..{inst.num_classes}")
        else:
            if a.q != 0 or a.s != 0 or a.p != 0:
                v.append(f"arc {a.id}: non-required arc must have q = s = 0 and p = 0")

    # Strong connectivity via forward + reverse reachability from the depot.
    if not inst.arcs:
        v.append("not strongly connected (no arcs)")
    elif 0 <= inst.depot < n:
        out_nbrs: list[list[int]] = [[] for _ in range(n)]
        in_nbrs: list[list[int]] = [[] for _ in range(n)]
        for a in inst.arcs:
            if 0 <= a.tail < n and 0 <= a.head < n:
                out_nbrs[a.tail].append(a.head)
                in_nbrs[a.head].append(a.tail)
        fwd = _reachable(n, out_nbrs, inst.depot)
        bwd = _reachable(n, in_nbrs, inst.depot)
        for u in range(n):
            if u not in fwd:
                v.append(f"not strongly connected: node {u} unreachable from depot")
            elif u not in bwd:
                v.append(f"not strongly connected: node {u} cannot reach depot")

    return v


def compute_deadhead_matrix(inst: Instance) -> DeadheadMatrix:
    """Floyd-Warshall over arc traversal times, with next-hop path recovery.

    Parallel arcs collapse to their minimum traversal time. Raises
    NotStronglyConnectedError if any pair stays unreachable.
    """
    n = len(inst.nodes)
    sp = np.full((n, n), np.inf)
    np.fill_diagonal(sp, 0.0)
    nxt = np.full((n, n), -1, dtype=np.int64)
    nxt[np.diag_indices(n)] = np.arange(n)
    for a in inst.arcs:
        if a.tail == a.head:
            continue
        if a.d < sp[a.tail, a.head]:
            sp[a.tail, a.head] = a.d
            nxt[a.tail, a.head] = a.head

    for k in range(n):
        via = sp[:, k, None] + sp[None, k, :]
        better = via < sp
        sp = np.where(better, via, sp)
        nxt = np.where(better, nxt[:, k, None], nxt)

    if np.isinf(sp).any():
        i, j = map(int, np.argwhere(np.isinf(sp))[0])
        raise NotStronglyConnectedError(
            f"instance not strongly connected: no path {i} -> {j}"
        )
    return DeadheadMatrix(sp=sp, next_hop=nxt)


def deadhead_time(mat: DeadheadMatrix, from_arc: Arc, to_arc: Arc) -> float:
    """Travel time from the end of one serviced arc to the start of the next."""
    return float(mat.sp[from_arc.head, to_arc.tail])


# ---------------------------------------------------------------------------
# Instance JSON format
# ---------------------------------------------------------------------------

def instance_to_dict(inst: Instance) -> dict:
    return {
        "depot": inst.depot,
        "num_vehicles": inst.num_vehicles,
        "capacity": inst.capacity,
        "num_classes": inst.num_classes,
        "nodes": [{"id": nd.id, "x": nd.x, "y": nd.y} for nd in inst.nodes],
        "arcs": [
            {
                "id": a.id,
                "tail": a.tail,
                "head": a.head,
                "d": a.d,
                "required": a.required,
                "q": a.q,
                "s": a.s,
                "p": a.p,
            }
            for a in inst.arcs
        ],
    }


def instance_from_dict(data: dict) -> Instance:
    nodes = [Node(id=int(nd["id"]), x=float(nd["x"]), y=float(nd["y"])) for nd in data["nodes"]]
    arcs = [
        Arc(
            id=int(a["id"]),
            tail=int(a["tail"]),
            head=int(a["head"]),
            d=float(a["d"]),
            required=bool(a["required"]),
            q=float(a["q"]),
            s=float(a["s"]),
            p=int(a["p"]),
        )
        for a in data["arcs"]
    ]
    return Instance(
        nodes=nodes,
        arcs=arcs,
        depot=int(data["depot"]),
        num_vehicles=int(data["num_vehicles"]),
        capacity=float(data["capacity"]),
        num_classes=int(data["num_classes"]),
    )


def save_instance(inst: Instance, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(instance_to_dict(inst), fh)
        fh.write("\n")


def load_instance(path) -> Instance:
    with open(path, "r", encoding="utf-8") as fh:
        return instance_from_dict(json.load(fh))
