"""Exact-method machinery: MILP emission, cut separation and a desk-scale oracle.

The mixed-integer models operate on a transformed graph: a dummy node is
added, acting as the intermediate point between class (variant P) or
hierarchy-level (variant U) segments of each route, with zero-cost arcs to
and from every required-arc tail vertex and the depot. Models are emitted in
LP file format, one file per lexicographic stage; solving them is out of
scope here, so optimality at desk scale comes from exhaustive enumeration.
"""
from __future__ import annotations

import itertools
import json
import re
import subprocess
from dataclasses import dataclass, field

from .errors import LimitExceededError, SolverError
from .graph import Arc, DeadheadMatrix, Instance, compute_deadhead_matrix
from .solution import (
    TOL,
    HierarchicalObjective,
    Route,
    Solution,
    Variant,
    lex_compare,
    route_class_completions,
)

FEAS_TOL = 1e-6

ORACLE_MAX_ARCS = 8
ORACLE_MAX_VEHICLES = 3


# ---------------------------------------------------------------------------
# Graph transformation
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class TransformedGraph:
    """Base instance plus the dummy transition node and its zero-cost arcs.

    Dummy arcs are keyed "f{v}" (dummy -> v) and "t{v}" (v -> dummy); original
    arcs are keyed "a{id}". The connectable vertices are the tails of required
    arcs plus the depot, identically for both variants (the per-class tail
    sets union up to the same set).
    """

    inst: Instance
    dummy_node: int
    connect_nodes: tuple[int, ...]
    tails_by_class: dict[int, tuple[int, ...]]

    def arc_keys(self) -> list[str]:
        keys = [f"a{a.id}" for a in self.inst.arcs]
        keys += [f"f{v}" for v in self.connect_nodes]
        keys += [f"t{v}" for v in self.connect_nodes]
        return keys

    def num_arcs(self) -> int:
        return len(self.inst.arcs) + 2 * len(self.connect_nodes)


def transform_graph(inst: Instance, variant: Variant) -> TransformedGraph:
    tails_by_class = {
        k: tuple(sorted({a.tail for a in inst.arcs_of_class(k)}))
        for k in range(1, inst.num_classes + 1)
    }
    connect = {inst.depot}
    for tails in tails_by_class.values():
        connect.update(tails)
    return TransformedGraph(
        inst=inst,
        dummy_node=len(inst.nodes),
        connect_nodes=tuple(sorted(connect)),
        tails_by_class=tails_by_class,
    )


# ---------------------------------------------------------------------------
# Model representation
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class MilpVar:
    name: str
    kind: str  # "binary" | "integer" | "continuous"
    lb: float = 0.0
    ub: float | None = None  # None = +inf


@dataclass(frozen=True)
class MilpConstraint:
    name: str
    expr: dict[str, float]
    sense: str  # "<=" | ">=" | "="
    rhs: float


@dataclass
class MilpModel:
    variant: Variant
    variables: list[MilpVar]
    constraints: list[MilpConstraint]
    objective_stages: list[dict[str, float]]
    big_n: float
    var_index: dict[str, MilpVar] = field(default_factory=dict)

    def __post_init__(self):
        self.var_index = {v.name: v for v in self.variables}


def _big_n(inst: Instance, mat: DeadheadMatrix) -> float:
    return sum(a.s + a.d for a in inst.arcs) + len(inst.nodes) * float(mat.sp.max())


def _enumerate_cut_sets(inst: Instance) -> list[tuple[int, ...]]:
    others = [v for v in range(len(inst.nodes)) if v != inst.depot]
    sets: list[tuple[int, ...]] = []
    for size in range(1, len(others) + 1):
        sets.extend(itertools.combinations(others, size))
    return sets


def _arcs_within(inst: Instance, node_set: set[int]) -> list[Arc]:
    return [a for a in inst.arcs if a.tail in node_set and a.head in node_set]


def _leaving(inst: Instance, tg: TransformedGraph, node_set: set[int]):
    """Arc keys of A' leaving the node set (the dummy node is never inside)."""
    keys = [f"a{a.id}" for a in inst.arcs if a.tail in node_set and a.head not in node_set]
    keys += [f"t{v}" for v in tg.connect_nodes if v in node_set]
    return keys


def emit_milp_p(
    inst: Instance,
    tg: TransformedGraph,
    subtour_mode: str,
    mat: DeadheadMatrix | None = None,
) -> MilpModel:
    """Variant-P model. subtour_mode "enumerate" materializes every
    connectivity constraint (|V| <= 10 only); "deferred" leaves them to
    separation."""
    if subtour_mode not in ("enumerate", "deferred"):
        raise ValueError(f"unknown subtour mode {subtour_mode!r}")
    if subtour_mode == "enumerate" and len(inst.nodes) > 10:
        raise LimitExceededError("enumerate mode limited to |V| <= 10")
    if mat is None:
        mat = compute_deadhead_matrix(inst)

    M = range(inst.num_vehicles)
    P = range(1, inst.num_classes + 1)
    req = inst.required_arcs
    big_n = _big_n(inst, mat)

    variables: list[MilpVar] = []
    variables += [MilpVar(f"x_a{a.id}_m{m}", "binary") for m in M for a in req]
    variables += [
        MilpVar(f"y_{key}_k{k}_m{m}", "integer")
        for m in M for k in P for key in tg.arc_keys()
    ]
    variables += [MilpVar(f"t_k{k}_m{m}", "continuous") for m in M for k in P]
    variables += [MilpVar(f"r_k{k}_m{m}", "binary") for m in M for k in P]
    variables += [MilpVar(f"T_k{k}", "continuous") for k in P]

    cons: list[MilpConstraint] = []

    for m in M:
        for k in P:
            # fleet completion dominates each route that services the class
            cons.append(MilpConstraint(
                f"class_completion_bound_k{k}_m{m}",
                {f"T_k{k}": 1.0, f"t_k{k}_m{m}": -1.0, f"r_k{k}_m{m}": -big_n},
                ">=", -big_n,
            ))
            # cumulative time chain: service plus deadheads of the class
            expr = {f"t_k{k}_m{m}": 1.0}
            if k > 1:
                expr[f"t_k{k - 1}_m{m}"] = -1.0
            for a in req:
                if a.p == k:
                    expr[f"x_a{a.id}_m{m}"] = -a.s
            for a in inst.arcs:
                expr[f"y_a{a.id}_k{k}_m{m}"] = expr.get(f"y_a{a.id}_k{k}_m{m}", 0.0) - a.d
            cons.append(MilpConstraint(f"time_chain_k{k}_m{m}", expr, "=", 0.0))
            # servicing any class-k arc raises the service indicator
            size = len(inst.arcs_of_class(k))
            expr = {f"x_a{a.id}_m{m}": 1.0 for a in req if a.p == k}
            expr[f"r_k{k}_m{m}"] = -float(size)
            cons.append(MilpConstraint(f"service_indicator_k{k}_m{m}", expr, "<=", 0.0))

    for m in M:
        cons.append(MilpConstraint(
            f"start_depot_m{m}", {f"y_f{inst.depot}_k1_m{m}": 1.0}, "=", 1.0,
        ))
        for k in P:
            expr = {f"y_f{v}_k{k}_m{m}": 1.0 for v in tg.connect_nodes}
            cons.append(MilpConstraint(f"level_departure_k{k}_m{m}", expr, "=", 1.0))
        for k in P:
            if k == 1:
                continue
            allowed = {inst.depot}
            for h in range(1, k):
                allowed.update(tg.tails_by_class[h])
            for v in sorted(allowed):
                cons.append(MilpConstraint(
                    f"level_link_k{k}_v{v}_m{m}",
                    {f"y_f{v}_k{k}_m{m}": 1.0, f"y_t{v}_k{k - 1}_m{m}": -1.0},
                    "=", 0.0,
                ))

    for a in req:
        cons.append(MilpConstraint(
            f"cover_a{a.id}", {f"x_a{a.id}_m{m}": 1.0 for m in M}, "=", 1.0,
        ))
    for m in M:
        cons.append(MilpConstraint(
            f"capacity_m{m}", {f"x_a{a.id}_m{m}": a.q for a in req}, "<=", inst.capacity,
        ))

    # per-class flow conservation on the transformed graph
    for m in M:
        for k in P:
            for v in range(len(inst.nodes) + 1):
                expr: dict[str, float] = {}
                if v < len(inst.nodes):
                    for a in inst.arcs:
                        if a.tail == v:
                            expr[f"y_a{a.id}_k{k}_m{m}"] = expr.get(f"y_a{a.id}_k{k}_m{m}", 0.0) + 1.0
                            if a.required and a.p == k:
                                expr[f"x_a{a.id}_m{m}"] = expr.get(f"x_a{a.id}_m{m}", 0.0) + 1.0
                        if a.head == v:
                            expr[f"y_a{a.id}_k{k}_m{m}"] = expr.get(f"y_a{a.id}_k{k}_m{m}", 0.0) - 1.0
                            if a.required and a.p == k:
                                expr[f"x_a{a.id}_m{m}"] = expr.get(f"x_a{a.id}_m{m}", 0.0) - 1.0
                    if v in tg.connect_nodes:
                        expr[f"y_t{v}_k{k}_m{m}"] = expr.get(f"y_t{v}_k{k}_m{m}", 0.0) + 1.0
                        expr[f"y_f{v}_k{k}_m{m}"] = expr.get(f"y_f{v}_k{k}_m{m}", 0.0) - 1.0
                else:
                    for u in tg.connect_nodes:
                        expr[f"y_f{u}_k{k}_m{m}"] = 1.0
                        expr[f"y_t{u}_k{k}_m{m}"] = -1.0
                expr = {n: c for n, c in expr.items() if c != 0.0}
                if expr:
                    cons.append(MilpConstraint(f"flow_k{k}_v{v}_m{m}", expr, "=", 0.0))

    if subtour_mode == "enumerate":
        for si, subset in enumerate(_enumerate_cut_sets(inst)):
            node_set = set(subset)
            inside = _arcs_within(inst, node_set)
            leaving = _leaving(inst, tg, node_set)
            for k in P:
                targets = [a for a in inside if a.required and a.p == k]
                if not targets:
                    continue
                for m in M:
                    base = {f"y_{key}_k{k}_m{m}": 1.0 for key in leaving}
                    for a in inst.arcs:
                        if a.required and a.p == k and a.tail in node_set and a.head not in node_set:
                            base[f"x_a{a.id}_m{m}"] = 1.0
                    for b in targets:
                        expr = dict(base)
                        expr[f"x_a{b.id}_m{m}"] = expr.get(f"x_a{b.id}_m{m}", 0.0) - 1.0
                        cons.append(MilpConstraint(
                            f"connectivity_k{k}_m{m}_s{si}_b{b.id}", expr, ">=", 0.0,
                        ))

    stages = [{f"T_k{k}": 1.0} for k in P]
    return MilpModel(Variant.P, variables, cons, stages, big_n)


def emit_milp_u(
    inst: Instance,
    tg: TransformedGraph,
    subtour_mode: str,
    mat: DeadheadMatrix | None = None,
) -> MilpModel:
    """Variant-U model: servicing is indexed by hierarchy level, so any class
    may be serviced at any level and the class/level incidence gets its own
    indicator variables."""
    if subtour_mode not in ("enumerate", "deferred"):
        raise ValueError(f"unknown subtour mode {subtour_mode!r}")
    if subtour_mode == "enumerate" and len(inst.nodes) > 10:
        raise LimitExceededError("enumerate mode limited to |V| <= 10")
    if mat is None:
        mat = compute_deadhead_matrix(inst)

    M = range(inst.num_vehicles)
    P = range(1, inst.num_classes + 1)
    req = inst.required_arcs
    big_n = _big_n(inst, mat)

    variables: list[MilpVar] = []
    variables += [MilpVar(f"x_a{a.id}_h{h}_m{m}", "binary") for m in M for h in P for a in req]
    variables += [
        MilpVar(f"y_{key}_h{h}_m{m}", "integer")
        for m in M for h in P for key in tg.arc_keys()
    ]
    variables += [MilpVar(f"t_h{h}_m{m}", "continuous") for m in M for h in P]
    variables += [MilpVar(f"r_k{k}_h{h}_m{m}", "binary") for m in M for k in P for h in P]
    variables += [MilpVar(f"T_k{k}", "continuous") for k in P]

    cons: list[MilpConstraint] = []

    for m in M:
        for h in P:
            for k in P:
                cons.append(MilpConstraint(
                    f"class_completion_bound_k{k}_h{h}_m{m}",
                    {f"T_k{k}": 1.0, f"t_h{h}_m{m}": -1.0, f"r_k{k}_h{h}_m{m}": -big_n},
                    ">=", -big_n,
                ))
            expr = {f"t_h{h}_m{m}": 1.0}
            if h > 1:
                expr[f"t_h{h - 1}_m{m}"] = -1.0
            for a in req:
                expr[f"x_a{a.id}_h{h}_m{m}"] = -a.s
            for a in inst.arcs:
                expr[f"y_a{a.id}_h{h}_m{m}"] = expr.get(f"y_a{a.id}_h{h}_m{m}", 0.0) - a.d
            cons.append(MilpConstraint(f"time_chain_h{h}_m{m}", expr, "=", 0.0))
            for k in P:
                size = len(inst.arcs_of_class(k))
                expr = {f"x_a{a.id}_h{h}_m{m}": 1.0 for a in req if a.p == k}
                expr[f"r_k{k}_h{h}_m{m}"] = -float(size)
                cons.append(MilpConstraint(f"service_indicator_k{k}_h{h}_m{m}", expr, "<=", 0.0))

    for m in M:
        cons.append(MilpConstraint(
            f"start_depot_m{m}", {f"y_f{inst.depot}_h1_m{m}": 1.0}, "=", 1.0,
        ))
        for h in P:
            expr = {f"y_f{v}_h{h}_m{m}": 1.0 for v in tg.connect_nodes}
            cons.append(MilpConstraint(f"level_departure_h{h}_m{m}", expr, "=", 1.0))
        for h in P:
            if h == 1:
                continue
            for v in tg.connect_nodes:
                cons.append(MilpConstraint(
                    f"level_link_h{h}_v{v}_m{m}",
                    {f"y_f{v}_h{h}_m{m}": 1.0, f"y_t{v}_h{h - 1}_m{m}": -1.0},
                    "=", 0.0,
                ))

    for a in req:
        cons.append(MilpConstraint(
            f"cover_a{a.id}",
            {f"x_a{a.id}_h{h}_m{m}": 1.0 for m in M for h in P},
            "=", 1.0,
        ))
    for m in M:
        cons.append(MilpConstraint(
            f"capacity_m{m}",
            {f"x_a{a.id}_h{h}_m{m}": a.q for h in P for a in req},
            "<=", inst.capacity,
        ))

    for m in M:
        for h in P:
            for v in range(len(inst.nodes) + 1):
                expr: dict[str, float] = {}
                if v < len(inst.nodes):
                    for a in inst.arcs:
                        if a.tail == v:
                            expr[f"y_a{a.id}_h{h}_m{m}"] = expr.get(f"y_a{a.id}_h{h}_m{m}", 0.0) + 1.0
                            if a.required:
                                expr[f"x_a{a.id}_h{h}_m{m}"] = expr.get(f"x_a{a.id}_h{h}_m{m}", 0.0) + 1.0
                        if a.head == v:
                            expr[f"y_a{a.id}_h{h}_m{m}"] = expr.get(f"y_a{a.id}_h{h}_m{m}", 0.0) - 1.0
                            if a.required:
                                expr[f"x_a{a.id}_h{h}_m{m}"] = expr.get(f"x_a{a.id}_h{h}_m{m}", 0.0) - 1.0
                    if v in tg.connect_nodes:
                        expr[f"y_t{v}_h{h}_m{m}"] = expr.get(f"y_t{v}_h{h}_m{m}", 0.0) + 1.0
                        expr[f"y_f{v}_h{h}_m{m}"] = expr.get(f"y_f{v}_h{h}_m{m}", 0.0) - 1.0
                else:
                    for u in tg.connect_nodes:
                        expr[f"y_f{u}_h{h}_m{m}"] = 1.0
                        expr[f"y_t{u}_h{h}_m{m}"] = -1.0
                expr = {n: c for n, c in expr.items() if c != 0.0}
                if expr:
                    cons.append(MilpConstraint(f"flow_h{h}_v{v}_m{m}", expr, "=", 0.0))

    if subtour_mode == "enumerate":
        for si, subset in enumerate(_enumerate_cut_sets(inst)):
            node_set = set(subset)
            inside = [a for a in _arcs_within(inst, node_set) if a.required]
            if not inside:
                continue
            leaving = _leaving(inst, tg, node_set)
            for h in P:
                for m in M:
                    base = {f"y_{key}_h{h}_m{m}": 1.0 for key in leaving}
                    for a in inst.arcs:
                        if a.required and a.tail in node_set and a.head not in node_set:
                            base[f"x_a{a.id}_h{h}_m{m}"] = 1.0
                    for b in inside:
                        expr = dict(base)
                        expr[f"x_a{b.id}_h{h}_m{m}"] = expr.get(f"x_a{b.id}_h{h}_m{m}", 0.0) - 1.0
                        cons.append(MilpConstraint(
                            f"connectivity_h{h}_m{m}_s{si}_b{b.id}", expr, ">=", 0.0,
                        ))

    stages = [{f"T_k{k}": 1.0} for k in P]
    return MilpModel(Variant.U, variables, cons, stages, big_n)


def emit_milp(inst: Instance, tg: TransformedGraph, variant: Variant, subtour_mode: str,
              mat: DeadheadMatrix | None = None) -> MilpModel:
    fn = emit_milp_p if variant is Variant.P else emit_milp_u
    return fn(inst, tg, subtour_mode, mat)


# ---------------------------------------------------------------------------
# LP file emission
# ---------------------------------------------------------------------------

def _fmt(x: float) -> str:
    return f"{x:.17g}"


def _expr_text(expr: dict[str, float]) -> str:
    parts = []
    for name, coef in expr.items():
        sign = "+" if coef >= 0 else "-"
        parts.append(f"{sign} {_fmt(abs(coef))} {name}")
    return " ".join(parts)


def write_lp_files(
    model: MilpModel,
    out_dir,
    base: str,
    stage_values: list[float] | None = None,
) -> list[str]:
    """One LP file per lexicographic stage, `<base>.<variant>.stage<k>.lp`.

    Stage k minimizes the class-k completion variable under cap constraints on
    every earlier stage. Caps use the supplied stage values (plus 1e-6 slack);
    without values the caps default to the model's big-N, which keeps the
    files well-formed but non-binding until the earlier stages are solved.
    """
    import os

    os.makedirs(out_dir, exist_ok=True)
    variant = model.variant.value.lower()
    paths = []
    for k, stage_obj in enumerate(model.objective_stages, start=1):
        lines = [f"\\ lexicographic stage {k} of {len(model.objective_stages)}"]
        lines.append("Minimize")
        lines.append(" obj: " + _expr_text(stage_obj))
        lines.append("Subject To")
        for con in model.constraints:
            sense = con.sense if con.sense != "=" else "="
            lines.append(f" {con.name}: {_expr_text(con.expr)} {sense} {_fmt(con.rhs)}")
        for j in range(1, k):
            cap = (stage_values[j - 1] + FEAS_TOL) if stage_values else model.big_n
            lines.append(f" stage_cap_k{j}: + 1 T_k{j} <= {_fmt(cap)}")
        generals = [v.name for v in model.variables if v.kind == "integer"]
        binaries = [v.name for v in model.variables if v.kind == "binary"]
        if generals:
            lines.append("Generals")
            for i in range(0, len(generals), 8):
                lines.append(" " + " ".join(generals[i : i + 8]))
        if binaries:
            lines.append("Binaries")
            for i in range(0, len(binaries), 8):
                lines.append(" " + " ".join(binaries[i : i + 8]))
        lines.append("End")
        path = os.path.join(out_dir, f"{base}.{variant}.stage{k}.lp")
        with open(path, "w", encoding="utf-8") as fh:
            fh.write("\n".join(lines) + "\n")
        paths.append(path)
    return paths


# ---------------------------------------------------------------------------
# Assignment checking and separation
# ---------------------------------------------------------------------------

def check_model(model: MilpModel, assignment: dict[str, float]) -> list[str]:
    """Names of violated constraints / variable domains, empty if feasible.

    Every declared variable must be assigned; tolerance 1e-6 throughout.
    """
    violations: list[str] = []
    for var in model.variables:
        if var.name not in assignment:
            raise SolverError(f"assignment missing variable {var.name}")
        val = assignment[var.name]
        if var.kind in ("binary", "integer"):
            if abs(val - round(val)) > FEAS_TOL:
                violations.append(f"domain:{var.name}:not integral ({val})")
                continue
            val = round(val)
            if var.kind == "binary" and val not in (0, 1):
                violations.append(f"domain:{var.name}:not binary ({val})")
        if val < var.lb - FEAS_TOL or (var.ub is not None and val > var.ub + FEAS_TOL):
            violations.append(f"domain:{var.name}:out of bounds ({val})")

    for con in model.constraints:
        lhs = sum(assignment[n] * c for n, c in con.expr.items())
        if con.sense == "<=" and lhs > con.rhs + FEAS_TOL:
            violations.append(con.name)
        elif con.sense == ">=" and lhs < con.rhs - FEAS_TOL:
            violations.append(con.name)
        elif con.sense == "=" and abs(lhs - con.rhs) > FEAS_TOL:
            violations.append(con.name)
    return violations


_X_P = re.compile(r"^x_a(\d+)_m(\d+)$")
_X_U = re.compile(r"^x_a(\d+)_h(\d+)_m(\d+)$")
_Y_P = re.compile(r"^y_([aft])(\d+)_k(\d+)_m(\d+)$")
_Y_U = re.compile(r"^y_([aft])(\d+)_h(\d+)_m(\d+)$")


class _UnionFind:
    def __init__(self):
        self.parent: dict[int, int] = {}

    def find(self, x: int) -> int:
        self.parent.setdefault(x, x)
        root = x
        while self.parent[root] != root:
            root = self.parent[root]
        while self.parent[x] != root:
            self.parent[x], x = root, self.parent[x]
        return root

    def union(self, a: int, b: int) -> None:
        ra, rb = self.find(a), self.find(b)
        if ra != rb:
            self.parent[rb] = ra


def separate_connectivity(
    inst: Instance,
    tg: TransformedGraph,
    point: dict[str, float],
    tol: float = FEAS_TOL,
) -> list[dict]:
    """Violated connectivity cuts of a candidate (fractional or integral) point.

    Builds, per vehicle and class/level, the support graph of arcs with value
    above tolerance. The dummy node stands in for the depot (its zero-cost
    arcs anchor every legitimate segment there), so any support component
    that contains a serviced arc but not the depot corresponds to a violated
    cut. One cut per component, as {"component", "class", "vehicle"}.
    """
    is_u = any(_X_U.match(name) for name in point)
    x_re, y_re = (_X_U, _Y_U) if is_u else (_X_P, _Y_P)

    # (m, level) -> list of (tail, head) support arcs, and serviced arcs
    support: dict[tuple[int, int], list[tuple[int, int]]] = {}
    serviced: dict[tuple[int, int], list[Arc]] = {}
    for name, val in point.items():
        if val <= tol:
            continue
        mx = x_re.match(name)
        if mx:
            if is_u:
                arc_id, level, m = int(mx.group(1)), int(mx.group(2)), int(mx.group(3))
            else:
                arc_id, m = int(mx.group(1)), int(mx.group(2))
                level = inst.arcs[arc_id].p
            arc = inst.arcs[arc_id]
            support.setdefault((m, level), []).append((arc.tail, arc.head))
            serviced.setdefault((m, level), []).append(arc)
            continue
        my = y_re.match(name)
        if my:
            kind, ident, level, m = my.group(1), int(my.group(2)), int(my.group(3)), int(my.group(4))
            if kind == "a":
                arc = inst.arcs[ident]
                edge = (arc.tail, arc.head)
            elif kind == "f":
                edge = (inst.depot, ident)  # dummy identified with the depot
            else:
                edge = (ident, inst.depot)
            support.setdefault((m, level), []).append(edge)

    cuts: list[dict] = []
    for (m, level) in sorted(support):
        uf = _UnionFind()
        nodes: set[int] = set()
        for u, v in support[(m, level)]:
            nodes.update((u, v))
            uf.union(u, v)
        depot_root = uf.find(inst.depot) if inst.depot in nodes else None
        components: dict[int, set[int]] = {}
        for v in nodes:
            components.setdefault(uf.find(v), set()).add(v)
        for root, comp in sorted(components.items(), key=lambda kv: min(kv[1])):
            if depot_root is not None and root == depot_root:
                continue
            has_serviced = any(
                a.tail in comp and a.head in comp for a in serviced.get((m, level), [])
            )
            if has_serviced:
                cuts.append({
                    "component": sorted(comp),
                    "class": level,
                    "vehicle": m,
                })
    return cuts


def cuts_to_jsonl(cuts: list[dict]) -> str:
    return "".join(json.dumps(c) + "\n" for c in cuts)


# ---------------------------------------------------------------------------
# Solution <-> assignment encoding
# ---------------------------------------------------------------------------

def _min_d_arc_table(inst: Instance) -> dict[tuple[int, int], Arc]:
    table: dict[tuple[int, int], Arc] = {}
    for a in inst.arcs:
        key = (a.tail, a.head)
        if key not in table or a.d < table[key].d:
            table[key] = a
    return table


def _u_levels(inst: Instance, serviced: list[int]) -> list[list[int]]:
    """Split a route into hierarchy levels 1..p (level h ends at the last
    class-h arc after the previous level's end; levels may be empty)."""
    classes = [inst.arcs[a].p for a in serviced]
    segs: list[list[int]] = []
    end_prev = -1
    for h in range(1, inst.num_classes + 1):
        end_h = end_prev
        for i, c in enumerate(classes):
            if c == h and i > end_h:
                end_h = i
        segs.append(serviced[end_prev + 1 : end_h + 1])
        end_prev = end_h
    return segs


def encode_solution(
    model: MilpModel,
    inst: Instance,
    tg: TransformedGraph,
    mat: DeadheadMatrix,
    sol: Solution,
    variant: Variant,
) -> dict[str, float]:
    """Variable assignment realizing a feasible solution in the given model.

    Deadheads between serviced arcs follow shortest paths; transitions between
    class/level segments go through the dummy node at the cheapest vertex the
    level-link constraints allow. The resulting point satisfies every emitted
    constraint (including enumerated connectivity cuts).
    """
    values = {v.name: 0.0 for v in model.variables}
    arc_table = _min_d_arc_table(inst)
    P = range(1, inst.num_classes + 1)

    def y_name(key: str, level: int, m: int) -> str:
        tag = "h" if variant is Variant.U else "k"
        return f"y_{key}_{tag}{level}_m{m}"

    def deadhead(pos: int, target: int, level: int, m: int) -> None:
        path = mat.path_nodes(pos, target)
        for u, v in zip(path, path[1:]):
            arc = arc_table[(u, v)]
            values[y_name(f"a{arc.id}", level, m)] += 1.0

    for m, route in enumerate(sol.routes):
        if variant is Variant.P:
            segs = [
                [a for a in route.serviced if inst.arcs[a].p == k] for k in P
            ]
        else:
            segs = _u_levels(inst, route.serviced)

        values[y_name(f"f{inst.depot}", 1, m)] += 1.0
        pos = inst.depot
        for level in P:
            seg = segs[level - 1]
            if level >= 2:
                if variant is Variant.P:
                    allowed = {inst.depot}
                    for h in range(1, level):
                        allowed.update(tg.tails_by_class[h])
                else:
                    allowed = set(tg.connect_nodes)
                target = inst.arcs[seg[0]].tail if seg else pos
                trans = min(
                    allowed,
                    key=lambda v: (float(mat.sp[pos, v]) + float(mat.sp[v, target]), v),
                )
                deadhead(pos, trans, level - 1, m)
                values[y_name(f"t{trans}", level - 1, m)] += 1.0
                values[y_name(f"f{trans}", level, m)] += 1.0
                pos = trans
            for arc_id in seg:
                arc = inst.arcs[arc_id]
                deadhead(pos, arc.tail, level, m)
                if variant is Variant.P:
                    values[f"x_a{arc_id}_m{m}"] = 1.0
                else:
                    values[f"x_a{arc_id}_h{level}_m{m}"] = 1.0
                pos = arc.head
        final = min(tg.connect_nodes, key=lambda v: (float(mat.sp[pos, v]), v))
        deadhead(pos, final, inst.num_classes, m)
        values[y_name(f"t{final}", inst.num_classes, m)] += 1.0

        # completion indicators and times, consistent with the time chain
        if variant is Variant.P:
            for k in P:
                if segs[k - 1]:
                    values[f"r_k{k}_m{m}"] = 1.0
        else:
            for h in P:
                for arc_id in segs[h - 1]:
                    values[f"r_k{inst.arcs[arc_id].p}_h{h}_m{m}"] = 1.0

    # derive t from the emitted time-chain equalities so they hold exactly
    for m in range(inst.num_vehicles):
        prev = 0.0
        for level in P:
            tag = "h" if variant is Variant.U else "k"
            service = 0.0
            travel = 0.0
            for a in inst.arcs:
                travel += a.d * values[y_name(f"a{a.id}", level, m)]
            if variant is Variant.P:
                for a in inst.required_arcs:
                    if a.p == level:
                        service += a.s * values[f"x_a{a.id}_m{m}"]
            else:
                for a in inst.required_arcs:
                    service += a.s * values[f"x_a{a.id}_h{level}_m{m}"]
            prev = prev + service + travel
            values[f"t_{tag}{level}_m{m}"] = prev

    for k in P:
        best = 0.0
        for m in range(inst.num_vehicles):
            if variant is Variant.P:
                if values[f"r_k{k}_m{m}"] > 0.5:
                    best = max(best, values[f"t_k{k}_m{m}"])
            else:
                for h in P:
                    if values[f"r_k{k}_h{h}_m{m}"] > 0.5:
                        best = max(best, values[f"t_h{h}_m{m}"])
        values[f"T_k{k}"] = best

    return values


def assignment_to_solution(inst: Instance, point: dict[str, float], variant: Variant) -> Solution:
    """Decode serviced arcs per vehicle from an integral point. Within a
    class/level, service order is immaterial to the model's time chain, so
    arcs come out in ascending id order."""
    routes: list[list[int]] = [[] for _ in range(inst.num_vehicles)]
    if variant is Variant.P:
        per = {}
        for name, val in point.items():
            mx = _X_P.match(name)
            if mx and val > 0.5:
                arc_id, m = int(mx.group(1)), int(mx.group(2))
                per.setdefault(m, []).append(arc_id)
        for m, ids in per.items():
            routes[m] = sorted(ids, key=lambda a: (inst.arcs[a].p, a))
    else:
        per = {}
        for name, val in point.items():
            mx = _X_U.match(name)
            if mx and val > 0.5:
                arc_id, h, m = int(mx.group(1)), int(mx.group(2)), int(mx.group(3))
                per.setdefault(m, []).append((h, arc_id))
        for m, pairs in per.items():
            routes[m] = [a for _, a in sorted(pairs)]
    return Solution([Route(m, seq) for m, seq in enumerate(routes)])


# ---------------------------------------------------------------------------
# Brute-force oracle
# ---------------------------------------------------------------------------

def _valid_orders(inst: Instance, arc_ids: tuple[int, ...], variant: Variant):
    """All service orders allowed for a route holding these arcs."""
    if variant is Variant.U:
        yield from itertools.permutations(arc_ids)
        return
    by_class: dict[int, list[int]] = {}
    for a in arc_ids:
        by_class.setdefault(inst.arcs[a].p, []).append(a)
    blocks = [by_class[k] for k in sorted(by_class)]
    for perm_blocks in itertools.product(*(itertools.permutations(b) for b in blocks)):
        yield tuple(itertools.chain.from_iterable(perm_blocks))


def _pareto_min(cands: list[tuple[tuple[float, ...], tuple[int, ...]]]):
    """Vectors not componentwise-dominated by another candidate; the max
    composition across routes can never prefer a dominated vector."""
    cands = sorted(cands)
    kept: list[tuple[tuple[float, ...], tuple[int, ...]]] = []
    for vec, order in cands:
        dominated = False
        for kvec, _ in kept:
            if all(k <= v for k, v in zip(kvec, vec)):
                dominated = True
                break
        if not dominated:
            kept.append((vec, order))
    return kept


def brute_force_oracle(
    inst: Instance,
    mat: DeadheadMatrix,
    variant: Variant,
    max_arcs: int = ORACLE_MAX_ARCS,
    max_vehicles: int = ORACLE_MAX_VEHICLES,
) -> tuple[Solution, HierarchicalObjective]:
    """Exhaustive lexicographic optimum over all vehicle assignments and
    variant-valid service orders. Hard-limited to 8 required arcs and 3
    vehicles; deterministic."""
    req = sorted(a.id for a in inst.required_arcs)
    limit_arcs = min(max_arcs, ORACLE_MAX_ARCS)
    limit_vehicles = min(max_vehicles, ORACLE_MAX_VEHICLES)
    if len(req) > limit_arcs:
        raise LimitExceededError(f"oracle limited to {limit_arcs} required arcs, got {len(req)}")
    if inst.num_vehicles > limit_vehicles:
        raise LimitExceededError(
            f"oracle limited to {limit_vehicles} vehicles, got {inst.num_vehicles}"
        )

    demands = {a: inst.arcs[a].q for a in req}
    frontier_cache: dict[tuple[int, ...], list] = {}

    def frontier(arc_ids: tuple[int, ...]):
        if arc_ids not in frontier_cache:
            cands = []
            for order in _valid_orders(inst, arc_ids, variant):
                comp = tuple(route_class_completions(inst, mat, list(order)))
                cands.append((comp, order))
            if not cands:
                cands = [(tuple([0.0] * inst.num_classes), ())]
            frontier_cache[arc_ids] = _pareto_min(cands)
        return frontier_cache[arc_ids]

    best_obj: tuple[float, ...] | None = None
    best_orders: tuple[tuple[int, ...], ...] | None = None

    for assign in itertools.product(range(inst.num_vehicles), repeat=len(req)):
        route_sets: list[list[int]] = [[] for _ in range(inst.num_vehicles)]
        for arc_id, m in zip(req, assign):
            route_sets[m].append(arc_id)
        if any(sum(demands[a] for a in s) > inst.capacity + TOL for s in route_sets):
            continue
        fronts = [frontier(tuple(s)) for s in route_sets]
        for combo in itertools.product(*fronts):
            obj = tuple(
                max(vec[k] for vec, _ in combo) for k in range(inst.num_classes)
            )
            if best_obj is None or lex_compare(obj, best_obj) < 0:
                best_obj = obj
                best_orders = tuple(order for _, order in combo)

    if best_obj is None:
        raise SolverError("no capacity-feasible assignment exists")

    sol = Solution([Route(m, list(order)) for m, order in enumerate(best_orders)])
    return sol, HierarchicalObjective(best_obj)


# ---------------------------------------------------------------------------
# Optional external-solver hook (not used by any required path)
# ---------------------------------------------------------------------------

def run_external_solver(command: list[str], lp_path: str) -> dict[str, float]:
    """Run `command lp_path` and parse 'name value' pairs from stdout.

    Lines that do not look like a variable/value pair are ignored, which
    covers the common text solution formats (CBC/glpsol-style columns).
    """
    out = subprocess.run(
        [*command, lp_path], capture_output=True, text=True, check=True
    ).stdout
    values: dict[str, float] = {}
    for line in out.splitlines():
        parts = line.split()
        for i in range(len(parts) - 1):
            name, val = parts[i], parts[i + 1]
            if re.fullmatch(r"[xyrtT]_\S+", name):
                try:
                    values[name] = float(val)
                    break
                except ValueError:
                    continue
    return values
