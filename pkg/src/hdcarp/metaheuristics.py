"""Iterated local search, an evolutionary algorithm and ant colony optimization.

All three sit on top of the greedy constructor and the swap local search and
return feasible solutions. Randomness flows from a single seed through
numpy SeedSequence spawning, so results are bit-identical for a fixed seed
regardless of how many worker threads evaluate swap candidates.
"""
from __future__ import annotations

import functools
from dataclasses import dataclass, field

import numpy as np

from .construct import construct
from .errors import ConstructionError
from .graph import DeadheadMatrix, Instance
from .local_search import local_search
from .solution import (
    TOL,
    HierarchicalObjective,
    Route,
    Solution,
    Variant,
    combine_completions,
    lex_compare,
    route_class_completions,
    route_demand,
)

EPS0 = 1e-6  # pheromone / distance floor for the ant transition rule


def _objective(inst: Instance, mat: DeadheadMatrix, sol: Solution) -> HierarchicalObjective:
    per_route = [route_class_completions(inst, mat, r.serviced) for r in sol.routes]
    return HierarchicalObjective(tuple(combine_completions(per_route, inst.num_classes)))


# ---------------------------------------------------------------------------
# Iterated local search
# ---------------------------------------------------------------------------

def perturb(sol: Solution, inst: Instance, variant: Variant, rng: np.random.Generator) -> Solution:
    """Swap two same-class arcs on one route, all choices uniform.

    Picks a class among those having some route with at least two arcs of
    that class, then such a route, then two distinct positions. Same-class
    swaps keep P routes class-monotone. Returns the input unchanged when no
    eligible (class, route) pair exists.
    """
    eligible: dict[int, list[int]] = {}
    for r_idx, route in enumerate(sol.routes):
        counts: dict[int, int] = {}
        for arc_id in route.serviced:
            p = inst.arcs[arc_id].p
            counts[p] = counts.get(p, 0) + 1
        for p, c in counts.items():
            if c >= 2:
                eligible.setdefault(p, []).append(r_idx)
    if not eligible:
        return sol

    classes = sorted(eligible)
    class_p = classes[int(rng.integers(len(classes)))]
    routes = eligible[class_p]
    r_idx = routes[int(rng.integers(len(routes)))]
    positions = [
        i for i, arc_id in enumerate(sol.routes[r_idx].serviced)
        if inst.arcs[arc_id].p == class_p
    ]
    pick = rng.choice(len(positions), size=2, replace=False)
    i, j = positions[int(pick[0])], positions[int(pick[1])]

    out = sol.copy()
    seq = out.routes[r_idx].serviced
    seq[i], seq[j] = seq[j], seq[i]
    return out


def ils(
    inst: Instance,
    mat: DeadheadMatrix,
    variant: Variant,
    k_max: int = 10,
    seed=None,
    threads: int = 1,
) -> Solution:
    """Construct, improve, then k_max rounds of perturb-and-reoptimize,
    accepting only lexicographic improvements over the incumbent."""
    rng = np.random.default_rng(seed)
    best = local_search(inst, mat, construct(inst, mat, variant, rng), variant, threads)
    best_obj = _objective(inst, mat, best)
    for _ in range(k_max):
        cand = local_search(inst, mat, perturb(best, inst, variant, rng), variant, threads)
        cand_obj = _objective(inst, mat, cand)
        if lex_compare(cand_obj, best_obj) < 0:
            best, best_obj = cand, cand_obj
    return best


# ---------------------------------------------------------------------------
# Evolutionary algorithm
# ---------------------------------------------------------------------------

@dataclass
class Population:
    members: list[tuple[Solution, HierarchicalObjective]]
    capacity: int

    def truncate(self) -> None:
        self.members.sort(key=functools.cmp_to_key(lambda a, b: lex_compare(a[1], b[1])))
        del self.members[self.capacity:]

    def best(self) -> tuple[Solution, HierarchicalObjective]:
        best = self.members[0]
        for member in self.members[1:]:
            if lex_compare(member[1], best[1]) < 0:
                best = member
        return best


def _class_positions(inst: Instance, serviced: list[int], class_p: int) -> list[int]:
    return [i for i, a in enumerate(serviced) if inst.arcs[a].p == class_p]


def _exchange_route(
    seq: list[int], positions: list[int], incoming: list[int], k_a: int, k_b: int, at_empty: int
) -> list[int]:
    """Replace the first k_a class-p slots of a route with the first k_b
    incoming arcs, slot by slot; surplus incoming arcs splice in after the
    last replaced slot, surplus slots are deleted. With no class-p slots the
    incoming block goes at `at_empty`."""
    out = list(seq)
    n_pair = min(k_a, k_b)
    for idx in range(n_pair):
        out[positions[idx]] = incoming[idx]
    if k_a > k_b:
        for pos in reversed(positions[k_b:k_a]):
            del out[pos]
    elif k_b > k_a:
        splice_at = at_empty if not positions else (
            positions[k_a - 1] + 1 if k_a > 0 else positions[0]
        )
        out[splice_at:splice_at] = incoming[k_a:k_b]
    return out


def crossover(
    inst: Instance,
    mat: DeadheadMatrix,
    parent_a: Solution,
    parent_b: Solution,
    class_p: int,
    variant: Variant,
) -> Solution:
    """One offspring: parent A with its class-p arcs per route replaced,
    slot-aligned, by parent B's class-p arcs for the same route index.

    Incoming arcs already present elsewhere in the offspring are dropped. A
    route that would exceed capacity exchanges progressively shorter prefixes
    of both segments instead, shrinking from the right one arc at a time and
    alternating sides (the empty exchange restores the parent route).
    Class-p arcs lost in the exchange are re-appended greedily at the class
    boundary of whichever route yields the best objective; if some lost arc
    fits nowhere, the offspring falls back to a copy of parent A. Identical
    parents reproduce themselves exactly.
    """
    seg_pos = [_class_positions(inst, r.serviced, class_p) for r in parent_a.routes]
    present: set[int] = set()  # arcs committed to the offspring so far
    for r, route in enumerate(parent_a.routes):
        removed = set(seg_pos[r])
        present.update(a for i, a in enumerate(route.serviced) if i not in removed)

    new_routes: list[list[int]] = []
    for r, route in enumerate(parent_a.routes):
        positions = seg_pos[r]
        incoming = [
            a for a in parent_b.routes[r].serviced
            if inst.arcs[a].p == class_p and a not in present
        ]
        if variant is Variant.P:
            at_empty = sum(1 for a in route.serviced if inst.arcs[a].p < class_p)
        else:
            at_empty = len(route.serviced)

        k_a, k_b = len(positions), len(incoming)
        shrink_b = True
        while True:
            trial = _exchange_route(route.serviced, positions, incoming, k_a, k_b, at_empty)
            if route_demand(inst, trial) <= inst.capacity + TOL:
                break
            if k_a == 0 and k_b == 0:
                break
            if shrink_b and k_b > 0:
                k_b -= 1
            elif k_a > 0:
                k_a -= 1
            else:
                k_b -= 1
            shrink_b = not shrink_b
        new_routes.append(trial)
        present.update(trial)

    # Interacting shrinks can reintroduce an arc twice; keep first occurrences.
    seen: set[int] = set()
    for r, seq in enumerate(new_routes):
        deduped = []
        for a in seq:
            if a not in seen:
                seen.add(a)
                deduped.append(a)
        new_routes[r] = deduped

    # Re-insert class-p arcs that fell out of the exchange.
    lost = sorted(a.id for a in inst.arcs_of_class(class_p) if a.id not in seen)
    for arc_id in lost:
        arc = inst.arcs[arc_id]
        best_r, best_obj = -1, None
        trial_routes = None
        for r, seq in enumerate(new_routes):
            if route_demand(inst, seq) + arc.q > inst.capacity + TOL:
                continue
            if variant is Variant.P:
                at = sum(1 for a in seq if inst.arcs[a].p <= class_p)
            else:
                at = len(seq)
            trial = seq[:at] + [arc_id] + seq[at:]
            candidate = [s if i != r else trial for i, s in enumerate(new_routes)]
            obj = combine_completions(
                [route_class_completions(inst, mat, s) for s in candidate],
                inst.num_classes,
            )
            if best_obj is None or lex_compare(obj, best_obj) < 0:
                best_r, best_obj, trial_routes = r, obj, candidate
        if best_r < 0:
            return parent_a.copy()
        new_routes = trial_routes

    return Solution([Route(m, seq) for m, seq in enumerate(new_routes)])


def ea(
    inst: Instance,
    mat: DeadheadMatrix,
    variant: Variant,
    k_max: int = 100,
    population_size: int = 200,
    seed=None,
    threads: int = 1,
) -> Solution:
    """Elitist EA: top-4 parents, one offspring per parent pair via class-p
    segment exchange, local search on offspring, truncation to the best
    population_size members."""
    root = np.random.SeedSequence(seed)
    member_seeds = root.spawn(population_size)
    iter_seeds = root.spawn(k_max)

    members = []
    for ss in member_seeds:
        sol = construct(inst, mat, variant, np.random.default_rng(ss))
        members.append((sol, _objective(inst, mat, sol)))
    pop = Population(members, population_size)
    pop.truncate()

    for it in range(k_max):
        rng = np.random.default_rng(iter_seeds[it])
        class_p = int(rng.integers(1, inst.num_classes + 1))
        parents = pop.members[: min(4, len(pop.members))]
        offspring = []
        for i in range(len(parents)):
            for j in range(i + 1, len(parents)):
                child = crossover(inst, mat, parents[i][0], parents[j][0], class_p, variant)
                child = local_search(inst, mat, child, variant, threads)
                offspring.append((child, _objective(inst, mat, child)))
        pop.members.extend(offspring)
        pop.truncate()

    return pop.best()[0]


# ---------------------------------------------------------------------------
# Ant colony optimization
# ---------------------------------------------------------------------------

@dataclass
class PheromoneMatrix:
    """Pheromone levels between ordered pairs of required arcs."""

    tau: np.ndarray
    rho: float
    index: dict[int, int] = field(default_factory=dict)  # arc id -> matrix index

    @classmethod
    def zeros(cls, inst: Instance, rho: float) -> "PheromoneMatrix":
        req = sorted(a.id for a in inst.required_arcs)
        index = {arc_id: i for i, arc_id in enumerate(req)}
        return cls(tau=np.zeros((len(req), len(req))), rho=rho, index=index)

    def reinforce(self, sol: Solution, deposit: float) -> None:
        """Add deposit along consecutive serviced pairs of each route; routes
        with fewer than two arcs contribute nothing (the depot start is
        virtual, not a pair)."""
        for route in sol.routes:
            for a, b in zip(route.serviced, route.serviced[1:]):
                self.tau[self.index[a], self.index[b]] += deposit

    def evaporate(self) -> None:
        self.tau *= 1.0 - self.rho


def _ant_solution(
    inst: Instance,
    mat: DeadheadMatrix,
    pher: PheromoneMatrix,
    beta: float,
    rng: np.random.Generator,
) -> Solution | None:
    """One ant: class-sequential randomized construction guided by pheromone
    and inverse deadhead distance. Returns None when the ant dead-ends."""
    routes: list[list[int]] = [[] for _ in range(inst.num_vehicles)]
    loads = [0.0] * inst.num_vehicles
    last_arc: list[int | None] = [None] * inst.num_vehicles

    for class_p in range(1, inst.num_classes + 1):
        remaining = sorted(a.id for a in inst.arcs_of_class(class_p))
        while remaining:
            cands: list[tuple[int, int]] = []
            weights: list[float] = []
            for m in range(inst.num_vehicles):
                for arc_id in remaining:
                    arc = inst.arcs[arc_id]
                    if loads[m] + arc.q > inst.capacity + TOL:
                        continue
                    if last_arc[m] is None:
                        tau = 0.0
                        dist = float(mat.sp[inst.depot, arc.tail])
                    else:
                        prev = inst.arcs[last_arc[m]]
                        tau = float(pher.tau[pher.index[prev.id], pher.index[arc_id]])
                        dist = float(mat.sp[prev.head, arc.tail])
                    w = (tau + EPS0) * (1.0 / (dist + EPS0)) ** beta
                    cands.append((m, arc_id))
                    weights.append(w)
            if not cands:
                return None
            total = sum(weights)
            r = rng.random() * total
            acc = 0.0
            chosen = len(cands) - 1
            for idx, w in enumerate(weights):
                acc += w
                if r <= acc:
                    chosen = idx
                    break
            m, arc_id = cands[chosen]
            routes[m].append(arc_id)
            loads[m] += inst.arcs[arc_id].q
            last_arc[m] = arc_id
            remaining.remove(arc_id)

    return Solution([Route(m, seq) for m, seq in enumerate(routes)])


def aco(
    inst: Instance,
    mat: DeadheadMatrix,
    variant: Variant,
    n_ant: int = 50,
    k_max: int = 100,
    rho: float = 0.5,
    beta: float = 2.0,
    seed=None,
    threads: int = 1,
) -> Solution:
    """Ant colony optimization with zero-initialized pheromones.

    Each iteration builds n_ant solutions, improves them with local search,
    reinforces the iteration best by 1/T_1 along its consecutive serviced
    pairs and then evaporates. Dead-ended ants are discarded; an iteration
    with no surviving ant is a fault.
    """
    root = np.random.SeedSequence(seed)
    pher = PheromoneMatrix.zeros(inst, rho)
    best: Solution | None = None
    best_obj: HierarchicalObjective | None = None

    for _ in range(k_max):
        ant_seeds = root.spawn(n_ant)
        iter_best: Solution | None = None
        iter_best_obj: HierarchicalObjective | None = None
        for ss in ant_seeds:
            sol = _ant_solution(inst, mat, pher, beta, np.random.default_rng(ss))
            if sol is None:
                continue
            sol = local_search(inst, mat, sol, variant, threads)
            obj = _objective(inst, mat, sol)
            if iter_best_obj is None or lex_compare(obj, iter_best_obj) < 0:
                iter_best, iter_best_obj = sol, obj
        if iter_best is None:
            raise ConstructionError("all ants dead-ended in an iteration")
        if best_obj is None or lex_compare(iter_best_obj, best_obj) < 0:
            best, best_obj = iter_best, iter_best_obj

        t1 = iter_best_obj[0]
        if t1 <= TOL:  # no class-1 arcs: fall back to the first nonzero stage
            t1 = next((x for x in iter_best_obj if x > TOL), 0.0)
        if t1 > TOL:
            pher.reinforce(iter_best, 1.0 / t1)
        pher.evaporate()

    return best
