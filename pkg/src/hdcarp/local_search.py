"""Swap-based local search for both variants.

Improvement proceeds class by class. For a given class p, swappable positions
on a route are restricted to a window:

* variant P: the contiguous block of class-p arcs (routes are class-monotone,
  so same-class swaps keep them monotone);
* variant U: the hierarchy-level span, from just after the position where all
  classes below p are complete through the last class-p arc. Arcs of any class
  inside that span may be swapped, which is exactly the extra freedom the U
  variant buys.

A swap inside a class-p window can change completion times of classes >= p on
the touched routes but never classes < p (the route prefix is untouched), so
ascending-class sweeps never undo earlier stages. Deltas are nevertheless
computed on the full objective vector.

Candidate evaluation is pure and may be spread over worker threads; the
reduction is a commutative min with a total tie-break (smallest position
pair), so 1 and N workers give identical results.
"""
from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Optional, Sequence

from .graph import DeadheadMatrix, Instance
from .solution import (
    TOL,
    Solution,
    Variant,
    combine_completions,
    lex_compare,
    route_class_completions,
    route_demand,
)


@dataclass(frozen=True)
class SubTourView:
    """Half-open window [lo, hi) of swappable positions on one route."""

    route: int
    lo: int
    hi: int

    def __len__(self) -> int:
        return max(0, self.hi - self.lo)

    def positions(self) -> range:
        return range(self.lo, self.hi)


@dataclass(frozen=True)
class SwapDelta:
    delta: tuple[float, ...]   # objective after - before
    improving: bool


def _sentinel(num_classes: int) -> SwapDelta:
    return SwapDelta(tuple([0.0] * num_classes), False)


def get_subtour_p(classes: Sequence[int], class_p: int) -> tuple[int, int]:
    """Window over the contiguous class-p block of a class-monotone route."""
    idx = [i for i, c in enumerate(classes) if c == class_p]
    if not idx:
        return (0, 0)
    return (idx[0], idx[-1] + 1)


def get_subtour_u(classes: Sequence[int], class_p: int) -> tuple[int, int]:
    """Hierarchy-level window: after classes < p are complete, through the
    last class-p arc. Empty when the route has no class-p arc or its last
    class-p arc precedes the completion of the lower classes."""
    end_prev = -1
    for i, c in enumerate(classes):
        if c < class_p and i > end_prev:
            end_prev = i
    last_p = -1
    for i, c in enumerate(classes):
        if c == class_p:
            last_p = i
    if last_p < 0 or last_p <= end_prev:
        return (0, 0)
    return (end_prev + 1, last_p + 1)


def make_view(inst: Instance, sol: Solution, route: int, class_p: int, variant: Variant) -> SubTourView:
    classes = [inst.arcs[a].p for a in sol.routes[route].serviced]
    fn = get_subtour_p if variant is Variant.P else get_subtour_u
    lo, hi = fn(classes, class_p)
    return SubTourView(route, lo, hi)


def apply_intra_swap(sol: Solution, route: int, i: int, j: int) -> None:
    seq = sol.routes[route].serviced
    seq[i], seq[j] = seq[j], seq[i]


def apply_inter_swap(sol: Solution, route_a: int, i: int, route_b: int, j: int) -> None:
    seq_a = sol.routes[route_a].serviced
    seq_b = sol.routes[route_b].serviced
    seq_a[i], seq_b[j] = seq_b[j], seq_a[i]


def _others_max(table: list[list[float]], skip: set[int], num_classes: int) -> list[float]:
    out = [0.0] * num_classes
    for r, comp in enumerate(table):
        if r in skip:
            continue
        for k in range(num_classes):
            if comp[k] > out[k]:
                out[k] = comp[k]
    return out


def _max_vec(*vecs: Sequence[float]) -> list[float]:
    out = list(vecs[0])
    for v in vecs[1:]:
        for k, x in enumerate(v):
            if x > out[k]:
                out[k] = x
    return out


def _scan_candidates(evaluate_one, candidates, pool: Optional[ThreadPoolExecutor]):
    """Return (best_obj, best_pair) minimizing the objective lexicographically,
    ties broken by the earliest candidate. `evaluate_one` returns an objective
    vector or None for skipped candidates."""

    def scan(chunk):
        best_obj, best_pair = None, None
        for pair in chunk:
            obj = evaluate_one(pair)
            if obj is None:
                continue
            if best_obj is None or lex_compare(obj, best_obj) < 0:
                best_obj, best_pair = obj, pair
        return best_obj, best_pair

    if pool is None:
        return scan(candidates)

    workers = pool._max_workers
    size = max(1, (len(candidates) + workers - 1) // workers)
    chunks = [candidates[i : i + size] for i in range(0, len(candidates), size)]
    best_obj, best_pair = None, None
    for obj, pair in pool.map(scan, chunks):
        if obj is None:
            continue
        if best_obj is None or lex_compare(obj, best_obj) < 0:
            best_obj, best_pair = obj, pair
    return best_obj, best_pair


def best_swap_intra(
    inst: Instance,
    mat: DeadheadMatrix,
    sol: Solution,
    view: SubTourView,
    pool: Optional[ThreadPoolExecutor] = None,
) -> tuple[SwapDelta, Optional[tuple[int, int]]]:
    """Best position pair (i, j), i < j, to swap inside the window.

    The delta is the full objective change; non-improving results carry
    improving=False. Windows with fewer than two positions yield a sentinel.
    """
    p = inst.num_classes
    if len(view) < 2:
        return _sentinel(p), None

    table = [route_class_completions(inst, mat, r.serviced) for r in sol.routes]
    base_obj = combine_completions(table, p)
    others = _others_max(table, {view.route}, p)
    seq = sol.routes[view.route].serviced

    def evaluate_one(pair):
        i, j = pair
        trial = list(seq)
        trial[i], trial[j] = trial[j], trial[i]
        comp = route_class_completions(inst, mat, trial)
        return _max_vec(others, comp)

    candidates = [
        (i, j) for i in view.positions() for j in range(i + 1, view.hi)
    ]
    best_obj, best_pair = _scan_candidates(evaluate_one, candidates, pool)
    if best_obj is None:
        return _sentinel(p), None
    delta = tuple(a - b for a, b in zip(best_obj, base_obj))
    return SwapDelta(delta, lex_compare(best_obj, base_obj) < 0), best_pair


def best_swap_inter(
    inst: Instance,
    mat: DeadheadMatrix,
    sol: Solution,
    view_a: SubTourView,
    view_b: SubTourView,
    pool: Optional[ThreadPoolExecutor] = None,
) -> tuple[SwapDelta, Optional[tuple[int, int]]]:
    """Best exchange of one arc from each window across two distinct routes.

    Exchanges that push either route over capacity are skipped.
    """
    p = inst.num_classes
    if view_a.route == view_b.route:
        raise ValueError("best_swap_inter needs two distinct routes")
    if len(view_a) == 0 or len(view_b) == 0:
        return _sentinel(p), None

    table = [route_class_completions(inst, mat, r.serviced) for r in sol.routes]
    base_obj = combine_completions(table, p)
    others = _others_max(table, {view_a.route, view_b.route}, p)
    seq_a = sol.routes[view_a.route].serviced
    seq_b = sol.routes[view_b.route].serviced
    load_a = route_demand(inst, seq_a)
    load_b = route_demand(inst, seq_b)
    cap = inst.capacity

    def evaluate_one(pair):
        i, j = pair
        qa = inst.arcs[seq_a[i]].q
        qb = inst.arcs[seq_b[j]].q
        if load_a - qa + qb > cap + TOL or load_b - qb + qa > cap + TOL:
            return None
        trial_a = list(seq_a)
        trial_b = list(seq_b)
        trial_a[i], trial_b[j] = trial_b[j], trial_a[i]
        comp_a = route_class_completions(inst, mat, trial_a)
        comp_b = route_class_completions(inst, mat, trial_b)
        return _max_vec(others, comp_a, comp_b)

    candidates = [(i, j) for i in view_a.positions() for j in view_b.positions()]
    best_obj, best_pair = _scan_candidates(evaluate_one, candidates, pool)
    if best_obj is None:
        return _sentinel(p), None
    delta = tuple(a - b for a, b in zip(best_obj, base_obj))
    return SwapDelta(delta, lex_compare(best_obj, base_obj) < 0), best_pair


def local_search(
    inst: Instance,
    mat: DeadheadMatrix,
    sol: Solution,
    variant: Variant,
    threads: int = 1,
) -> Solution:
    """Sweep intra- then inter-route swaps per class until no move improves.

    Returns a new solution; the input is left untouched. Every accepted swap
    strictly improves the objective lexicographically, so the sweeps
    terminate.
    """
    work = sol.copy()
    num_routes = len(work.routes)
    pool = ThreadPoolExecutor(max_workers=threads) if threads > 1 else None
    try:
        for class_p in range(1, inst.num_classes + 1):
            while True:
                improved = False
                for r in range(num_routes):
                    while True:
                        view = make_view(inst, work, r, class_p, variant)
                        delta, pair = best_swap_intra(inst, mat, work, view, pool)
                        if not delta.improving:
                            break
                        apply_intra_swap(work, r, pair[0], pair[1])
                        improved = True
                for ra in range(num_routes):
                    for rb in range(ra + 1, num_routes):
                        while True:
                            va = make_view(inst, work, ra, class_p, variant)
                            vb = make_view(inst, work, rb, class_p, variant)
                            delta, pair = best_swap_inter(inst, mat, work, va, vb, pool)
                            if not delta.improving:
                                break
                            apply_inter_swap(work, ra, pair[0], rb, pair[1])
                            improved = True
                if not improved:
                    break
    finally:
        if pool is not None:
            pool.shutdown()
    return work
