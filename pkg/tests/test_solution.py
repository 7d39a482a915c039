import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hdcarp.errors import InfeasibleSolutionError
from hdcarp.graph import compute_deadhead_matrix
from hdcarp.solution import (
    HierarchicalObjective,
    Route,
    Solution,
    Variant,
    check_feasible,
    evaluate,
    lex_compare,
    solution_from_dict,
    solution_to_dict,
)

from conftest import build_instance, desk_instance


def simulate_route(inst, mat, serviced):
    """Independent route simulator used to cross-check evaluate()."""
    pos = inst.depot
    clock = 0.0
    last_by_class = {}
    for arc_id in serviced:
        arc = inst.arcs[arc_id]
        clock = clock + float(mat.sp[pos, arc.tail]) + arc.s
        pos = arc.head
        last_by_class[arc.p] = clock
    return last_by_class


def fleet_objective(inst, mat, routes):
    t = [0.0] * inst.num_classes
    for serviced in routes:
        for p, val in simulate_route(inst, mat, serviced).items():
            t[p - 1] = max(t[p - 1], val)
    return t


@pytest.fixture
def two_class_instance():
    # depot 0; ring 0 -> 1 -> 2 -> 3 -> 0 plus a chord, two required arcs per class
    return build_instance(
        [(0.0, 0.0), (1.0, 0.0), (1.0, 1.0), (0.0, 1.0)],
        [
            (0, 1, 1.0, 1.0, 0.5, 1),   # arc 0, class 1
            (1, 2, 1.0, 1.0, 0.5, 1),   # arc 1, class 1
            (2, 3, 1.0, 1.0, 0.5, 2),   # arc 2, class 2
            (3, 0, 1.0, 1.0, 0.5, 2),   # arc 3, class 2
            (2, 0, 1.5),                # chord back to depot
        ],
        num_vehicles=2,
        capacity=10.0,
        num_classes=2,
    )


class TestCheckFeasible:
    def test_empty_solution_no_required(self, triangle):
        sol = Solution.empty(1)
        assert check_feasible(triangle, sol, Variant.P) == []

    def test_p_variant_class_order(self, two_class_instance):
        sol = Solution.from_lists([[2, 0], [1, 3]])  # class 2 before class 1
        violations = check_feasible(two_class_instance, sol, Variant.P)
        assert any("class order" in v for v in violations)

    def test_u_variant_allows_any_order(self, two_class_instance):
        sol = Solution.from_lists([[2, 0], [1, 3]])
        assert check_feasible(two_class_instance, sol, Variant.U) == []

    def test_unknown_arc_faults(self, two_class_instance):
        sol = Solution.from_lists([[99], []])
        with pytest.raises(ValueError):
            check_feasible(two_class_instance, sol, Variant.P)

    def test_coverage_and_capacity(self, two_class_instance):
        missing = Solution.from_lists([[0, 2], [1]])
        violations = check_feasible(two_class_instance, missing, Variant.P)
        assert any("arc 3 not serviced" in v for v in violations)

        dup = Solution.from_lists([[0, 2], [0, 1, 3]])
        violations = check_feasible(two_class_instance, dup, Variant.P)
        assert any("serviced 2 times" in v for v in violations)


class TestEvaluate:
    def test_empty(self, triangle):
        obj = evaluate(triangle, compute_deadhead_matrix(triangle), Solution.empty(1), Variant.P)
        assert list(obj) == [0.0]

    def test_single_arc_clock(self):
        # deadhead 2.0 to the arc tail, then 1.0 of service
        inst = build_instance(
            [(0.0, 0.0), (2.0, 0.0), (3.0, 0.0)],
            [(0, 1, 2.0), (1, 2, 0.5, 1.0, 1.0, 1), (2, 0, 1.0)],
        )
        mat = compute_deadhead_matrix(inst)
        obj = evaluate(inst, mat, Solution.from_lists([[1]]), Variant.P)
        assert obj[0] == pytest.approx(3.0, abs=1e-9)

    def test_two_arc_orders_match_hand_simulation(self, two_class_instance):
        inst = two_class_instance
        mat = compute_deadhead_matrix(inst)
        for order in ([0, 1], [1, 0]):
            sol = Solution.from_lists([order, [2, 3]])
            obj = evaluate(inst, mat, sol, Variant.U)
            expected = fleet_objective(inst, mat, [order, [2, 3]])
            assert list(obj) == pytest.approx(expected, abs=1e-12)

    def test_infeasible_faults(self, two_class_instance):
        inst = two_class_instance
        mat = compute_deadhead_matrix(inst)
        with pytest.raises(InfeasibleSolutionError):
            evaluate(inst, mat, Solution.from_lists([[0], [1]]), Variant.P)

    def test_vehicle_permutation_invariance(self):
        inst = desk_instance(seed=4, num_arcs=8, num_vehicles=2)
        mat = compute_deadhead_matrix(inst)
        req = [a.id for a in inst.required_arcs]
        routes = [sorted(req[::2], key=lambda a: inst.arcs[a].p),
                  sorted(req[1::2], key=lambda a: inst.arcs[a].p)]
        obj1 = evaluate(inst, mat, Solution.from_lists(routes), Variant.P)
        obj2 = evaluate(inst, mat, Solution.from_lists(routes[::-1]), Variant.P)
        assert list(obj1) == list(obj2)

    def test_p_feasible_evaluates_identically_under_u(self):
        inst = desk_instance(seed=6, num_arcs=8, num_vehicles=2)
        mat = compute_deadhead_matrix(inst)
        req = [a.id for a in inst.required_arcs]
        routes = [sorted(req[::2], key=lambda a: inst.arcs[a].p),
                  sorted(req[1::2], key=lambda a: inst.arcs[a].p)]
        sol = Solution.from_lists(routes)
        assert check_feasible(inst, sol, Variant.P) == []
        assert list(evaluate(inst, mat, sol, Variant.P)) == list(evaluate(inst, mat, sol, Variant.U))

    def test_appending_never_decreases_touched_classes(self):
        inst = desk_instance(seed=8, num_arcs=8, num_vehicles=1, num_classes=1)
        mat = compute_deadhead_matrix(inst)
        from hdcarp.solution import route_class_completions

        req = [a.id for a in inst.required_arcs]
        prefix = []
        prev = [0.0] * inst.num_classes
        for arc_id in req:
            prefix.append(arc_id)
            comp = route_class_completions(inst, mat, prefix)
            assert all(c >= p - 1e-12 for c, p in zip(comp, prev))
            prev = [max(c, p) for c, p in zip(comp, prev)]

    def test_single_class_minmax_cross_check(self):
        inst = desk_instance(seed=10, num_arcs=8, num_vehicles=2, num_classes=1)
        mat = compute_deadhead_matrix(inst)
        req = [a.id for a in inst.required_arcs]
        for split in range(len(req) + 1):
            routes = [req[:split], req[split:]]
            sol = Solution.from_lists(routes)
            if check_feasible(inst, sol, Variant.P):
                continue
            obj = evaluate(inst, mat, sol, Variant.P)
            expected = max(
                (simulate_route(inst, mat, r).get(1, 0.0) for r in routes),
                default=0.0,
            )
            assert obj[0] == pytest.approx(expected, abs=1e-12)


class TestLexCompare:
    def test_examples(self):
        assert lex_compare((1.0, 5.0), (1.0, 4.0)) == 1
        assert lex_compare((2.0, 0.0), (2.0, 0.0)) == 0
        # first entries tie within tolerance, the second entry decides
        assert lex_compare((1.0, 9.0, 9.0), (1.0000000001, 0.0, 0.0)) == 1
        assert lex_compare((1.0, 0.0, 0.0), (1.0000000001, 9.0, 9.0)) == -1

    def test_length_mismatch_faults(self):
        with pytest.raises(ValueError):
            lex_compare((1.0,), (1.0, 2.0))

    @given(
        st.lists(st.floats(0, 100), min_size=1, max_size=4),
        st.lists(st.floats(0, 100), min_size=1, max_size=4),
    )
    @settings(max_examples=200)
    def test_antisymmetry(self, a, b):
        n = min(len(a), len(b))
        a, b = a[:n], b[:n]
        assert lex_compare(a, b) == -lex_compare(b, a)

    @given(st.lists(st.floats(0, 100), min_size=1, max_size=4))
    def test_reflexive(self, a):
        assert lex_compare(a, a) == 0


def test_solution_dict_roundtrip():
    sol = Solution.from_lists([[3, 1], [], [2]])
    data = solution_to_dict(sol, Variant.U)
    back, variant = solution_from_dict(data)
    assert variant is Variant.U
    assert [r.serviced for r in back.routes] == [[3, 1], [], [2]]
