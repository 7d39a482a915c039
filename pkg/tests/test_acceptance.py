"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line.

Run with `pytest tests/test_acceptance.py -s` to see the per-criterion lines.
All tolerances are fixed here; "matching the oracle" means reproducing its
leading-class completion time, the quantity the benchmark gap reports.
"""
import subprocess
import sys
import time

import numpy as np
import pytest

from hdcarp.bench import solve_with
from hdcarp.construct import construct
from hdcarp.exact import (
    brute_force_oracle,
    check_model,
    emit_milp_p,
    emit_milp_u,
    encode_solution,
    separate_connectivity,
    transform_graph,
)
from hdcarp.generator import GenSpec, generate_instance
from hdcarp.graph import compute_deadhead_matrix
from hdcarp.local_search import (
    apply_inter_swap,
    apply_intra_swap,
    best_swap_inter,
    best_swap_intra,
    local_search,
    make_view,
)
from hdcarp.solution import (
    Solution,
    Variant,
    check_feasible,
    evaluate,
    lex_compare,
    route_demand,
)

LEX_TOL = 1e-9
GAP_TOL = 1e-6
MATCH_RATE = 0.60


def report(name: str, ok: bool, detail: str = ""):
    status = "PASS" if ok else "FAIL"
    suffix = f" ({detail})" if detail else ""
    print(f"ACCEPTANCE {name}: {status}{suffix}")
    assert ok, f"{name} failed {suffix}"


@pytest.fixture(scope="module")
def desk_suite():
    """50 seeded instances at oracle scale (6 required arcs, 2 vehicles,
    2 classes) with both variant oracles precomputed."""
    suite = []
    for seed in range(50):
        inst = generate_instance(GenSpec(num_arcs=8, num_vehicles=2,
                                         num_classes=2, seed=seed))
        mat = compute_deadhead_matrix(inst)
        sol_p, obj_p = brute_force_oracle(inst, mat, Variant.P)
        sol_u, obj_u = brute_force_oracle(inst, mat, Variant.U)
        suite.append((seed, inst, mat, (sol_p, obj_p), (sol_u, obj_u)))
    return suite


def test_oracle_optimality(desk_suite):
    start = time.perf_counter()
    algo_params = {
        "ils": {"k_max": 10},
        "ea": {"k_max": 15, "population_size": 30},
        "aco": {"n_ant": 10, "k_max": 10},
    }
    matches = {name: 0 for name in algo_params}
    bound_ok = True
    for seed, inst, mat, (_, obj_p), (_, obj_u) in desk_suite:
        for variant, oracle_obj in ((Variant.P, obj_p), (Variant.U, obj_u)):
            for name, params in algo_params.items():
                sol = solve_with(name, inst, mat, variant, seed=seed, params=params)
                obj = evaluate(inst, mat, sol, variant)
                if lex_compare(oracle_obj, obj) > 0:
                    bound_ok = False
                if oracle_obj[0] > 0 and 100.0 * (obj[0] - oracle_obj[0]) / oracle_obj[0] < -GAP_TOL:
                    bound_ok = False
                if variant is Variant.P and abs(obj[0] - oracle_obj[0]) <= LEX_TOL:
                    matches[name] += 1
    elapsed = time.perf_counter() - start
    rates = {k: v / len(desk_suite) for k, v in matches.items()}
    ok = (
        bound_ok
        and all(rate >= MATCH_RATE for rate in rates.values())
        and elapsed < 300.0
    )
    report(
        "oracle optimality",
        ok,
        f"match rates {rates}, lower bound {'held' if bound_ok else 'VIOLATED'}, "
        f"{elapsed:.1f}s",
    )


def test_variant_dominance(desk_suite):
    exceptions = 0
    for seed, inst, mat, (_, obj_p), (_, obj_u) in desk_suite:
        if lex_compare(obj_u, obj_p) > 0:
            exceptions += 1
        p_opt = local_search(
            inst, mat, construct(inst, mat, Variant.P, np.random.default_rng(seed)),
            Variant.P,
        )
        p_obj = evaluate(inst, mat, p_opt, Variant.P)
        u_obj = evaluate(
            inst, mat, local_search(inst, mat, p_opt, Variant.U), Variant.U
        )
        if lex_compare(u_obj, p_obj) > 0:
            exceptions += 1
    report("variant dominance", exceptions == 0, f"{exceptions} exceptions over 50 instances")


def test_local_search_soundness():
    start = time.perf_counter()
    sizes = [8, 12, 16, 20, 26]
    ok = True
    for i in range(200):
        arcs = sizes[i % len(sizes)]
        inst = generate_instance(GenSpec(num_arcs=arcs, num_vehicles=2 + (i % 2),
                                         num_classes=1 + (i % 3), seed=5000 + i))
        assert len(inst.required_arcs) <= 20
        mat = compute_deadhead_matrix(inst)
        variant = Variant.P if i % 2 == 0 else Variant.U
        sol = construct(inst, mat, variant, np.random.default_rng(i))
        before = evaluate(inst, mat, sol, variant)
        seq = local_search(inst, mat, sol, variant, threads=1)
        par = local_search(inst, mat, sol, variant, threads=8)
        if check_feasible(inst, seq, variant):
            ok = False
        if lex_compare(evaluate(inst, mat, seq, variant), before) > 0:
            ok = False
        if [r.serviced for r in seq.routes] != [r.serviced for r in par.routes]:
            ok = False
    elapsed = time.perf_counter() - start
    report("local-search soundness", ok and elapsed < 120.0,
           f"200 instances, {elapsed:.1f}s")


def _objective_raw(inst, mat, sol):
    from hdcarp.solution import combine_completions, route_class_completions

    return combine_completions(
        [route_class_completions(inst, mat, r.serviced) for r in sol.routes],
        inst.num_classes,
    )


def test_swap_oracle_equivalence():
    checked_intra = 0
    checked_inter = 0
    ok = True
    seed = 0
    while checked_intra < 100 or checked_inter < 100:
        seed += 1
        inst = generate_instance(GenSpec(num_arcs=8, num_vehicles=2,
                                         num_classes=2, seed=7000 + seed))
        mat = compute_deadhead_matrix(inst)
        variant = Variant.P if seed % 2 == 0 else Variant.U
        sol = construct(inst, mat, variant, np.random.default_rng(seed))
        for class_p in range(1, inst.num_classes + 1):
            for r in range(inst.num_vehicles):
                view = make_view(inst, sol, r, class_p, variant)
                if len(view) < 2 or checked_intra >= 100:
                    continue
                base = _objective_raw(inst, mat, sol)
                best_obj, best_pair = None, None
                for i in range(view.lo, view.hi):
                    for j in range(i + 1, view.hi):
                        trial = sol.copy()
                        apply_intra_swap(trial, r, i, j)
                        obj = _objective_raw(inst, mat, trial)
                        if best_obj is None or lex_compare(obj, best_obj) < 0:
                            best_obj, best_pair = obj, (i, j)
                delta, pair = best_swap_intra(inst, mat, sol, view)
                got = [b + d for b, d in zip(base, delta.delta)]
                if pair != best_pair or any(
                    abs(g - e) > LEX_TOL for g, e in zip(got, best_obj)
                ):
                    ok = False
                checked_intra += 1
            va = make_view(inst, sol, 0, class_p, variant)
            vb = make_view(inst, sol, 1, class_p, variant)
            if len(va) and len(vb) and checked_inter < 100:
                base = _objective_raw(inst, mat, sol)
                best_obj, best_pair = None, None
                for i in range(va.lo, va.hi):
                    for j in range(vb.lo, vb.hi):
                        trial = sol.copy()
                        apply_inter_swap(trial, 0, i, 1, j)
                        if any(
                            route_demand(inst, r.serviced) > inst.capacity + LEX_TOL
                            for r in trial.routes
                        ):
                            continue
                        obj = _objective_raw(inst, mat, trial)
                        if best_obj is None or lex_compare(obj, best_obj) < 0:
                            best_obj, best_pair = obj, (i, j)
                delta, pair = best_swap_inter(inst, mat, sol, va, vb)
                if pair != best_pair:
                    ok = False
                elif best_obj is not None:
                    got = [b + d for b, d in zip(base, delta.delta)]
                    if any(abs(g - e) > LEX_TOL for g, e in zip(got, best_obj)):
                        ok = False
                checked_inter += 1
    report("swap-oracle equivalence", ok,
           f"{checked_intra} intra + {checked_inter} inter neighborhoods")


def test_milp_consistency(desk_suite):
    ok = True
    details = []
    for seed, inst, mat, (sol_p, _), (sol_u, _) in desk_suite[:20]:
        for variant, emit, sol in (
            (Variant.P, emit_milp_p, sol_p),
            (Variant.U, emit_milp_u, sol_u),
        ):
            tg = transform_graph(inst, variant)
            model = emit(inst, tg, "enumerate", mat)
            point = encode_solution(model, inst, tg, mat, sol, variant)
            violations = check_model(model, point)
            if violations:
                ok = False
                details.append(f"seed {seed} {variant.value}: {violations[:3]}")
            if separate_connectivity(inst, tg, point):
                ok = False
                details.append(f"seed {seed} {variant.value}: unexpected cuts")
            counts = {"x": 0, "y": 0, "t": 0, "r": 0, "T": 0}
            for v in model.variables:
                counts[v.name.split("_", 1)[0]] += 1
            m, p = inst.num_vehicles, inst.num_classes
            n_req, n_all = len(inst.required_arcs), tg.num_arcs()
            if variant is Variant.P:
                expect = {"x": m * n_req, "y": m * p * n_all, "t": m * p,
                          "r": m * p, "T": p}
            else:
                expect = {"x": m * p * n_req, "y": m * p * n_all, "t": m * p,
                          "r": m * p * p, "T": p}
            if counts != expect:
                ok = False
                details.append(f"seed {seed} {variant.value}: counts {counts} != {expect}")
    report("MILP consistency", ok, "; ".join(details) if details else "20 instances, both formulations")


def test_generator_fidelity():
    checked = 0
    ok = True
    seed = 0
    while checked < 1000:
        inst = generate_instance(GenSpec(num_arcs=40, num_vehicles=2, seed=9000 + seed))
        seed += 1
        if max(a.d for a in inst.arcs) != 1.0:
            ok = False
        if len(inst.required_arcs) != 30:
            ok = False
        for a in inst.required_arcs:
            if a.q != a.d * 0.5 + 0.5 or a.s != 2.0 * a.d:
                ok = False
            checked += 1
    for arcs, lo, hi in ((40, 30, 30), (80, 60, 70), (120, 60, 70)):
        for s in range(5):
            inst = generate_instance(GenSpec(num_arcs=arcs, num_vehicles=2, seed=s))
            if not (lo <= len(inst.required_arcs) <= hi):
                ok = False
    report("generator fidelity", ok, f"{checked} required arcs checked")


def test_solve_determinism(tmp_path):
    inst_path = tmp_path / "inst.json"
    res = subprocess.run(
        [sys.executable, "-m", "hdcarp.cli", "gen", "--arcs", "8", "--vehicles", "2",
         "--classes", "2", "--seed", "3", "--out", str(inst_path)],
        capture_output=True, text=True,
    )
    assert res.returncode == 0, res.stderr
    ok = True
    for algo, extra in (("ils", []), ("aco", ["--ants", "6", "--kmax", "6"])):
        blobs = []
        for run in range(3):
            out = tmp_path / f"{algo}-{run}.json"
            res = subprocess.run(
                [sys.executable, "-m", "hdcarp.cli", "solve", "--algo", algo,
                 "--variant", "p", "--in", str(inst_path), "--out", str(out),
                 "--seed", "11", *extra],
                capture_output=True, text=True,
            )
            if res.returncode != 0:
                ok = False
                break
            blobs.append(out.read_bytes() + res.stdout.encode())
        if len(set(blobs)) != 1:
            ok = False
        for threads in ("4",):
            out = tmp_path / f"{algo}-t{threads}.json"
            res = subprocess.run(
                [sys.executable, "-m", "hdcarp.cli", "solve", "--algo", algo,
                 "--variant", "p", "--in", str(inst_path), "--out", str(out),
                 "--seed", "11", "--threads", threads, *extra],
                capture_output=True, text=True,
            )
            if res.returncode != 0 or out.read_bytes() + res.stdout.encode() != blobs[0]:
                ok = False
    report("solve determinism", ok, "3 repeats and 2 thread counts per algorithm")
