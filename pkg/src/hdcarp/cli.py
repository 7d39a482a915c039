"""Command-line entry points.

Subcommands: gen, solve, eval, oracle, milp, refine, bench.
Exit codes: 0 success, 2 validation failure (invalid instance or infeasible
solution), 1 fault.
"""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import bench as bench_mod
from .errors import SolverError
from .exact import (
    brute_force_oracle,
    cuts_to_jsonl,
    emit_milp,
    separate_connectivity,
    transform_graph,
    write_lp_files,
)
from .generator import GenSpec, generate_instance
from .graph import compute_deadhead_matrix, load_instance, save_instance, validate_instance
from .local_search import local_search
from .solution import (
    Variant,
    evaluate,
    check_feasible,
    load_solution,
    save_solution,
    solution_to_dict,
)

EXIT_OK = 0
EXIT_FAULT = 1
EXIT_INVALID = 2


def _load_valid_instance(path: str):
    inst = load_instance(path)
    problems = validate_instance(inst)
    if problems:
        for p in problems:
            print(f"invalid instance: {p}", file=sys.stderr)
        raise SystemExit(EXIT_INVALID)
    return inst


def _cmd_gen(args) -> int:
    spec = GenSpec(
        num_arcs=args.arcs,
        num_vehicles=args.vehicles,
        num_classes=args.classes,
        seed=args.seed,
    )
    inst = generate_instance(spec)
    save_instance(inst, args.out)
    return EXIT_OK


def _cmd_solve(args) -> int:
    inst = _load_valid_instance(getattr(args, "in"))
    mat = compute_deadhead_matrix(inst)
    variant = Variant.parse(args.variant)
    params = {
        "k_max": args.kmax,
        "population_size": args.population,
        "n_ant": args.ants,
        "rho": args.rho,
        "beta": args.beta,
    }
    params = {k: v for k, v in params.items() if v is not None}
    sol = bench_mod.solve_with(
        args.algo, inst, mat, variant, seed=args.seed, threads=args.threads, params=params
    )
    obj = evaluate(inst, mat, sol, variant)
    save_solution(sol, variant, args.out)
    print(json.dumps({"objective": list(obj)}))
    return EXIT_OK


def _cmd_eval(args) -> int:
    inst = _load_valid_instance(getattr(args, "in"))
    mat = compute_deadhead_matrix(inst)
    sol, file_variant = load_solution(args.sol)
    variant = Variant.parse(args.variant) if args.variant else file_variant
    problems = check_feasible(inst, sol, variant)
    if problems:
        print(json.dumps({"feasible": False, "violations": problems}))
        return EXIT_INVALID
    obj = evaluate(inst, mat, sol, variant)
    print(json.dumps({"feasible": True, "objective": list(obj)}))
    return EXIT_OK


def _cmd_oracle(args) -> int:
    inst = _load_valid_instance(getattr(args, "in"))
    mat = compute_deadhead_matrix(inst)
    variant = Variant.parse(args.variant)
    sol, obj = brute_force_oracle(inst, mat, variant)
    if args.out:
        save_solution(sol, variant, args.out)
    print(json.dumps({"objective": list(obj), "solution": solution_to_dict(sol, variant)}))
    return EXIT_OK


def _cmd_milp(args) -> int:
    path = getattr(args, "in")
    inst = _load_valid_instance(path)
    mat = compute_deadhead_matrix(inst)
    variant = Variant.parse(args.variant)
    tg = transform_graph(inst, variant)
    model = emit_milp(inst, tg, variant, args.mode, mat)
    stage_values = None
    if args.stage_values:
        stage_values = [float(x) for x in args.stage_values.split(",")]
    base = Path(path).stem
    paths = write_lp_files(model, args.out_dir, base, stage_values)
    for p in paths:
        print(p)
    if args.point:
        with open(args.point, "r", encoding="utf-8") as fh:
            point = json.load(fh)
        sys.stdout.write(cuts_to_jsonl(separate_connectivity(inst, tg, point)))
    return EXIT_OK


def _cmd_refine(args) -> int:
    inst = _load_valid_instance(getattr(args, "in"))
    mat = compute_deadhead_matrix(inst)
    sol, file_variant = load_solution(args.sol)
    variant = Variant.parse(args.variant) if args.variant else file_variant
    problems = check_feasible(inst, sol, variant)
    if problems:
        print(json.dumps({"feasible": False, "violations": problems}))
        return EXIT_INVALID
    refined = local_search(inst, mat, sol, variant, threads=args.threads)
    obj = evaluate(inst, mat, refined, variant)
    save_solution(refined, variant, args.out)
    print(json.dumps({"feasible": True, "objective": list(obj)}))
    return EXIT_OK


def _cmd_bench(args) -> int:
    with open(args.spec, "r", encoding="utf-8") as fh:
        spec = json.load(fh)
    variant = Variant.parse(spec.get("variant", "p"))
    algorithms = spec.get("algorithms", ["greedy", "ls", "ils"])
    reference = spec.get("reference", "best")
    seed = int(spec.get("seed", 0))
    params = spec.get("params", {})
    instances = []
    for entry in spec["instances"]:
        if "file" in entry:
            instances.append((Path(entry["file"]).stem, load_instance(entry["file"])))
        else:
            count = int(entry.get("count", 1))
            for i in range(count):
                gspec = GenSpec(
                    num_arcs=int(entry["arcs"]),
                    num_vehicles=int(entry["vehicles"]),
                    num_classes=int(entry.get("classes", 3)),
                    seed=int(entry.get("seed", 0)) + i,
                )
                name = f"gen-a{gspec.num_arcs}-m{gspec.num_vehicles}-s{gspec.seed}"
                instances.append((name, generate_instance(gspec)))
    rows = bench_mod.run_bench(
        instances, algorithms, variant, reference=reference, seed=seed,
        params=params, workers=int(spec.get("workers", 1)),
    )
    bench_mod.write_bench_csv(rows, args.out)
    print(f"wrote {len(rows)} rows to {args.out}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="hdcarp", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen", help="generate a synthetic instance")
    p.add_argument("--arcs", type=int, required=True)
    p.add_argument("--vehicles", type=int, required=True)
    p.add_argument("--classes", type=int, default=3)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(fn=_cmd_gen)

    p = sub.add_parser("solve", help="solve an instance with a chosen algorithm")
    p.add_argument("--algo", choices=["greedy", "ls", "ils", "ea", "aco"], required=True)
    p.add_argument("--variant", choices=["p", "u"], required=True)
    p.add_argument("--in", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--threads", type=int, default=1)
    p.add_argument("--kmax", type=int, default=None)
    p.add_argument("--population", type=int, default=None)
    p.add_argument("--ants", type=int, default=None)
    p.add_argument("--rho", type=float, default=None)
    p.add_argument("--beta", type=float, default=None)
    p.set_defaults(fn=_cmd_solve)

    p = sub.add_parser("eval", help="check feasibility and evaluate a solution file")
    p.add_argument("--in", required=True)
    p.add_argument("--sol", required=True)
    p.add_argument("--variant", choices=["p", "u"], default=None)
    p.set_defaults(fn=_cmd_eval)

    p = sub.add_parser("oracle", help="exhaustive optimum for desk-scale instances")
    p.add_argument("--in", required=True)
    p.add_argument("--variant", choices=["p", "u"], required=True)
    p.add_argument("--out", default=None)
    p.set_defaults(fn=_cmd_oracle)

    p = sub.add_parser("milp", help="emit LP files (one per lexicographic stage)")
    p.add_argument("--in", required=True)
    p.add_argument("--variant", choices=["p", "u"], required=True)
    p.add_argument("--mode", choices=["enumerate", "deferred"], required=True)
    p.add_argument("--out-dir", required=True)
    p.add_argument("--stage-values", default=None,
                   help="comma-separated completion values fixing earlier stages")
    p.add_argument("--point", default=None,
                   help="JSON variable assignment; violated cuts print as JSON lines")
    p.set_defaults(fn=_cmd_milp)

    p = sub.add_parser("refine", help="improve a solution with local search only")
    p.add_argument("--in", required=True)
    p.add_argument("--sol", required=True)
    p.add_argument("--variant", choices=["p", "u"], default=None)
    p.add_argument("--out", required=True)
    p.add_argument("--threads", type=int, default=1)
    p.set_defaults(fn=_cmd_refine)

    p = sub.add_parser("bench", help="run a benchmark spec and write a CSV")
    p.add_argument("--spec", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(fn=_cmd_bench)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.fn(args)
    except SystemExit:
        raise
    except SolverError as exc:
        print(f"fault: {exc}", file=sys.stderr)
        return EXIT_FAULT
    except Exception as exc:  # noqa: BLE001 - surface unexpected faults as exit 1
        print(f"fault: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_FAULT


if __name__ == "__main__":
    sys.exit(main())
