"""CLI: train a policy or decode an instance with a trained checkpoint."""
from __future__ import annotations

import argparse
import json
import sys

import torch

from .features import load_instance
from .rollout import decode
from .train import TrainConfig, load_checkpoint, train_hrda


def _cmd_train(args) -> int:
    cfg = TrainConfig.from_json(args.config) if args.config else TrainConfig()
    if args.out_dir:
        cfg.out_dir = args.out_dir
    result = train_hrda(cfg)
    final = result.curve[-1] if result.curve else {}
    print(json.dumps({
        "checkpoint": result.checkpoint_path,
        "curve": result.curve_path,
        "final": final,
    }))
    return 0


def _cmd_decode(args) -> int:
    policy, cfg = load_checkpoint(args.checkpoint)
    data = load_instance(getattr(args, "in"), args.variant or cfg.variant)
    generator = torch.Generator().manual_seed(args.seed)
    rollout = decode(policy, data, "greedy" if args.greedy else "sample", generator)
    if rollout.failed:
        print("decode failed: no feasible action", file=sys.stderr)
        return 1
    with open(args.out, "w", encoding="utf-8") as fh:
        json.dump(rollout.solution, fh)
        fh.write("\n")
    print(json.dumps({"log_prob": rollout.log_prob}))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="hrda", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("train", help="train a policy (config JSON optional)")
    p.add_argument("--config", default=None)
    p.add_argument("--out-dir", default=None)
    p.set_defaults(fn=_cmd_train)

    p = sub.add_parser("decode", help="decode one instance with a checkpoint")
    p.add_argument("--checkpoint", required=True)
    p.add_argument("--in", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--variant", choices=["p", "u", "P", "U"], default=None)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--greedy", action="store_true")
    p.set_defaults(fn=_cmd_decode)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.fn(args)
    except Exception as exc:  # noqa: BLE001
        print(f"fault: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
