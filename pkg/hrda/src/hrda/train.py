"""Training loop: sample instances, decode, refine through the solver CLI,
reward with the refined completion time, update with PPO.

The refinement step is the hybrid's core: the policy is judged not on its
raw decode but on what local search makes of it, so the policy can focus on
distributing arcs across vehicles and leave intra-route ordering to the
solver. An ablation flag turns refinement off to train on raw decodes.
"""
from __future__ import annotations

import csv
import json
import os
import tempfile
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np
import torch

from .features import InstanceData, load_instance
from .interop import evaluate_solution, generate_instance, refine_solution
from .model import PolicyNetwork
from .ppo import Transition, ppo_update
from .rollout import Rollout, decode


@dataclass
class TrainConfig:
    epochs: int = 200                 # K
    episodes_per_epoch: int = 8       # T
    batch_size: int = 1               # B, instances per episode
    embed_dim: int = 32
    num_heads: int = 4
    num_layers: int = 2
    clip_epsilon: float = 0.2
    value_coef: float = 0.5
    ppo_epochs: int = 3
    lr: float = 1e-3
    seed: int = 0
    variant: str = "P"
    arcs: int = 16                    # 16 arcs -> 12 required
    vehicles: int = 2
    pool_size: int = 16
    refine: bool = True               # False = RL-only ablation
    reward: str = "t1"                # "t1" | "weighted"
    weighted_w: float = 1e-3
    workers: int = 4
    out_dir: str = "runs/hrda"

    @classmethod
    def from_json(cls, path: str) -> "TrainConfig":
        with open(path, "r", encoding="utf-8") as fh:
            return cls(**json.load(fh))


@dataclass
class TrainResult:
    curve: list[dict] = field(default_factory=list)  # epoch, mean_reward, value_loss
    checkpoint_path: str = ""
    curve_path: str = ""


def reward_from_objective(objective: list[float], cfg: TrainConfig) -> float:
    if cfg.reward == "t1":
        return -objective[0]
    if cfg.reward == "weighted":
        return -sum(cfg.weighted_w ** (k + 1) * t for k, t in enumerate(objective))
    raise ValueError(f"unknown reward mode {cfg.reward!r}")


def failure_penalty(data: InstanceData) -> float:
    """Large negative sentinel for dead-ended decodes, scaled to dominate any
    legitimate completion time."""
    bound = float(data.service.sum() + data.travel.sum() + (data.num_arcs + 1) * data.sp.max())
    return -10.0 * bound


def build_pool(cfg: TrainConfig, pool_dir: str) -> list[InstanceData]:
    pool = []
    for i in range(cfg.pool_size):
        path = os.path.join(pool_dir, f"pool{i}.json")
        generate_instance(cfg.arcs, cfg.vehicles, cfg.seed * 1000 + i, path)
        pool.append(load_instance(path, cfg.variant))
    return pool


def _score_rollout(args) -> float:
    rollout, data, cfg, work_dir, tag = args
    if rollout.failed:
        return failure_penalty(data)
    sol_path = os.path.join(work_dir, f"sol{tag}.json")
    with open(sol_path, "w", encoding="utf-8") as fh:
        json.dump(rollout.solution, fh)
    if cfg.refine:
        refined_path = os.path.join(work_dir, f"ref{tag}.json")
        objective = refine_solution(data.path, sol_path, cfg.variant, refined_path)
    else:
        objective = evaluate_solution(data.path, sol_path, cfg.variant)
    return reward_from_objective(objective, cfg)


def train_hrda(cfg: TrainConfig, pool: list[InstanceData] | None = None) -> TrainResult:
    """Returns the reward curve and checkpoint path; both are also persisted
    under cfg.out_dir (checkpoint.pt, reward_curve.csv)."""
    os.makedirs(cfg.out_dir, exist_ok=True)
    torch.manual_seed(cfg.seed)
    sample_gen = torch.Generator().manual_seed(cfg.seed + 1)

    policy = PolicyNetwork(cfg.embed_dim, cfg.num_heads, cfg.num_layers)
    optimizer = torch.optim.Adam(policy.parameters(), lr=cfg.lr)

    result = TrainResult()
    result.curve_path = os.path.join(cfg.out_dir, "reward_curve.csv")
    result.checkpoint_path = os.path.join(cfg.out_dir, "checkpoint.pt")

    with tempfile.TemporaryDirectory(prefix="hrda-train-") as work_dir:
        if pool is None:
            pool = build_pool(cfg, work_dir)

        with open(result.curve_path, "w", newline="", encoding="utf-8") as curve_fh:
            writer = csv.writer(curve_fh)
            writer.writerow(["epoch", "mean_reward", "value_loss"])
            for epoch in range(cfg.epochs):
                # visit the pool round-robin so every epoch sees the same
                # instance mix and epoch means are directly comparable
                rollouts: list[tuple[Rollout, InstanceData]] = []
                for i in range(cfg.episodes_per_epoch * cfg.batch_size):
                    data = pool[i % len(pool)]
                    rollouts.append((decode(policy, data, "sample", sample_gen), data))

                jobs = [
                    (ro, data, cfg, work_dir, f"{epoch}_{i}")
                    for i, (ro, data) in enumerate(rollouts)
                ]
                if cfg.workers > 1:
                    with ThreadPoolExecutor(max_workers=cfg.workers) as pool_exec:
                        rewards = list(pool_exec.map(_score_rollout, jobs))
                else:
                    rewards = [_score_rollout(job) for job in jobs]

                batch = [
                    Transition(data, ro.actions, reward, ro.log_prob)
                    for (ro, data), reward in zip(rollouts, rewards)
                ]
                value_loss = ppo_update(
                    policy, optimizer, batch,
                    epsilon=cfg.clip_epsilon,
                    value_coef=cfg.value_coef,
                    ppo_epochs=cfg.ppo_epochs,
                )
                mean_reward = float(np.mean(rewards))
                row = {"epoch": epoch, "mean_reward": mean_reward, "value_loss": value_loss}
                result.curve.append(row)
                writer.writerow([epoch, repr(mean_reward), repr(value_loss)])
                curve_fh.flush()

    torch.save(
        {
            "config": asdict(cfg),
            "policy_state": policy.state_dict(),
            "optimizer_state": optimizer.state_dict(),
        },
        result.checkpoint_path,
    )
    return result


def load_checkpoint(path: str) -> tuple[PolicyNetwork, TrainConfig]:
    payload = torch.load(path, weights_only=False)
    cfg = TrainConfig(**payload["config"])
    policy = PolicyNetwork(cfg.embed_dim, cfg.num_heads, cfg.num_layers)
    policy.load_state_dict(payload["policy_state"])
    policy.eval()  # inference uses the frozen batch-norm running statistics
    return policy, cfg
