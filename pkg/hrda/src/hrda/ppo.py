"""Clipped-surrogate policy optimization over stored rollouts."""
from __future__ import annotations

from dataclasses import dataclass

import torch

from .features import InstanceData
from .model import PolicyNetwork
from .rollout import replay_score


@dataclass
class Transition:
    data: InstanceData
    actions: list[int]
    reward: float
    old_log_prob: float


def clipped_surrogate(
    ratio: torch.Tensor, advantage: torch.Tensor, epsilon: float = 0.2
) -> torch.Tensor:
    """Per-sample pessimistic surrogate: min(r*A, clip(r, 1-eps, 1+eps)*A)."""
    return torch.minimum(
        ratio * advantage,
        torch.clamp(ratio, 1.0 - epsilon, 1.0 + epsilon) * advantage,
    )


def ppo_update(
    policy: PolicyNetwork,
    optimizer: torch.optim.Optimizer,
    batch: list[Transition],
    epsilon: float = 0.2,
    value_coef: float = 0.5,
    ppo_epochs: int = 3,
) -> float:
    """Ascend the clipped surrogate, descend the squared value error.
    Returns the final epoch's mean value loss. Faults on non-finite loss."""
    if not batch:
        raise ValueError("ppo_update needs a non-empty batch")
    value_loss_out = 0.0
    for _ in range(ppo_epochs):
        surrogates = []
        value_losses = []
        for tr in batch:
            log_prob, value = replay_score(policy, tr.data, tr.actions)
            ratio = torch.exp(log_prob - tr.old_log_prob)
            advantage = tr.reward - value.detach()
            surrogates.append(clipped_surrogate(ratio, advantage, epsilon))
            value_losses.append((tr.reward - value) ** 2)
        value_loss = torch.stack(value_losses).mean()
        loss = -torch.stack(surrogates).mean() + value_coef * value_loss
        if not torch.isfinite(loss):
            raise FloatingPointError(f"non-finite PPO loss: {loss}")
        optimizer.zero_grad()
        loss.backward()
        optimizer.step()
        value_loss_out = float(value_loss.detach())
    return value_loss_out
