"""Autoregressive decoding: sampling, greedy decoding and replay scoring."""
from __future__ import annotations

from dataclasses import dataclass

import torch

from .env import DecodeState, action_mask, apply_action, capacity_left_fraction, routes_to_solution
from .features import InstanceData
from .model import PolicyNetwork


def instance_tensors(data: InstanceData, dtype=torch.float32):
    features = torch.as_tensor(data.features, dtype=dtype)
    prox = torch.as_tensor(data.proximity, dtype=dtype)
    return features, prox


@dataclass
class Rollout:
    actions: list[int]
    log_prob: float
    failed: bool
    solution: dict | None


def decode(
    policy: PolicyNetwork,
    data: InstanceData,
    mode: str = "sample",
    generator: torch.Generator | None = None,
) -> Rollout:
    """Roll the policy forward once; no gradients are recorded."""
    if mode not in ("sample", "greedy"):
        raise ValueError(f"unknown decode mode {mode!r}")
    features, prox = instance_tensors(data)
    with torch.no_grad():
        embeddings = policy.encoder(features, prox)
        state = DecodeState(data)
        actions: list[int] = []
        total_logp = 0.0
        while not state.done:
            mask = action_mask(state)
            if not bool(mask.any()):
                return Rollout(actions, total_logp, True, None)
            logits = policy.decoder.logits(
                embeddings, state.position, capacity_left_fraction(state), mask
            )
            log_probs = torch.log_softmax(logits, dim=-1)
            if mode == "greedy":
                action = int(torch.argmax(log_probs))
            else:
                probs = torch.softmax(logits, dim=-1)
                action = int(torch.multinomial(probs, 1, generator=generator))
            total_logp += float(log_probs[action])
            actions.append(action)
            apply_action(state, action)
    return Rollout(actions, total_logp, False, routes_to_solution(state))


def replay_score(
    policy: PolicyNetwork, data: InstanceData, actions: list[int]
) -> tuple[torch.Tensor, torch.Tensor]:
    """Differentiable log-likelihood of a stored action sequence under the
    current parameters, plus the value estimate of the encoded state."""
    features, prox = instance_tensors(data)
    embeddings = policy.encoder(features, prox)
    value = policy.value_head(embeddings)
    state = DecodeState(data)
    log_prob = embeddings.new_zeros(())
    for action in actions:
        mask = action_mask(state)
        logits = policy.decoder.logits(
            embeddings, state.position, capacity_left_fraction(state), mask
        )
        log_prob = log_prob + torch.log_softmax(logits, dim=-1)[action]
        apply_action(state, action)
    return log_prob, value
