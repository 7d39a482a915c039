"""Policy network: proximity-modulated attention encoder, pointer decoder
and a value head.

The encoder projects per-arc features to embeddings (the depot gets its own
projection of a zero feature vector) and refines them through attention
layers whose pre-softmax scores are multiplied elementwise by the pairwise
proximity matrix, so spatial structure reaches the attention weights
directly. Each layer: batch-norm over a skip-connected multi-head attention,
then batch-norm over a two-layer ReLU MLP.

The decoder scores encoder embeddings against a single query built from the
graph summary, the embedding at the vehicle's current position and the
remaining-capacity fraction; infeasible actions are masked to -inf before
the softmax.
"""
from __future__ import annotations

import math

import torch
import torch.nn as nn

from .features import FEATURE_DIM


class ProximityAttentionLayer(nn.Module):
    def __init__(self, embed_dim: int, num_heads: int, hidden_dim: int | None = None):
        super().__init__()
        if embed_dim % num_heads != 0:
            raise ValueError("embed_dim must be divisible by num_heads")
        self.embed_dim = embed_dim
        self.num_heads = num_heads
        self.head_dim = embed_dim // num_heads
        hidden_dim = hidden_dim or 2 * embed_dim
        self.w_q = nn.Linear(embed_dim, embed_dim, bias=False)
        self.w_k = nn.Linear(embed_dim, embed_dim, bias=False)
        self.w_v = nn.Linear(embed_dim, embed_dim, bias=False)
        self.w_o = nn.Linear(embed_dim, embed_dim, bias=False)
        self.mlp = nn.Sequential(
            nn.Linear(embed_dim, hidden_dim),
            nn.ReLU(),
            nn.Linear(hidden_dim, embed_dim),
        )
        self.bn_attn = nn.BatchNorm1d(embed_dim)
        self.bn_mlp = nn.BatchNorm1d(embed_dim)

    def attention(self, x: torch.Tensor, prox: torch.Tensor) -> torch.Tensor:
        n = x.shape[0]
        q = self.w_q(x).view(n, self.num_heads, self.head_dim).transpose(0, 1)
        k = self.w_k(x).view(n, self.num_heads, self.head_dim).transpose(0, 1)
        v = self.w_v(x).view(n, self.num_heads, self.head_dim).transpose(0, 1)
        scores = q @ k.transpose(-2, -1) / math.sqrt(self.head_dim)
        scores = scores * prox.unsqueeze(0)
        attn = torch.softmax(scores, dim=-1)
        out = (attn @ v).transpose(0, 1).reshape(n, self.embed_dim)
        return self.w_o(out)

    def forward(self, x: torch.Tensor, prox: torch.Tensor) -> torch.Tensor:
        h = self.bn_attn(x + self.attention(x, prox))
        return self.bn_mlp(self.mlp(h))


class Encoder(nn.Module):
    def __init__(self, embed_dim: int = 32, num_heads: int = 4, num_layers: int = 2):
        super().__init__()
        self.arc_proj = nn.Linear(FEATURE_DIM, embed_dim)
        self.depot_proj = nn.Linear(FEATURE_DIM, embed_dim)
        self.layers = nn.ModuleList(
            ProximityAttentionLayer(embed_dim, num_heads) for _ in range(num_layers)
        )

    def forward(self, features: torch.Tensor, prox: torch.Tensor) -> torch.Tensor:
        """features: (N, 6) required-arc features; prox: (N+1, N+1).
        Returns (N+1, embed_dim) with the depot embedding first."""
        depot_in = torch.zeros(
            (1, FEATURE_DIM), dtype=features.dtype, device=features.device
        )
        x = torch.cat([self.depot_proj(depot_in), self.arc_proj(features)], dim=0)
        for layer in self.layers:
            x = layer(x, prox)
        return x


class Decoder(nn.Module):
    def __init__(self, embed_dim: int = 32):
        super().__init__()
        self.query_proj = nn.Linear(2 * embed_dim + 1, embed_dim)
        self.embed_dim = embed_dim

    def logits(
        self,
        embeddings: torch.Tensor,
        position_index: int,
        capacity_left: float,
        mask: torch.Tensor,
    ) -> torch.Tensor:
        """Masked scores over actions: index 0 closes the route (depot),
        index i >= 1 services arc i-1."""
        summary = embeddings.mean(dim=0)
        context = torch.cat([
            summary,
            embeddings[position_index],
            embeddings.new_tensor([capacity_left]),
        ])
        q = self.query_proj(context)
        scores = embeddings @ q / math.sqrt(self.embed_dim)
        return scores.masked_fill(~mask, float("-inf"))


class ValueHead(nn.Module):
    def __init__(self, embed_dim: int = 32, hidden_dim: int = 64):
        super().__init__()
        self.net = nn.Sequential(
            nn.Linear(embed_dim, hidden_dim),
            nn.ReLU(),
            nn.Linear(hidden_dim, 1),
        )

    def forward(self, embeddings: torch.Tensor) -> torch.Tensor:
        return self.net(embeddings.mean(dim=0)).squeeze(-1)


class PolicyNetwork(nn.Module):
    """Encoder + decoder (the policy) plus the value baseline."""

    def __init__(self, embed_dim: int = 32, num_heads: int = 4, num_layers: int = 2):
        super().__init__()
        self.encoder = Encoder(embed_dim, num_heads, num_layers)
        self.decoder = Decoder(embed_dim)
        self.value_head = ValueHead(embed_dim)
