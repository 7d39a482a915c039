"""Feature extraction from routing-instance JSON files.

The policy sees each required arc as a 6-vector (distance of its tail from
the depot, angle of the tail relative to the depot, demand, priority class,
service time, traversal time) plus a pairwise proximity matrix between the
tail nodes (depot prepended), min-max normalized per instance. Shortest
paths are recomputed here from the raw arc list; only the instance file
format is shared with the solver package.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np

FEATURE_DIM = 6


@dataclass(frozen=True)
class InstanceData:
    """Everything the policy and the decoding environment need."""

    path: str
    variant: str
    num_vehicles: int
    capacity: float
    num_classes: int
    req_ids: list[int]          # required arc ids, ascending
    tails: np.ndarray           # (N,) tail node per required arc
    heads: np.ndarray
    demand: np.ndarray
    service: np.ndarray
    travel: np.ndarray
    classes: np.ndarray
    features: np.ndarray        # (N, 6) float32
    proximity: np.ndarray       # (N+1, N+1) float32, depot row/col first
    sp: np.ndarray              # (V, V) node-level shortest paths

    @property
    def num_arcs(self) -> int:
        return len(self.req_ids)


def shortest_paths(num_nodes: int, arcs: list[dict]) -> np.ndarray:
    sp = np.full((num_nodes, num_nodes), np.inf)
    np.fill_diagonal(sp, 0.0)
    for a in arcs:
        t, h, d = a["tail"], a["head"], a["d"]
        if t != h and d < sp[t, h]:
            sp[t, h] = d
    for k in range(num_nodes):
        sp = np.minimum(sp, sp[:, k, None] + sp[None, k, :])
    return sp


def load_instance(path: str, variant: str = "P") -> InstanceData:
    with open(path, "r", encoding="utf-8") as fh:
        data = json.load(fh)
    nodes = data["nodes"]
    arcs = data["arcs"]
    depot = data["depot"]
    sp = shortest_paths(len(nodes), arcs)

    req = sorted((a for a in arcs if a["required"]), key=lambda a: a["id"])
    dx, dy = nodes[depot]["x"], nodes[depot]["y"]
    feats = np.zeros((len(req), FEATURE_DIM), dtype=np.float64)
    for i, a in enumerate(req):
        tail = nodes[a["tail"]]
        feats[i] = (
            sp[depot, a["tail"]],
            math.atan2(tail["y"] - dy, tail["x"] - dx),
            a["q"],
            a["p"],
            a["s"],
            a["d"],
        )

    anchor = [depot] + [a["tail"] for a in req]
    prox = sp[np.ix_(anchor, anchor)].astype(np.float64)
    span = prox.max() - prox.min()
    if span > 0:
        prox = (prox - prox.min()) / span

    return InstanceData(
        path=path,
        variant=variant.upper(),
        num_vehicles=int(data["num_vehicles"]),
        capacity=float(data["capacity"]),
        num_classes=int(data["num_classes"]),
        req_ids=[a["id"] for a in req],
        tails=np.array([a["tail"] for a in req]),
        heads=np.array([a["head"] for a in req]),
        demand=np.array([a["q"] for a in req]),
        service=np.array([a["s"] for a in req]),
        travel=np.array([a["d"] for a in req]),
        classes=np.array([a["p"] for a in req]),
        features=feats.astype(np.float32),
        proximity=prox.astype(np.float32),
        sp=sp,
    )
