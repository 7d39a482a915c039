"""Sequential decoding environment.

Actions build routes vehicle by vehicle: action 0 closes the open route and
moves to the next vehicle, action i >= 1 services required arc i-1 on the
open route. Masks keep every reachable sequence feasible:

* serviced arcs and arcs exceeding the open vehicle's remaining capacity are
  masked;
* under the order-constrained variant an arc below the route's current class
  is masked, and on the last vehicle only arcs of the minimum remaining
  class stay selectable (otherwise a high class picked early would strand a
  lower one);
* closing is masked on the last vehicle, and earlier whenever the remaining
  demand could not fit in the vehicles that would be left.

A decode that still dead-ends (possible only off the training distribution)
is reported as failed and penalized by the caller.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import torch

from .features import InstanceData


@dataclass
class DecodeState:
    data: InstanceData
    vehicle: int = 0
    load: float = 0.0
    position: int = 0                      # embedding index of the position
    serviced: set = field(default_factory=set)
    routes: list = None
    route_last_class: int = 0

    def __post_init__(self):
        if self.routes is None:
            self.routes = [[]]

    @property
    def done(self) -> bool:
        return len(self.serviced) == self.data.num_arcs

    @property
    def remaining_demand(self) -> float:
        return float(
            sum(self.data.demand[i] for i in range(self.data.num_arcs)
                if i not in self.serviced)
        )


def action_mask(state: DecodeState) -> torch.Tensor:
    """Boolean mask over the N+1 actions (True = allowed)."""
    data = state.data
    n = data.num_arcs
    mask = np.zeros(n + 1, dtype=bool)
    if state.done:
        return torch.from_numpy(mask)

    remaining = [i for i in range(n) if i not in state.serviced]
    min_class = min(int(data.classes[i]) for i in remaining)
    last_vehicle = state.vehicle == data.num_vehicles - 1

    for i in remaining:
        if state.load + data.demand[i] > data.capacity + 1e-9:
            continue
        if data.variant == "P":
            if int(data.classes[i]) < state.route_last_class:
                continue
            if last_vehicle and int(data.classes[i]) != min_class:
                continue
        mask[i + 1] = True

    if not last_vehicle:
        vehicles_after = data.num_vehicles - state.vehicle - 1
        if state.remaining_demand <= vehicles_after * data.capacity + 1e-9:
            mask[0] = True
    return torch.from_numpy(mask)


def apply_action(state: DecodeState, action: int) -> None:
    if action == 0:
        state.vehicle += 1
        state.load = 0.0
        state.position = 0
        state.route_last_class = 0
        state.routes.append([])
        return
    arc = action - 1
    state.serviced.add(arc)
    state.load += float(state.data.demand[arc])
    state.position = action
    state.route_last_class = int(state.data.classes[arc])
    state.routes[-1].append(arc)


def routes_to_solution(state: DecodeState) -> dict:
    """Solution JSON payload in the solver's file format."""
    routes = [list(r) for r in state.routes]
    while len(routes) < state.data.num_vehicles:
        routes.append([])
    return {
        "variant": state.data.variant,
        "routes": [[state.data.req_ids[i] for i in route] for route in routes],
    }


def capacity_left_fraction(state: DecodeState) -> float:
    return float((state.data.capacity - state.load) / state.data.capacity)
