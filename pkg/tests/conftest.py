import pytest

from hdcarp.graph import Arc, Instance, Node, compute_deadhead_matrix
from hdcarp.generator import GenSpec, generate_instance


def build_instance(coords, arc_specs, depot=0, num_vehicles=1, capacity=100.0, num_classes=1):
    """arc_specs entries: (tail, head, d) for deadhead-only arcs or
    (tail, head, d, q, s, p) for required arcs."""
    nodes = [Node(i, float(x), float(y)) for i, (x, y) in enumerate(coords)]
    arcs = []
    for i, spec in enumerate(arc_specs):
        if len(spec) == 3:
            t, h, d = spec
            arcs.append(Arc(i, t, h, float(d), False))
        else:
            t, h, d, q, s, p = spec
            arcs.append(Arc(i, t, h, float(d), True, float(q), float(s), int(p)))
    return Instance(
        nodes=nodes,
        arcs=arcs,
        depot=depot,
        num_vehicles=num_vehicles,
        capacity=capacity,
        num_classes=num_classes,
    )


@pytest.fixture
def triangle():
    """u -> v -> w -> u ring, unit traversal times, no required arcs."""
    return build_instance(
        [(0.0, 0.0), (1.0, 0.0), (0.5, 1.0)],
        [(0, 1, 1.0), (1, 2, 1.0), (2, 0, 1.0)],
    )


def desk_instance(seed, num_arcs=8, num_vehicles=2, num_classes=2):
    """Small generated instance within the oracle's limits."""
    return generate_instance(
        GenSpec(num_arcs=num_arcs, num_vehicles=num_vehicles,
                num_classes=num_classes, seed=seed)
    )


def matrix_for(inst):
    return compute_deadhead_matrix(inst)
