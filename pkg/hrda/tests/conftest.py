import json
import os

import pytest
import torch

from hrda.features import load_instance
from hrda.interop import generate_instance
from hrda.model import PolicyNetwork


@pytest.fixture(scope="session")
def instance_dir(tmp_path_factory):
    return tmp_path_factory.mktemp("instances")


@pytest.fixture(scope="session")
def tiny_instance(instance_dir):
    """Training-distribution instance: 16 arcs -> 12 required, 2 vehicles."""
    path = str(instance_dir / "tiny.json")
    generate_instance(16, 2, 0, path)
    return load_instance(path, "P")


@pytest.fixture(scope="session")
def four_arc_instance(instance_dir):
    """6 arcs -> 4 required."""
    path = str(instance_dir / "four.json")
    generate_instance(6, 2, 1, path)
    return load_instance(path, "P")


@pytest.fixture()
def policy():
    torch.manual_seed(0)
    return PolicyNetwork(embed_dim=32, num_heads=4, num_layers=2)


def write_single_arc_instance(path):
    """Hand-built one-required-arc, one-vehicle instance file."""
    payload = {
        "depot": 0,
        "num_vehicles": 1,
        "capacity": 5.0,
        "num_classes": 1,
        "nodes": [
            {"id": 0, "x": 0.0, "y": 0.0},
            {"id": 1, "x": 1.0, "y": 0.0},
        ],
        "arcs": [
            {"id": 0, "tail": 0, "head": 1, "d": 1.0, "required": True,
             "q": 1.0, "s": 0.5, "p": 1},
            {"id": 1, "tail": 1, "head": 0, "d": 1.0, "required": False,
             "q": 0.0, "s": 0.0, "p": 0},
        ],
    }
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh)
