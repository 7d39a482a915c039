"""Hybrid reinforcement-learning + local-search solver for hierarchical
directed arc routing: a pointer-style policy proposes solutions, the solver
package's local search refines them, and the refined completion time drives
PPO."""

from .features import FEATURE_DIM, InstanceData, load_instance
from .model import Decoder, Encoder, PolicyNetwork, ProximityAttentionLayer, ValueHead
from .env import DecodeState, action_mask, apply_action, routes_to_solution
from .rollout import Rollout, decode, replay_score
from .ppo import Transition, clipped_surrogate, ppo_update
from .train import TrainConfig, TrainResult, load_checkpoint, train_hrda

__version__ = "0.1.0"
