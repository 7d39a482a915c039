import pytest
import torch

from hrda.ppo import Transition, clipped_surrogate, ppo_update
from hrda.rollout import decode


def t(x):
    return torch.tensor(float(x), dtype=torch.float64)


class TestClippedSurrogate:
    def test_unit_ratio_passes_advantage(self):
        assert float(clipped_surrogate(t(1.0), t(3.7))) == pytest.approx(3.7)
        assert float(clipped_surrogate(t(1.0), t(-2.0))) == pytest.approx(-2.0)

    def test_positive_advantage_clips_ratio(self):
        got = clipped_surrogate(t(2.0), t(5.0), epsilon=0.2)
        assert float(got) == pytest.approx(1.2 * 5.0)

    def test_negative_advantage_keeps_pessimistic_branch(self):
        got = clipped_surrogate(t(2.0), t(-5.0), epsilon=0.2)
        assert float(got) == pytest.approx(2.0 * -5.0)
        got = clipped_surrogate(t(0.5), t(-5.0), epsilon=0.2)
        assert float(got) == pytest.approx(0.8 * -5.0)


class TestPpoUpdate:
    def _transition(self, policy, data):
        rollout = decode(policy, data, "greedy")
        assert not rollout.failed
        return Transition(data, rollout.actions, reward=-4.0,
                          old_log_prob=rollout.log_prob)

    def test_value_loss_decreases_on_fixed_batch(self, policy, tiny_instance):
        torch.manual_seed(0)
        tr = self._transition(policy, tiny_instance)
        optimizer = torch.optim.Adam(policy.parameters(), lr=1e-3)
        losses = []
        for _ in range(50):
            losses.append(
                ppo_update(policy, optimizer, [tr], ppo_epochs=1)
            )
        assert losses[-1] < losses[0]

    def test_non_finite_reward_faults(self, policy, tiny_instance):
        tr = self._transition(policy, tiny_instance)
        tr.reward = float("nan")
        optimizer = torch.optim.Adam(policy.parameters(), lr=1e-3)
        with pytest.raises(FloatingPointError):
            ppo_update(policy, optimizer, [tr], ppo_epochs=1)

    def test_empty_batch_rejected(self, policy):
        optimizer = torch.optim.Adam(policy.parameters(), lr=1e-3)
        with pytest.raises(ValueError):
            ppo_update(policy, optimizer, [])
