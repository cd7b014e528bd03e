"""Clipped-surrogate PPO over fixed-length rollouts with curiosity hooks.

One environment per trainer; rollouts of length K cross episode
boundaries (the env resets on done and collection continues). Everything
is deterministic given (config, seed).
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass

import numpy as np

from .autodiff import Tensor
from .nets import Adam, Mlp, categorical_head, load_params, save_params


@dataclass
class TrainerConfig:
    rollouts: int = 2000          # N
    epochs: int = 3               # N_opt (4 for RND)
    rollout_length: int = 128     # K
    gamma: float = 0.99
    gae_lambda: float = 0.95
    clip_ratio: float = 0.2
    learning_rate: float = 3e-4
    entropy_coef: float = 0.01
    value_coef: float = 0.5
    intrinsic_scale: float = 1.0  # lambda_i
    extrinsic_enabled: bool = True
    normalize_advantages: bool = True
    hidden: tuple = (64, 64)
    activation: str = "tanh"
    checkpoint_interval: int = 0  # rollouts between checkpoints; 0 = off
    checkpoint_path: str | None = None

    def __post_init__(self):
        if not 0.0 < self.gamma <= 1.0:
            raise ValueError("gamma must lie in (0, 1]")
        if self.rollout_length < 1 or self.rollouts < 1 or self.epochs < 1:
            raise ValueError("rollouts, epochs, and rollout_length must be positive")


def combine_rewards(r_e: float, r_i: float, intrinsic_scale: float = 1.0,
                    extrinsic_enabled: bool = True) -> float:
    """Total reward r = r_e + lambda_i * r_i, no clipping; r_e droppable."""
    if r_i < 0:
        raise ValueError("intrinsic reward must be non-negative")
    return (r_e if extrinsic_enabled else 0.0) + intrinsic_scale * r_i


def compute_gae(rewards, values, dones, last_value, gamma: float, lam: float):
    """Generalized advantage estimation; returns (advantages, targets).

    `dones[t]` cuts bootstrapping after step t; `last_value` bootstraps the
    final step when the rollout ends mid-episode.
    """
    rewards = np.asarray(rewards, dtype=np.float64)
    values = np.asarray(values, dtype=np.float64)
    dones = np.asarray(dones, dtype=bool)
    K = len(rewards)
    adv = np.zeros(K)
    carry = 0.0
    for t in range(K - 1, -1, -1):
        next_value = (last_value if t == K - 1 else values[t + 1])
        if dones[t]:
            next_value = 0.0
            carry = 0.0
        delta = rewards[t] + gamma * next_value - values[t]
        carry = delta + gamma * lam * carry
        adv[t] = carry
    targets = adv + values
    return adv, targets


def normalize_advantages(adv: np.ndarray) -> np.ndarray:
    std = adv.std()
    return (adv - adv.mean()) / (std + 1e-8)


@dataclass
class RolloutBatch:
    obs: np.ndarray
    actions: np.ndarray
    log_probs: np.ndarray
    values: np.ndarray
    extrinsic: np.ndarray
    intrinsic: np.ndarray
    rewards: np.ndarray
    dones: np.ndarray
    next_obs: np.ndarray
    last_value: float = 0.0
    advantages: np.ndarray | None = None
    targets: np.ndarray | None = None

    def __len__(self):
        return len(self.actions)

    def as_dict(self):
        return {"obs": self.obs, "actions": self.actions, "next_obs": self.next_obs}


class Agent:
    """Categorical policy and value function over a shared input space."""

    def __init__(self, obs_dim: int, action_count: int, config: TrainerConfig, seed: int):
        rng = np.random.default_rng(seed)
        sizes = (obs_dim, *config.hidden)
        self.policy = Mlp((*sizes, action_count), activation=config.activation, rng=rng)
        self.value = Mlp((*sizes, 1), activation=config.activation, rng=rng)
        self.action_count = action_count

    def sample(self, obs, rng):
        logits = self.policy.forward_np(obs)
        action, logp, _entropy = categorical_head(logits, rng)
        value = float(self.value.forward_np(obs)[0])
        return action, logp, value

    def predict(self, obs) -> int:
        """Greedy action for a trained policy."""
        return int(self.policy.forward_np(obs).argmax())

    def state_value(self, obs) -> float:
        return float(self.value.forward_np(obs)[0])

    def networks(self):
        return {"policy": self.policy, "value": self.value}

    def save(self, path):
        save_params(path, self.networks())

    def load(self, path):
        load_params(path, self.networks())


def collect_rollout(agent: Agent, env, curiosity, K: int, rng,
                    config: TrainerConfig, state: dict) -> RolloutBatch:
    """Run K env steps, applying per-step curiosity; resets on episode end.

    `state` carries the current observation and episode accumulators
    across rollout boundaries.
    """
    obs_buf, act_buf, logp_buf, val_buf = [], [], [], []
    re_buf, ri_buf, r_buf, done_buf, next_buf = [], [], [], [], []
    obs = state["obs"]
    for j in range(K):
        scene = getattr(env, "scene", None)
        action, logp, value = agent.sample(obs, rng)
        obs_next, r_e, done, info = env.step(action)
        r_i = curiosity.step_reward(obs, action, obs_next, scene,
                                    getattr(env, "scene", None), j)
        r = combine_rewards(r_e, r_i, config.intrinsic_scale, config.extrinsic_enabled)

        obs_buf.append(obs)
        act_buf.append(action)
        logp_buf.append(logp)
        val_buf.append(value)
        re_buf.append(r_e)
        ri_buf.append(r_i)
        r_buf.append(r)
        done_buf.append(done)
        next_buf.append(obs_next)

        state["episode_return"] += r_e
        state["episode_steps"] += 1
        if done:
            state["episodes"].append(
                (state["episode_return"], bool(info.get("success", False)))
            )
            state["episode_return"] = 0.0
            state["episode_steps"] = 0
            obs = env.reset()
        else:
            obs = obs_next
    state["obs"] = obs
    last_value = 0.0 if done_buf[-1] else agent.state_value(obs)
    return RolloutBatch(
        obs=np.asarray(obs_buf), actions=np.asarray(act_buf, dtype=np.int64),
        log_probs=np.asarray(logp_buf), values=np.asarray(val_buf),
        extrinsic=np.asarray(re_buf), intrinsic=np.asarray(ri_buf),
        rewards=np.asarray(r_buf), dones=np.asarray(done_buf, dtype=bool),
        next_obs=np.asarray(next_buf), last_value=last_value,
    )


def ppo_update(agent: Agent, optimizer: Adam, batch: RolloutBatch,
               config: TrainerConfig):
    """N_opt full-batch epochs of clipped surrogate + value MSE + entropy bonus."""
    adv = batch.advantages
    if config.normalize_advantages and adv.std() > 0:
        adv = normalize_advantages(adv)
    adv_t = Tensor(adv)
    targets_t = Tensor(batch.targets)
    onehot = np.zeros((len(batch), agent.action_count))
    onehot[np.arange(len(batch)), batch.actions] = 1.0
    onehot_t = Tensor(onehot)
    old_logp_t = Tensor(batch.log_probs)
    clip = config.clip_ratio

    stats = []
    for _ in range(config.epochs):
        logp_all = agent.policy.forward(batch.obs).log_softmax()
        logp = (logp_all * onehot_t).sum(axis=1)
        ratio = (logp - old_logp_t).exp()
        clipped = ratio.clip(1.0 - clip, 1.0 + clip)
        surrogate = (ratio * adv_t).minimum(clipped * adv_t).mean()
        entropy = -(logp_all.exp() * logp_all).sum() / len(batch)
        value_pred = agent.value.forward(batch.obs).reshape(-1)
        value_loss = (value_pred - targets_t).square().mean()
        loss = (-1.0) * surrogate + config.value_coef * value_loss \
            + (-config.entropy_coef) * entropy
        optimizer.zero_grad()
        loss.backward()
        optimizer.step()
        ratio_np = np.exp(logp.data - batch.log_probs)
        stats.append({
            "policy_loss": -float(surrogate.data),
            "value_loss": float(value_loss.data),
            "entropy": float(entropy.data),
            "clip_fraction": float(np.mean(np.abs(ratio_np - 1.0) > clip)),
        })
    return stats


@dataclass
class MetricsRow:
    rollout_index: int
    env_steps: int
    mean_extrinsic_return: float
    success_rate: float
    mean_intrinsic: float
    replacements: int
    wall_clock: float = 0.0


class Trainer:
    """Outer loop: collect rollout, compute GAE, run PPO epochs, log metrics."""

    def __init__(self, env, config: TrainerConfig, curiosity=None, seed: int = 0,
                 episode_window: int = 20):
        from .baselines import NoCuriosity

        self.env = env
        self.config = config
        self.curiosity = curiosity if curiosity is not None else NoCuriosity()
        self.rng = np.random.default_rng(np.random.SeedSequence([seed, 1]))
        self.agent = Agent(env.obs_dim, env.action_count, config, seed)
        self.optimizer = Adam(
            self.agent.policy.parameters() + self.agent.value.parameters(),
            lr=config.learning_rate,
        )
        self.episode_window = episode_window
        self._state = {
            "obs": None,
            "episode_return": 0.0,
            "episode_steps": 0,
            "episodes": deque(maxlen=episode_window),
        }

    def fit(self, on_rollout=None):
        """Train for the configured number of rollouts; returns metric rows."""
        import time

        cfg = self.config
        self._state["obs"] = self.env.reset()
        metrics = []
        env_steps = 0
        start = time.perf_counter()
        for beta in range(1, cfg.rollouts + 1):
            self.curiosity.begin_rollout(beta)
            batch = collect_rollout(
                self.agent, self.env, self.curiosity, cfg.rollout_length,
                self.rng, cfg, self._state,
            )
            batch.advantages, batch.targets = compute_gae(
                batch.rewards, batch.values, batch.dones, batch.last_value,
                cfg.gamma, cfg.gae_lambda,
            )
            ppo_update(self.agent, self.optimizer, batch, cfg)
            self.curiosity.update(batch.as_dict())
            env_steps += cfg.rollout_length

            episodes = list(self._state["episodes"])
            extras = self.curiosity.log_extras()
            row = MetricsRow(
                rollout_index=beta,
                env_steps=env_steps,
                mean_extrinsic_return=(
                    float(np.mean([e[0] for e in episodes])) if episodes else 0.0
                ),
                success_rate=(
                    float(np.mean([e[1] for e in episodes])) if episodes else 0.0
                ),
                mean_intrinsic=float(batch.intrinsic.mean()),
                replacements=int(extras.get("replacements", 0)),
                wall_clock=time.perf_counter() - start,
            )
            metrics.append(row)
            if on_rollout is not None:
                on_rollout(row, batch, extras)
            if cfg.checkpoint_interval and cfg.checkpoint_path \
                    and beta % cfg.checkpoint_interval == 0:
                self.agent.save(cfg.checkpoint_path)
        return metrics
