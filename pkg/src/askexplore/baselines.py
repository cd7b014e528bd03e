"""ICM and RND intrinsic-reward baselines on the small dense-net substrate."""

from __future__ import annotations

import numpy as np

from . import autodiff
from .autodiff import Tensor, concat
from .nets import Adam, Mlp


class NoCuriosity:
    """Placeholder curiosity: always-zero intrinsic reward."""

    name = "none"

    def begin_rollout(self, beta: int):
        pass

    def step_reward(self, obs, action, obs_next, scene, scene_next, j) -> float:
        return 0.0

    def update(self, batch):
        pass

    def log_extras(self):
        return {}


class IcmModel:
    """Feature encoder + inverse and forward dynamics models."""

    def __init__(self, obs_dim: int, action_count: int, rng,
                 feature_dim: int = 32, hidden: int = 64,
                 eta: float = 1.0, forward_weight: float = 0.2, lr: float = 1e-3):
        self.obs_dim = obs_dim
        self.action_count = action_count
        self.feature_dim = feature_dim
        self.eta = eta
        self.forward_weight = forward_weight
        self.encoder = Mlp((obs_dim, hidden, feature_dim), rng=rng)
        self.inverse = Mlp((2 * feature_dim, hidden, action_count), rng=rng)
        self.forward_model = Mlp((feature_dim + action_count, hidden, feature_dim), rng=rng)
        self.optimizer = Adam(
            self.encoder.parameters()
            + self.inverse.parameters()
            + self.forward_model.parameters(),
            lr=lr,
        )

    def _one_hot(self, actions) -> np.ndarray:
        actions = np.atleast_1d(np.asarray(actions, dtype=np.int64))
        out = np.zeros((len(actions), self.action_count))
        out[np.arange(len(actions)), actions] = 1.0
        return out


def icm_intrinsic(model: IcmModel, obs, action, obs_next) -> float:
    """Forward-model prediction error in feature space, scaled by eta/2."""
    phi = model.encoder.forward_np(np.asarray(obs, dtype=np.float64))
    phi_next = model.encoder.forward_np(np.asarray(obs_next, dtype=np.float64))
    onehot = model._one_hot(action)[0]
    pred = model.forward_model.forward_np(np.concatenate([phi, onehot]))
    err = pred - phi_next
    return float(model.eta * 0.5 * np.dot(err, err))


def icm_update(model: IcmModel, obs_batch, action_batch, next_obs_batch):
    """One Adam step on (1-w)*inverse cross-entropy + w*forward MSE."""
    obs_batch = np.asarray(obs_batch, dtype=np.float64)
    next_obs_batch = np.asarray(next_obs_batch, dtype=np.float64)
    actions = np.asarray(action_batch, dtype=np.int64)
    onehot = model._one_hot(actions)

    phi = model.encoder.forward(obs_batch)
    phi_next = model.encoder.forward(next_obs_batch)
    logits = model.inverse.forward(concat([phi, phi_next], axis=1))
    logp = logits.log_softmax()
    inverse_loss = -(logp * Tensor(onehot)).sum() / len(actions)

    pred_next = model.forward_model.forward(concat([phi, Tensor(onehot)], axis=1))
    forward_loss = (pred_next - phi_next).square().mean()

    w = model.forward_weight
    loss = (1.0 - w) * inverse_loss + w * forward_loss
    model.optimizer.zero_grad()
    loss.backward()
    model.optimizer.step()
    return float(inverse_loss.data), float(forward_loss.data)


def icm_inverse_accuracy(model: IcmModel, obs_batch, action_batch, next_obs_batch) -> float:
    phi = model.encoder.forward_np(np.asarray(obs_batch, dtype=np.float64))
    phi_next = model.encoder.forward_np(np.asarray(next_obs_batch, dtype=np.float64))
    logits = model.inverse.forward_np(np.concatenate([phi, phi_next], axis=1))
    pred = logits.argmax(axis=1)
    return float(np.mean(pred == np.asarray(action_batch)))


class _RunningStd:
    """Welford accumulator for the RND reward-normalization denominator."""

    def __init__(self):
        self.count = 0
        self.mean = 0.0
        self.m2 = 0.0

    def add(self, x: float):
        self.count += 1
        delta = x - self.mean
        self.mean += delta / self.count
        self.m2 += delta * (x - self.mean)

    def std(self) -> float:
        if self.count < 2:
            return 1.0
        return float(np.sqrt(self.m2 / self.count)) or 1.0


class RndModel:
    """Frozen random target network and a trained predictor of its output."""

    def __init__(self, obs_dim: int, rng, embed_dim: int = 64, hidden: int = 64,
                 lr: float = 1e-3, normalize: bool = True):
        self.obs_dim = obs_dim
        self.target = Mlp((obs_dim, hidden, embed_dim), rng=rng)
        self.predictor = Mlp((obs_dim, hidden, embed_dim), rng=rng)
        self.optimizer = Adam(self.predictor.parameters(), lr=lr)
        self.normalize = normalize
        self.reward_stats = _RunningStd()

    def target_fingerprint(self) -> bytes:
        import hashlib

        h = hashlib.sha256()
        for p in self.target.parameters():
            h.update(p.data.tobytes())
        return h.digest()


def rnd_intrinsic(model: RndModel, obs_next) -> float:
    """Predictor-vs-target squared error, optionally divided by its running std."""
    obs_next = np.asarray(obs_next, dtype=np.float64)
    err = model.predictor.forward_np(obs_next) - model.target.forward_np(obs_next)
    raw = float(np.dot(err, err))
    model.reward_stats.add(raw)
    if model.normalize:
        return raw / model.reward_stats.std()
    return raw


def rnd_update(model: RndModel, obs_batch) -> float:
    """One Adam step on predictor MSE to the frozen target embeddings."""
    obs_batch = np.asarray(obs_batch, dtype=np.float64)
    target = Tensor(model.target.forward_np(obs_batch))
    pred = model.predictor.forward(obs_batch)
    loss = (pred - target).square().mean()
    model.optimizer.zero_grad()
    loss.backward()
    model.optimizer.step()
    return float(loss.data)


class IcmCuriosity:
    name = "icm"

    def __init__(self, obs_dim: int, action_count: int, seed: int, **kwargs):
        self.model = IcmModel(obs_dim, action_count, np.random.default_rng(seed), **kwargs)

    def begin_rollout(self, beta: int):
        pass

    def step_reward(self, obs, action, obs_next, scene, scene_next, j) -> float:
        return icm_intrinsic(self.model, obs, action, obs_next)

    def update(self, batch):
        icm_update(self.model, batch["obs"], batch["actions"], batch["next_obs"])

    def log_extras(self):
        return {}


class RndCuriosity:
    name = "rnd"

    def __init__(self, obs_dim: int, seed: int, **kwargs):
        self.model = RndModel(obs_dim, np.random.default_rng(seed), **kwargs)

    def begin_rollout(self, beta: int):
        pass

    def step_reward(self, obs, action, obs_next, scene, scene_next, j) -> float:
        return rnd_intrinsic(self.model, obs_next)

    def update(self, batch):
        rnd_update(self.model, batch["next_obs"])

    def log_extras(self):
        return {}


__all__ = [
    "NoCuriosity", "IcmModel", "RndModel", "IcmCuriosity", "RndCuriosity",
    "icm_intrinsic", "icm_update", "icm_inverse_accuracy",
    "rnd_intrinsic", "rnd_update",
]

# re-export for callers catching divergence from curiosity updates
DivergenceError = autodiff.DivergenceError
