"""Dense networks, Adam, and the discrete policy head built on the tape.

Everything is float64 and deterministic given the RNG passed in; rollout
code uses the `forward_np` fast path (no tape), training uses `forward`.
"""

from __future__ import annotations

import struct

import numpy as np

from .autodiff import DivergenceError, Tensor

_ACTIVATIONS = ("tanh", "relu")

CHECKPOINT_MAGIC = b"AEXC\x01"


class Mlp:
    """Fully connected network: affine+activation hidden layers, linear output."""

    def __init__(self, sizes, activation="tanh", rng=None):
        if activation not in _ACTIVATIONS:
            raise ValueError(f"unknown activation {activation!r}")
        if len(sizes) < 2:
            raise ValueError("need at least input and output sizes")
        self.sizes = tuple(int(s) for s in sizes)
        self.activation = activation
        rng = rng if rng is not None else np.random.default_rng(0)
        self.weights = []
        self.biases = []
        for fan_in, fan_out in zip(self.sizes[:-1], self.sizes[1:]):
            scale = np.sqrt(2.0 / (fan_in + fan_out))
            w = Tensor(rng.normal(0.0, scale, size=(fan_in, fan_out)), requires_grad=True)
            b = Tensor(np.zeros(fan_out), requires_grad=True)
            self.weights.append(w)
            self.biases.append(b)

    def parameters(self):
        out = []
        for w, b in zip(self.weights, self.biases):
            out.append(w)
            out.append(b)
        return out

    def forward(self, x) -> Tensor:
        """Tape-recording forward pass; `x` is (batch, in) or (in,)."""
        h = x if isinstance(x, Tensor) else Tensor(np.asarray(x, dtype=np.float64))
        if h.data.shape[-1] != self.sizes[0]:
            raise ValueError(
                f"input dim {h.data.shape[-1]} does not match first layer {self.sizes[0]}"
            )
        last = len(self.weights) - 1
        for i, (w, b) in enumerate(zip(self.weights, self.biases)):
            h = h @ w + b
            if i < last:
                h = h.tanh() if self.activation == "tanh" else h.relu()
        return h

    def forward_np(self, x: np.ndarray) -> np.ndarray:
        """Plain numpy forward, no gradient bookkeeping (rollout hot path)."""
        h = np.asarray(x, dtype=np.float64)
        if h.shape[-1] != self.sizes[0]:
            raise ValueError(
                f"input dim {h.shape[-1]} does not match first layer {self.sizes[0]}"
            )
        act = np.tanh if self.activation == "tanh" else lambda a: np.maximum(a, 0.0)
        last = len(self.weights) - 1
        for i, (w, b) in enumerate(zip(self.weights, self.biases)):
            h = h @ w.data + b.data
            if i < last:
                h = act(h)
        return h


class Adam:
    """Standard Adam with bias correction over a fixed parameter list."""

    def __init__(self, params, lr=3e-4, beta1=0.9, beta2=0.999, eps=1e-8):
        self.params = list(params)
        self.lr = lr
        self.beta1 = beta1
        self.beta2 = beta2
        self.eps = eps
        self.t = 0
        self.m = [np.zeros_like(p.data) for p in self.params]
        self.v = [np.zeros_like(p.data) for p in self.params]

    def zero_grad(self):
        for p in self.params:
            p.grad = None

    def step(self):
        self.t += 1
        b1t = 1.0 - self.beta1 ** self.t
        b2t = 1.0 - self.beta2 ** self.t
        for i, p in enumerate(self.params):
            g = p.grad
            if g is None:
                continue
            if not np.all(np.isfinite(g)):
                raise DivergenceError(
                    f"non-finite gradient in parameter {i} (shape {p.data.shape})"
                )
            self.m[i] = self.beta1 * self.m[i] + (1.0 - self.beta1) * g
            self.v[i] = self.beta2 * self.v[i] + (1.0 - self.beta2) * g * g
            p.data = p.data - self.lr * (self.m[i] / b1t) / (np.sqrt(self.v[i] / b2t) + self.eps)


def softmax_np(logits: np.ndarray) -> np.ndarray:
    z = logits - logits.max(axis=-1, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=-1, keepdims=True)


def categorical_head(logits: np.ndarray, rng: np.random.Generator):
    """Sample an action from softmax(logits); returns (index, log_prob, entropy)."""
    logits = np.asarray(logits, dtype=np.float64)
    if not np.all(np.isfinite(logits)):
        raise DivergenceError("non-finite logits in categorical head")
    z = logits - logits.max()
    lse = np.log(np.exp(z).sum())
    logp = z - lse
    p = np.exp(logp)
    entropy = float(-(p * logp).sum())
    # inverse-CDF sampling keeps the draw reproducible across platforms
    u = rng.random()
    action = int(np.searchsorted(np.cumsum(p), u))
    action = min(action, len(p) - 1)
    return action, float(logp[action]), entropy


def save_params(path, mlps: dict):
    """Write named MLP parameter sets as a flat versioned binary checkpoint."""
    with open(path, "wb") as fh:
        fh.write(CHECKPOINT_MAGIC)
        fh.write(struct.pack("<I", len(mlps)))
        for name, mlp in mlps.items():
            encoded = name.encode("utf-8")
            fh.write(struct.pack("<I", len(encoded)))
            fh.write(encoded)
            params = mlp.parameters()
            fh.write(struct.pack("<I", len(params)))
            for p in params:
                fh.write(struct.pack("<I", p.data.ndim))
                fh.write(struct.pack(f"<{p.data.ndim}I", *p.data.shape))
                fh.write(p.data.astype("<f8").tobytes())


def load_params(path, mlps: dict):
    """Load a checkpoint written by `save_params` into matching MLPs."""
    with open(path, "rb") as fh:
        magic = fh.read(len(CHECKPOINT_MAGIC))
        if magic != CHECKPOINT_MAGIC:
            raise ValueError(f"bad checkpoint magic {magic!r}")
        (count,) = struct.unpack("<I", fh.read(4))
        for _ in range(count):
            (nlen,) = struct.unpack("<I", fh.read(4))
            name = fh.read(nlen).decode("utf-8")
            (nparams,) = struct.unpack("<I", fh.read(4))
            if name not in mlps:
                raise ValueError(f"checkpoint has unknown network {name!r}")
            params = mlps[name].parameters()
            if len(params) != nparams:
                raise ValueError(f"parameter count mismatch for {name!r}")
            for p in params:
                (ndim,) = struct.unpack("<I", fh.read(4))
                shape = struct.unpack(f"<{ndim}I", fh.read(4 * ndim))
                if shape != p.data.shape:
                    raise ValueError(f"shape mismatch for {name!r}: {shape} vs {p.data.shape}")
                n = int(np.prod(shape)) if shape else 1
                p.data = np.frombuffer(fh.read(8 * n), dtype="<f8").reshape(shape).copy()
