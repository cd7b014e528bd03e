"""Tape-based reverse-mode autodiff over dense float64 numpy arrays.

Small fixed graphs only: every op records a backward closure, and
``backward()`` walks the tape once in reverse topological order.
"""

from __future__ import annotations

import numpy as np


class DivergenceError(RuntimeError):
    """Raised when a loss or gradient becomes non-finite."""


def _unbroadcast(grad: np.ndarray, shape: tuple) -> np.ndarray:
    """Sum `grad` down to `shape` (inverse of numpy broadcasting)."""
    while grad.ndim > len(shape):
        grad = grad.sum(axis=0)
    for axis, n in enumerate(shape):
        if n == 1 and grad.shape[axis] != 1:
            grad = grad.sum(axis=axis, keepdims=True)
    return grad


class Tensor:
    """A node in the computation tape.

    Holds a float64 array, an accumulated gradient, and the closure that
    pushes its gradient to its parents.
    """

    __slots__ = ("data", "grad", "requires_grad", "_parents", "_backward", "_consumed")

    def __init__(self, data, requires_grad=False, parents=(), backward=None):
        self.data = np.asarray(data, dtype=np.float64)
        self.grad = None
        self.requires_grad = requires_grad or any(p.requires_grad for p in parents)
        self._parents = parents
        self._backward = backward
        self._consumed = False

    @property
    def shape(self):
        return self.data.shape

    # ------------------------------------------------------------------ ops

    def __add__(self, other):
        other = _as_tensor(other)
        out = Tensor(self.data + other.data, parents=(self, other))

        def back(g):
            _accum(self, _unbroadcast(g, self.data.shape))
            _accum(other, _unbroadcast(g, other.data.shape))

        out._backward = back
        return out

    __radd__ = __add__

    def __neg__(self):
        out = Tensor(-self.data, parents=(self,))
        out._backward = lambda g: _accum(self, -g)
        return out

    def __sub__(self, other):
        return self + (-_as_tensor(other))

    def __rsub__(self, other):
        return _as_tensor(other) + (-self)

    def __mul__(self, other):
        other = _as_tensor(other)
        out = Tensor(self.data * other.data, parents=(self, other))

        def back(g):
            _accum(self, _unbroadcast(g * other.data, self.data.shape))
            _accum(other, _unbroadcast(g * self.data, other.data.shape))

        out._backward = back
        return out

    __rmul__ = __mul__

    def __truediv__(self, scalar):
        return self * (1.0 / float(scalar))

    def matmul(self, other):
        other = _as_tensor(other)
        out = Tensor(self.data @ other.data, parents=(self, other))

        def back(g):
            _accum(self, g @ other.data.T)
            _accum(other, self.data.T @ g)

        out._backward = back
        return out

    __matmul__ = matmul

    def tanh(self):
        y = np.tanh(self.data)
        out = Tensor(y, parents=(self,))
        out._backward = lambda g: _accum(self, g * (1.0 - y * y))
        return out

    def relu(self):
        y = np.maximum(self.data, 0.0)
        out = Tensor(y, parents=(self,))
        out._backward = lambda g: _accum(self, g * (self.data > 0.0))
        return out

    def exp(self):
        y = np.exp(self.data)
        out = Tensor(y, parents=(self,))
        out._backward = lambda g: _accum(self, g * y)
        return out

    def square(self):
        out = Tensor(self.data * self.data, parents=(self,))
        out._backward = lambda g: _accum(self, 2.0 * g * self.data)
        return out

    def sum(self, axis=None):
        if axis is None:
            out = Tensor(self.data.sum(), parents=(self,))
            out._backward = lambda g: _accum(self, np.full_like(self.data, float(g)))
            return out
        out = Tensor(self.data.sum(axis=axis), parents=(self,))
        out._backward = lambda g: _accum(
            self, np.broadcast_to(np.expand_dims(g, axis), self.data.shape).copy()
        )
        return out

    def mean(self):
        n = self.data.size
        out = Tensor(self.data.mean(), parents=(self,))
        out._backward = lambda g: _accum(self, np.full_like(self.data, float(g) / n))
        return out

    def reshape(self, *shape):
        out = Tensor(self.data.reshape(*shape), parents=(self,))
        out._backward = lambda g: _accum(self, g.reshape(self.data.shape))
        return out

    def log_softmax(self):
        """Row-wise log-softmax (last axis), numerically stable."""
        z = self.data - self.data.max(axis=-1, keepdims=True)
        lse = np.log(np.exp(z).sum(axis=-1, keepdims=True))
        y = z - lse
        out = Tensor(y, parents=(self,))

        def back(g):
            softmax = np.exp(y)
            _accum(self, g - softmax * g.sum(axis=-1, keepdims=True))

        out._backward = back
        return out

    def minimum(self, other):
        other = _as_tensor(other)
        mask = self.data <= other.data
        out = Tensor(np.where(mask, self.data, other.data), parents=(self, other))

        def back(g):
            _accum(self, _unbroadcast(g * mask, self.data.shape))
            _accum(other, _unbroadcast(g * ~mask, other.data.shape))

        out._backward = back
        return out

    def clip(self, lo, hi):
        mask = (self.data > lo) & (self.data < hi)
        out = Tensor(np.clip(self.data, lo, hi), parents=(self,))
        out._backward = lambda g: _accum(self, g * mask)
        return out

    # -------------------------------------------------------------- backward

    def backward(self):
        """Backpropagate from this scalar through the recorded tape.

        The tape is single-use: a second call on the same graph raises.
        """
        if self.data.shape != ():
            raise ValueError("backward() requires a scalar loss")
        if not np.isfinite(self.data):
            raise DivergenceError(f"non-finite loss: {self.data!r}")
        if self._consumed:
            raise RuntimeError("backward() already called on this trace")

        order = []
        seen = set()

        def visit(node):
            stack = [(node, False)]
            while stack:
                cur, expanded = stack.pop()
                if expanded:
                    order.append(cur)
                    continue
                if id(cur) in seen:
                    continue
                seen.add(id(cur))
                stack.append((cur, True))
                for p in cur._parents:
                    stack.append((p, False))

        visit(self)
        self.grad = np.asarray(1.0)
        for node in reversed(order):
            if node._backward is not None and node.grad is not None:
                node._backward(node.grad)
            node._consumed = True


def _as_tensor(x):
    return x if isinstance(x, Tensor) else Tensor(x)


def _accum(node: Tensor, g: np.ndarray):
    if not node.requires_grad and node._backward is None:
        return
    if node.grad is None:
        node.grad = np.array(g, dtype=np.float64)
    else:
        node.grad = node.grad + g


def concat(tensors, axis=-1):
    """Concatenate tensors along `axis`, splitting the gradient back."""
    tensors = [_as_tensor(t) for t in tensors]
    out = Tensor(np.concatenate([t.data for t in tensors], axis=axis), parents=tuple(tensors))
    sizes = [t.data.shape[axis] for t in tensors]
    offsets = np.cumsum([0] + sizes)

    def back(g):
        for t, lo, hi in zip(tensors, offsets[:-1], offsets[1:]):
            idx = [slice(None)] * g.ndim
            idx[axis] = slice(lo, hi)
            _accum(t, g[tuple(idx)])

    out._backward = back
    return out
