"""Reverse-mode automatic differentiation over float64 numpy arrays.

Every op builds a node in an implicit computation graph; ``backward`` traces
the graph from a scalar loss, zeroes the gradient buffers of everything it
reaches, and accumulates d(loss)/d(node) into ``node.grad`` in one reverse
topological pass. All math is float64 so gradient checks can run at tight
tolerances.
"""

from __future__ import annotations

from typing import Callable, Iterable, Sequence

import numpy as np

from .errors import ContractError, DomainError, ShapeError

Array = np.ndarray


def _unbroadcast(grad: Array, shape: tuple[int, ...]) -> Array:
    """Sum grad down to `shape`, undoing numpy broadcasting."""
    extra = grad.ndim - len(shape)
    if extra > 0:
        grad = grad.sum(axis=tuple(range(extra)))
    squeeze = tuple(i for i, n in enumerate(shape) if n == 1 and grad.shape[i] != 1)
    if squeeze:
        grad = grad.sum(axis=squeeze, keepdims=True)
    return grad


class Tensor:
    """A float64 array plus the bookkeeping needed to backpropagate through it."""

    __slots__ = ("data", "grad", "requires_grad", "_parents", "_backward")

    # Make numpy defer to the reflected Tensor operators (ndarray * Tensor etc.).
    __array_ufunc__ = None

    def __init__(
        self,
        data,
        requires_grad: bool = False,
        _parents: tuple["Tensor", ...] = (),
        _backward: Callable[[], None] | None = None,
    ):
        self.data = np.asarray(data, dtype=np.float64)
        self.grad: Array | None = None
        self.requires_grad = requires_grad
        self._parents = _parents
        self._backward = _backward

    @property
    def shape(self) -> tuple[int, ...]:
        return self.data.shape

    def item(self) -> float:
        if self.data.size != 1:
            raise ShapeError(f"item() requires a scalar, got shape {self.shape}")
        return float(self.data)

    def detach(self) -> "Tensor":
        return Tensor(self.data)

    def grad_or_zero(self) -> Array:
        """Gradient buffer, or zeros if this tensor was never reached by backward."""
        return self.grad if self.grad is not None else np.zeros_like(self.data)

    def __repr__(self) -> str:
        return f"Tensor(shape={self.shape}, requires_grad={self.requires_grad})"

    # -- operators ------------------------------------------------------

    def __add__(self, other):
        return add(self, other)

    __radd__ = __add__

    def __neg__(self):
        return mul(self, -1.0)

    def __sub__(self, other):
        return add(self, mul(_ensure(other), -1.0))

    def __rsub__(self, other):
        return add(_ensure(other), mul(self, -1.0))

    def __mul__(self, other):
        return mul(self, other)

    __rmul__ = __mul__

    def __truediv__(self, other):
        return div(self, other)

    def __rtruediv__(self, other):
        return div(_ensure(other), self)

    def __matmul__(self, other):
        return matmul(self, other)

    def __getitem__(self, idx):
        return take(self, idx)


def _ensure(x) -> Tensor:
    return x if isinstance(x, Tensor) else Tensor(x)


def param(data, rng: np.random.Generator | None = None, scale: float = 0.02) -> Tensor:
    """A trainable tensor; `data` may be a shape tuple to draw normal(0, scale)."""
    if isinstance(data, tuple):
        if rng is None:
            raise ContractError("shape-based param() needs an rng")
        data = rng.normal(0.0, scale, size=data)
    return Tensor(data, requires_grad=True)


def _node(data: Array, parents: Sequence[Tensor], backward: Callable[[], None]) -> Tensor:
    req = any(p.requires_grad for p in parents)
    if not req:
        return Tensor(data)
    return Tensor(data, requires_grad=True, _parents=tuple(parents), _backward=backward)


def _accum(t: Tensor, g: Array) -> None:
    # Lazy buffers: first contribution binds the array (never mutated in
    # place afterwards, so aliasing the producer's grad is safe), later
    # contributions allocate the sum.
    if t.requires_grad:
        t.grad = g if t.grad is None else t.grad + g


# -- elementwise ---------------------------------------------------------


def add(a, b) -> Tensor:
    a, b = _ensure(a), _ensure(b)
    out_data = a.data + b.data

    def backward():
        _accum(a, _unbroadcast(out.grad, a.shape))
        _accum(b, _unbroadcast(out.grad, b.shape))

    out = _node(out_data, (a, b), backward)
    return out


def mul(a, b) -> Tensor:
    a, b = _ensure(a), _ensure(b)
    out_data = a.data * b.data

    def backward():
        _accum(a, _unbroadcast(out.grad * b.data, a.shape))
        _accum(b, _unbroadcast(out.grad * a.data, b.shape))

    out = _node(out_data, (a, b), backward)
    return out


def div(a, b) -> Tensor:
    a, b = _ensure(a), _ensure(b)
    out_data = a.data / b.data

    def backward():
        _accum(a, _unbroadcast(out.grad / b.data, a.shape))
        _accum(b, _unbroadcast(-out.grad * a.data / (b.data * b.data), b.shape))

    out = _node(out_data, (a, b), backward)
    return out


def log(x) -> Tensor:
    x = _ensure(x)
    if np.any(x.data <= 0):
        raise DomainError("log requires strictly positive inputs")
    out_data = np.log(x.data)

    def backward():
        _accum(x, out.grad / x.data)

    out = _node(out_data, (x,), backward)
    return out


def exp(x) -> Tensor:
    x = _ensure(x)
    out_data = np.exp(x.data)

    def backward():
        _accum(x, out.grad * out_data)

    out = _node(out_data, (x,), backward)
    return out


def sqrt(x) -> Tensor:
    x = _ensure(x)
    if np.any(x.data < 0):
        raise DomainError("sqrt requires non-negative inputs")
    out_data = np.sqrt(x.data)

    def backward():
        _accum(x, out.grad * 0.5 / out_data)

    out = _node(out_data, (x,), backward)
    return out


def tanh(x) -> Tensor:
    x = _ensure(x)
    out_data = np.tanh(x.data)

    def backward():
        _accum(x, out.grad * (1.0 - out_data * out_data))

    out = _node(out_data, (x,), backward)
    return out


_GELU_C = np.sqrt(2.0 / np.pi)


def gelu(x) -> Tensor:
    """Smooth GELU (tanh approximation); smoothness keeps finite differences honest."""
    x = _ensure(x)
    inner = _GELU_C * (x.data + 0.044715 * x.data**3)
    t = np.tanh(inner)
    out_data = 0.5 * x.data * (1.0 + t)

    def backward():
        d_inner = _GELU_C * (1.0 + 3 * 0.044715 * x.data**2)
        local = 0.5 * (1.0 + t) + 0.5 * x.data * (1.0 - t * t) * d_inner
        _accum(x, out.grad * local)

    out = _node(out_data, (x,), backward)
    return out


def clip(x, lo: float, hi: float) -> Tensor:
    """Clamp to [lo, hi]; gradient flows only through strictly interior values."""
    x = _ensure(x)
    out_data = np.clip(x.data, lo, hi)

    def backward():
        mask = (x.data > lo) & (x.data < hi)
        _accum(x, out.grad * mask)

    out = _node(out_data, (x,), backward)
    return out


# -- shape and reduction --------------------------------------------------


def tsum(x, axis=None, keepdims: bool = False) -> Tensor:
    x = _ensure(x)
    out_data = x.data.sum(axis=axis, keepdims=keepdims)

    def backward():
        g = out.grad
        if not keepdims and axis is not None:
            g = np.expand_dims(g, axis)
        _accum(x, np.broadcast_to(g, x.shape).copy() if g.shape != x.shape else g)

    out = _node(out_data, (x,), backward)
    return out


def tmean(x, axis=None, keepdims: bool = False) -> Tensor:
    x = _ensure(x)
    if axis is None:
        n = x.data.size
    elif isinstance(axis, tuple):
        n = int(np.prod([x.data.shape[a] for a in axis]))
    else:
        n = x.data.shape[axis]
    return mul(tsum(x, axis=axis, keepdims=keepdims), 1.0 / n)


def reshape(x, shape) -> Tensor:
    x = _ensure(x)
    out_data = x.data.reshape(shape)

    def backward():
        _accum(x, out.grad.reshape(x.shape))

    out = _node(out_data, (x,), backward)
    return out


def transpose(x, axes: tuple[int, ...]) -> Tensor:
    x = _ensure(x)
    out_data = x.data.transpose(axes)
    inv = tuple(np.argsort(axes))

    def backward():
        _accum(x, out.grad.transpose(inv))

    out = _node(out_data, (x,), backward)
    return out


def take(x, idx) -> Tensor:
    """Basic (non-fancy) indexing; use `embedding` for integer-array gathers."""
    x = _ensure(x)
    out_data = x.data[idx]

    def backward():
        g = np.zeros_like(x.data)
        g[idx] += out.grad
        _accum(x, g)

    out = _node(out_data, (x,), backward)
    return out


def matmul(a, b) -> Tensor:
    a, b = _ensure(a), _ensure(b)
    if a.data.ndim == 0 or b.data.ndim == 0:
        raise ShapeError("matmul requires at least 1-d operands")
    out_data = np.matmul(a.data, b.data)

    def backward():
        ga = np.matmul(out.grad, np.swapaxes(b.data, -1, -2))
        gb = np.matmul(np.swapaxes(a.data, -1, -2), out.grad)
        _accum(a, _unbroadcast(ga, a.shape))
        _accum(b, _unbroadcast(gb, b.shape))

    out = _node(out_data, (a, b), backward)
    return out


def embedding(table, ids: Array) -> Tensor:
    """Row gather: table (V, d), ids int array (...,) -> (..., d)."""
    table = _ensure(table)
    ids = np.asarray(ids)
    if ids.size and (ids.min() < 0 or ids.max() >= table.shape[0]):
        raise DomainError("embedding id out of range")
    out_data = table.data[ids]

    def backward():
        g = np.zeros_like(table.data)
        np.add.at(g, ids.reshape(-1), out.grad.reshape(-1, table.shape[-1]))
        _accum(table, g)

    out = _node(out_data, (table,), backward)
    return out


# -- fused transformer primitives -----------------------------------------


def softmax(x, axis: int = -1) -> Tensor:
    x = _ensure(x)
    shifted = x.data - x.data.max(axis=axis, keepdims=True)
    e = np.exp(shifted)
    out_data = e / e.sum(axis=axis, keepdims=True)

    def backward():
        dot = (out_data * out.grad).sum(axis=axis, keepdims=True)
        _accum(x, out_data * (out.grad - dot))

    out = _node(out_data, (x,), backward)
    return out


def layer_norm(x, gain, bias, eps: float = 1e-5) -> Tensor:
    """Normalize over the last axis, then scale and shift."""
    x, gain, bias = _ensure(x), _ensure(gain), _ensure(bias)
    mu = x.data.mean(axis=-1, keepdims=True)
    var = x.data.var(axis=-1, keepdims=True)
    sigma = np.sqrt(var + eps)
    xhat = (x.data - mu) / sigma
    out_data = xhat * gain.data + bias.data

    def backward():
        n = x.shape[-1]
        gh = out.grad * gain.data
        _accum(
            x,
            (gh - gh.mean(axis=-1, keepdims=True)
             - xhat * (gh * xhat).mean(axis=-1, keepdims=True)) / sigma,
        )
        axes = tuple(range(out.grad.ndim - 1))
        _accum(gain, (out.grad * xhat).sum(axis=axes))
        _accum(bias, out.grad.sum(axis=axes))

    out = _node(out_data, (x, gain, bias), backward)
    return out


# -- graph traversal -------------------------------------------------------


class ComputationRecord:
    """Topologically ordered trace of every node reachable from a root."""

    def __init__(self, nodes: list[Tensor]):
        self.nodes = nodes

    @classmethod
    def trace(cls, root: Tensor) -> "ComputationRecord":
        order: list[Tensor] = []
        visited: set[int] = set()
        stack: list[tuple[Tensor, bool]] = [(root, False)]
        while stack:
            node, expanded = stack.pop()
            if expanded:
                order.append(node)
                continue
            if id(node) in visited:
                continue
            visited.add(id(node))
            stack.append((node, True))
            for p in node._parents:
                if id(p) not in visited:
                    stack.append((p, False))
        return cls(order)


def backward(loss: Tensor) -> ComputationRecord:
    """Populate `.grad` with d(loss)/d(node) for everything reachable from `loss`.

    Gradient buffers of reached nodes are re-initialized first, so each call
    yields the gradients of exactly this loss. Tensors not on a path to the
    loss keep `grad is None` (read as zeros via `grad_or_zero`).
    """
    if loss.data.size != 1:
        raise ContractError(f"backward requires a scalar loss, got shape {loss.shape}")
    record = ComputationRecord.trace(loss)
    for node in record.nodes:
        if node.requires_grad:
            node.grad = None
    if loss.requires_grad:
        loss.grad = np.ones_like(loss.data)
    for node in reversed(record.nodes):
        if node._backward is not None and node.requires_grad:
            node._backward()
    return record


def collect_grads(params: Iterable[Tensor]) -> list[Array]:
    return [p.grad_or_zero() for p in params]
