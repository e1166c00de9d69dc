"""Dense float64 tensors with reverse-mode automatic differentiation.

A Tensor wraps a numpy array and remembers which operation produced it.
``backward()`` on a scalar loss walks the recorded graph in reverse
topological order and accumulates gradients into every reachable tensor
that has ``requires_grad=True``. Gradients add up when a tensor is used
more than once. Everything is float64: the finite-difference checks this
engine is validated against are unreliable in single precision.
"""

from __future__ import annotations

import math

import numpy as np

DTYPE = np.float64

_grad_enabled = True


class no_grad:
    """Context manager that turns off graph recording (inference mode)."""

    def __enter__(self):
        global _grad_enabled
        self._prev = _grad_enabled
        _grad_enabled = False
        return self

    def __exit__(self, *exc):
        global _grad_enabled
        _grad_enabled = self._prev
        return False


def set_default_dtype(dtype) -> None:
    """float64 is the default (finite-difference checks need it); float32 is
    fine for training runs and about twice as fast."""
    global DTYPE
    dtype = np.dtype(dtype)
    if dtype not in (np.float32, np.float64):
        raise ValueError(f"unsupported dtype {dtype}")
    DTYPE = dtype.type


class precision:
    """Context manager scoping the default dtype, e.g. precision('float32')."""

    def __init__(self, dtype):
        self.dtype = dtype

    def __enter__(self):
        self._prev = DTYPE
        set_default_dtype(self.dtype)
        return self

    def __exit__(self, *exc):
        set_default_dtype(self._prev)
        return False


class Tensor:
    __slots__ = ("data", "requires_grad", "grad", "_parents", "_backward")

    def __init__(self, data, requires_grad: bool = False):
        arr = np.asarray(data, dtype=DTYPE)
        if not np.all(np.isfinite(arr)):
            raise ValueError("tensor data contains NaN or Inf")
        self.data = arr
        self.requires_grad = bool(requires_grad)
        self.grad = None
        self._parents = ()
        self._backward = None

    @property
    def shape(self):
        return self.data.shape

    @property
    def ndim(self):
        return self.data.ndim

    @property
    def size(self):
        return self.data.size

    def item(self) -> float:
        return float(self.data)

    def numpy(self) -> np.ndarray:
        return self.data

    def zero_grad(self):
        self.grad = None

    def check_finite(self) -> bool:
        return bool(np.all(np.isfinite(self.data)))

    def __repr__(self):
        return f"Tensor(shape={self.data.shape}, requires_grad={self.requires_grad})"

    # -- graph traversal -----------------------------------------------------

    def backward(self):
        """Backpropagate from a scalar; accumulates into ``.grad`` fields."""
        if self.data.shape != ():
            raise ValueError(f"backward requires a scalar, got shape {self.data.shape}")
        topo = _toposort(self)
        self.grad = np.ones((), dtype=DTYPE)
        for node in reversed(topo):
            if node._backward is None:
                continue
            grads = node._backward(node.grad)
            for parent, g in zip(node._parents, grads):
                if g is None or not parent.requires_grad:
                    continue
                if parent.grad is None:
                    parent.grad = g
                else:
                    parent.grad = parent.grad + g

    # -- operator sugar --------------------------------------------------------

    def __add__(self, other):
        return add(self, other)

    def __radd__(self, other):
        return add(self, other)

    def __sub__(self, other):
        return add(self, mul(other, -1.0))

    def __rsub__(self, other):
        return add(mul(self, -1.0), other)

    def __neg__(self):
        return mul(self, -1.0)

    def __mul__(self, other):
        return mul(self, other)

    def __rmul__(self, other):
        return mul(self, other)

    def __truediv__(self, scalar):
        return mul(self, 1.0 / float(scalar))

    def __matmul__(self, other):
        return matmul(self, other)

    def reshape(self, *shape):
        if len(shape) == 1 and isinstance(shape[0], (tuple, list)):
            shape = tuple(shape[0])
        return reshape(self, shape)

    def transpose(self, *axes):
        if len(axes) == 1 and isinstance(axes[0], (tuple, list)):
            axes = tuple(axes[0])
        return transpose(self, axes if axes else None)

    def sum(self, axis=None, keepdims=False):
        return tsum(self, axis=axis, keepdims=keepdims)

    def mean(self, axis=None, keepdims=False):
        return tmean(self, axis=axis, keepdims=keepdims)


def _result(data: np.ndarray, parents, backward_fn) -> Tensor:
    """Wrap an op result, recording the graph only when gradients are live."""
    out = Tensor.__new__(Tensor)
    out.data = data
    out.grad = None
    if _grad_enabled and any(p.requires_grad for p in parents):
        out.requires_grad = True
        out._parents = tuple(parents)
        out._backward = backward_fn
    else:
        out.requires_grad = False
        out._parents = ()
        out._backward = None
    return out


def _toposort(root: Tensor):
    topo = []
    visited = set()
    stack = [(root, False)]
    while stack:
        node, processed = stack.pop()
        if processed:
            topo.append(node)
            continue
        if id(node) in visited:
            continue
        visited.add(id(node))
        stack.append((node, True))
        for parent in node._parents:
            if parent.requires_grad and id(parent) not in visited:
                stack.append((parent, False))
    return topo


def _as_tensor(x) -> Tensor:
    """Wrap constants without the finite check (hot path; ``Tensor()`` checks)."""
    if isinstance(x, Tensor):
        return x
    out = Tensor.__new__(Tensor)
    out.data = np.asarray(x, dtype=DTYPE)
    out.requires_grad = False
    out.grad = None
    out._parents = ()
    out._backward = None
    return out


def _unbroadcast(grad: np.ndarray, shape: tuple) -> np.ndarray:
    """Sum ``grad`` down to ``shape`` (inverse of numpy broadcasting)."""
    extra = grad.ndim - len(shape)
    if extra > 0:
        grad = grad.sum(axis=tuple(range(extra)))
    axes = tuple(i for i, s in enumerate(shape) if s == 1 and grad.shape[i] != 1)
    if axes:
        grad = grad.sum(axis=axes, keepdims=True)
    return grad.reshape(shape)


# -- primitives ---------------------------------------------------------------


def add(a, b) -> Tensor:
    a, b = _as_tensor(a), _as_tensor(b)
    out = a.data + b.data

    def backward(g):
        return _unbroadcast(g, a.data.shape), _unbroadcast(g, b.data.shape)

    return _result(out, (a, b), backward)


def mul(a, b) -> Tensor:
    a, b = _as_tensor(a), _as_tensor(b)
    out = a.data * b.data

    def backward(g):
        return (_unbroadcast(g * b.data, a.data.shape),
                _unbroadcast(g * a.data, b.data.shape))

    return _result(out, (a, b), backward)


def matmul(a, b) -> Tensor:
    a, b = _as_tensor(a), _as_tensor(b)
    if a.data.ndim < 2 or b.data.ndim < 2:
        raise ValueError("matmul requires operands with ndim >= 2")

    if b.data.ndim == 2 and a.data.ndim > 2:
        # ND @ 2D: one flat GEMM instead of a python loop of tiny ones
        k = a.data.shape[-1]
        a2 = a.data.reshape(-1, k)
        out = (a2 @ b.data).reshape(a.data.shape[:-1] + (b.data.shape[1],))

        def backward(g):
            g2 = g.reshape(-1, b.data.shape[1])
            ga = (g2 @ b.data.T).reshape(a.data.shape)
            gb = a2.T @ g2
            return ga, gb

        return _result(out, (a, b), backward)

    out = a.data @ b.data

    def backward(g):
        ga = g @ np.swapaxes(b.data, -1, -2)
        gb = np.swapaxes(a.data, -1, -2) @ g
        return _unbroadcast(ga, a.data.shape), _unbroadcast(gb, b.data.shape)

    return _result(out, (a, b), backward)


def reshape(x: Tensor, shape) -> Tensor:
    x = _as_tensor(x)
    out = x.data.reshape(shape)

    def backward(g):
        return (g.reshape(x.data.shape),)

    return _result(out, (x,), backward)


def transpose(x: Tensor, axes=None) -> Tensor:
    x = _as_tensor(x)
    if axes is None:
        axes = tuple(reversed(range(x.data.ndim)))
    axes = tuple(axes)
    out = x.data.transpose(axes)
    inverse = tuple(np.argsort(axes))

    def backward(g):
        return (g.transpose(inverse),)

    return _result(out, (x,), backward)


def tsum(x: Tensor, axis=None, keepdims=False) -> Tensor:
    x = _as_tensor(x)
    out = x.data.sum(axis=axis, keepdims=keepdims)

    def backward(g):
        g = np.asarray(g)
        if axis is not None and not keepdims:
            g = np.expand_dims(g, axis)
        return (np.broadcast_to(g, x.data.shape).copy(),)

    return _result(np.asarray(out), (x,), backward)


def tmean(x: Tensor, axis=None, keepdims=False) -> Tensor:
    x = _as_tensor(x)
    count = x.data.size if axis is None else x.data.shape[axis]
    return mul(tsum(x, axis=axis, keepdims=keepdims), 1.0 / count)


def relu(x: Tensor) -> Tensor:
    x = _as_tensor(x)
    out = np.maximum(x.data, 0.0)

    def backward(g):
        return (g * (x.data > 0.0),)

    return _result(out, (x,), backward)


def softmax(x: Tensor, axis: int = -1) -> Tensor:
    """Softmax along ``axis``, computed with max-subtraction for stability."""
    x = _as_tensor(x)
    if not -x.data.ndim <= axis < x.data.ndim:
        raise ValueError(f"softmax axis {axis} invalid for shape {x.data.shape}")
    # masked entries (-1e9) underflow to exactly 0.0 here; do not clamp the
    # argument upward or the tiny nonzero results poison backward with denormals
    shifted = x.data - x.data.max(axis=axis, keepdims=True)
    out = np.exp(shifted, out=shifted)
    out /= out.sum(axis=axis, keepdims=True)

    def backward(g):
        dot = (g * out).sum(axis=axis, keepdims=True)
        return (out * (g - dot),)

    return _result(out, (x,), backward)


def layer_norm(x: Tensor, eps: float = 1e-5) -> Tensor:
    """Normalize the last axis to zero mean, unit variance (no affine part)."""
    x = _as_tensor(x)
    mu = x.data.mean(axis=-1, keepdims=True)
    var = x.data.var(axis=-1, keepdims=True)
    inv = 1.0 / np.sqrt(var + eps)
    out = (x.data - mu) * inv

    def backward(g):
        n = x.data.shape[-1]
        gm = g.mean(axis=-1, keepdims=True)
        gym = (g * out).mean(axis=-1, keepdims=True)
        return ((g - gm - out * gym) * inv,)

    return _result(out, (x,), backward)


def embedding(table: Tensor, ids: np.ndarray) -> Tensor:
    """Row gather ``table[ids]``; backward scatter-adds into the table."""
    table = _as_tensor(table)
    ids = np.asarray(ids)
    if ids.size and (ids.min() < 0 or ids.max() >= table.data.shape[0]):
        raise IndexError(f"embedding id out of range for table of {table.data.shape[0]} rows")
    out = table.data[ids]

    def backward(g):
        gt = np.zeros_like(table.data)
        flat_ids = ids.reshape(-1)
        if flat_ids.size:
            flat_g = g.reshape(-1, table.data.shape[1])
            order = np.argsort(flat_ids, kind="stable")
            uniq, starts = np.unique(flat_ids[order], return_index=True)
            gt[uniq] = np.add.reduceat(flat_g[order], starts, axis=0)
        return (gt,)

    return _result(out, (table,), backward)


def linear(x: Tensor, w: Tensor, b: Tensor) -> Tensor:
    """Fused x @ w + b with x [..., k], w [k, f], b [f] (one flat GEMM)."""
    x, w, b = _as_tensor(x), _as_tensor(w), _as_tensor(b)
    k, f = w.data.shape
    x2 = x.data.reshape(-1, k)
    out = (x2 @ w.data + b.data).reshape(x.data.shape[:-1] + (f,))

    def backward(g):
        g2 = g.reshape(-1, f)
        return ((g2 @ w.data.T).reshape(x.data.shape), x2.T @ g2, g2.sum(axis=0))

    return _result(out, (x, w, b), backward)


def layer_norm_affine(x: Tensor, gamma: Tensor, beta: Tensor, eps: float = 1e-5) -> Tensor:
    """layer_norm(x) * gamma + beta in one op."""
    x, gamma, beta = _as_tensor(x), _as_tensor(gamma), _as_tensor(beta)
    mu = x.data.mean(axis=-1, keepdims=True)
    var = x.data.var(axis=-1, keepdims=True)
    inv = 1.0 / np.sqrt(var + eps)
    norm = (x.data - mu) * inv
    out = norm * gamma.data + beta.data

    def backward(g):
        axes = tuple(range(g.ndim - 1))
        gg = (g * norm).sum(axis=axes)
        gb = g.sum(axis=axes)
        gn = g * gamma.data
        gm = gn.mean(axis=-1, keepdims=True)
        gym = (gn * norm).mean(axis=-1, keepdims=True)
        return ((gn - gm - norm * gym) * inv, gg, gb)

    return _result(out, (x, gamma, beta), backward)


def take_rows(x: Tensor, idx) -> Tensor:
    """Gather rows of a 2-D tensor by unique indices; backward scatters back.

    Indices must not repeat (a plain selection), which keeps the backward a
    single assignment instead of a scatter-add.
    """
    x = _as_tensor(x)
    idx = np.asarray(idx)
    out = x.data[idx]

    def backward(g):
        gx = np.zeros_like(x.data)
        gx[idx] = g
        return (gx,)

    return _result(out, (x,), backward)


def cross_entropy(logits: Tensor, targets: np.ndarray, weights: np.ndarray | None = None) -> Tensor:
    """Mean negative log-likelihood of ``targets`` under softmax(logits).

    ``logits`` is [batch, vocab]; ``targets`` integer ids; ``weights`` an
    optional per-row weight (0 drops a row from the mean, e.g. padding).
    """
    logits = _as_tensor(logits)
    if logits.data.ndim != 2:
        raise ValueError(f"cross_entropy expects [batch, vocab] logits, got {logits.data.shape}")
    targets = np.asarray(targets, dtype=np.int64)
    n, vocab = logits.data.shape
    if targets.shape != (n,):
        raise ValueError(f"targets shape {targets.shape} does not match batch {n}")
    if targets.size and (targets.min() < 0 or targets.max() >= vocab):
        raise IndexError(f"target id out of range for vocab of {vocab}")
    if weights is None:
        w = np.ones(n, dtype=DTYPE)
    else:
        w = np.asarray(weights, dtype=DTYPE)
    total = w.sum()
    if total <= 0:
        raise ValueError("cross_entropy weights sum to zero")

    m = logits.data.max(axis=1, keepdims=True)
    probs = np.exp(logits.data - m)
    z = probs.sum(axis=1)
    probs /= z[:, None]
    nll = np.log(z) + m[:, 0] - logits.data[np.arange(n), targets]
    out = np.asarray((w * nll).sum() / total)

    def backward(g):
        gl = probs.copy()
        gl[np.arange(n), targets] -= 1.0
        gl *= (g * w / total)[:, None]
        return (gl,)

    return _result(out, (logits,), backward)


def dropout(x: Tensor, p: float, rng: np.random.Generator) -> Tensor:
    """Inverted dropout; identity when p == 0."""
    if p <= 0.0:
        return _as_tensor(x)
    if not 0.0 <= p < 1.0:
        raise ValueError(f"dropout rate must be in [0, 1), got {p}")
    mask = (rng.random(np.shape(x.data)) >= p) / (1.0 - p)
    return mul(x, mask)


def parameter(data, rng: np.random.Generator | None = None, scale: float | None = None,
              shape: tuple | None = None) -> Tensor:
    """Trainable tensor; with ``rng`` draws uniform(-scale, scale) of ``shape``."""
    if rng is not None:
        if scale is None:
            scale = math.sqrt(1.0 / shape[0])
        data = rng.uniform(-scale, scale, size=shape)
    return Tensor(np.asarray(data, dtype=DTYPE), requires_grad=True)
