"""Dense float64 tensors with reverse-mode automatic differentiation.

The compute graph is dynamic: every operation that consumes a tensor with
``requires_grad=True`` records its parents and a vector-Jacobian closure on
the output node.  Node creation order is a topological order of the graph,
so :func:`backward` only has to walk the reachable nodes in reverse.
Tensors without a gradient requirement carry no graph references and are
immutable from the graph's point of view, which makes pure inference run
as plain numpy and lets distinct graphs live on distinct threads.

All values are double precision.  Gradient checks in the test suite assume
this (central differences with step 1e-5 at relative error 1e-6).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

__all__ = [
    "Tensor",
    "ShapeError",
    "apply",
    "backward",
    "grad_check",
    "GradCheckReport",
    "topo_order",
    "OPS",
    "add",
    "sub",
    "neg",
    "mul",
    "smul",
    "sadd",
    "matmul",
    "sigmoid",
    "tanh",
    "relu",
    "exp",
    "log",
    "log_softmax",
    "softmax",
    "concat",
    "rows",
    "slice_cols",
    "gather",
    "tsum",
    "tmean",
    "transpose",
    "conv1d_same",
]


class ShapeError(ValueError):
    """Raised when operation inputs do not conform to the op's shape rule."""


class Tensor:
    """A dense float64 array plus an optional gradient buffer.

    ``grad`` is allocated lazily by :func:`backward` and always has the
    same shape as ``data``.
    """

    __slots__ = ("data", "grad", "requires_grad", "op", "parents", "vjp")

    def __init__(self, data, requires_grad=False, op="leaf", parents=(), vjp=None):
        self.data = np.asarray(data, dtype=np.float64)
        self.grad = None
        self.requires_grad = bool(requires_grad)
        self.op = op
        self.parents = parents
        self.vjp = vjp

    @property
    def shape(self):
        return self.data.shape

    @property
    def size(self):
        return self.data.size

    def item(self):
        return float(self.data)

    def detach(self):
        return Tensor(self.data)

    def zero_grad(self):
        self.grad = None

    def backward(self):
        backward(self)

    def __repr__(self):
        return f"Tensor(shape={self.data.shape}, op={self.op!r}, requires_grad={self.requires_grad})"

    # Operator sugar; everything routes through the catalogued ops.
    def __add__(self, other):
        return add(self, _as_tensor(other))

    def __radd__(self, other):
        return add(_as_tensor(other), self)

    def __sub__(self, other):
        return sub(self, _as_tensor(other))

    def __neg__(self):
        return neg(self)

    def __mul__(self, other):
        if isinstance(other, (int, float)):
            return smul(self, float(other))
        return mul(self, _as_tensor(other))

    def __rmul__(self, other):
        return self.__mul__(other)

    def __matmul__(self, other):
        return matmul(self, _as_tensor(other))


def _as_tensor(x):
    return x if isinstance(x, Tensor) else Tensor(x)


def _make(data, op, parents, vjp):
    """Create an op output, recording graph edges only when a parent needs them."""
    if any(p.requires_grad for p in parents):
        return Tensor(data, requires_grad=True, op=op, parents=tuple(parents), vjp=vjp)
    return Tensor(data, op=op)


def _unbroadcast(g, shape):
    """Sum ``g`` down to ``shape`` (reverse of numpy broadcasting)."""
    while g.ndim > len(shape):
        g = g.sum(axis=0)
    for ax, n in enumerate(shape):
        if n == 1 and g.shape[ax] != 1:
            g = g.sum(axis=ax, keepdims=True)
    return g.reshape(shape)


def _check_broadcast(a, b, op):
    try:
        np.broadcast_shapes(a.shape, b.shape)
    except ValueError:
        raise ShapeError(f"{op}: shapes {a.shape} and {b.shape} do not broadcast") from None


# ---------------------------------------------------------------------------
# Op catalogue
# ---------------------------------------------------------------------------


def add(a, b):
    _check_broadcast(a, b, "add")
    out = a.data + b.data

    def vjp(g):
        return _unbroadcast(g, a.shape), _unbroadcast(g, b.shape)

    return _make(out, "add", (a, b), vjp)


def sub(a, b):
    _check_broadcast(a, b, "sub")
    out = a.data - b.data

    def vjp(g):
        return _unbroadcast(g, a.shape), _unbroadcast(-g, b.shape)

    return _make(out, "sub", (a, b), vjp)


def neg(a):
    return _make(-a.data, "neg", (a,), lambda g: (-g,))


def mul(a, b):
    """Elementwise (Hadamard) product with numpy broadcasting."""
    _check_broadcast(a, b, "mul")
    out = a.data * b.data

    def vjp(g):
        return _unbroadcast(g * b.data, a.shape), _unbroadcast(g * a.data, b.shape)

    return _make(out, "mul", (a, b), vjp)


def smul(a, c):
    """Multiply by a python scalar constant."""
    c = float(c)
    return _make(a.data * c, "smul", (a,), lambda g: (g * c,))


def sadd(a, c):
    """Add a python scalar constant."""
    c = float(c)
    return _make(a.data + c, "sadd", (a,), lambda g: (g,))


def matmul(a, b):
    if a.data.ndim != 2 or b.data.ndim != 2 or a.shape[1] != b.shape[0]:
        raise ShapeError(f"matmul: shapes {a.shape} and {b.shape} do not conform")
    out = a.data @ b.data

    def vjp(g):
        return g @ b.data.T, a.data.T @ g

    return _make(out, "matmul", (a, b), vjp)


def sigmoid(a):
    x = a.data
    out = np.where(x >= 0, 1.0 / (1.0 + np.exp(-np.abs(x))), np.exp(-np.abs(x)) / (1.0 + np.exp(-np.abs(x))))

    def vjp(g):
        return (g * out * (1.0 - out),)

    return _make(out, "sigmoid", (a,), vjp)


def tanh(a):
    out = np.tanh(a.data)

    def vjp(g):
        return (g * (1.0 - out * out),)

    return _make(out, "tanh", (a,), vjp)


def relu(a):
    out = np.maximum(a.data, 0.0)

    def vjp(g):
        return (g * (a.data > 0.0),)

    return _make(out, "relu", (a,), vjp)


def exp(a):
    out = np.exp(a.data)

    def vjp(g):
        return (g * out,)

    return _make(out, "exp", (a,), vjp)


def log(a):
    out = np.log(a.data)

    def vjp(g):
        return (g / a.data,)

    return _make(out, "log", (a,), vjp)


def log_softmax(a):
    """Row-wise log-softmax over the last axis, max-subtracted for stability.

    Every output row log-sum-exps to zero.
    """
    x = a.data
    m = np.max(x, axis=-1, keepdims=True)
    shifted = x - m
    lse = np.log(np.sum(np.exp(shifted), axis=-1, keepdims=True))
    out = shifted - lse

    def vjp(g):
        return (g - np.exp(out) * np.sum(g, axis=-1, keepdims=True),)

    return _make(out, "log_softmax", (a,), vjp)


def softmax(a):
    """Row-wise softmax, computed as exp(log_softmax) for stability."""
    return exp(log_softmax(a))


def concat(tensors, axis=0):
    tensors = [_as_tensor(t) for t in tensors]
    if not tensors:
        raise ShapeError("concat: need at least one input")
    ref = tensors[0].data.ndim
    for t in tensors:
        if t.data.ndim != ref:
            raise ShapeError(
                f"concat: rank mismatch {[t.shape for t in tensors]}"
            )
    try:
        out = np.concatenate([t.data for t in tensors], axis=axis)
    except ValueError:
        raise ShapeError(f"concat: shapes {[t.shape for t in tensors]} on axis {axis}") from None
    sizes = [t.shape[axis] for t in tensors]
    offsets = np.cumsum([0] + sizes)

    def vjp(g):
        pieces = []
        for i in range(len(tensors)):
            sl = [slice(None)] * g.ndim
            sl[axis] = slice(offsets[i], offsets[i + 1])
            pieces.append(g[tuple(sl)])
        return tuple(pieces)

    return _make(out, "concat", tuple(tensors), vjp)


def rows(a, indices):
    """Gather rows of a matrix by integer index (embedding lookup, frame
    subsampling, row slicing all reduce to this)."""
    if a.data.ndim != 2:
        raise ShapeError(f"rows: expected a matrix, got shape {a.shape}")
    idx = np.asarray(indices, dtype=np.int64)
    if idx.ndim != 1:
        raise ShapeError(f"rows: index must be 1-D, got shape {idx.shape}")
    out = a.data[idx]

    def vjp(g):
        ga = np.zeros_like(a.data)
        np.add.at(ga, idx, g)
        return (ga,)

    return _make(out, "rows", (a,), vjp)


def slice_cols(a, start, stop):
    if a.data.ndim != 2:
        raise ShapeError(f"slice_cols: expected a matrix, got shape {a.shape}")
    if not (0 <= start <= stop <= a.shape[1]):
        raise ShapeError(f"slice_cols: [{start}:{stop}] out of range for shape {a.shape}")
    out = a.data[:, start:stop]

    def vjp(g):
        ga = np.zeros_like(a.data)
        ga[:, start:stop] = g
        return (ga,)

    return _make(out, "slice_cols", (a,), vjp)


def gather(a, col_indices):
    """Pick one element per row: out[i] = a[i, col_indices[i]]."""
    if a.data.ndim != 2:
        raise ShapeError(f"gather: expected a matrix, got shape {a.shape}")
    idx = np.asarray(col_indices, dtype=np.int64)
    if idx.shape != (a.shape[0],):
        raise ShapeError(f"gather: index shape {idx.shape} does not match {a.shape[0]} rows")
    rng = np.arange(a.shape[0])
    out = a.data[rng, idx]

    def vjp(g):
        ga = np.zeros_like(a.data)
        ga[rng, idx] = g
        return (ga,)

    return _make(out, "gather", (a,), vjp)


def tsum(a):
    """Sum of all elements, returned as a scalar tensor."""
    out = np.asarray(a.data.sum())

    def vjp(g):
        return (np.broadcast_to(g, a.shape).copy(),)

    return _make(out, "sum", (a,), vjp)


def tmean(a):
    out = np.asarray(a.data.mean())
    n = a.size

    def vjp(g):
        return (np.broadcast_to(g / n, a.shape).copy(),)

    return _make(out, "mean", (a,), vjp)


def transpose(a):
    if a.data.ndim != 2:
        raise ShapeError(f"transpose: expected a matrix, got shape {a.shape}")

    def vjp(g):
        return (g.T,)

    return _make(a.data.T.copy(), "transpose", (a,), vjp)


def conv1d_same(a, filters):
    """1-D correlation of a (1, T) signal with (F, K) filters, 'same' padding.

    Returns a (T, F) matrix; used for the location term of the attention
    scorer (features of the previous attention weight vector).
    """
    if a.data.ndim != 2 or a.shape[0] != 1:
        raise ShapeError(f"conv1d_same: expected shape (1, T), got {a.shape}")
    if filters.data.ndim != 2:
        raise ShapeError(f"conv1d_same: filters must be (F, K), got {filters.shape}")
    t = a.shape[1]
    f, k = filters.shape
    pad_l = (k - 1) // 2
    pad_r = k - 1 - pad_l
    xp = np.pad(a.data[0], (pad_l, pad_r))
    windows = np.lib.stride_tricks.sliding_window_view(xp, k)  # (T, K)
    out = windows @ filters.data.T  # (T, F)

    def vjp(g):
        gxp = np.zeros_like(xp)
        gw = g @ filters.data  # (T, K)
        for j in range(k):
            gxp[j : j + t] += gw[:, j]
        gx = gxp[pad_l : pad_l + t][None, :]
        gf = g.T @ windows  # (F, K)
        return gx, gf

    return _make(out, "conv1d_same", (a, filters), vjp)


OPS: dict[str, Callable] = {
    "add": add,
    "sub": sub,
    "neg": neg,
    "mul": mul,
    "smul": smul,
    "sadd": sadd,
    "matmul": matmul,
    "sigmoid": sigmoid,
    "tanh": tanh,
    "relu": relu,
    "exp": exp,
    "log": log,
    "log_softmax": log_softmax,
    "concat": concat,
    "rows": rows,
    "slice_cols": slice_cols,
    "gather": gather,
    "sum": tsum,
    "mean": tmean,
    "transpose": transpose,
    "conv1d_same": conv1d_same,
}


def apply(op_kind, *inputs, **kwargs):
    """Apply a catalogued op by name."""
    try:
        fn = OPS[op_kind]
    except KeyError:
        raise KeyError(f"unknown op kind {op_kind!r}; catalogue: {sorted(OPS)}") from None
    return fn(*inputs, **kwargs)


# ---------------------------------------------------------------------------
# Reverse pass
# ---------------------------------------------------------------------------


def topo_order(root):
    """Nodes of the graph reachable from ``root``, in topological order.

    Every node's parents precede it, so the reversed list is a valid
    reverse-accumulation schedule.
    """
    order = []
    visited = set()
    stack = [(root, False)]
    while stack:
        node, expanded = stack.pop()
        if expanded:
            order.append(node)
            continue
        if id(node) in visited:
            continue
        visited.add(id(node))
        stack.append((node, True))
        for p in node.parents:
            if p.requires_grad and id(p) not in visited:
                stack.append((p, False))
    return order


def backward(loss):
    """Populate ``grad`` on every tensor the scalar ``loss`` depends on.

    Gradients accumulate, so zero parameter grads between batches.
    """
    if loss.size != 1:
        raise ShapeError(f"backward: loss must be scalar, got shape {loss.shape}")
    if not loss.requires_grad:
        return
    order = topo_order(loss)
    grads = {id(loss): np.ones_like(loss.data)}
    for node in reversed(order):
        g = grads.pop(id(node), None)
        if g is None:
            continue
        if node.vjp is None:  # leaf
            node.grad = g if node.grad is None else node.grad + g
            continue
        parent_grads = node.vjp(g)
        for p, pg in zip(node.parents, parent_grads):
            if not p.requires_grad:
                continue
            if id(p) in grads:
                grads[id(p)] = grads[id(p)] + pg
            else:
                grads[id(p)] = pg


# ---------------------------------------------------------------------------
# Gradient checking
# ---------------------------------------------------------------------------


@dataclass
class GradCheckReport:
    """Outcome of comparing reverse-mode gradients with central differences.

    ``max_rel_err`` uses |ad - fd| / max(1, |ad|, |fd|) per component so near-zero
    gradients are judged on absolute error.
    """

    passed: bool
    max_rel_err: float
    worst_input: int
    worst_index: tuple
    step: float
    tol: float

    def __bool__(self):
        return self.passed


def grad_check(f, point, step=1e-5, tol=1e-6):
    """Check df/dx of a scalar-valued ``f`` at ``point`` against central differences.

    ``f`` takes a list of tensors and returns a scalar tensor; ``point`` is a
    sequence of arrays.  Comparison is componentwise over every input.
    """
    leaves = [Tensor(np.asarray(p, dtype=np.float64), requires_grad=True) for p in point]
    out = f(leaves)
    if out.size != 1:
        raise ShapeError(f"grad_check: f must be scalar-valued, got shape {out.shape}")
    backward(out)
    analytic = [
        leaf.grad if leaf.grad is not None else np.zeros_like(leaf.data) for leaf in leaves
    ]

    max_err = 0.0
    worst_input, worst_index = 0, ()
    frozen = [np.asarray(p, dtype=np.float64).copy() for p in point]
    for i, base in enumerate(frozen):
        flat = base.reshape(-1)
        for j in range(flat.size):
            orig = flat[j]
            flat[j] = orig + step
            hi = float(f([Tensor(p) for p in frozen]).data)
            flat[j] = orig - step
            lo = float(f([Tensor(p) for p in frozen]).data)
            flat[j] = orig
            fd = (hi - lo) / (2.0 * step)
            ad = analytic[i].reshape(-1)[j]
            err = abs(ad - fd) / max(1.0, abs(ad), abs(fd))
            if err > max_err:
                max_err = err
                worst_input = i
                worst_index = np.unravel_index(j, base.shape)
    return GradCheckReport(
        passed=max_err < tol,
        max_rel_err=max_err,
        worst_input=worst_input,
        worst_index=tuple(int(v) for v in worst_index),
        step=step,
        tol=tol,
    )
