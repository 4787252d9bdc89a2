"""Minimal tape-based reverse-mode differentiation over numpy arrays.

Operations are plain functions on :class:`Tensor`. When a :class:`Tape` is
active (``with Tape() as tape:``) and at least one operand was created on that
tape, the primitive records a node holding a closure for its vector-Jacobian
product. ``tape.backward(out)`` then walks the nodes in reverse creation order,
which is a valid topological order because a node can only consume tensors
that already exist.

Everything runs in float32 unless a ``precision(np.float64)`` block is active;
the float64 mode exists for finite-difference oracles, which are useless at
single precision with small steps.
"""

from __future__ import annotations

import contextvars
from contextlib import contextmanager
from typing import Callable, Sequence

import numpy as np

from .errors import ContractError, ShapeError

_DTYPE: contextvars.ContextVar = contextvars.ContextVar("slothbench_dtype", default=np.float32)
_ACTIVE_TAPE: contextvars.ContextVar = contextvars.ContextVar("slothbench_tape", default=None)

LOG_EPS = 1e-12


@contextmanager
def precision(dtype):
    """Temporarily change the dtype new tensors are created with."""
    token = _DTYPE.set(np.dtype(dtype).type)
    try:
        yield
    finally:
        _DTYPE.reset(token)


def default_dtype():
    return _DTYPE.get()


class Tensor:
    """Dense array plus the tape it is tracked on (if any)."""

    __slots__ = ("data", "_tape", "__weakref__")

    def __init__(self, data, dtype=None):
        arr = np.asarray(data, dtype=dtype or _DTYPE.get())
        if arr.ndim == 0:
            arr = arr.reshape(1)
        self.data = arr
        self._tape = None

    @classmethod
    def _wrap(cls, arr: np.ndarray) -> "Tensor":
        t = cls.__new__(cls)
        t.data = arr
        t._tape = None
        return t

    @property
    def shape(self) -> tuple:
        return self.data.shape

    @property
    def requires_grad(self) -> bool:
        return self._tape is not None

    def numpy(self) -> np.ndarray:
        return self.data

    def item(self) -> float:
        return float(self.data.reshape(-1)[0])

    def __repr__(self):
        return f"Tensor(shape={self.shape}, dtype={self.data.dtype})"

    def __len__(self):
        return self.data.shape[0]

    def __add__(self, other):
        return add(self, other)

    def __radd__(self, other):
        return add(other, self)

    def __sub__(self, other):
        return sub(self, other)

    def __rsub__(self, other):
        return sub(other, self)

    def __mul__(self, other):
        return mul(self, other)

    def __rmul__(self, other):
        return mul(other, self)

    def __neg__(self):
        return mul(self, -1.0)

    def __matmul__(self, other):
        return matmul(self, other)

    def __getitem__(self, index):
        return getitem(self, index)


class Tape:
    """Ordered record of primitive applications for one computation.

    A tape belongs to the thread that created it. It is single use: after
    :meth:`backward` the recorded nodes are dropped.
    """

    def __init__(self):
        self.nodes: list = []
        self.leaves: list[Tensor] = []
        self._token = None

    def __enter__(self) -> "Tape":
        self._token = _ACTIVE_TAPE.set(self)
        return self

    def __exit__(self, *exc):
        _ACTIVE_TAPE.reset(self._token)
        self._token = None
        return False

    def leaf(self, data) -> Tensor:
        """Create a gradient-requiring tensor on this tape."""
        t = data if isinstance(data, Tensor) else Tensor(data)
        if t._tape is not None:
            t = Tensor._wrap(t.data)
        t._tape = self
        self.leaves.append(t)
        return t

    def backward(self, output: Tensor) -> dict:
        return backward(self, output)


def backward(tape: Tape, output: Tensor) -> dict:
    """Gradients of a scalar ``output`` with respect to every leaf of ``tape``.

    Leaves the output does not depend on get zero gradients.
    """
    if output.data.size != 1 or output.data.ndim != 1:
        raise ContractError(f"backward needs a shape [1] output, got {output.shape}")
    if output._tape is not tape:
        raise ContractError("output was not produced on this tape")
    grads = {id(output): np.ones_like(output.data)}
    for out, inputs, vjp in reversed(tape.nodes):
        g = grads.pop(id(out), None)
        if g is None:
            continue
        for t, gi in zip(inputs, vjp(g)):
            if gi is None or t._tape is not tape:
                continue
            key = id(t)
            if key in grads:
                grads[key] = grads[key] + gi
            else:
                grads[key] = gi
    result = {}
    for leaf in tape.leaves:
        g = grads.get(id(leaf))
        if g is None:
            g = np.zeros_like(leaf.data)
        result[leaf] = Tensor._wrap(np.asarray(g, dtype=leaf.data.dtype))
    tape.nodes = []
    return result


def _as_tensor(x) -> Tensor:
    if isinstance(x, Tensor):
        return x
    return Tensor(x)


def _record(data: np.ndarray, inputs: tuple, vjp: Callable) -> Tensor:
    out = Tensor._wrap(data)
    tape = _ACTIVE_TAPE.get()
    if tape is not None:
        for t in inputs:
            if t._tape is tape:
                out._tape = tape
                tape.nodes.append((out, inputs, vjp))
                break
    return out


def _unbroadcast(g: np.ndarray, shape: tuple) -> np.ndarray:
    if g.shape == shape:
        return g
    while g.ndim > len(shape):
        g = g.sum(axis=0)
    for axis, n in enumerate(shape):
        if n == 1 and g.shape[axis] != 1:
            g = g.sum(axis=axis, keepdims=True)
    return g


def _broadcast_shape(name, a, b):
    try:
        return np.broadcast_shapes(a.shape, b.shape)
    except ValueError:
        raise ShapeError(name, a.shape, b.shape) from None


# ---------------------------------------------------------------------------
# primitives
# ---------------------------------------------------------------------------


def add(a, b) -> Tensor:
    a, b = _as_tensor(a), _as_tensor(b)
    _broadcast_shape("add", a, b)
    sa, sb = a.shape, b.shape
    return _record(a.data + b.data, (a, b), lambda g: (_unbroadcast(g, sa), _unbroadcast(g, sb)))


def sub(a, b) -> Tensor:
    a, b = _as_tensor(a), _as_tensor(b)
    _broadcast_shape("sub", a, b)
    sa, sb = a.shape, b.shape
    return _record(a.data - b.data, (a, b), lambda g: (_unbroadcast(g, sa), -_unbroadcast(g, sb)))


def mul(a, b) -> Tensor:
    a, b = _as_tensor(a), _as_tensor(b)
    _broadcast_shape("mul", a, b)
    ad, bd = a.data, b.data

    def vjp(g):
        return _unbroadcast(g * bd, ad.shape), _unbroadcast(g * ad, bd.shape)

    return _record(ad * bd, (a, b), vjp)


def matmul(a: Tensor, b: Tensor) -> Tensor:
    """Matrix product of 2-D operands, or batched over a shared leading axis."""
    ad, bd = a.data, b.data
    ok = ad.ndim == bd.ndim and ad.ndim in (2, 3) and ad.shape[-1] == bd.shape[-2]
    if ok and ad.ndim == 3:
        ok = ad.shape[0] == bd.shape[0]
    if not ok:
        raise ShapeError("matmul", ad.shape, bd.shape)

    def vjp(g):
        return g @ np.swapaxes(bd, -1, -2), np.swapaxes(ad, -1, -2) @ g

    return _record(ad @ bd, (a, b), vjp)


def tanh(a: Tensor) -> Tensor:
    y = np.tanh(a.data)
    return _record(y, (a,), lambda g: (g * (1.0 - y * y),))


def sigmoid(a: Tensor) -> Tensor:
    x = np.clip(a.data, -80.0, 80.0)
    y = 1.0 / (1.0 + np.exp(-x))
    return _record(y, (a,), lambda g: (g * y * (1.0 - y),))


def softmax(a: Tensor) -> Tensor:
    """Softmax over the last axis, shifted by the row max for stability."""
    x = a.data
    e = np.exp(x - x.max(axis=-1, keepdims=True))
    y = e / e.sum(axis=-1, keepdims=True)

    def vjp(g):
        return (y * (g - (g * y).sum(axis=-1, keepdims=True)),)

    return _record(y, (a,), vjp)


def log(a: Tensor, eps: float = LOG_EPS) -> Tensor:
    """Guarded logarithm ``log(a + eps)``."""
    shifted = a.data + a.data.dtype.type(eps)
    return _record(np.log(shifted), (a,), lambda g: (g / shifted,))


def exp(a: Tensor) -> Tensor:
    y = np.exp(a.data)
    return _record(y, (a,), lambda g: (g * y,))


def sum(a: Tensor, axis=None) -> Tensor:  # noqa: A001 - mirrors numpy naming
    shape = a.shape
    if axis is None:
        y = a.data.sum().reshape(1)
        return _record(y, (a,), lambda g: (np.broadcast_to(g.reshape(()), shape).copy(),))
    y = a.data.sum(axis=axis)

    def vjp(g):
        return (np.broadcast_to(np.expand_dims(g, axis), shape).copy(),)

    return _record(y, (a,), vjp)


def mean(a: Tensor, axis=None) -> Tensor:
    shape = a.shape
    if axis is None:
        n = a.data.size
        y = (a.data.sum() / n).reshape(1).astype(a.data.dtype)
        return _record(y, (a,), lambda g: (np.full(shape, g.reshape(()) / n, dtype=g.dtype),))
    n = shape[axis]
    y = a.data.mean(axis=axis)

    def vjp(g):
        return (np.broadcast_to(np.expand_dims(g / n, axis), shape).copy(),)

    return _record(y, (a,), vjp)


def concat(tensors: Sequence[Tensor], axis: int = -1) -> Tensor:
    tensors = tuple(_as_tensor(t) for t in tensors)
    shapes = [t.shape for t in tensors]
    ndim = len(shapes[0])
    ax = axis % ndim
    for s in shapes[1:]:
        if len(s) != ndim or any(s[i] != shapes[0][i] for i in range(ndim) if i != ax):
            raise ShapeError("concat", shapes[0], s)
    bounds = np.cumsum([s[ax] for s in shapes])[:-1]
    y = np.concatenate([t.data for t in tensors], axis=ax)
    return _record(y, tensors, lambda g: tuple(np.split(g, bounds, axis=ax)))


def stack(tensors: Sequence[Tensor], axis: int = 0) -> Tensor:
    tensors = tuple(_as_tensor(t) for t in tensors)
    for t in tensors[1:]:
        if t.shape != tensors[0].shape:
            raise ShapeError("stack", tensors[0].shape, t.shape)
    y = np.stack([t.data for t in tensors], axis=axis)
    n = len(tensors)
    return _record(y, tensors, lambda g: tuple(np.take(g, i, axis=axis) for i in range(n)))


def embedding(table: Tensor, ids) -> Tensor:
    """Gather rows of ``table``; output shape is ``ids.shape + (dim,)``."""
    ids = np.asarray(ids, dtype=np.int64)
    if table.data.ndim != 2:
        raise ShapeError("embedding", table.shape, ids.shape)
    if ids.size and (ids.min() < 0 or ids.max() >= table.shape[0]):
        raise ShapeError("embedding", table.shape, ids.shape)
    shape = table.shape

    def vjp(g):
        grad = np.zeros(shape, dtype=g.dtype)
        np.add.at(grad, ids, g)
        return (grad,)

    return _record(table.data[ids], (table,), vjp)


def pick(a: Tensor, ids) -> Tensor:
    """Select one entry per row along the last axis: ``a[..., ids]``."""
    ids = np.asarray(ids, dtype=np.int64)
    if ids.shape != a.shape[:-1]:
        raise ShapeError("pick", a.shape, ids.shape)
    idx = ids[..., None]
    shape = a.shape

    def vjp(g):
        grad = np.zeros(shape, dtype=g.dtype)
        np.put_along_axis(grad, idx, g[..., None], axis=-1)
        return (grad,)

    return _record(np.take_along_axis(a.data, idx, axis=-1)[..., 0], (a,), vjp)


def reshape(a: Tensor, shape) -> Tensor:
    old = a.shape
    try:
        y = a.data.reshape(shape)
    except ValueError:
        raise ShapeError("reshape", old, tuple(shape)) from None
    return _record(y, (a,), lambda g: (g.reshape(old),))


def getitem(a: Tensor, index) -> Tensor:
    shape = a.shape
    y = a.data[index]

    def vjp(g):
        grad = np.zeros(shape, dtype=g.dtype)
        grad[index] += g
        return (grad,)

    return _record(np.ascontiguousarray(y), (a,), vjp)


# ---------------------------------------------------------------------------
# finite-difference oracle
# ---------------------------------------------------------------------------


def grad_check(function: Callable[[Tensor], Tensor], point, step: float = 1e-3, coords=None) -> float:
    """Max relative error between backward and central differences.

    Runs in float64. ``coords`` restricts the probe to a list of flat indices
    (default: every coordinate). Relative error per coordinate is
    ``|a - n| / max(|a|, |n|, 1e-8)``.
    """
    if not step > 0:
        raise ContractError(f"grad_check step must be positive, got {step}")
    base = np.array(point.data if isinstance(point, Tensor) else point, dtype=np.float64)
    with precision(np.float64):
        with Tape() as tape:
            x = tape.leaf(base.copy())
            out = function(x)
        analytic = tape.backward(out)[x].data.reshape(-1)
        flat = base.reshape(-1)
        if coords is None:
            coords = range(flat.size)
        worst = 0.0
        for k in coords:
            plus = flat.copy()
            plus[k] += step
            minus = flat.copy()
            minus[k] -= step
            fp = function(Tensor(plus.reshape(base.shape))).item()
            fm = function(Tensor(minus.reshape(base.shape))).item()
            numeric = (fp - fm) / (2.0 * step)
            a = float(analytic[k])
            err = abs(a - numeric) / max(abs(a), abs(numeric), 1e-8)
            worst = max(worst, err)
    return worst
