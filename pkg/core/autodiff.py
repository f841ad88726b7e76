"""Reverse-mode differentiation over a recorded trace of grid operations.

Every op in ``core.ops`` and ``core.fourier`` returns a ``Tensor`` that keeps
its parents and a closure mapping the output gradient to one gradient per
parent. ``backward`` walks the trace once in reverse topological order.

Complex nodes store the gradient as dL/dRe + i*dL/dIm.
"""
import contextlib
import contextvars
from collections.abc import Callable, Iterator, Sequence

import numpy as np

from core.errors import AutodiffError, ShapeError
from core.grid import complex_dtype, real_dtype

BackwardFn = Callable[[np.ndarray], Sequence[np.ndarray | None]]

_grad_enabled: contextvars.ContextVar[bool] = contextvars.ContextVar("grad_enabled", default=True)


@contextlib.contextmanager
def no_grad() -> Iterator[None]:
    """Run ops without recording a trace (inference, finite differences)."""
    token = _grad_enabled.set(False)
    try:
        yield
    finally:
        _grad_enabled.reset(token)


def grad_enabled() -> bool:
    return _grad_enabled.get()


class Tensor:
    __array_priority__ = 1000

    def __init__(
        self,
        data: np.ndarray,
        requires_grad: bool = False,
        parents: tuple["Tensor", ...] = (),
        backward_fn: BackwardFn | None = None,
    ):
        self.data = data
        self.requires_grad = requires_grad
        self._parents = parents
        self._backward_fn = backward_fn

    @property
    def shape(self) -> tuple[int, ...]:
        return self.data.shape

    @property
    def ndim(self) -> int:
        return self.data.ndim

    @property
    def dtype(self) -> np.dtype:
        return self.data.dtype

    @property
    def is_complex(self) -> bool:
        return np.iscomplexobj(self.data)

    def numpy(self) -> np.ndarray:
        return self.data

    def item(self) -> float:
        return float(self.data)

    def __repr__(self) -> str:
        return f"Tensor(shape={self.shape}, dtype={self.dtype}, requires_grad={self.requires_grad})"

    # core.ops imports this module, so arithmetic imports it lazily.
    def __add__(self, other):
        from core import ops
        return ops.add(self, other)

    def __radd__(self, other):
        from core import ops
        return ops.add(other, self)

    def __sub__(self, other):
        from core import ops
        return ops.sub(self, other)

    def __rsub__(self, other):
        from core import ops
        return ops.sub(other, self)

    def __mul__(self, other):
        from core import ops
        return ops.mul(self, other)

    def __rmul__(self, other):
        from core import ops
        return ops.mul(other, self)

    def __truediv__(self, other):
        from core import ops
        return ops.div(self, other)

    def __rtruediv__(self, other):
        from core import ops
        return ops.div(other, self)

    def __neg__(self):
        from core import ops
        return ops.neg(self)


class Parameter(Tensor):
    """A named trainable leaf. ``grad`` always has the value's shape and dtype."""

    def __init__(self, value: np.ndarray, name: str, dtype=None):
        value = np.asarray(value)
        if dtype is None:
            dtype = complex_dtype() if np.iscomplexobj(value) else real_dtype()
        value = np.array(value, dtype=dtype)
        super().__init__(value, requires_grad=True)
        self.name = name
        self.grad = np.zeros_like(value)

    @property
    def value(self) -> np.ndarray:
        return self.data

    @value.setter
    def value(self, new_value: np.ndarray) -> None:
        if np.shape(new_value) != self.data.shape:
            raise ShapeError(f"Parameter '{self.name}': cannot assign shape {np.shape(new_value)} to {self.data.shape}")
        self.data = np.asarray(new_value, dtype=self.data.dtype)

    def zero_grad(self) -> None:
        self.grad = np.zeros_like(self.data)

    def __repr__(self) -> str:
        return f"Parameter(name={self.name!r}, shape={self.shape}, dtype={self.dtype})"


def as_tensor(value) -> Tensor:
    if isinstance(value, Tensor):
        return value
    array = np.asarray(value)
    if not np.issubdtype(array.dtype, np.inexact):
        array = array.astype(real_dtype())
    return Tensor(array)


def record(data: np.ndarray, parents: tuple[Tensor, ...], backward_fn: BackwardFn) -> Tensor:
    """Wrap an op result, attaching the trace only when a parent needs gradients."""
    if grad_enabled() and any(p.requires_grad for p in parents):
        return Tensor(data, requires_grad=True, parents=parents, backward_fn=backward_fn)
    return Tensor(data)


def _topological_order(root: Tensor) -> list[Tensor]:
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
        for parent in node._parents:
            if parent.requires_grad and id(parent) not in visited:
                stack.append((parent, False))
    return order


def backward(loss: Tensor) -> None:
    """Accumulate dloss/dparam into every Parameter reachable from ``loss``."""
    if not isinstance(loss, Tensor):
        raise AutodiffError(f"backward expects a Tensor, got {type(loss).__name__}")
    if loss.data.size != 1 or np.iscomplexobj(loss.data):
        raise AutodiffError(f"backward needs a real scalar loss, got shape {loss.shape} dtype {loss.dtype}")
    if not loss.requires_grad or (loss._backward_fn is None and not isinstance(loss, Parameter)):
        raise AutodiffError("backward called before forward: the loss has no recorded computation trace")

    grads: dict[int, np.ndarray] = {id(loss): np.ones_like(loss.data)}
    for node in reversed(_topological_order(loss)):
        grad = grads.pop(id(node), None)
        if grad is None:
            continue
        if isinstance(node, Parameter):
            if not np.iscomplexobj(node.data):
                grad = np.real(grad)
            node.grad = node.grad + grad.astype(node.data.dtype, copy=False).reshape(node.data.shape)
        if node._backward_fn is None:
            continue
        parent_grads = node._backward_fn(grad)
        for parent, parent_grad in zip(node._parents, parent_grads):
            if parent_grad is None or not parent.requires_grad:
                continue
            if id(parent) in grads:
                grads[id(parent)] = grads[id(parent)] + parent_grad
            else:
                grads[id(parent)] = parent_grad
