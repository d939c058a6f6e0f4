"""Reverse-mode automatic differentiation over float64 numpy arrays.

Every differentiable operation returns a new :class:`Tensor` that remembers its
parents and a closure propagating the output gradient back to them. Calling
:func:`backward` on a scalar walks that graph in reverse topological order.
"""
import contextlib

import numpy as np

_grad_enabled = True


@contextlib.contextmanager
def no_grad():
    """Build no tape inside the block; results never require gradients."""
    global _grad_enabled
    prev, _grad_enabled = _grad_enabled, False
    try:
        yield
    finally:
        _grad_enabled = prev


class Tensor:
    """n-dimensional float64 array that can take part in the gradient tape.

    Parameters
    ----------
    data : array_like
        Values, copied into a C-contiguous float64 array.
    requires_grad : bool
        Leaf tensors with ``requires_grad=True`` receive gradients from
        :func:`backward`; their ``grad`` buffer is allocated at construction.
    """

    __slots__ = ("data", "requires_grad", "grad", "_parents", "_backward", "name")

    def __init__(self, data, requires_grad=False, name=None):
        self.data = np.array(data, dtype=np.float64, order="C")
        self.requires_grad = bool(requires_grad)
        self.grad = np.zeros_like(self.data) if self.requires_grad else None
        self._parents = ()
        self._backward = None
        self.name = name

    @property
    def shape(self):
        return self.data.shape

    @property
    def size(self):
        return self.data.size

    def __len__(self):
        return len(self.data)

    def __repr__(self):
        flag = ", requires_grad=True" if self.requires_grad else ""
        return f"Tensor({self.data!r}{flag})"

    def numpy(self):
        return self.data

    def item(self):
        return float(self.data)

    def zero_grad(self):
        if self.grad is not None:
            self.grad.fill(0.0)

    def detach(self):
        return Tensor(self.data)

    # operator sugar; the heavy lifting lives in the functions below
    def __add__(self, other):
        return add(self, other)

    __radd__ = __add__

    def __sub__(self, other):
        return add(self, neg(as_tensor(other)))

    def __rsub__(self, other):
        return add(as_tensor(other), neg(self))

    def __mul__(self, other):
        return mul(self, other)

    __rmul__ = __mul__

    def __neg__(self):
        return neg(self)

    def __matmul__(self, other):
        return matmul(self, other)

    def sum(self):
        return tsum(self)

    def mean(self):
        return mean(self)


def as_tensor(x):
    return x if isinstance(x, Tensor) else Tensor(x)


def _result(data, parents, backward_fn):
    out = Tensor.__new__(Tensor)
    out.data = data
    out.grad = None
    out.name = None
    live = tuple(p for p in parents if p.requires_grad) if _grad_enabled else ()
    out.requires_grad = bool(live)
    if live:
        out._parents = live
        out._backward = backward_fn
    else:
        out._parents = ()
        out._backward = None
    return out


def _accumulate(t, g):
    if not t.requires_grad:
        return
    if t.grad is None:
        t.grad = np.array(g, dtype=np.float64)
    else:
        t.grad += g


def _unbroadcast(g, shape):
    # sum out axes that numpy broadcasting added or stretched
    while g.ndim > len(shape):
        g = g.sum(axis=0)
    for axis, n in enumerate(shape):
        if n == 1 and g.shape[axis] != 1:
            g = g.sum(axis=axis, keepdims=True)
    return g


def add(a, b):
    a, b = as_tensor(a), as_tensor(b)

    def bw(g):
        _accumulate(a, _unbroadcast(g, a.shape))
        _accumulate(b, _unbroadcast(g, b.shape))

    return _result(a.data + b.data, (a, b), bw)


def neg(a):
    def bw(g):
        _accumulate(a, -g)

    return _result(-a.data, (a,), bw)


def mul(a, b):
    a, b = as_tensor(a), as_tensor(b)

    def bw(g):
        if a.requires_grad:
            _accumulate(a, _unbroadcast(g * b.data, a.shape))
        if b.requires_grad:
            _accumulate(b, _unbroadcast(g * a.data, b.shape))

    return _result(a.data * b.data, (a, b), bw)


def square(a):
    def bw(g):
        _accumulate(a, 2.0 * a.data * g)

    return _result(a.data * a.data, (a,), bw)


def matmul(a, b):
    """Matrix product for 1-D/2-D operands."""
    a, b = as_tensor(a), as_tensor(b)

    def bw(g):
        if a.requires_grad:
            if b.data.ndim == 1:
                ga = np.multiply.outer(g, b.data)
            else:
                ga = g @ b.data.T
            _accumulate(a, ga.reshape(a.shape) if a.data.ndim > 1 else ga)
        if b.requires_grad:
            gb = np.multiply.outer(a.data, g) if a.data.ndim == 1 else a.data.T @ g
            _accumulate(b, gb)

    return _result(a.data @ b.data, (a, b), bw)


def tsum(a):
    def bw(g):
        _accumulate(a, np.broadcast_to(g, a.shape))

    return _result(np.asarray(a.data.sum()), (a,), bw)


def mean(a):
    n = a.data.size

    def bw(g):
        _accumulate(a, np.broadcast_to(g / n, a.shape))

    return _result(np.asarray(a.data.mean()), (a,), bw)


def reshape(a, shape):
    def bw(g):
        _accumulate(a, g.reshape(a.shape))

    return _result(a.data.reshape(shape), (a,), bw)


def take(a, index):
    """Gather ``a.data.ravel()[index]``; the gradient scatters back with addition."""
    index = np.asarray(index)
    flat = a.data.reshape(-1)

    def bw(g):
        ga = np.bincount(index.ravel(), weights=g.ravel(), minlength=flat.size)
        _accumulate(a, ga.reshape(a.shape))

    return _result(flat[index], (a,), bw)


def _topological(root):
    order, seen = [], set()
    stack = [(root, False)]
    while stack:
        node, expanded = stack.pop()
        if expanded:
            order.append(node)
            continue
        if id(node) in seen:
            continue
        seen.add(id(node))
        stack.append((node, True))
        for p in node._parents:
            if id(p) not in seen:
                stack.append((p, False))
    return order


def backward(loss):
    """Accumulate d(loss)/d(leaf) into every reachable leaf with ``requires_grad``.

    Gradients add to whatever the leaf buffers already hold; call ``zero_grad``
    between independent updates.
    """
    if loss.data.size != 1:
        raise ValueError(f"backward() needs a scalar loss, got shape {loss.shape}")
    if not loss.requires_grad:
        return
    grads = {id(loss): np.ones_like(loss.data)}
    for node in reversed(_topological(loss)):
        g = grads.pop(id(node), None)
        if g is None:
            continue
        if node._backward is None:
            continue
        # interior nodes collect gradients in `grads`, leaves in their buffers
        for p in node._parents:
            if p._backward is not None and id(p) not in grads:
                grads[id(p)] = np.zeros_like(p.data)
        _route(node, g, grads)


def _route(node, g, grads):
    # temporarily point interior parents' grad at their slot in `grads`
    # deduplicated: an operand used twice (y + y) must share one slot
    interior = list({id(p): p for p in node._parents if p._backward is not None}.values())
    for p in interior:
        p.grad = grads[id(p)]
    node._backward(g)
    for p in interior:
        grads[id(p)] = p.grad
        p.grad = None
