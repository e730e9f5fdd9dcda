"""Reverse-mode tape with second-order forward jets, over numpy payloads.

Two derivative contracts that are designed to compose:

* :class:`Value` / :func:`grad` -- gradient of a scalar node with respect
  to parameter leaves, by a reverse sweep over the recorded graph.
* :class:`Jet2` / :func:`jet_eval` -- value plus first and second
  directional derivative, propagated forward through the same operation
  set (truncated Taylor arithmetic).

Jet components may themselves be tape nodes, so a loss assembled from
first/second input-derivatives of a network stays differentiable with
respect to the network parameters: build the network inputs as jets whose
seeds are plain arrays, keep the weights as ``Value`` leaves, and call
:func:`grad` on the resulting scalar.

The supported operation set is closed: +, -, *, /, unary minus, tanh,
sigmoid, sin, cos, exp, constant powers, matrix products, sum, mean,
square and column extraction.  Anything outside it raises ``TypeError``
at construction time.  Any operation producing a non-finite result
raises :class:`NonFiniteError` immediately instead of letting NaN/Inf
poison a training run.

Payloads are float64 numpy arrays; a scalar is a 0-d array.  Evaluation
is deterministic: identical inputs rebuild identical graphs, and the
reverse sweep accumulates in a fixed topological order.
"""

from __future__ import annotations

import numpy as np

_NUMBER = (int, float, np.integer, np.floating)
_PLAIN = (int, float, np.integer, np.floating, np.ndarray)


class NonFiniteError(ArithmeticError):
    """An operation produced NaN or Inf."""


def _check_finite(arr, op):
    # summing is one pass over memory; only on a non-finite (or huge) total
    # do we pay for the exact elementwise verdict
    if arr.ndim == 0:
        if not np.isfinite(arr):
            raise NonFiniteError(f"non-finite result in operation '{op}'")
        return
    if not np.isfinite(arr.sum()) and not np.all(np.isfinite(arr)):
        raise NonFiniteError(f"non-finite result in operation '{op}'")


def _unbroadcast(g, shape):
    """Sum gradient ``g`` down to ``shape`` (inverse of numpy broadcasting)."""
    while g.ndim > len(shape):
        g = g.sum(axis=0)
    for axis, size in enumerate(shape):
        if size == 1 and g.shape[axis] != 1:
            g = g.sum(axis=axis, keepdims=True)
    return g


def _accum(node, g):
    node.grad = g if node.grad is None else node.grad + g


class Value:
    """A node on the reverse-mode tape.

    ``data`` is a float64 array (0-d for scalars).  ``grad`` is filled by
    :meth:`backward` and has the same shape as ``data``.
    """

    __slots__ = ("data", "grad", "_parents", "_backward", "_op")
    __array_ufunc__ = None  # keep numpy from absorbing us into object arrays

    def __init__(self, data, _parents=(), _op="leaf"):
        if isinstance(data, Value):
            raise TypeError("Value payload must be a plain array, not a Value")
        arr = np.asarray(data, dtype=float)
        _check_finite(arr, _op)
        self.data = arr
        self.grad = None
        self._parents = _parents
        self._backward = None
        self._op = _op

    @property
    def shape(self):
        return self.data.shape

    def __repr__(self):
        return f"Value(op={self._op!r}, shape={self.data.shape})"

    # -- binary arithmetic -------------------------------------------------

    def __add__(self, other):
        if isinstance(other, Jet2):
            return NotImplemented
        if isinstance(other, Value):
            out = Value(self.data + other.data, (self, other), "add")

            def bk():
                _accum(self, _unbroadcast(out.grad, self.data.shape))
                _accum(other, _unbroadcast(out.grad, other.data.shape))
        elif isinstance(other, _PLAIN):
            out = Value(self.data + other, (self,), "add")

            def bk():
                _accum(self, _unbroadcast(out.grad, self.data.shape))
        else:
            raise TypeError(f"unsupported operand for Value + {type(other).__name__}")
        out._backward = bk
        return out

    def __radd__(self, other):
        return self.__add__(other)

    def __neg__(self):
        out = Value(-self.data, (self,), "neg")

        def bk():
            _accum(self, -out.grad)

        out._backward = bk
        return out

    def __sub__(self, other):
        if isinstance(other, Jet2):
            return NotImplemented
        if isinstance(other, Value):
            out = Value(self.data - other.data, (self, other), "sub")

            def bk():
                _accum(self, _unbroadcast(out.grad, self.data.shape))
                _accum(other, _unbroadcast(-out.grad, other.data.shape))
        elif isinstance(other, _PLAIN):
            out = Value(self.data - other, (self,), "sub")

            def bk():
                _accum(self, _unbroadcast(out.grad, self.data.shape))
        else:
            raise TypeError(f"unsupported operand for Value - {type(other).__name__}")
        out._backward = bk
        return out

    def __rsub__(self, other):
        if not isinstance(other, _PLAIN):
            return NotImplemented
        out = Value(other - self.data, (self,), "rsub")

        def bk():
            _accum(self, _unbroadcast(-out.grad, self.data.shape))

        out._backward = bk
        return out

    def __mul__(self, other):
        if isinstance(other, Jet2):
            return NotImplemented
        if isinstance(other, Value):
            out = Value(self.data * other.data, (self, other), "mul")

            def bk():
                _accum(self, _unbroadcast(out.grad * other.data, self.data.shape))
                _accum(other, _unbroadcast(out.grad * self.data, other.data.shape))
        elif isinstance(other, _PLAIN):
            out = Value(self.data * other, (self,), "mul")

            def bk():
                _accum(self, _unbroadcast(out.grad * other, self.data.shape))
        else:
            raise TypeError(f"unsupported operand for Value * {type(other).__name__}")
        out._backward = bk
        return out

    def __rmul__(self, other):
        return self.__mul__(other)

    def __truediv__(self, other):
        if isinstance(other, Jet2):
            return NotImplemented
        if isinstance(other, Value):
            with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
                out = Value(self.data / other.data, (self, other), "div")

            def bk():
                _accum(self, _unbroadcast(out.grad / other.data, self.data.shape))
                _accum(other, _unbroadcast(-out.grad * self.data / other.data**2,
                                           other.data.shape))
        elif isinstance(other, _PLAIN):
            with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
                out = Value(self.data / other, (self,), "div")

            def bk():
                _accum(self, _unbroadcast(out.grad / other, self.data.shape))
        else:
            raise TypeError(f"unsupported operand for Value / {type(other).__name__}")
        out._backward = bk
        return out

    def __rtruediv__(self, other):
        if not isinstance(other, _PLAIN):
            return NotImplemented
        with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
            out = Value(other / self.data, (self,), "rdiv")

        def bk():
            _accum(self, _unbroadcast(-out.grad * other / self.data**2, self.data.shape))

        out._backward = bk
        return out

    def __pow__(self, p):
        if not isinstance(p, _NUMBER):
            raise TypeError("Value ** exponent requires a constant real exponent")
        p = float(p)
        with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
            out = Value(self.data**p, (self,), "pow")

        def bk():
            _accum(self, out.grad * p * self.data ** (p - 1.0))

        out._backward = bk
        return out

    # -- elementwise functions ---------------------------------------------

    def tanh(self):
        t = np.tanh(self.data)
        out = Value(t, (self,), "tanh")

        def bk():
            _accum(self, out.grad * (1.0 - t * t))

        out._backward = bk
        return out

    def sigmoid(self):
        s = _sigmoid_np(self.data)
        out = Value(s, (self,), "sigmoid")

        def bk():
            _accum(self, out.grad * s * (1.0 - s))

        out._backward = bk
        return out

    def sin(self):
        out = Value(np.sin(self.data), (self,), "sin")

        def bk():
            _accum(self, out.grad * np.cos(self.data))

        out._backward = bk
        return out

    def cos(self):
        out = Value(np.cos(self.data), (self,), "cos")

        def bk():
            _accum(self, -out.grad * np.sin(self.data))

        out._backward = bk
        return out

    def exp(self):
        with np.errstate(over="ignore"):
            e = np.exp(self.data)
        out = Value(e, (self,), "exp")

        def bk():
            _accum(self, out.grad * e)

        out._backward = bk
        return out

    def square(self):
        out = Value(self.data * self.data, (self,), "square")

        def bk():
            _accum(self, out.grad * 2.0 * self.data)

        out._backward = bk
        return out

    # -- linear algebra and reductions ---------------------------------------

    def __matmul__(self, other):
        return matmul(self, other)

    def __rmatmul__(self, other):
        return matmul(other, self)

    def asum(self):
        out = Value(self.data.sum(), (self,), "sum")

        def bk():
            _accum(self, np.broadcast_to(out.grad, self.data.shape).copy())

        out._backward = bk
        return out

    def amean(self):
        n = self.data.size
        out = Value(self.data.mean(), (self,), "mean")

        def bk():
            _accum(self, np.broadcast_to(out.grad / n, self.data.shape).copy())

        out._backward = bk
        return out

    def column(self, j):
        if self.data.ndim != 2:
            raise ValueError("column() requires a 2-d payload")
        j = int(j)
        out = Value(self.data[:, j], (self,), "column")

        def bk():
            g = np.zeros_like(self.data)
            g[:, j] = out.grad
            _accum(self, g)

        out._backward = bk
        return out

    def take0(self, i):
        """Select index ``i`` along the leading axis (used on stacked blocks)."""
        if self.data.ndim < 1:
            raise ValueError("take0() requires at least a 1-d payload")
        i = int(i)
        out = Value(self.data[i], (self,), "take0")

        def bk():
            g = np.zeros_like(self.data)
            g[i] = out.grad
            _accum(self, g)

        out._backward = bk
        return out

    # -- reverse sweep -------------------------------------------------------

    def backward(self):
        """Reverse sweep seeding d(self)/d(self)=1; fills ``grad`` on ancestors."""
        if self.data.shape != ():
            raise ValueError("backward() requires a scalar node")
        topo = []
        seen = set()
        stack = [(self, False)]
        while stack:
            node, expanded = stack.pop()
            if expanded:
                topo.append(node)
                continue
            if id(node) in seen:
                continue
            seen.add(id(node))
            stack.append((node, True))
            for p in node._parents:
                if id(p) not in seen:
                    stack.append((p, False))
        for node in topo:
            node.grad = None
        self.grad = np.ones(())
        for node in reversed(topo):
            if node._backward is not None and node.grad is not None:
                node._backward()


def _mm(a, b):
    # flatten stacked (D, N, k) @ (k, n) into one GEMM; numpy's batched
    # matmul path is an order of magnitude slower than a flat product
    if a.ndim == 3 and b.ndim == 2:
        d, n, k = a.shape
        return (a.reshape(d * n, k) @ b).reshape(d, n, b.shape[1])
    return a @ b


def matmul(a, b):
    """Matrix/vector product for any mix of arrays, Values and jets."""
    if isinstance(a, MultiJet) or isinstance(b, MultiJet):
        return _multi_matmul(a, b)
    if isinstance(a, Jet2) or isinstance(b, Jet2):
        return _jet_matmul(a, b)
    if isinstance(a, Value) and isinstance(b, Value):
        out = Value(_mm(a.data, b.data), (a, b), "matmul")

        def bk():
            _accum(a, _matmul_grad_left(out.grad, a.data, b.data))
            _accum(b, _matmul_grad_right(out.grad, a.data, b.data))
    elif isinstance(a, Value):
        bd = np.asarray(b, dtype=float)
        out = Value(_mm(a.data, bd), (a,), "matmul")

        def bk():
            _accum(a, _matmul_grad_left(out.grad, a.data, bd))
    elif isinstance(b, Value):
        ad = np.asarray(a, dtype=float)
        out = Value(_mm(ad, b.data), (b,), "matmul")

        def bk():
            _accum(b, _matmul_grad_right(out.grad, ad, b.data))
    else:
        return _mm(np.asarray(a, dtype=float), np.asarray(b, dtype=float))
    out._backward = bk
    return out


def _matmul_grad_left(g, a, b):
    # shapes: a (m,k), (k,) or stacked (d,m,k);  b (k,n) or (k,)
    if a.ndim == 1:
        if b.ndim == 1:
            return g * b
        return g @ b.T
    if b.ndim == 1:
        return np.outer(g, b)
    return _mm(g, b.T)


def _matmul_grad_right(g, a, b):
    if b.ndim == 1:
        if a.ndim == 1:
            return g * a
        return a.T @ g
    if a.ndim == 1:
        return np.outer(a, g)
    if a.ndim == 3:
        # stacked left operand (d, m, k) @ (k, n): sum over both batch axes
        d, m, k = a.shape
        return a.reshape(d * m, k).T @ g.reshape(d * m, -1)
    return a.T @ g


def _sigmoid_np(x):
    x = np.asarray(x, dtype=float)
    out = np.empty_like(x)
    pos = x >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-x[pos]))
    ex = np.exp(x[~pos])
    out[~pos] = ex / (1.0 + ex)
    return out


# ---------------------------------------------------------------------------
# Second-order jets


def _jzero(c):
    return isinstance(c, _NUMBER) and c == 0


def _jadd(a, b):
    if _jzero(a):
        return b
    if _jzero(b):
        return a
    return a + b


def _jmul(a, b):
    if _jzero(a) or _jzero(b):
        return 0.0
    return a * b


class Jet2:
    """Truncated Taylor triple (value, d1, d2) along one input direction.

    Components may be plain numbers/arrays or ``Value`` nodes; mixing is
    allowed, which is what lets parameter gradients flow through input
    derivatives of a network.
    """

    __slots__ = ("value", "d1", "d2")
    __array_ufunc__ = None

    def __init__(self, value, d1=0.0, d2=0.0):
        self.value = value
        self.d1 = d1
        self.d2 = d2

    def __repr__(self):
        return f"Jet2({self.value!r}, {self.d1!r}, {self.d2!r})"

    def __add__(self, other):
        o = _as_jet(other)
        return Jet2(self.value + o.value, _jadd(self.d1, o.d1), _jadd(self.d2, o.d2))

    def __radd__(self, other):
        return self.__add__(other)

    def __neg__(self):
        return Jet2(-self.value,
                    0.0 if _jzero(self.d1) else -self.d1,
                    0.0 if _jzero(self.d2) else -self.d2)

    def __sub__(self, other):
        return self.__add__(-_as_jet(other))

    def __rsub__(self, other):
        return (-self).__add__(_as_jet(other))

    def __mul__(self, other):
        o = _as_jet(other)
        d1 = _jadd(_jmul(self.value, o.d1), _jmul(self.d1, o.value))
        d2 = _jadd(_jadd(_jmul(self.value, o.d2), _jmul(self.d2, o.value)),
                   _jmul(2.0, _jmul(self.d1, o.d1)))
        return Jet2(self.value * o.value, d1, d2)

    def __rmul__(self, other):
        return self.__mul__(other)

    def __truediv__(self, other):
        return self.__mul__(_jet_reciprocal(_as_jet(other)))

    def __rtruediv__(self, other):
        return _as_jet(other).__mul__(_jet_reciprocal(self))

    def __pow__(self, p):
        if not isinstance(p, _NUMBER):
            raise TypeError("Jet2 ** exponent requires a constant real exponent")
        p = float(p)
        v = self.value
        return _compose(self, v**p, p * v ** (p - 1.0), p * (p - 1.0) * v ** (p - 2.0))


def _as_jet(x):
    if isinstance(x, Jet2):
        return x
    if isinstance(x, (Value,) + _PLAIN):
        return Jet2(x, 0.0, 0.0)
    raise TypeError(f"cannot use {type(x).__name__} in jet arithmetic")


def _compose(j, f0, f1, f2):
    """Second-order chain rule: phi(g) with phi-derivatives f1, f2 at g.value."""
    if _jzero(j.d1):
        d1 = 0.0
        q = 0.0
    else:
        d1 = f1 * j.d1
        q = f2 * (j.d1 * j.d1)
    return Jet2(f0, d1, _jadd(q, _jmul(f1, j.d2)))


def _jet_reciprocal(j):
    w = 1.0 / j.value
    w2 = w * w
    return _compose(j, w, -w2, 2.0 * (w2 * w))


def _jet_matmul(a, b):
    ja, jb = _as_jet(a), _as_jet(b)

    def mm(x, y):
        if _jzero(x) or _jzero(y):
            return 0.0
        return matmul(x, y)

    d1 = _jadd(mm(ja.value, jb.d1), mm(ja.d1, jb.value))
    d2 = _jadd(_jadd(mm(ja.value, jb.d2), mm(ja.d2, jb.value)),
               _jmul(2.0, mm(ja.d1, jb.d1)))
    return Jet2(matmul(ja.value, jb.value), d1, d2)


class MultiJet:
    """Batched jet: stacked first derivatives plus one second-order channel.

    ``d1`` stacks first directional derivatives along a leading axis (one
    slab per direction); ``e1``/``e2`` carry first and second derivative
    along one extra direction.  This is the exact derivative set the PDE
    residuals need (first spatial derivatives, second time derivative) at a
    third of the cost of separate full second-order passes.  Equivalent to
    running :class:`Jet2` once per direction; a test pins that equivalence.
    """

    __slots__ = ("value", "d1", "e1", "e2")
    __array_ufunc__ = None

    def __init__(self, value, d1=0.0, e1=0.0, e2=0.0):
        self.value = value
        self.d1 = d1
        self.e1 = e1
        self.e2 = e2

    def __add__(self, other):
        o = _as_multijet(other)
        return MultiJet(self.value + o.value, _jadd(self.d1, o.d1),
                        _jadd(self.e1, o.e1), _jadd(self.e2, o.e2))

    def __radd__(self, other):
        return self.__add__(other)

    def __neg__(self):
        def neg(c):
            return 0.0 if _jzero(c) else -c
        return MultiJet(-self.value, neg(self.d1), neg(self.e1), neg(self.e2))

    def __sub__(self, other):
        return self.__add__(-_as_multijet(other))

    def __rsub__(self, other):
        return (-self).__add__(_as_multijet(other))

    def __mul__(self, other):
        o = _as_multijet(other)
        d1 = _jadd(_jmul(self.value, o.d1), _jmul(self.d1, o.value))
        e1 = _jadd(_jmul(self.value, o.e1), _jmul(self.e1, o.value))
        e2 = _jadd(_jadd(_jmul(self.value, o.e2), _jmul(self.e2, o.value)),
                   _jmul(2.0, _jmul(self.e1, o.e1)))
        return MultiJet(self.value * o.value, d1, e1, e2)

    def __rmul__(self, other):
        return self.__mul__(other)


def _as_multijet(x):
    if isinstance(x, MultiJet):
        return x
    if isinstance(x, (Value,) + _PLAIN):
        return MultiJet(x, 0.0, 0.0, 0.0)
    raise TypeError(f"cannot use {type(x).__name__} in multi-jet arithmetic")


def _multi_compose(j, f0, f1, f2):
    d1 = 0.0 if _jzero(j.d1) else f1 * j.d1
    if _jzero(j.e1):
        e1, q = 0.0, 0.0
    else:
        e1 = f1 * j.e1
        q = f2 * (j.e1 * j.e1)
    return MultiJet(f0, d1, e1, _jadd(q, _jmul(f1, j.e2)))


def _multi_matmul(a, b):
    ja, jb = _as_multijet(a), _as_multijet(b)

    def mm(x, y):
        if _jzero(x) or _jzero(y):
            return 0.0
        return matmul(x, y)

    d1 = _jadd(mm(ja.value, jb.d1), mm(ja.d1, jb.value))
    e1 = _jadd(mm(ja.value, jb.e1), mm(ja.e1, jb.value))
    e2 = _jadd(_jadd(mm(ja.value, jb.e2), mm(ja.e2, jb.value)),
               _jmul(2.0, mm(ja.e1, jb.e1)))
    return MultiJet(matmul(ja.value, jb.value), d1, e1, e2)


# ---------------------------------------------------------------------------
# Generic operation set: dispatches on plain arrays, Values and jets.


def tanh(x):
    if isinstance(x, MultiJet):
        t = tanh(x.value)
        f1 = 1.0 - t * t
        return _multi_compose(x, t, f1, -2.0 * (t * f1))
    if isinstance(x, Jet2):
        t = tanh(x.value)
        f1 = 1.0 - t * t
        return _compose(x, t, f1, -2.0 * (t * f1))
    if isinstance(x, Value):
        return x.tanh()
    return np.tanh(x)


def sigmoid(x):
    if isinstance(x, MultiJet):
        s = sigmoid(x.value)
        f1 = s * (1.0 - s)
        return _multi_compose(x, s, f1, f1 * (1.0 - 2.0 * s))
    if isinstance(x, Jet2):
        s = sigmoid(x.value)
        f1 = s * (1.0 - s)
        return _compose(x, s, f1, f1 * (1.0 - 2.0 * s))
    if isinstance(x, Value):
        return x.sigmoid()
    return _sigmoid_np(x)


def sin(x):
    if isinstance(x, (Jet2, MultiJet)):
        s, c = sin(x.value), cos(x.value)
        comp = _multi_compose if isinstance(x, MultiJet) else _compose
        return comp(x, s, c, -s)
    if isinstance(x, Value):
        return x.sin()
    return np.sin(x)


def cos(x):
    if isinstance(x, (Jet2, MultiJet)):
        s, c = sin(x.value), cos(x.value)
        comp = _multi_compose if isinstance(x, MultiJet) else _compose
        return comp(x, c, -s, -c)
    if isinstance(x, Value):
        return x.cos()
    return np.cos(x)


def exp(x):
    if isinstance(x, (Jet2, MultiJet)):
        e = exp(x.value)
        comp = _multi_compose if isinstance(x, MultiJet) else _compose
        return comp(x, e, e, e)
    if isinstance(x, Value):
        return x.exp()
    return np.exp(x)


def square(x):
    if isinstance(x, (Jet2, MultiJet)):
        return x * x
    if isinstance(x, Value):
        return x.square()
    return np.square(x)


def power(x, p):
    if isinstance(x, MultiJet):
        v = x.value
        return _multi_compose(x, v**p, p * v ** (p - 1.0),
                              p * (p - 1.0) * v ** (p - 2.0))
    if isinstance(x, (Jet2, Value)):
        return x**p
    return np.power(x, p)


def asum(x):
    if isinstance(x, Jet2):
        return Jet2(asum(x.value),
                    0.0 if _jzero(x.d1) else asum(x.d1),
                    0.0 if _jzero(x.d2) else asum(x.d2))
    if isinstance(x, Value):
        return x.asum()
    return np.sum(x)


def amean(x):
    if isinstance(x, Jet2):
        return Jet2(amean(x.value),
                    0.0 if _jzero(x.d1) else amean(x.d1),
                    0.0 if _jzero(x.d2) else amean(x.d2))
    if isinstance(x, Value):
        return x.amean()
    return np.mean(x)


def column(x, j):
    if isinstance(x, Jet2):
        return Jet2(column(x.value, j),
                    0.0 if _jzero(x.d1) else column(x.d1, j),
                    0.0 if _jzero(x.d2) else column(x.d2, j))
    if isinstance(x, Value):
        return x.column(j)
    return np.asarray(x)[:, int(j)]


def take0(x, i):
    """Slab ``i`` along the leading axis of an array or Value."""
    if isinstance(x, Value):
        return x.take0(i)
    return np.asarray(x)[int(i)]


def payload(x):
    """Raw numpy payload of an array, Value, Jet2 or MultiJet value component."""
    if isinstance(x, (Jet2, MultiJet)):
        return payload(x.value)
    if isinstance(x, Value):
        return x.data
    return np.asarray(x, dtype=float)


# ---------------------------------------------------------------------------
# Public derivative entry points


def grad(loss, params):
    """Gradient of a scalar ``loss`` with respect to ``params``, flattened.

    ``params`` is a sequence of Value leaves; the result concatenates the
    per-leaf gradients in order (zeros for leaves the loss does not reach).
    Works whether or not the loss was assembled through jets.
    """
    if not isinstance(loss, Value):
        raise TypeError("loss must be a Value node")
    loss.backward()
    parts = []
    for p in params:
        if not isinstance(p, Value):
            raise TypeError("params must be Value leaves")
        g = p.grad if p.grad is not None else np.zeros_like(p.data)
        parts.append(np.asarray(g, dtype=float).reshape(-1))
    if not parts:
        return np.zeros(0)
    flat = np.concatenate(parts)
    _check_finite(flat, "grad (reverse sweep)")
    return flat


def jet_eval(f, point, direction_index):
    """Value and first/second derivative of ``f`` along one coordinate.

    ``f`` takes a sequence of n scalars (jet-aware via the generic ops) and
    returns a scalar; ``point`` is the n-vector at which to evaluate;
    ``direction_index`` selects the coordinate k.  Returns a float-payload
    ``Jet2`` holding (f, df/dx_k, d2f/dx_k2).
    """
    pt = np.asarray(point, dtype=float).reshape(-1)
    n = pt.size
    k = int(direction_index)
    if not 0 <= k < n:
        raise IndexError(f"direction_index {k} out of range for {n} inputs")
    seeds = [Jet2(pt[i], 1.0 if i == k else 0.0, 0.0) for i in range(n)]
    out = _as_jet(f(seeds))
    triple = []
    for comp in (out.value, out.d1, out.d2):
        c = payload(comp)
        if c.shape != ():
            raise ValueError("jet_eval expects a scalar-valued function")
        triple.append(float(c))
    if not all(np.isfinite(triple)):
        raise NonFiniteError("non-finite result in jet_eval")
    return Jet2(*triple)
