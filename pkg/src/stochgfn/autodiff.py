"""Reverse-mode automatic differentiation on dense float64 numpy arrays.

Define-by-run: every op builds a fresh tape node holding the forward value
and a closure that routes the output gradient to its inputs. Tapes are
single-owner and rebuilt per minibatch.
"""

from __future__ import annotations

import numpy as np

# Probabilities are clamped here before logs outside log_softmax paths;
# GFlowNet log-scale losses are sensitive to -inf contamination.
LOG_FLOOR = 1e-30

_grad_enabled = True


class no_grad:
    """Context manager that skips tape construction (fast inference path)."""

    def __enter__(self):
        global _grad_enabled
        self._prev = _grad_enabled
        _grad_enabled = False
        return self

    def __exit__(self, *exc):
        global _grad_enabled
        _grad_enabled = self._prev
        return False


class Tensor:
    __slots__ = ("value", "grad", "parents", "backward_fn", "requires_grad", "name")

    def __init__(self, value, parents=(), backward_fn=None, requires_grad=False, name=None):
        self.value = np.asarray(value, dtype=np.float64)
        self.grad = None
        self.parents = parents if _grad_enabled else ()
        self.backward_fn = backward_fn if _grad_enabled else None
        self.requires_grad = requires_grad
        self.name = name

    @property
    def shape(self):
        return self.value.shape

    def item(self):
        return float(self.value)

    def __repr__(self):
        tag = f" name={self.name}" if self.name else ""
        return f"Tensor(shape={self.value.shape}{tag})"


def const(value):
    return Tensor(value)


def param(value, name):
    return Tensor(np.array(value, dtype=np.float64), requires_grad=True, name=name)


def _needs_tape(*tensors):
    return _grad_enabled and any(t.parents or t.requires_grad for t in tensors)


def _unbroadcast(grad, shape):
    """Sum `grad` down to `shape` (inverse of numpy broadcasting)."""
    while grad.ndim > len(shape):
        grad = grad.sum(axis=0)
    for ax, n in enumerate(shape):
        if n == 1 and grad.shape[ax] != 1:
            grad = grad.sum(axis=ax, keepdims=True)
    return grad


def _binary(a, b, value, da, db):
    if not _needs_tape(a, b):
        return Tensor(value)

    def bwd(g, a=a, b=b):
        return (_unbroadcast(da(g), a.value.shape), _unbroadcast(db(g), b.value.shape))

    return Tensor(value, parents=(a, b), backward_fn=bwd)


def _unary(a, value, da):
    if not _needs_tape(a):
        return Tensor(value)
    return Tensor(value, parents=(a,), backward_fn=lambda g: (da(g),))


def add(a, b):
    return _binary(a, b, a.value + b.value, lambda g: g, lambda g: g)


def sub(a, b):
    return _binary(a, b, a.value - b.value, lambda g: g, lambda g: -g)


def neg(a):
    return _unary(a, -a.value, lambda g: -g)


def mul(a, b):
    return _binary(a, b, a.value * b.value, lambda g: g * b.value, lambda g: g * a.value)


def scale(a, c):
    c = float(c)
    return _unary(a, a.value * c, lambda g: g * c)


def square(a):
    return _unary(a, a.value * a.value, lambda g: g * 2.0 * a.value)


def matmul(a, b):
    value = a.value @ b.value
    if not _needs_tape(a, b):
        return Tensor(value)

    def bwd(g):
        return (g @ b.value.T, a.value.T @ g)

    return Tensor(value, parents=(a, b), backward_fn=bwd)


def affine(x, w, b):
    """x @ w + b, the dense layer primitive."""
    if x.value.ndim != 2 or w.value.ndim != 2 or x.value.shape[1] != w.value.shape[0]:
        raise ValueError(
            f"affine shape mismatch: x {x.value.shape} vs w {w.value.shape}"
        )
    return add(matmul(x, w), b)


def leaky_relu(a, slope=0.01):
    mask = a.value > 0
    fac = np.where(mask, 1.0, slope)
    return _unary(a, a.value * fac, lambda g: g * fac)


def relu(a):
    mask = (a.value > 0).astype(np.float64)
    return _unary(a, a.value * mask, lambda g: g * mask)


def log_softmax(a, mask=None):
    """Row-wise log-softmax over the last axis.

    `mask` (bool array broadcastable to a.shape) restricts the support;
    masked-out entries come back as -inf and receive zero gradient.
    """
    x = a.value
    if mask is not None:
        x = np.where(mask, x, -np.inf)
    xmax = np.max(x, axis=-1, keepdims=True)
    # all-masked rows would give -inf max; the caller contract forbids them
    if not np.all(np.isfinite(xmax)):
        raise ValueError("log_softmax: a row has empty support")
    ex = np.exp(x - xmax)
    lse = np.log(np.sum(ex, axis=-1, keepdims=True)) + xmax
    out = x - lse

    if not _needs_tape(a):
        return Tensor(out)

    def bwd(g):
        p = np.exp(out)
        p[~np.isfinite(out)] = 0.0
        return (g - p * np.sum(g, axis=-1, keepdims=True),)

    return Tensor(out, parents=(a,), backward_fn=bwd)


def gather_rows(a, idx):
    """a[idx] for a 1-d or 2-d tensor; scatter-add on the way back."""
    idx = np.asarray(idx, dtype=np.intp)
    value = a.value[idx]
    if not _needs_tape(a):
        return Tensor(value)

    def bwd(g):
        out = np.zeros_like(a.value)
        np.add.at(out, idx, g)
        return (out,)

    return Tensor(value, parents=(a,), backward_fn=bwd)


def pick(a, cols):
    """Per-row column selection: a[i, cols[i]] -> 1-d tensor."""
    cols = np.asarray(cols, dtype=np.intp)
    rows = np.arange(a.value.shape[0])
    value = a.value[rows, cols]
    if not _needs_tape(a):
        return Tensor(value)

    def bwd(g):
        out = np.zeros_like(a.value)
        np.add.at(out, (rows, cols), g)
        return (out,)

    return Tensor(value, parents=(a,), backward_fn=bwd)


def segment_sum(a, seg, nseg):
    """Sum a 1-d tensor into `nseg` buckets given per-element bucket ids."""
    seg = np.asarray(seg, dtype=np.intp)
    value = np.zeros(nseg)
    np.add.at(value, seg, a.value)
    if not _needs_tape(a):
        return Tensor(value)
    return Tensor(value, parents=(a,), backward_fn=lambda g: (g[seg],))


def tsum(a):
    value = np.sum(a.value)
    return _unary(a, value, lambda g: np.broadcast_to(g, a.value.shape).copy())


def tmean(a):
    n = a.value.size
    value = np.sum(a.value) / n
    return _unary(a, value, lambda g: np.broadcast_to(g / n, a.value.shape).copy())


def backward(root):
    """Accumulate d(root)/d(leaf) into .grad for every reachable tensor."""
    if root.value.ndim != 0:
        raise ValueError(f"backward root must be scalar, got shape {root.value.shape}")
    # iterative topo sort (tapes can be thousands of nodes deep)
    order = []
    seen = set()
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
        for p in node.parents:
            if id(p) not in seen:
                stack.append((p, False))
    for node in order:
        node.grad = np.zeros_like(node.value)
    root.grad = np.ones_like(root.value)
    for node in reversed(order):
        if node.backward_fn is None or node.grad is None:
            continue
        for parent, g in zip(node.parents, node.backward_fn(node.grad)):
            if parent.grad is None:
                parent.grad = np.zeros_like(parent.value)
            parent.grad = parent.grad + g


class Linear:
    def __init__(self, in_dim, out_dim, rng, name):
        w = rng.normal(0.0, np.sqrt(2.0 / in_dim), size=(in_dim, out_dim))
        self.w = param(w, f"{name}.w")
        self.b = param(np.zeros(out_dim), f"{name}.b")

    def __call__(self, x):
        return affine(x, self.w, self.b)

    def params(self):
        return [self.w, self.b]


class Mlp:
    """Feedforward trunk: hidden layers + nonlinearity, no output layer."""

    def __init__(self, in_dim, hidden, rng, name, activation="leaky_relu"):
        if activation not in ("leaky_relu", "relu"):
            raise ValueError(f"unknown activation {activation!r}")
        self.activation = activation
        self.layers = []
        d = in_dim
        for i, h in enumerate(hidden):
            self.layers.append(Linear(d, h, rng, f"{name}.h{i}"))
            d = h
        self.out_dim = d

    def __call__(self, x):
        act = leaky_relu if self.activation == "leaky_relu" else relu
        for layer in self.layers:
            x = act(layer(x))
        return x

    def params(self):
        return [p for layer in self.layers for p in layer.params()]


class Adam:
    """Standard bias-corrected Adam over a named parameter dict."""

    def __init__(self, params, lr, beta1=0.9, beta2=0.999, eps=1e-8):
        self.params = dict(params)
        self.lr = lr
        self.beta1, self.beta2, self.eps = beta1, beta2, eps
        self.m = {k: np.zeros_like(p.value) for k, p in self.params.items()}
        self.v = {k: np.zeros_like(p.value) for k, p in self.params.items()}
        self.t = 0

    def zero_grad(self):
        for p in self.params.values():
            p.grad = None

    def step(self):
        self.t += 1
        b1, b2 = self.beta1, self.beta2
        for name, p in self.params.items():
            g = p.grad
            if g is None:
                continue
            if not np.all(np.isfinite(g)):
                raise FloatingPointError(f"non-finite gradient for parameter {name!r}")
            self.m[name] = b1 * self.m[name] + (1 - b1) * g
            self.v[name] = b2 * self.v[name] + (1 - b2) * g * g
            mhat = self.m[name] / (1 - b1**self.t)
            vhat = self.v[name] / (1 - b2**self.t)
            p.value = p.value - self.lr * mhat / (np.sqrt(vhat) + self.eps)


def param_dict(tensors):
    out = {}
    for t in tensors:
        if not t.requires_grad:
            raise ValueError("param_dict expects parameter tensors")
        if t.name in out:
            raise ValueError(f"duplicate parameter name {t.name!r}")
        out[t.name] = t
    return out


def save_params(path, params):
    """Checkpoint: npz map of name -> float64 array (shape headers included)."""
    np.savez(path, **{k: p.value for k, p in params.items()})


def load_params(path):
    with np.load(path) as data:
        return {k: np.array(data[k]) for k in data.files}


def assign_params(params, arrays):
    for k, p in params.items():
        if k not in arrays:
            raise KeyError(f"checkpoint is missing parameter {k!r}")
        if arrays[k].shape != p.value.shape:
            raise ValueError(
                f"checkpoint shape mismatch for {k!r}: "
                f"{arrays[k].shape} vs {p.value.shape}"
            )
        p.value = np.array(arrays[k], dtype=np.float64)
