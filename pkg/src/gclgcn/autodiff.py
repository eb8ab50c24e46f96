"""Dense-matrix reverse-mode differentiation on an eagerly built tape.

Every value is a 2-D float64 matrix (scalars are 1x1). Forward values are
computed immediately; each op records a closure that maps the upstream
gradient to per-parent gradients. The tape is rebuilt every iteration.

Gradient buffers accumulate: calling backward twice without zero_grad
doubles leaf gradients.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

__all__ = [
    "Tensor",
    "constant",
    "parameter",
    "backward",
    "zero_grad",
    "AdamState",
    "adam_step",
    "finite_difference_check",
    "matmul",
    "add",
    "scale",
    "hadamard",
    "transpose",
    "row_softmax",
    "sigmoid",
    "relu",
    "leaky_relu",
    "exp",
    "log",
    "square",
    "sqrt",
    "clamp_min",
    "signed_pow",
    "reduce_mean",
    "reduce_sum",
    "mse",
    "gather_rows",
    "concat_cols",
]


class Tensor:
    """Node in the differentiation graph: value, grad accumulator, backward rule."""

    __slots__ = ("value", "grad", "requires_grad", "name", "_parents", "_rule", "_needs")

    def __init__(
        self,
        value,
        requires_grad: bool = False,
        name: str | None = None,
        _parents: tuple["Tensor", ...] = (),
        _rule: Callable[[np.ndarray], tuple[np.ndarray, ...]] | None = None,
    ):
        arr = np.asarray(value, dtype=np.float64)
        if arr.ndim == 0:
            arr = arr.reshape(1, 1)
        elif arr.ndim == 1:
            arr = arr.reshape(1, -1)
        elif arr.ndim != 2:
            raise ValueError(f"tensor values must be at most 2-D, got {arr.shape}")
        self.value = arr
        self.requires_grad = requires_grad
        self.grad = np.zeros_like(arr) if requires_grad else None
        self.name = name
        self._parents = _parents
        self._rule = _rule
        self._needs = requires_grad or any(p._needs for p in _parents)

    @property
    def shape(self) -> tuple[int, int]:
        return self.value.shape

    def __repr__(self):
        tag = self.name or ("param" if self.requires_grad else "tensor")
        return f"Tensor({tag}, shape={self.shape})"


def constant(value, name: str | None = None) -> Tensor:
    return Tensor(value, requires_grad=False, name=name)


def parameter(value, name: str | None = None) -> Tensor:
    return Tensor(np.array(value, dtype=np.float64, copy=True), requires_grad=True, name=name)


def _as_tensor(x) -> Tensor:
    return x if isinstance(x, Tensor) else constant(x)


def _check(cond: bool, op: str, msg: str) -> None:
    if not cond:
        raise ValueError(f"{op}: {msg}")


def backward(loss: Tensor) -> None:
    """Populate .grad on every requires-grad ancestor of a scalar loss.

    Visits nodes in reverse topological order exactly once; gradients add
    into existing buffers (zero_grad between steps).
    """
    if loss.shape != (1, 1):
        raise ValueError(f"backward: loss must be 1x1, got {loss.shape}")
    topo: list[Tensor] = []
    seen: set[int] = set()
    stack: list[tuple[Tensor, bool]] = [(loss, False)]
    while stack:
        node, expanded = stack.pop()
        if expanded:
            topo.append(node)
            continue
        if id(node) in seen or not node._needs:
            continue
        seen.add(id(node))
        stack.append((node, True))
        for p in node._parents:
            stack.append((p, False))

    pending: dict[int, np.ndarray] = {id(loss): np.ones((1, 1))}
    for node in reversed(topo):
        g = pending.pop(id(node), None)
        if g is None:
            continue
        if node.requires_grad:
            node.grad += g
        if node._rule is None:
            continue
        for parent, pg in zip(node._parents, node._rule(g)):
            if pg is None or not parent._needs:
                continue
            acc = pending.get(id(parent))
            if acc is None:
                # Copy anything that aliases the upstream gradient: stored
                # buffers are accumulated into in place.
                pending[id(parent)] = pg.copy() if (pg is g or pg.base is not None) else pg
            else:
                acc += pg


def zero_grad(params: Sequence[Tensor]) -> None:
    for p in params:
        if p.grad is not None:
            p.grad[...] = 0.0


# ---------------------------------------------------------------------------
# Op catalogue
# ---------------------------------------------------------------------------

def matmul(a: Tensor, b: Tensor) -> Tensor:
    a, b = _as_tensor(a), _as_tensor(b)
    _check(a.shape[1] == b.shape[0], "matmul", f"inner dims differ: {a.shape} x {b.shape}")
    av, bv = a.value, b.value
    na, nb = a._needs, b._needs

    def rule(g):
        return (g @ bv.T if na else None, av.T @ g if nb else None)

    return Tensor(av @ bv, _parents=(a, b), _rule=rule)


def add(a: Tensor, b: Tensor) -> Tensor:
    """Element-wise sum; (1, c) or (r, 1) operands broadcast against (r, c)."""
    a, b = _as_tensor(a), _as_tensor(b)
    sa, sb = a.shape, b.shape
    ok = sa == sb or _broadcastable(sa, sb) or _broadcastable(sb, sa)
    _check(ok, "add", f"incompatible shapes {sa} + {sb}")
    out = a.value + b.value
    na, nb = a._needs, b._needs

    def rule(g):
        return (
            _unbroadcast(g, sa) if na else None,
            _unbroadcast(g, sb) if nb else None,
        )

    return Tensor(out, _parents=(a, b), _rule=rule)


def _broadcastable(big, small) -> bool:
    return (small == (1, big[1]) and big[0] != 1) or (small == (big[0], 1) and big[1] != 1)


def _unbroadcast(g: np.ndarray, shape) -> np.ndarray:
    if g.shape == shape:
        return g
    out = g
    if shape[0] == 1 and g.shape[0] != 1:
        out = out.sum(axis=0, keepdims=True)
    if shape[1] == 1 and g.shape[1] != 1:
        out = out.sum(axis=1, keepdims=True)
    return out


def scale(a: Tensor, s: float) -> Tensor:
    a = _as_tensor(a)
    s = float(s)

    def rule(g):
        return (g * s,)

    return Tensor(a.value * s, _parents=(a,), _rule=rule)


def hadamard(a: Tensor, b: Tensor) -> Tensor:
    a, b = _as_tensor(a), _as_tensor(b)
    _check(a.shape == b.shape, "hadamard", f"shapes differ: {a.shape} vs {b.shape}")
    av, bv = a.value, b.value
    na, nb = a._needs, b._needs

    def rule(g):
        return (g * bv if na else None, g * av if nb else None)

    return Tensor(av * bv, _parents=(a, b), _rule=rule)


def transpose(a: Tensor) -> Tensor:
    a = _as_tensor(a)

    def rule(g):
        return (g.T,)

    return Tensor(a.value.T.copy(), _parents=(a,), _rule=rule)


def row_softmax(a: Tensor) -> Tensor:
    """Stabilized softmax per row; -inf logits yield exact zero weight."""
    a = _as_tensor(a)
    shifted = a.value - a.value.max(axis=1, keepdims=True)
    e = np.exp(shifted)
    y = e / e.sum(axis=1, keepdims=True)

    def rule(g):
        dot = (g * y).sum(axis=1, keepdims=True)
        return (y * (g - dot),)

    return Tensor(y, _parents=(a,), _rule=rule)


def sigmoid(a: Tensor) -> Tensor:
    a = _as_tensor(a)
    x = a.value
    y = np.empty_like(x)
    pos = x >= 0
    y[pos] = 1.0 / (1.0 + np.exp(-x[pos]))
    ex = np.exp(x[~pos])
    y[~pos] = ex / (1.0 + ex)

    def rule(g):
        return (g * y * (1.0 - y),)

    return Tensor(y, _parents=(a,), _rule=rule)


def relu(a: Tensor) -> Tensor:
    a = _as_tensor(a)
    mask = a.value > 0

    def rule(g):
        return (g * mask,)

    return Tensor(np.where(mask, a.value, 0.0), _parents=(a,), _rule=rule)


def leaky_relu(a: Tensor, slope: float = 0.01) -> Tensor:
    a = _as_tensor(a)
    pos = a.value > 0

    def rule(g):
        return (np.where(pos, g, g * slope),)

    return Tensor(np.where(pos, a.value, a.value * slope), _parents=(a,), _rule=rule)


def exp(a: Tensor) -> Tensor:
    a = _as_tensor(a)
    y = np.exp(a.value)

    def rule(g):
        return (g * y,)

    return Tensor(y, _parents=(a,), _rule=rule)


def log(a: Tensor) -> Tensor:
    a = _as_tensor(a)
    x = a.value

    def rule(g):
        return (g / x,)

    return Tensor(np.log(x), _parents=(a,), _rule=rule)


def square(a: Tensor) -> Tensor:
    a = _as_tensor(a)
    x = a.value

    def rule(g):
        return (g * 2.0 * x,)

    return Tensor(x * x, _parents=(a,), _rule=rule)


def sqrt(a: Tensor) -> Tensor:
    """Square root; the derivative denominator is floored at 1e-12 so exact
    zeros do not poison the backward pass."""
    a = _as_tensor(a)
    y = np.sqrt(a.value)

    def rule(g):
        return (g * 0.5 / np.maximum(y, 1e-12),)

    return Tensor(y, _parents=(a,), _rule=rule)


def clamp_min(a: Tensor, floor: float) -> Tensor:
    a = _as_tensor(a)
    mask = a.value > floor

    def rule(g):
        return (g * mask,)

    return Tensor(np.maximum(a.value, floor), _parents=(a,), _rule=rule)


def signed_pow(a: Tensor, p: float) -> Tensor:
    """sign(x) * |x|**p, the sign-preserving power; derivative p*|x|**(p-1)."""
    a = _as_tensor(a)
    x = a.value
    ax = np.abs(x)

    def rule(g):
        base = np.maximum(ax, 1e-12) if p < 1.0 else ax
        return (g * p * base ** (p - 1.0),)

    return Tensor(np.sign(x) * ax**p, _parents=(a,), _rule=rule)


def reduce_sum(a: Tensor) -> Tensor:
    a = _as_tensor(a)
    shape = a.shape

    def rule(g):
        return (np.full(shape, g[0, 0]),)

    return Tensor(a.value.sum(), _parents=(a,), _rule=rule)


def reduce_mean(a: Tensor) -> Tensor:
    a = _as_tensor(a)
    shape = a.shape
    size = a.value.size

    def rule(g):
        return (np.full(shape, g[0, 0] / size),)

    return Tensor(a.value.mean(), _parents=(a,), _rule=rule)


def mse(a: Tensor, b: Tensor) -> Tensor:
    """Mean over all entries of the squared difference."""
    a, b = _as_tensor(a), _as_tensor(b)
    _check(a.shape == b.shape, "mse", f"shapes differ: {a.shape} vs {b.shape}")
    diff = a.value - b.value
    size = diff.size
    na, nb = a._needs, b._needs

    def rule(g):
        d = g[0, 0] * 2.0 / size * diff
        return (d if na else None, -d if nb else None)

    return Tensor(np.mean(diff * diff), _parents=(a, b), _rule=rule)


def gather_rows(a: Tensor, indices) -> Tensor:
    a = _as_tensor(a)
    idx = np.asarray(indices, dtype=np.int64).ravel()
    _check(
        idx.size == 0 or (idx.min() >= 0 and idx.max() < a.shape[0]),
        "gather_rows",
        f"index out of range for {a.shape[0]} rows",
    )
    shape = a.shape

    def rule(g):
        out = np.zeros(shape)
        np.add.at(out, idx, g)
        return (out,)

    return Tensor(a.value[idx], _parents=(a,), _rule=rule)


def concat_cols(*tensors: Tensor) -> Tensor:
    ts = [_as_tensor(t) for t in tensors]
    _check(len(ts) >= 1, "concat_cols", "needs at least one operand")
    rows = ts[0].shape[0]
    _check(all(t.shape[0] == rows for t in ts), "concat_cols", "row counts differ")
    widths = [t.shape[1] for t in ts]
    splits = np.cumsum(widths)[:-1]

    def rule(g):
        return tuple(np.ascontiguousarray(part) for part in np.hsplit(g, splits))

    return Tensor(np.hstack([t.value for t in ts]), _parents=tuple(ts), _rule=rule)


# ---------------------------------------------------------------------------
# Optimizer and gradient checking
# ---------------------------------------------------------------------------

@dataclass
class AdamState:
    """First/second moment buffers for one fixed parameter list."""

    lr: float
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    step: int = 0
    m: list[np.ndarray] = field(default_factory=list)
    v: list[np.ndarray] = field(default_factory=list)
    _scratch: list[np.ndarray] = field(default_factory=list)

    @classmethod
    def for_params(cls, params: Sequence[Tensor], lr: float) -> "AdamState":
        state = cls(lr=lr)
        state.m = [np.zeros_like(p.value) for p in params]
        state.v = [np.zeros_like(p.value) for p in params]
        state._scratch = [np.zeros_like(p.value) for p in params]
        return state


def adam_step(
    params: Sequence[Tensor],
    grads: Sequence[np.ndarray],
    state: AdamState,
) -> AdamState:
    """One bias-corrected Adam update, in place on params and state."""
    if len(params) != len(state.m):
        raise ValueError("adam_step: state was built for a different parameter list")
    state.step += 1
    t = state.step
    c1 = 1.0 - state.beta1**t
    c2 = 1.0 - state.beta2**t
    for p, g, m, v, w in zip(params, grads, state.m, state.v, state._scratch):
        m *= state.beta1
        np.multiply(g, 1.0 - state.beta1, out=w)
        m += w
        v *= state.beta2
        np.multiply(g, g, out=w)
        w *= 1.0 - state.beta2
        v += w
        np.divide(v, c2, out=w)
        np.sqrt(w, out=w)
        w += state.eps
        np.divide(m, w, out=w)
        w *= state.lr / c1
        p.value -= w
    return state


def finite_difference_check(
    f: Callable[[Sequence[Tensor]], Tensor],
    params: Sequence[Tensor],
    h: float = 1e-5,
) -> float:
    """Max over all coordinates of |numeric - analytic| / max(1, |analytic|).

    f must be deterministic; it is re-evaluated with each coordinate nudged
    by +/- h (central differences).
    """
    zero_grad(params)
    backward(f(params))
    analytic = [p.grad.copy() for p in params]

    worst = 0.0
    for p, ana in zip(params, analytic):
        flat = p.value.ravel()
        for i in range(flat.size):
            orig = flat[i]
            flat[i] = orig + h
            up = f(params).value[0, 0]
            flat[i] = orig - h
            down = f(params).value[0, 0]
            flat[i] = orig
            numeric = (up - down) / (2.0 * h)
            a = ana.ravel()[i]
            worst = max(worst, abs(numeric - a) / max(1.0, abs(a)))
    return worst
