"""Scalar reverse-mode automatic differentiation on an append-only tape.

Every differentiable quantity in the engine is built from a small set of
primitive ops: add, sub, mul, neg, exp, log, max0, clamp01, scale. Each op
accepts plain floats or Node objects and folds constants, so a computation
with no parameters anywhere produces ordinary floats and never touches a
tape. Local partial derivatives are stored at node creation; backward is a
single reverse sweep over the tape.
"""

from __future__ import annotations

import math


class Node:
    """One recorded value. parents holds (input_node, local_partial) pairs."""

    __slots__ = ("value", "grad", "parents", "tape")

    def __init__(self, value: float, parents: tuple, tape: "Tape"):
        self.value = value
        self.grad = 0.0
        self.parents = parents
        self.tape = tape
        tape.nodes.append(self)

    def __repr__(self):
        return f"Node(value={self.value:.6g}, grad={self.grad:.6g})"


class Parameter:
    """A named scalar that persists across tapes and is updated by Adam."""

    __slots__ = ("value", "name")

    def __init__(self, value: float, name: str = ""):
        self.value = float(value)
        self.name = name

    def __repr__(self):
        return f"Parameter({self.name!r}, {self.value:.6g})"


class Tape:
    """Append-only record of nodes in creation order.

    Creation order guarantees parents precede children, so backward is a
    plain reverse iteration, no topological sort needed.
    """

    def __init__(self):
        self.nodes: list[Node] = []
        self.leaves: list[tuple[Parameter, Node]] = []

    def param(self, p: Parameter) -> Node:
        """Register a leaf node reading the parameter's current value."""
        n = Node(p.value, (), self)
        self.leaves.append((p, n))
        return n

    def lift(self, x: float) -> Node:
        """Explicit constant node (rarely needed; ops fold floats)."""
        return Node(float(x), (), self)

    def backward(self, root: Node) -> None:
        """Accumulate d(root)/d(node) into .grad for every node on the tape."""
        if root.tape is not self:
            raise ValueError("root node belongs to a different tape")
        for n in self.nodes:
            n.grad = 0.0
        root.grad = 1.0
        for n in reversed(self.nodes):
            g = n.grad
            if g != 0.0:
                for parent, d in n.parents:
                    parent.grad += d * g

    def gradients(self) -> dict[Parameter, float]:
        """Gradient per registered parameter after a backward pass."""
        out: dict[Parameter, float] = {}
        for p, n in self.leaves:
            out[p] = out.get(p, 0.0) + n.grad
        return out


def val(x) -> float:
    """Float value of a Node or a plain number."""
    return x.value if isinstance(x, Node) else float(x)


def _node_args(*pairs):
    # keep only the Node inputs, with their local partials
    return tuple((p, d) for p, d in pairs if isinstance(p, Node))


def _tape_of(*xs) -> Tape:
    for x in xs:
        if isinstance(x, Node):
            return x.tape
    raise TypeError("no Node input")


# ── primitive ops ──────────────────────────────────────────────────────────

def add(a, b):
    if isinstance(a, Node) or isinstance(b, Node):
        return Node(val(a) + val(b), _node_args((a, 1.0), (b, 1.0)), _tape_of(a, b))
    return a + b


def sub(a, b):
    if isinstance(a, Node) or isinstance(b, Node):
        return Node(val(a) - val(b), _node_args((a, 1.0), (b, -1.0)), _tape_of(a, b))
    return a - b


def mul(a, b):
    if isinstance(a, Node) or isinstance(b, Node):
        av, bv = val(a), val(b)
        return Node(av * bv, _node_args((a, bv), (b, av)), _tape_of(a, b))
    return a * b


def neg(a):
    if isinstance(a, Node):
        return Node(-a.value, ((a, -1.0),), a.tape)
    return -a


def exp(a):
    if isinstance(a, Node):
        v = math.exp(a.value)
        return Node(v, ((a, v),), a.tape)
    return math.exp(a)


def log(a):
    if isinstance(a, Node):
        return Node(math.log(a.value), ((a, 1.0 / a.value),), a.tape)
    return math.log(a)


def max0(a):
    """max(0, x). Subgradient 0 at x <= 0."""
    if isinstance(a, Node):
        v = a.value
        return Node(v if v > 0.0 else 0.0, ((a, 1.0 if v > 0.0 else 0.0),), a.tape)
    return a if a > 0.0 else 0.0


def clamp01(a):
    """Clamp to [0, 1]. Pass-through gradient inside; exact boundary counts as inside."""
    if isinstance(a, Node):
        v = a.value
        inside = 0.0 <= v <= 1.0
        return Node(min(1.0, max(0.0, v)), ((a, 1.0 if inside else 0.0),), a.tape)
    return min(1.0, max(0.0, a))


def scale(a, c: float):
    """Multiply by a plain constant without materializing it as a node."""
    if isinstance(a, Node):
        return Node(a.value * c, ((a, c),), a.tape)
    return a * c


# ── composites used across the engine ──────────────────────────────────────

def sigmoid(a):
    """Numerically stable logistic, composed from primitives.

    For x >= 0: 1/(1+e^-x) written as e^-x branch-free via
    s = e^-|x|; x>=0 -> 1/(1+s); x<0 -> s/(1+s). Division is expressed
    with exp/log so the primitive set stays closed.
    """
    x = val(a)
    if isinstance(a, Node):
        if x >= 0.0:
            s = exp(neg(a))            # e^-x in (0, 1]
            den = add(1.0, s)
            return exp(neg(log(den)))  # 1/(1+s)
        s = exp(a)                     # e^x in (0, 1)
        den = add(1.0, s)
        return exp(sub(log(s), log(den)))
    if x >= 0.0:
        s = math.exp(-x)
        return 1.0 / (1.0 + s)
    s = math.exp(x)
    return s / (1.0 + s)


def absval(a):
    """|x| as max0(x) + max0(-x); subgradient 0 at x = 0."""
    return add(max0(a), max0(neg(a)))


class AdamState:
    """Adam with bias correction. Moment estimates are kept per Parameter."""

    def __init__(self, lr: float = 0.001, beta1: float = 0.9,
                 beta2: float = 0.999, eps: float = 1e-8):
        self.lr = lr
        self.beta1 = beta1
        self.beta2 = beta2
        self.eps = eps
        self.t = 0
        self.m: dict[Parameter, float] = {}
        self.v: dict[Parameter, float] = {}

    def step(self, grads: dict[Parameter, float]) -> None:
        """One update over all parameters in grads (zero grads still decay moments)."""
        self.t += 1
        b1c = 1.0 - self.beta1 ** self.t
        b2c = 1.0 - self.beta2 ** self.t
        for p, g in grads.items():
            m = self.beta1 * self.m.get(p, 0.0) + (1.0 - self.beta1) * g
            v = self.beta2 * self.v.get(p, 0.0) + (1.0 - self.beta2) * g * g
            self.m[p] = m
            self.v[p] = v
            p.value -= self.lr * (m / b1c) / (math.sqrt(v / b2c) + self.eps)


def adam_step(state: AdamState, grads: dict[Parameter, float]) -> None:
    state.step(grads)
