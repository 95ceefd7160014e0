"""Formula AST, soft truth-bound connectives, and the modal neurons.

Formulas evaluate to [lower, upper] truth bounds per state. Connectives
follow Łukasiewicz arithmetic applied bound-wise; box and diamond aggregate
over ALL states of the space, weighting each by the accessibility value, so
inaccessible states contribute inert terms instead of being excluded. A
product-form implication is available as an alternate connective kind; it
has no downward inverse and is only evaluated upward.

All functions accept plain floats or autodiff nodes and return the same
flavor they were given (constant inputs fold to constants).
"""

from __future__ import annotations

from . import autodiff as ad
from .autodiff import val


class SoftConfig:
    """Temperature for the smooth min/max family. Must be finite positive."""

    def __init__(self, tau: float = 0.1):
        if not (tau > 0.0) or tau != tau or tau == float("inf"):
            raise ValueError(f"temperature must be finite and positive, got {tau}")
        self.tau = float(tau)


# ── formula AST ─────────────────────────────────────────────────────────────

class Formula:
    def key(self) -> str:
        raise NotImplementedError


class Atom(Formula):
    __slots__ = ("name",)

    def __init__(self, name: str):
        self.name = name

    def key(self) -> str:
        return f"(atom {self.name})"


class Not(Formula):
    __slots__ = ("child",)

    def __init__(self, child: Formula):
        self.child = child

    def key(self) -> str:
        return f"(not {self.child.key()})"


class _Binary(Formula):
    __slots__ = ("left", "right")
    kind = ""

    def __init__(self, left: Formula, right: Formula):
        self.left = left
        self.right = right

    def key(self) -> str:
        return f"({self.kind} {self.left.key()} {self.right.key()})"


class And(_Binary):
    kind = "and"


class Or(_Binary):
    kind = "or"


class Implies(_Binary):
    kind = "implies"


class ProdImplies(_Binary):
    """Product-form implication 1 - a + a*b, bound-wise. Upward only."""
    kind = "implies_prod"


class _Modal(Formula):
    __slots__ = ("relation", "child")
    kind = ""

    def __init__(self, relation: str, child: Formula):
        self.relation = relation
        self.child = child

    def key(self) -> str:
        return f"({self.kind} {self.relation} {self.child.key()})"


class Box(_Modal):
    kind = "box"


class Diamond(_Modal):
    kind = "diamond"


def K(child: Formula, agent: str | None = None) -> Box:
    """Knowledge operator: box over the epistemic relation."""
    rel = "epistemic" if agent is None else f"epistemic:{agent}"
    return Box(rel, child)


def G(child: Formula) -> Box:
    """Always-henceforth: box over the temporal relation."""
    return Box("temporal", child)


def F(child: Formula) -> Diamond:
    """Eventually: diamond over the temporal relation."""
    return Diamond("temporal", child)


# ── soft aggregators ────────────────────────────────────────────────────────
# Stabilization shifts use the extreme VALUE as a plain constant; the shift
# cancels exactly in both the result and its gradient.

def softmin_tau(xs, tau: float):
    """-tau * log sum exp(-x/tau). Always <= min(xs)."""
    if not xs:
        raise ValueError("softmin over an empty list")
    shift = min(val(x) for x in xs)
    total = 0.0
    for x in xs:
        total = ad.add(total, ad.exp(ad.scale(ad.sub(shift, x), 1.0 / tau)))
    return ad.sub(shift, ad.scale(ad.log(total), tau))


def softmax_tau(xs, tau: float):
    """tau * log sum exp(x/tau). Always >= max(xs)."""
    if not xs:
        raise ValueError("softmax over an empty list")
    shift = max(val(x) for x in xs)
    total = 0.0
    for x in xs:
        total = ad.add(total, ad.exp(ad.scale(ad.sub(x, shift), 1.0 / tau)))
    return ad.add(shift, ad.scale(ad.log(total), tau))


def conv_pool_tau(xs, zs, tau: float):
    """Convex combination sum w_i x_i with w_i = exp(z_i/tau)/sum exp(z_j/tau).

    Stays inside [min(xs), max(xs)] by convexity; the selector zs decides
    which entries dominate.
    """
    if len(xs) != len(zs):
        raise ValueError(f"conv-pool length mismatch: {len(xs)} vs {len(zs)}")
    if not xs:
        raise ValueError("conv-pool over an empty list")
    shift = max(val(z) for z in zs)
    weights = [ad.exp(ad.scale(ad.sub(z, shift), 1.0 / tau)) for z in zs]
    den = 0.0
    for w in weights:
        den = ad.add(den, w)
    inv_den = ad.exp(ad.neg(ad.log(den)))  # den >= 1 after the shift
    out = 0.0
    for w, x in zip(weights, xs):
        out = ad.add(out, ad.mul(ad.mul(w, inv_den), x))
    return out


# ── modal neurons ───────────────────────────────────────────────────────────

def box_bounds(child_bounds, a_row, tau: float):
    """[L, U] of box(φ) at one state, given φ's bounds at every state.

    L: softmin over all states of (1 - a) + L_child; the weakest accessible
    state dominates, inaccessible ones contribute terms >= 1.
    U: conv-pool of x = (1 - a) + U_child with selector z = -x, so the
    smallest terms carry the weight. Clamped after aggregation only.
    """
    lo_terms = [ad.add(ad.sub(1.0, a), lb[0]) for a, lb in zip(a_row, child_bounds)]
    hi_terms = [ad.add(ad.sub(1.0, a), lb[1]) for a, lb in zip(a_row, child_bounds)]
    lo = ad.clamp01(softmin_tau(lo_terms, tau))
    hi = ad.clamp01(conv_pool_tau(hi_terms, [ad.neg(x) for x in hi_terms], tau))
    return [lo, hi]


def diamond_bounds(child_bounds, a_row, tau: float):
    """[L, U] of diamond(φ) at one state.

    U: softmax over all states of a + U_child - 1 (best supported witness).
    L: conv-pool of x = a + L_child - 1 with selector z = x.
    """
    lo_terms = [ad.sub(ad.add(a, lb[0]), 1.0) for a, lb in zip(a_row, child_bounds)]
    hi_terms = [ad.sub(ad.add(a, lb[1]), 1.0) for a, lb in zip(a_row, child_bounds)]
    lo = ad.clamp01(conv_pool_tau(lo_terms, lo_terms, tau))
    hi = ad.clamp01(softmax_tau(hi_terms, tau))
    return [lo, hi]


# ── connectives ─────────────────────────────────────────────────────────────

def _min1(x):
    # min(1, x) built from the primitive set
    return ad.sub(1.0, ad.max0(ad.sub(1.0, x)))


def _iprod(a, b):
    # 1 - a + a*b, already inside [0,1] for inputs in [0,1]
    return ad.add(ad.sub(1.0, a), ad.mul(a, b))


def eval_connective(kind: str, a, b=None):
    """Combine child bounds [L,U] (b unused for "not")."""
    if kind == "not":
        return [ad.sub(1.0, a[1]), ad.sub(1.0, a[0])]
    if kind == "and":
        return [ad.max0(ad.sub(ad.add(a[0], b[0]), 1.0)),
                ad.max0(ad.sub(ad.add(a[1], b[1]), 1.0))]
    if kind == "or":
        return [_min1(ad.add(a[0], b[0])),
                _min1(ad.add(a[1], b[1]))]
    if kind == "implies":
        return [_min1(ad.add(ad.sub(1.0, a[1]), b[0])),
                _min1(ad.add(ad.sub(1.0, a[0]), b[1]))]
    if kind == "implies_prod":
        return [_iprod(a[1], b[0]), _iprod(a[0], b[1])]
    raise ValueError(f"unknown connective kind {kind!r}")


# ── upward evaluation ───────────────────────────────────────────────────────

def eval_upward(formula: Formula, model, cfg: SoftConfig,
                rels: dict | None = None, memo: dict | None = None):
    """Bounds of `formula` at every state, post-order with per-pass memoization.

    `rels` may carry pre-materialized accessibility matrices (shared across
    formulas within one training step); otherwise the model's relations are
    materialized as constants.
    """
    if rels is None:
        rels = model.relations.materialize_all(None)
    if memo is None:
        memo = {}
    n = model.states.n
    per_state = eval_at(formula, model, cfg, rels, memo, None)
    return [per_state[s] for s in range(n)]


def eval_at(f: Formula, model, cfg: SoftConfig, rels, memo,
            states) -> dict:
    """Bounds of `f` at the requested states only (None means all states).

    Returns {state: [L, U]}. A modal node still evaluates its child at every
    state (the aggregation needs the full row), but the modal aggregate
    itself is built only where asked, which is what keeps training cheap
    when each axiom pins a single state.
    """
    n = model.states.n
    per_f = memo.setdefault(id(f), {})
    wanted = range(n) if states is None else states
    missing = [s for s in wanted if s not in per_f]
    if not missing:
        return per_f
    if isinstance(f, Atom):
        for s in missing:
            per_f[s] = list(model.atoms.get(f.name, s))
    elif isinstance(f, Not):
        child = eval_at(f.child, model, cfg, rels, memo, missing)
        for s in missing:
            per_f[s] = eval_connective("not", child[s])
    elif isinstance(f, _Binary):
        left = eval_at(f.left, model, cfg, rels, memo, missing)
        right = eval_at(f.right, model, cfg, rels, memo, missing)
        for s in missing:
            per_f[s] = eval_connective(f.kind, left[s], right[s])
    elif isinstance(f, _Modal):
        child = eval_at(f.child, model, cfg, rels, memo, None)
        child_list = [child[s] for s in range(n)]
        if f.relation not in rels:
            raise KeyError(f"formula {f.key()!r} references unknown relation "
                           f"{f.relation!r}; known: {', '.join(rels) or '(none)'}")
        A = rels[f.relation]
        fn = box_bounds if isinstance(f, Box) else diamond_bounds
        for s in missing:
            per_f[s] = fn(child_list, A[s], cfg.tau)
    else:
        raise TypeError(f"not a formula node: {f!r}")
    return per_f
