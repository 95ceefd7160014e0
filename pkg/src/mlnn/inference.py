"""Upward-downward fixed-point inference over stored truth bounds.

A BoundStore holds one [L, U] interval per (subformula, state). Axioms clamp
their formula's stored bounds before iteration starts. The upward pass
recomputes every composite from its children's stored bounds and merges the
result in (L only rises, U only falls); the downward pass pushes sound
inverse consequences from parents to children. Both passes only tighten, so
every bound trace is monotone and the loop terminates once the largest
change drops below epsilon.

A store can end up with L > U for some entry. That is the point: it encodes
a detected contradiction, measured by contradiction hinges rather than
raised as an error.
"""

from __future__ import annotations

from . import autodiff as ad
from . import logic
from .logic import (Formula, Atom, Not, _Binary, _Modal, Box, Diamond,
                    ProdImplies, SoftConfig)


class InferenceConfig:
    def __init__(self, max_iterations: int = 100, epsilon: float = 1e-6,
                 access_threshold: float = 0.5):
        if not epsilon > 0.0:
            raise ValueError("epsilon must be positive")
        if not 0.0 < access_threshold < 1.0:
            raise ValueError("access threshold must lie strictly inside (0,1)")
        self.max_iterations = int(max_iterations)
        self.epsilon = float(epsilon)
        self.access_threshold = float(access_threshold)


class Axiom:
    """Asserted bounds [lower, upper] for a formula at one state or all states."""

    def __init__(self, formula: Formula, state: int | None,
                 lower: float, upper: float):
        if not (0.0 <= lower <= 1.0 and 0.0 <= upper <= 1.0):
            raise ValueError(f"axiom bounds must lie in [0,1], got [{lower}, {upper}]")
        self.formula = formula
        self.state = state  # None means every state
        self.lower = float(lower)
        self.upper = float(upper)

    def states(self, n: int) -> range | list[int]:
        return range(n) if self.state is None else [self.state]


AxiomSet = list  # list[Axiom]


def _subformulas(roots) -> list[Formula]:
    """Unique subformulas, children before parents, deduplicated by key."""
    seen: dict[str, Formula] = {}
    order: list[Formula] = []

    def walk(f: Formula):
        if isinstance(f, Not):
            walk(f.child)
        elif isinstance(f, _Binary):
            walk(f.left)
            walk(f.right)
        elif isinstance(f, _Modal):
            walk(f.child)
        k = f.key()
        if k not in seen:
            seen[k] = f
            order.append(f)

    for r in roots:
        walk(r)
    return order


class BoundStore:
    """Stored [L, U] per (subformula key, state), merge-tighten only."""

    def __init__(self, model, roots: list[Formula], axioms=None):
        self.model = model
        self.order = _subformulas(list(roots) +
                                  [ax.formula for ax in (axioms or [])])
        n = model.states.n
        self.entries: dict[str, list[list[float]]] = {}
        for f in self.order:
            if isinstance(f, Atom):
                self.entries[f.key()] = [list(model.atoms.get(f.name, s))
                                         for s in range(n)]
            else:
                self.entries[f.key()] = [[0.0, 1.0] for _ in range(n)]
        for ax in (axioms or []):
            k = ax.formula.key()
            for s in ax.states(n):
                self.tighten(k, s, lo=ax.lower, hi=ax.upper)

    def bounds(self, formula: Formula) -> list[list[float]]:
        return self.entries[formula.key()]

    def tighten(self, key: str, state: int,
                lo: float | None = None, hi: float | None = None) -> float:
        """Merge candidate bounds in; returns the largest change applied."""
        e = self.entries[key][state]
        delta = 0.0
        if lo is not None:
            lo = min(1.0, max(0.0, lo))
            if lo > e[0]:
                delta = lo - e[0]
                e[0] = lo
        if hi is not None:
            hi = min(1.0, max(0.0, hi))
            if hi < e[1]:
                delta = max(delta, e[1] - hi)
                e[1] = hi
        return delta

    def contradiction_total(self) -> float:
        """Sum of max0(L - U) over every stored entry."""
        total = 0.0
        for rows in self.entries.values():
            for lo, hi in rows:
                if lo > hi:
                    total += lo - hi
        return total

    def snapshot(self) -> dict[str, list[list[float]]]:
        return {k: [row[:] for row in rows] for k, rows in self.entries.items()}


def upward_pass(model, store: BoundStore, soft: SoftConfig,
                rels: dict | None = None) -> float:
    """Recompute composites from child stored bounds; merge-tighten. Returns max delta."""
    if rels is None:
        rels = model.relations.materialize_all(None)
    n = model.states.n
    delta = 0.0
    for f in store.order:
        if isinstance(f, Atom):
            continue
        k = f.key()
        if isinstance(f, Not):
            child = store.bounds(f.child)
            cand = [logic.eval_connective("not", child[s]) for s in range(n)]
        elif isinstance(f, _Binary):
            left, right = store.bounds(f.left), store.bounds(f.right)
            cand = [logic.eval_connective(f.kind, left[s], right[s])
                    for s in range(n)]
        else:
            child = store.bounds(f.child)
            if f.relation not in rels:
                raise KeyError(f"formula {k!r} references unknown relation "
                               f"{f.relation!r}")
            A = rels[f.relation]
            fn = logic.box_bounds if isinstance(f, Box) else logic.diamond_bounds
            cand = [fn(child, A[s], soft.tau) for s in range(n)]
        for s in range(n):
            delta = max(delta, store.tighten(k, s, cand[s][0], cand[s][1]))
    return delta


def downward_pass(model, store: BoundStore, cfg: InferenceConfig,
                  soft: SoftConfig, rels: dict | None = None) -> float:
    """Push inverse consequences from parents to children. Returns max delta.

    Rules are sound for Łukasiewicz connectives and gated modal edges;
    product implications propagate nothing downward.
    """
    if rels is None:
        rels = model.relations.materialize_all(None)
    n = model.states.n
    theta = cfg.access_threshold
    delta = 0.0
    for f in reversed(store.order):
        if isinstance(f, Atom) or isinstance(f, ProdImplies):
            continue
        P = store.bounds(f)
        if isinstance(f, Not):
            ck = f.child.key()
            for s in range(n):
                Lp, Up = P[s]
                delta = max(delta, store.tighten(ck, s, 1.0 - Up, 1.0 - Lp))
        elif isinstance(f, _Binary):
            ak, bk = f.left.key(), f.right.key()
            A, B = store.bounds(f.left), store.bounds(f.right)
            for s in range(n):
                Lp, Up = P[s]
                La, Ua = A[s]
                Lb, Ub = B[s]
                if f.kind == "and":
                    # parent >= Lp > 0 pins each conjunct from below
                    if Lp > 0.0:
                        delta = max(delta, store.tighten(ak, s, lo=Lp + 1.0 - Ub))
                        delta = max(delta, store.tighten(bk, s, lo=Lp + 1.0 - Ua))
                    delta = max(delta, store.tighten(ak, s, hi=Up + 1.0 - Lb))
                    delta = max(delta, store.tighten(bk, s, hi=Up + 1.0 - La))
                elif f.kind == "or":
                    delta = max(delta, store.tighten(ak, s, lo=Lp - Ub))
                    delta = max(delta, store.tighten(bk, s, lo=Lp - Ua))
                    if Up < 1.0:
                        delta = max(delta, store.tighten(ak, s, hi=Up - Lb))
                        delta = max(delta, store.tighten(bk, s, hi=Up - La))
                elif f.kind == "implies":
                    # modus ponens / tollens, then the Up < 1 refinements
                    delta = max(delta, store.tighten(bk, s, lo=Lp + La - 1.0))
                    delta = max(delta, store.tighten(ak, s, hi=1.0 - Lp + Ub))
                    if Up < 1.0:
                        delta = max(delta, store.tighten(bk, s, hi=Up - 1.0 + Ua))
                        delta = max(delta, store.tighten(ak, s, lo=1.0 - Up + Lb))
        else:
            Arel = rels[f.relation]
            ck = f.child.key()
            if isinstance(f, Box):
                for w in range(n):
                    Lbox = P[w][0]
                    if Lbox <= 0.0:
                        continue
                    for w2 in range(n):
                        if ad.val(Arel[w][w2]) > theta:
                            delta = max(delta, store.tighten(ck, w2, lo=Lbox))
            else:
                for w in range(n):
                    Udia = P[w][1]
                    if Udia >= 1.0:
                        continue
                    for w2 in range(n):
                        if ad.val(Arel[w][w2]) > theta:
                            delta = max(delta, store.tighten(ck, w2, hi=Udia))
    return delta


class FixpointResult:
    def __init__(self, store: BoundStore, iterations: int, converged: bool,
                 deltas: list[float]):
        self.store = store
        self.iterations = iterations
        self.converged = converged
        self.deltas = deltas

    def bounds(self, formula: Formula) -> list[list[float]]:
        return self.store.bounds(formula)

    def contradiction(self) -> float:
        return self.store.contradiction_total()


def run_to_fixpoint(model, formulas, cfg: InferenceConfig | None = None,
                    soft: SoftConfig | None = None,
                    axioms=None) -> FixpointResult:
    """Alternate upward/downward until quiescent or the iteration cap.

    Never raises on non-convergence; the result carries a converged flag.
    """
    cfg = cfg or InferenceConfig()
    soft = soft or SoftConfig()
    store = BoundStore(model, list(formulas), axioms)
    rels = model.relations.materialize_all(None)
    deltas: list[float] = []
    converged = False
    iterations = 0
    for iterations in range(1, cfg.max_iterations + 1):
        d = upward_pass(model, store, soft, rels)
        d = max(d, downward_pass(model, store, cfg, soft, rels))
        deltas.append(d)
        if d < cfg.epsilon:
            converged = True
            break
    return FixpointResult(store, iterations, converged, deltas)


# ── differentiable contradiction measure (training path) ───────────────────

def _vmax(a, b):
    # max(a, b) = b + max0(a - b)
    return ad.add(b, ad.max0(ad.sub(a, b)))


def _vmin(a, b):
    # min(a, b) = a - max0(a - b)
    return ad.sub(a, ad.max0(ad.sub(a, b)))


def contradiction_loss(model, axioms, soft: SoftConfig | None = None,
                       rels: dict | None = None):
    """Differentiable total contradiction under the given axioms.

    Each axiom clamps its formula's freshly evaluated bounds to
    [max(L, L0), min(U, U0)]; the hinge max0 of (clamped L - clamped U)
    measures how far assertion and evidence disagree. Contradictory atom
    inputs (stored L > U) are counted as well. Zero exactly when every
    tracked interval is consistent and every axiom target is met.
    """
    soft = soft or SoftConfig()
    if rels is None:
        rels = model.relations.materialize_all(None)
    memo: dict = {}
    total = 0.0
    for prop in model.atoms.propositions():
        for s in range(model.states.n):
            lo, hi = model.atoms.get(prop, s)
            if lo > hi:
                total = ad.add(total, lo - hi)
    for ax in axioms:
        states = list(ax.states(model.states.n))
        bounds = logic.eval_at(ax.formula, model, soft, rels, memo, states)
        for s in states:
            L, U = bounds[s]
            clamped_lo = _vmax(L, ax.lower)
            clamped_hi = _vmin(U, ax.upper)
            total = ad.add(total, ad.max0(ad.sub(clamped_lo, clamped_hi)))
    return total
