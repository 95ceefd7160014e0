"""Possible-world state spaces and (learnable) accessibility relations.

A relation is materialized as an n x n matrix of values in [0, 1]. Three
forms exist: fixed constant matrices (crisp 0/1 or frozen soft values),
per-cell learnable logits squashed through a sigmoid, and a metric form
where entry (i, j) is sigmoid(h_i . h_j) for learnable embeddings. Fixed
relations materialize to plain floats; learnable ones materialize to tape
nodes so gradients flow into their parameters.

Structural sparsity comes in two layers: an optional static 0/1 mask and an
optional per-row top-k mask recomputed between epochs. Masked-out cells are
exactly 0.0 and receive no gradient.
"""

from __future__ import annotations

from . import autodiff as ad
from .autodiff import Parameter


class StateSpace:
    """Finite set of states, optionally the product of worlds and times.

    With times present the order is time-major: state index t * |W| + w,
    labeled "world@time". Without times, states are the worlds themselves.
    """

    def __init__(self, worlds: list[str], times: list[str] | None = None):
        if not worlds:
            raise ValueError("state space needs at least one world")
        self.worlds = list(worlds)
        self.times = list(times) if times else None
        if self.times:
            self.labels = [f"{w}@{t}" for t in self.times for w in self.worlds]
        else:
            self.labels = list(self.worlds)
        self.n = len(self.labels)
        self._index = {lab: i for i, lab in enumerate(self.labels)}

    def index(self, label: str) -> int:
        if label not in self._index:
            raise KeyError(f"unknown state {label!r}; known: {', '.join(self.labels)}")
        return self._index[label]

    def __len__(self) -> int:
        return self.n


class BoundsTensor:
    """Lower/upper truth bounds per (proposition, state).

    Bounds live in [0, 1]. L > U is representable on purpose: it encodes a
    contradiction rather than an invalid tensor.
    """

    def __init__(self, states: StateSpace):
        self.states = states
        self.data: dict[str, list[list[float]]] = {}

    def add_proposition(self, name: str, default=(0.0, 1.0)) -> None:
        lo, hi = default
        self.data[name] = [[float(lo), float(hi)] for _ in range(self.states.n)]

    def set_bounds(self, prop: str, state: int, lo: float, hi: float) -> None:
        if not (0.0 <= lo <= 1.0 and 0.0 <= hi <= 1.0):
            raise ValueError(f"bounds for {prop!r} must lie in [0,1], got [{lo}, {hi}]")
        self.data[prop][state] = [float(lo), float(hi)]

    def get(self, prop: str, state: int) -> tuple[float, float]:
        if prop not in self.data:
            raise KeyError(f"unknown proposition {prop!r}")
        lo, hi = self.data[prop][state]
        return lo, hi

    def propositions(self) -> list[str]:
        return list(self.data)


# ── accessibility relations ────────────────────────────────────────────────

def topk_mask(scores: list[list[float]], k: int,
              allowed: list[list[int]] | None = None) -> list[list[int]]:
    """Per-row 0/1 mask keeping the k largest scores, diagonal always kept.

    Ties break toward the lower column index. The diagonal is retained in
    addition to the k winners when it is not among them. `allowed` is an
    optional static mask; disallowed cells can never win.
    """
    n = len(scores)
    mask = [[0] * n for _ in range(n)]
    for i in range(n):
        cols = [j for j in range(n) if allowed is None or allowed[i][j]]
        cols.sort(key=lambda j: (-scores[i][j], j))
        for j in cols[:k]:
            mask[i][j] = 1
        if allowed is None or allowed[i][i]:
            mask[i][i] = 1
    return mask


class FixedRelation:
    """Constant accessibility matrix. No parameters, materializes to floats."""

    def __init__(self, matrix: list[list[float]]):
        n = len(matrix)
        for row in matrix:
            if len(row) != n:
                raise ValueError("accessibility matrix must be square")
            for x in row:
                if not (0.0 <= x <= 1.0):
                    raise ValueError(f"accessibility value {x} outside [0,1]")
        self.matrix = [[float(x) for x in row] for row in matrix]
        self.n = n

    def parameters(self) -> list[Parameter]:
        return []

    def refresh_mask(self) -> None:
        pass

    def materialize(self, tape=None) -> list[list[float]]:
        return [row[:] for row in self.matrix]


class LogitRelation:
    """Learnable matrix sigmoid(logit[i][j]), with optional masks."""

    def __init__(self, n: int, logits: list[list[float]],
                 mask: list[list[int]] | None = None,
                 top_k: int | None = None, name: str = "rel"):
        self.n = n
        self.name = name
        self.logit = [[Parameter(logits[i][j], f"{name}[{i},{j}]")
                       for j in range(n)] for i in range(n)]
        self.static_mask = [[int(mask[i][j]) for j in range(n)]
                            for i in range(n)] if mask is not None else None
        self.top_k = top_k
        self.mask = None
        self.refresh_mask()

    def parameters(self) -> list[Parameter]:
        out = []
        for i in range(self.n):
            for j in range(self.n):
                if self._cell_active(i, j):
                    out.append(self.logit[i][j])
        return out

    def _cell_active(self, i: int, j: int) -> bool:
        return self.mask is None or bool(self.mask[i][j])

    def scores(self) -> list[list[float]]:
        return [[p.value for p in row] for row in self.logit]

    def refresh_mask(self) -> None:
        """Recompute the effective mask (static AND top-k). Not differentiable."""
        if self.top_k is not None:
            self.mask = topk_mask(self.scores(), self.top_k, self.static_mask)
        else:
            self.mask = self.static_mask

    def materialize(self, tape=None):
        """n x n matrix of sigmoid(logit); masked cells are exactly 0.0."""
        out = []
        for i in range(self.n):
            row = []
            for j in range(self.n):
                if not self._cell_active(i, j):
                    row.append(0.0)
                elif tape is None:
                    row.append(ad.sigmoid(self.logit[i][j].value))
                else:
                    row.append(ad.sigmoid(tape.param(self.logit[i][j])))
            out.append(row)
        return out


class MetricRelation:
    """Entry (i, j) = sigmoid(h_i . h_j) for learnable state embeddings h."""

    def __init__(self, n: int, embeddings: list[list[float]],
                 mask: list[list[int]] | None = None,
                 top_k: int | None = None, name: str = "rel"):
        self.n = n
        self.name = name
        self.dim = len(embeddings[0])
        self.emb = [[Parameter(embeddings[i][d], f"{name}.h[{i},{d}]")
                     for d in range(self.dim)] for i in range(n)]
        self.static_mask = [[int(mask[i][j]) for j in range(n)]
                            for i in range(n)] if mask is not None else None
        self.top_k = top_k
        self.mask = None
        self.refresh_mask()

    def parameters(self) -> list[Parameter]:
        return [p for row in self.emb for p in row]

    def scores(self) -> list[list[float]]:
        h = [[p.value for p in row] for row in self.emb]
        return [[sum(a * b for a, b in zip(h[i], h[j])) for j in range(self.n)]
                for i in range(self.n)]

    def refresh_mask(self) -> None:
        if self.top_k is not None:
            self.mask = topk_mask(self.scores(), self.top_k, self.static_mask)
        else:
            self.mask = self.static_mask

    def materialize(self, tape=None):
        if tape is None:
            s = self.scores()
            return [[0.0 if self.mask and not self.mask[i][j]
                     else ad.sigmoid(s[i][j])
                     for j in range(self.n)] for i in range(self.n)]
        hs = [[tape.param(p) for p in row] for row in self.emb]
        out = []
        for i in range(self.n):
            row = []
            for j in range(self.n):
                if self.mask and not self.mask[i][j]:
                    row.append(0.0)
                    continue
                dot = 0.0
                for d in range(self.dim):
                    dot = ad.add(dot, ad.mul(hs[i][d], hs[j][d]))
                row.append(ad.sigmoid(dot))
            out.append(row)
        return out


class RelationRegistry:
    """Named accessibility relations over one state space."""

    def __init__(self, states: StateSpace):
        self.states = states
        self.relations: dict[str, object] = {}

    def add(self, name: str, rel) -> None:
        if getattr(rel, "n", self.states.n) != self.states.n:
            raise ValueError(f"relation {name!r} is {rel.n}x{rel.n}, "
                             f"state space has {self.states.n} states")
        self.relations[name] = rel

    def get(self, name: str):
        if name not in self.relations:
            raise KeyError(f"unknown relation {name!r}; "
                           f"known: {', '.join(self.relations) or '(none)'}")
        return self.relations[name]

    def parameters(self) -> list[Parameter]:
        out = []
        for rel in self.relations.values():
            out.extend(rel.parameters())
        return out

    def refresh_masks(self) -> None:
        for rel in self.relations.values():
            rel.refresh_mask()

    def materialize_all(self, tape=None) -> dict[str, list[list]]:
        return {name: rel.materialize(tape) for name, rel in self.relations.items()}


class Model:
    """Runtime semantic structure: states, atom bounds, named relations."""

    def __init__(self, states: StateSpace, atoms: BoundsTensor,
                 relations: RelationRegistry):
        self.states = states
        self.atoms = atoms
        self.relations = relations

    def parameters(self) -> list[Parameter]:
        return self.relations.parameters()


# ── structural regularizers ────────────────────────────────────────────────
# Each takes a materialized matrix (floats or nodes) and returns a scalar.

def _total(terms):
    acc = 0.0
    for t in terms:
        acc = ad.add(acc, t)
    return acc


def reg_T(A):
    """Reflexivity pressure: sum_i (1 - A[i][i]). Zero iff diagonal is all 1."""
    return _total(ad.sub(1.0, A[i][i]) for i in range(len(A)))


def reg_4(A):
    """Transitivity pressure: sum_ij max0((A@A)[i][j] - A[i][j]).

    Plain real matrix square, no clamping inside. Zero iff the matrix
    square never exceeds the matrix entrywise. On crisp matrices zero
    implies classical transitivity (any two-step path forces the direct
    edge), but not conversely: multiple two-step paths to an existing
    edge still cost, e.g. the all-ones matrix.
    """
    n = len(A)
    terms = []
    for i in range(n):
        for j in range(n):
            two_step = 0.0
            for k in range(n):
                two_step = ad.add(two_step, ad.mul(A[i][k], A[k][j]))
            terms.append(ad.max0(ad.sub(two_step, A[i][j])))
    return _total(terms)


def reg_S(A):
    """Symmetry pressure: sum_{i<j} |A[i][j] - A[j][i]|."""
    n = len(A)
    return _total(ad.absval(ad.sub(A[i][j], A[j][i]))
                  for i in range(n) for j in range(i + 1, n))
