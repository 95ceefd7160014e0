"""Brute-force crisp Kripke model checker, the ground-truth oracle for tests.

Classical two-valued semantics by exhaustive recursion: box is a conjunction
over relation successors (vacuously true with none), diamond a disjunction
(vacuously false). The soft engine's [L, U] interval must bracket this value
on crisp inputs; that comparison is the backbone of the soundness suite.
"""

from __future__ import annotations

from ..logic import (And, Atom, Box, Diamond, Formula, Implies, Not, Or,
                     ProdImplies)


class CrispOracle:
    """Boolean relations and valuations over n states."""

    def __init__(self, n: int, relations: dict[str, list[list[int]]],
                 valuation: dict[str, list[int]]):
        self.n = n
        self.relations = {name: [[bool(x) for x in row] for row in m]
                          for name, m in relations.items()}
        self.valuation = {p: [bool(x) for x in vals]
                          for p, vals in valuation.items()}


def oracle_from_model(model) -> CrispOracle:
    """Build an oracle from a model whose relations and atoms are all crisp."""
    n = model.states.n
    rels = {}
    for name, rel in model.relations.relations.items():
        M = rel.materialize(None)
        for row in M:
            for x in row:
                if x not in (0.0, 1.0):
                    raise ValueError(f"relation {name!r} is not crisp ({x})")
        rels[name] = [[int(x) for x in row] for row in M]
    vals = {}
    for prop in model.atoms.propositions():
        col = []
        for s in range(n):
            lo, hi = model.atoms.get(prop, s)
            if lo != hi or lo not in (0.0, 1.0):
                raise ValueError(f"proposition {prop!r} is not crisp at state {s}")
            col.append(int(lo))
        vals[prop] = col
    return CrispOracle(n, rels, vals)


def crisp_check(oracle: CrispOracle, formula: Formula, world: int) -> bool:
    """Classical satisfaction of `formula` at `world`."""
    if isinstance(formula, Atom):
        if formula.name not in oracle.valuation:
            raise KeyError(f"unknown proposition {formula.name!r}")
        return oracle.valuation[formula.name][world]
    if isinstance(formula, Not):
        return not crisp_check(oracle, formula.child, world)
    if isinstance(formula, And):
        return (crisp_check(oracle, formula.left, world)
                and crisp_check(oracle, formula.right, world))
    if isinstance(formula, Or):
        return (crisp_check(oracle, formula.left, world)
                or crisp_check(oracle, formula.right, world))
    if isinstance(formula, (Implies, ProdImplies)):
        # 1 - a + a*b on {0,1} is exactly classical implication
        return (not crisp_check(oracle, formula.left, world)
                or crisp_check(oracle, formula.right, world))
    if isinstance(formula, (Box, Diamond)):
        if formula.relation not in oracle.relations:
            raise KeyError(f"unknown relation {formula.relation!r}")
        row = oracle.relations[formula.relation][world]
        successors = [w for w in range(oracle.n) if row[w]]
        checks = (crisp_check(oracle, formula.child, w) for w in successors)
        return all(checks) if isinstance(formula, Box) else any(checks)
    raise TypeError(f"not a formula node: {formula!r}")
