"""Shared builders for the randomized suites.

Random crisp models pair the soft engine with the brute-force oracle;
random soft models exercise duality and fixed-point behavior where no
crisp ground truth exists. Gradient checks go through the two helpers at
the bottom so every test compares the same way: a fresh-tape analytic
backward pass against central finite differences on Parameter values.
"""

from __future__ import annotations

import random

from mlnn import kripke
from mlnn.autodiff import Tape
from mlnn.harness.oracle import CrispOracle
from mlnn.logic import (And, Atom, Box, Diamond, Implies, Not, Or,
                        ProdImplies)

PROPS = ["p", "q", "r"]
RELS = ["R", "S"]


def rand_crisp_model(rng: random.Random, max_states: int = 4):
    """A model whose atoms and relations are all 0/1, plus its oracle."""
    n = rng.randint(1, max_states)
    states = kripke.StateSpace([f"w{i}" for i in range(n)])
    atoms = kripke.BoundsTensor(states)
    valuation = {}
    for p in PROPS:
        vals = [rng.randint(0, 1) for _ in range(n)]
        valuation[p] = vals
        atoms.add_proposition(p)
        for s, v in enumerate(vals):
            atoms.set_bounds(p, s, float(v), float(v))
    registry = kripke.RelationRegistry(states)
    crisp_rels = {}
    for name in RELS:
        M = [[float(rng.randint(0, 1)) for _ in range(n)] for _ in range(n)]
        registry.add(name, kripke.FixedRelation(M))
        crisp_rels[name] = [[int(x) for x in row] for row in M]
    model = kripke.Model(states, atoms, registry)
    return model, CrispOracle(n, crisp_rels, valuation)


def rand_soft_model(rng: random.Random, max_states: int = 4):
    """Fixed soft relations and interval-valued atoms; no oracle."""
    n = rng.randint(2, max_states)
    states = kripke.StateSpace([f"w{i}" for i in range(n)])
    atoms = kripke.BoundsTensor(states)
    for p in PROPS:
        atoms.add_proposition(p)
        for s in range(n):
            lo = rng.uniform(0.0, 1.0)
            hi = rng.uniform(lo, 1.0)
            atoms.set_bounds(p, s, lo, hi)
    registry = kripke.RelationRegistry(states)
    for name in RELS:
        M = [[rng.uniform(0.0, 1.0) for _ in range(n)] for _ in range(n)]
        registry.add(name, kripke.FixedRelation(M))
    return kripke.Model(states, atoms, registry)


def rand_formula(rng: random.Random, depth: int,
                 props=PROPS, rels=RELS):
    """Random formula of at most the given operator depth."""
    if depth == 0:
        return Atom(rng.choice(props))
    head = rng.choice(["atom", "not", "and", "or", "implies",
                       "implies_prod", "box", "diamond"])
    if head == "atom":
        return Atom(rng.choice(props))
    if head == "not":
        return Not(rand_formula(rng, depth - 1, props, rels))
    if head in ("and", "or", "implies", "implies_prod"):
        cls = {"and": And, "or": Or, "implies": Implies,
               "implies_prod": ProdImplies}[head]
        return cls(rand_formula(rng, depth - 1, props, rels),
                   rand_formula(rng, depth - 1, props, rels))
    cls = Box if head == "box" else Diamond
    return cls(rng.choice(rels), rand_formula(rng, depth - 1, props, rels))


def tape_grad(build):
    """Analytic gradients of build(tape) -> loss node, as {Parameter: g}."""
    tape = Tape()
    root = build(tape)
    tape.backward(root)
    return tape.gradients()


def fd_grad(f, params, h: float = 1e-5):
    """Central finite differences of the re-evaluated scalar f()."""
    out = {}
    for p in params:
        orig = p.value
        p.value = orig + h
        fp = f()
        p.value = orig - h
        fm = f()
        p.value = orig
        out[p] = (fp - fm) / (2.0 * h)
    return out


def grads_agree(analytic: dict, numeric: dict, tol: float = 1e-4) -> bool:
    for p, a in analytic.items():
        f = numeric[p]
        if abs(a - f) > tol * max(1.0, abs(a), abs(f)):
            return False
    return True
