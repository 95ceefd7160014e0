"""Built-in desk-scale scenarios.

Three constructions exercise the whole engine: a pure-inference succession
puzzle over a crisp relation, a two-agent epistemic/temporal toy whose
training opens exactly one accessibility link, and a ring-recovery task
where contradiction pressure plus sparsity must rediscover a directed ring
from 40 axioms. Each returns a declarative ModelSpec so every scenario can
also be saved, reloaded, and run from the CLI.
"""

from __future__ import annotations

import numpy as np

from .model_io import InputError, ModelSpec


def scenario_royal_succession():
    """Succession puzzle: who can inherit, given who is alive in which future.

    Three worlds: the present and two candidate futures. William is dead in
    futureA, Harry alive everywhere. Heirship rules are asserted as exact
    axioms at the present world; the downward pass must push isHeirWilliam's
    upper bound to ~0 (modus tollens through necessarily-alive) and
    isHeirHarry's lower bound to 1 (modus ponens).

    Returns (spec, expected) where expected maps formula names to the crisp
    verdicts the engine and oracle must agree on.
    """
    worlds = ["present", "futureA", "futureB"]
    everywhere = {"default": [1.0, 1.0]}
    spec = ModelSpec(
        worlds=worlds,
        propositions={
            "isAliveWilliam": {"default": [1.0, 1.0],
                               "states": {"futureA": [0.0, 0.0]}},
            "isAliveHarry": dict(everywhere),
            "isMonarchCharles": dict(everywhere),
            "childOfWilliam": dict(everywhere),
            "childOfHarry": dict(everywhere),
            "isHeirWilliam": {"default": [0.0, 1.0]},
            "isHeirHarry": {"default": [0.0, 1.0]},
        },
        relations={
            "future": {"kind": "fixed",
                       "matrix": [[1.0, 1.0, 1.0],
                                  [0.0, 0.0, 0.0],
                                  [0.0, 0.0, 0.0]]},
        },
        formulas={
            "william_rule": "(implies (and (atom isMonarchCharles) "
                            "(atom childOfWilliam)) (atom isHeirWilliam))",
            "harry_rule": "(implies (and (atom isMonarchCharles) "
                          "(atom childOfHarry)) (atom isHeirHarry))",
            "william_heir_needs_alive": "(implies (atom isHeirWilliam) "
                                        "(box future (atom isAliveWilliam)))",
            "harry_heir_needs_alive": "(implies (atom isHeirHarry) "
                                      "(box future (atom isAliveHarry)))",
            "heir_william": "(atom isHeirWilliam)",
            "heir_harry": "(atom isHeirHarry)",
            "necessarily_alive_william": "(box future (atom isAliveWilliam))",
            "necessarily_alive_harry": "(box future (atom isAliveHarry))",
        },
        axioms=[
            {"formula": "william_rule", "state": "present",
             "lower": 1.0, "upper": 1.0},
            {"formula": "harry_rule", "state": "present",
             "lower": 1.0, "upper": 1.0},
            {"formula": "william_heir_needs_alive", "state": "present",
             "lower": 1.0, "upper": 1.0},
            {"formula": "harry_heir_needs_alive", "state": "present",
             "lower": 1.0, "upper": 1.0},
        ],
        train={"beta": 1.0, "tau": 0.1, "lr": 0.01, "epochs": 1, "seed": 0},
        inference={"max_iterations": 100, "epsilon": 1e-6,
                   "access_threshold": 0.5},
    )
    expected = {"heir_william": False, "heir_harry": True}
    return spec, expected


def scenario_epistemic_toy() -> ModelSpec:
    """Two agents, three times; learn that A may trust B's observation.

    States are time-major: s0=(A,t0), s1=(B,t0), s2=(A,t1), ... isOnline is
    false at s0 and s3. The temporal relation is fixed: (w,t) sees every
    state at the same or a later time. The epistemic relation starts siloed
    (identity) and is masked to same-time blocks; the single axiom
    diamond_epistemic(isOnline) = 1 at s0 can only be satisfied by opening
    the A->B link at t0.
    """
    worlds, times = ["A", "B"], ["t0", "t1", "t2"]
    n = len(worlds) * len(times)
    temporal = [[1.0 if (j // 2) >= (i // 2) else 0.0 for j in range(n)]
                for i in range(n)]
    logits = [[6.0 if i == j else -6.0 for j in range(n)] for i in range(n)]
    same_time = [[1 if i // 2 == j // 2 else 0 for j in range(n)]
                 for i in range(n)]
    return ModelSpec(
        worlds=worlds, times=times,
        propositions={
            "isOnline": {"default": [1.0, 1.0],
                         "states": {"A@t0": [0.0, 0.0], "B@t1": [0.0, 0.0]}},
        },
        relations={
            "temporal": {"kind": "fixed", "matrix": temporal},
            "epistemic": {"kind": "logits", "logits": logits,
                          "mask": same_time, "top_k": None},
        },
        formulas={
            "possibly_online": "(diamond epistemic (atom isOnline))",
            "knows_online": "(box epistemic (atom isOnline))",
            "always_online": "(box temporal (atom isOnline))",
            "eventually_online": "(diamond temporal (atom isOnline))",
            "knows_always_online":
                "(box epistemic (box temporal (atom isOnline)))",
        },
        axioms=[
            {"formula": "possibly_online", "state": "A@t0",
             "lower": 1.0, "upper": 1.0},
        ],
        train={"beta": 1.0, "lr": 0.5, "epochs": 32, "tau": 0.1, "seed": 0},
        inference={"max_iterations": 100, "epsilon": 1e-6,
                   "access_threshold": 0.5},
    )


def ring_ground_truth(n: int) -> list[list[float]]:
    """Identity plus successor links: the unique consistent trust structure."""
    return [[1.0 if j == i or j == (i + 1) % n else 0.0 for j in range(n)]
            for i in range(n)]


def scenario_ring(n: int = 20, k: int = 8, tau: float = 0.1,
                  fixed_r: bool = False, seed: int = 0):
    """Ring-recovery task: n agents, each trusting only its successor.

    Per agent i, facts_i holds everywhere, agreement_i holds only at i and
    its successor, beacon_i only at the successor. The box axiom at world i
    ("whoever I trust agrees with me") is violated by every non-successor,
    and the diamond axiom ("someone I trust carries my beacon") is
    satisfiable only through the successor link, so the contradiction-free
    structure is exactly the directed ring. The learnable relation starts
    from a uniform distrust prior with a per-row top-k mask; the fixed_r arm
    freezes i.i.d. uniform[0,1] entries instead (seeded), the no-learning
    baseline.

    Returns (spec, ground_truth).
    """
    if n < 3:
        raise InputError(f"ring needs at least 3 agents, got {n}")
    worlds = [f"agent{i}" for i in range(n)]
    props: dict = {}
    formulas: dict = {}
    axioms: list = []
    for i in range(n):
        succ = (i + 1) % n
        props[f"facts{i}"] = {"default": [1.0, 1.0]}
        props[f"agreement{i}"] = {
            "default": [0.0, 0.0],
            "states": {worlds[i]: [1.0, 1.0], worlds[succ]: [1.0, 1.0]}}
        props[f"beacon{i}"] = {
            "default": [0.0, 0.0],
            "states": {worlds[succ]: [1.0, 1.0]}}
        formulas[f"consistency{i}"] = (
            f"(box trust (implies (atom facts{i}) (atom agreement{i})))")
        formulas[f"expansion{i}"] = f"(diamond trust (atom beacon{i}))"
        axioms.append({"formula": f"consistency{i}", "state": worlds[i],
                       "lower": 0.9, "upper": 1.0})
        axioms.append({"formula": f"expansion{i}", "state": worlds[i],
                       "lower": 0.9, "upper": 1.0})

    if fixed_r:
        rng = np.random.default_rng(seed)
        matrix = [[float(x) for x in row]
                  for row in rng.uniform(0.0, 1.0, size=(n, n))]
        relations = {"trust": {"kind": "fixed", "matrix": matrix}}
    else:
        logits = [[4.0 if i == j else -4.0 for j in range(n)]
                  for i in range(n)]
        relations = {"trust": {"kind": "logits", "logits": logits,
                               "mask": None, "top_k": k}}

    spec = ModelSpec(
        worlds=worlds,
        propositions=props,
        relations=relations,
        formulas=formulas,
        axioms=axioms,
        train={"beta": 1.0, "lr": 0.2, "epochs": 200, "tau": tau,
               "seed": seed, "lambda_t": 0.5, "lambda_sparsity": 0.005},
        inference={"max_iterations": 100, "epsilon": 1e-6,
                   "access_threshold": 0.5},
    )
    return spec, ring_ground_truth(n)
