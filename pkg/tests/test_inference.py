"""Bound stores, the tightening passes, fixed points, contradiction loss.

The succession model doubles as an integration fixture here because its
fixed point is fully determined: every expected interval below was worked
out on paper from the downward rules before being frozen.
"""

import random

import pytest

from mlnn import kripke
from mlnn.autodiff import val
from mlnn.harness.scenarios import (scenario_epistemic_toy,
                                    scenario_royal_succession)
from mlnn.inference import (Axiom, BoundStore, InferenceConfig,
                            contradiction_loss, downward_pass,
                            run_to_fixpoint, upward_pass)
from mlnn.logic import (And, Atom, Box, Diamond, Implies, Not, Or,
                        ProdImplies, SoftConfig)

from conftest import rand_formula, rand_soft_model

# conv-pool upper bound of necessity over the three-world succession
# relation when the child is false in exactly one accessible world
ROYAL_BOX_UPPER = 9.079161565902183e-05
# softmin floor of a three-term all-true necessity at tau 0.1
ROYAL_BOX_TRUE_LOWER = 0.8901387711331892
# initial training loss of the epistemic toy, closed form
TOY_START_LOSS = 0.8390430732671865


def single_world_model(**bounds):
    states = kripke.StateSpace(["w"])
    atoms = kripke.BoundsTensor(states)
    for prop, (lo, hi) in bounds.items():
        atoms.add_proposition(prop)
        atoms.set_bounds(prop, 0, lo, hi)
    return kripke.Model(states, atoms, kripke.RelationRegistry(states))


def chain_model(n, prop_bounds, matrix):
    states = kripke.StateSpace([f"w{i}" for i in range(n)])
    atoms = kripke.BoundsTensor(states)
    for prop, rows in prop_bounds.items():
        atoms.add_proposition(prop)
        for s, (lo, hi) in enumerate(rows):
            atoms.set_bounds(prop, s, lo, hi)
    registry = kripke.RelationRegistry(states)
    registry.add("R", kripke.FixedRelation(matrix))
    return kripke.Model(states, atoms, registry)


def settle(model, formulas, axioms, **cfg_kw):
    cfg = InferenceConfig(**cfg_kw)
    return run_to_fixpoint(model, formulas, cfg, SoftConfig(0.1), axioms)


class TestConfigAndAxioms:
    def test_inference_config_validation(self):
        with pytest.raises(ValueError):
            InferenceConfig(epsilon=0.0)
        with pytest.raises(ValueError):
            InferenceConfig(access_threshold=1.0)

    def test_axiom_bounds_validation(self):
        with pytest.raises(ValueError):
            Axiom(Atom("p"), 0, -0.1, 1.0)

    def test_axiom_state_selector(self):
        ax = Axiom(Atom("p"), None, 0.0, 1.0)
        assert list(ax.states(3)) == [0, 1, 2]
        assert list(Axiom(Atom("p"), 2, 0.0, 1.0).states(3)) == [2]


class TestBoundStore:
    def test_axioms_clamp_at_init(self):
        model = single_world_model(p=(0.0, 1.0))
        f = Atom("p")
        store = BoundStore(model, [f], [Axiom(f, 0, 0.6, 0.8)])
        assert store.bounds(f)[0] == [0.6, 0.8]

    def test_tighten_never_loosens(self):
        model = single_world_model(p=(0.3, 0.7))
        f = Atom("p")
        store = BoundStore(model, [f], None)
        assert store.tighten(f.key(), 0, lo=0.1) == 0.0
        assert store.bounds(f)[0] == [0.3, 0.7]
        d = store.tighten(f.key(), 0, lo=0.5, hi=0.6)
        assert d == pytest.approx(0.2)
        assert store.bounds(f)[0] == [0.5, 0.6]

    def test_tighten_clamps_candidates_to_unit(self):
        model = single_world_model(p=(0.0, 1.0))
        f = Atom("p")
        store = BoundStore(model, [f], None)
        store.tighten(f.key(), 0, lo=-3.0, hi=7.0)
        assert store.bounds(f)[0] == [0.0, 1.0]

    def test_subformulas_deduplicated(self):
        f1 = And(Atom("p"), Atom("p"))
        store_keys = [g.key() for g in
                      BoundStore(single_world_model(p=(0, 1)), [f1], None).order]
        assert store_keys.count("(atom p)") == 1

    def test_contradiction_total(self):
        model = single_world_model(p=(0.9, 0.2))
        f = Atom("p")
        store = BoundStore(model, [f], None)
        assert store.contradiction_total() == pytest.approx(0.7)


class TestDownwardRules:
    """Each rule gets a one-world fixture where its effect is isolated."""

    def test_negation_inverts(self):
        model = single_world_model(p=(0.0, 1.0))
        f = Not(Atom("p"))
        fx = settle(model, [f], [Axiom(f, 0, 0.8, 1.0)])
        lo, hi = fx.bounds(Atom("p"))[0]
        assert hi == pytest.approx(0.2)
        assert lo == pytest.approx(0.0)

    def test_conjunction_pins_both_sides(self):
        model = single_world_model(p=(0.0, 1.0), q=(0.0, 0.9))
        f = And(Atom("p"), Atom("q"))
        fx = settle(model, [f], [Axiom(f, 0, 0.7, 1.0)])
        assert fx.bounds(Atom("p"))[0][0] == pytest.approx(0.8)  # 0.7+1-0.9

    def test_conjunction_upper_pushes_down(self):
        model = single_world_model(p=(0.0, 1.0), q=(0.8, 1.0))
        f = And(Atom("p"), Atom("q"))
        fx = settle(model, [f], [Axiom(f, 0, 0.0, 0.4)])
        assert fx.bounds(Atom("p"))[0][1] == pytest.approx(0.6)  # 0.4+1-0.8

    def test_disjunction_lower_flows_to_weak_side(self):
        model = single_world_model(p=(0.0, 1.0), q=(0.0, 0.2))
        f = Or(Atom("p"), Atom("q"))
        fx = settle(model, [f], [Axiom(f, 0, 0.9, 1.0)])
        assert fx.bounds(Atom("p"))[0][0] == pytest.approx(0.7)  # 0.9-0.2

    def test_disjunction_upper_caps_both(self):
        model = single_world_model(p=(0.0, 1.0), q=(0.1, 1.0))
        f = Or(Atom("p"), Atom("q"))
        fx = settle(model, [f], [Axiom(f, 0, 0.0, 0.5)])
        assert fx.bounds(Atom("p"))[0][1] == pytest.approx(0.4)  # 0.5-0.1

    def test_modus_ponens(self):
        model = single_world_model(p=(1.0, 1.0), q=(0.0, 1.0))
        f = Implies(Atom("p"), Atom("q"))
        fx = settle(model, [f], [Axiom(f, 0, 1.0, 1.0)])
        assert fx.bounds(Atom("q"))[0][0] == pytest.approx(1.0)

    def test_modus_tollens(self):
        model = single_world_model(p=(0.0, 1.0), q=(0.0, 0.0))
        f = Implies(Atom("p"), Atom("q"))
        fx = settle(model, [f], [Axiom(f, 0, 1.0, 1.0)])
        assert fx.bounds(Atom("p"))[0][1] == pytest.approx(0.0)

    def test_product_implication_propagates_nothing(self):
        model = single_world_model(p=(1.0, 1.0), q=(0.0, 1.0))
        f = ProdImplies(Atom("p"), Atom("q"))
        fx = settle(model, [f], [Axiom(f, 0, 1.0, 1.0)])
        assert fx.bounds(Atom("q"))[0] == [0.0, 1.0]

    def test_necessity_pushes_lower_through_strong_edges(self):
        matrix = [[0.0, 1.0, 0.3], [0.0] * 3, [0.0] * 3]
        model = chain_model(3, {"p": [(0.0, 1.0)] * 3}, matrix)
        f = Box("R", Atom("p"))
        fx = settle(model, [f], [Axiom(f, 0, 0.9, 1.0)])
        rows = fx.bounds(Atom("p"))
        assert rows[1][0] == pytest.approx(0.9)  # edge 1.0 > threshold
        assert rows[2][0] == pytest.approx(0.0)  # edge 0.3 stays untouched

    def test_possibility_caps_upper_through_strong_edges(self):
        matrix = [[0.0, 1.0, 0.3], [0.0] * 3, [0.0] * 3]
        model = chain_model(3, {"p": [(0.0, 1.0)] * 3}, matrix)
        f = Diamond("R", Atom("p"))
        fx = settle(model, [f], [Axiom(f, 0, 0.0, 0.1)])
        rows = fx.bounds(Atom("p"))
        assert rows[1][1] == pytest.approx(0.1)
        assert rows[2][1] == pytest.approx(1.0)


class TestFixpointBehavior:
    def test_monotone_traces_on_random_models(self):
        rng = random.Random(123)
        soft = SoftConfig(0.1)
        cfg = InferenceConfig()
        for _ in range(20):
            model = rand_soft_model(rng)
            formulas = [rand_formula(rng, 3) for _ in range(3)]
            axioms = []
            for f in formulas[:2]:
                lo = rng.uniform(0, 1)
                axioms.append(Axiom(f, rng.randrange(model.states.n),
                                    lo, rng.uniform(lo, 1)))
            store = BoundStore(model, formulas, axioms)
            rels = model.relations.materialize_all(None)
            prev = store.snapshot()
            for _ in range(cfg.max_iterations):
                d = upward_pass(model, store, soft, rels)
                d = max(d, downward_pass(model, store, cfg, soft, rels))
                snap = store.snapshot()
                for key, rows in snap.items():
                    for s, (lo, hi) in enumerate(rows):
                        assert lo >= prev[key][s][0]
                        assert hi <= prev[key][s][1]
                prev = snap
                if d < cfg.epsilon:
                    break
            assert d < cfg.epsilon

    def test_rerun_is_quiescent(self):
        rng = random.Random(321)
        soft = SoftConfig(0.1)
        cfg = InferenceConfig()
        for _ in range(10):
            model = rand_soft_model(rng)
            formulas = [rand_formula(rng, 2) for _ in range(3)]
            fx = run_to_fixpoint(model, formulas, cfg, soft)
            assert fx.converged
            d = upward_pass(model, fx.store, soft)
            d = max(d, downward_pass(model, fx.store, cfg, soft))
            assert d < cfg.epsilon

    def test_iteration_cap_reports_without_raising(self):
        spec, _ = scenario_royal_succession()
        built = spec.build()
        fx = run_to_fixpoint(built.model, list(built.formulas.values()),
                             InferenceConfig(max_iterations=1),
                             SoftConfig(0.1), built.axioms)
        assert not fx.converged
        assert fx.iterations == 1


@pytest.fixture(scope="module")
def fixpoint():
    spec, _ = scenario_royal_succession()
    built = spec.build()
    fx = run_to_fixpoint(built.model, list(built.formulas.values()),
                         built.inference_cfg, SoftConfig(0.1),
                         built.axioms)
    return built, fx


class TestSuccessionFixpoint:
    def test_upward_alone_gives_soft_necessity_bounds(self):
        spec, _ = scenario_royal_succession()
        built = spec.build()
        box_w = built.formulas["necessarily_alive_william"]
        box_h = built.formulas["necessarily_alive_harry"]
        store = BoundStore(built.model, [box_w, box_h], None)
        upward_pass(built.model, store, SoftConfig(0.1))
        lo, hi = store.bounds(box_w)[0]
        assert lo == 0.0  # softmin goes slightly negative, clamps to 0
        assert hi == pytest.approx(ROYAL_BOX_UPPER, rel=1e-9)
        lo, hi = store.bounds(box_h)[0]
        assert lo == pytest.approx(ROYAL_BOX_TRUE_LOWER, rel=1e-12)
        assert hi == 1.0

    def test_verdicts(self, fixpoint):
        built, fx = fixpoint
        assert fx.converged and fx.iterations == 4
        lo, hi = fx.bounds(built.formulas["heir_william"])[0]
        assert lo == 1.0 and hi == 0.0  # asserted heir, provably cannot be
        lo, hi = fx.bounds(built.formulas["heir_harry"])[0]
        assert lo == 1.0 and hi == 1.0

    def test_contradiction_cascade(self, fixpoint):
        built, fx = fixpoint
        # William's impossibility infects everything his rule touches,
        # including the shared monarch atom, at exactly 1.0 apiece
        assert fx.contradiction() == pytest.approx(10.0)
        alive = fx.store.entries["(atom isAliveWilliam)"]
        assert alive[1] == [1.0, 0.0]  # the world where he is dead
        # Harry's verdict survives the cascade untouched
        heir_h = fx.store.entries["(atom isHeirHarry)"]
        assert heir_h[0] == [1.0, 1.0]


class TestContradictionLoss:
    def test_consistent_model_scores_zero(self):
        model = single_world_model(p=(1.0, 1.0), q=(1.0, 1.0))
        f = And(Atom("p"), Atom("q"))
        loss = contradiction_loss(model, [Axiom(f, 0, 1.0, 1.0)])
        assert val(loss) == 0.0

    def test_violated_target_is_hinged(self):
        model = single_world_model(p=(0.3, 0.3))
        loss = contradiction_loss(model, [Axiom(Atom("p"), 0, 0.9, 1.0)])
        assert val(loss) == pytest.approx(0.6)

    def test_contradictory_atom_counts(self):
        model = single_world_model(p=(0.8, 0.1))
        loss = contradiction_loss(model, [])
        assert val(loss) == pytest.approx(0.7)

    def test_toy_initial_loss_frozen_calibration(self):
        spec = scenario_epistemic_toy()
        built = spec.build()
        loss = contradiction_loss(built.model, built.axioms,
                                  SoftConfig(built.train_cfg.tau))
        assert val(loss) == pytest.approx(TOY_START_LOSS, abs=1e-12)

    def test_upper_violation_hinged_symmetrically(self):
        model = single_world_model(p=(0.8, 0.8))
        loss = contradiction_loss(model, [Axiom(Atom("p"), 0, 0.0, 0.5)])
        assert val(loss) == pytest.approx(0.3)
