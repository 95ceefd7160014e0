"""Tape mechanics, primitive op gradients, and the optimizer.

Expected numbers were computed independently with closed-form arithmetic
before the implementation existed and are asserted as frozen constants.
"""

import math
import random

import pytest

from mlnn import autodiff as ad
from mlnn.autodiff import AdamState, Node, Parameter, Tape, val

from conftest import fd_grad, grads_agree, tape_grad


# sigmoid(-2) and sigmoid(4), closed form
SIG_M2 = 0.11920292202211755
SIG_P4 = 0.9820137900379085


class TestConstantFolding:
    def test_float_inputs_stay_floats(self):
        assert isinstance(ad.add(0.25, 0.5), float)
        assert isinstance(ad.mul(2.0, 3.0), float)
        assert isinstance(ad.exp(0.0), float)
        assert isinstance(ad.max0(-1.0), float)
        assert isinstance(ad.clamp01(1.7), float)
        assert isinstance(ad.sigmoid(-2.0), float)

    def test_node_contaminates(self):
        tape = Tape()
        x = tape.param(Parameter(0.5))
        assert isinstance(ad.add(x, 1.0), Node)
        assert isinstance(ad.mul(2.0, x), Node)

    def test_no_tape_growth_for_constants(self):
        tape = Tape()
        tape.param(Parameter(1.0))
        before = len(tape.nodes)
        ad.add(ad.mul(0.3, 0.7), ad.exp(1.0))
        assert len(tape.nodes) == before


class TestForwardValues:
    def test_primitives(self):
        assert ad.add(1.25, 2.5) == 3.75
        assert ad.sub(1.0, 0.25) == 0.75
        assert ad.mul(1.5, -2.0) == -3.0
        assert ad.neg(3.0) == -3.0
        assert ad.max0(-0.5) == 0.0
        assert ad.max0(0.5) == 0.5
        assert ad.clamp01(-0.1) == 0.0
        assert ad.clamp01(0.4) == 0.4
        assert ad.clamp01(1.1) == 1.0
        assert ad.scale(0.5, 4.0) == 2.0

    def test_exp_log_roundtrip(self):
        assert abs(ad.exp(ad.log(0.7)) - 0.7) < 1e-12

    def test_sigmoid_frozen_values(self):
        assert ad.sigmoid(-2.0) == pytest.approx(SIG_M2, abs=1e-15)
        assert ad.sigmoid(4.0) == pytest.approx(SIG_P4, abs=1e-15)

    def test_sigmoid_symmetry_and_saturation(self):
        for x in (-7.3, -0.2, 0.0, 1.9, 11.0):
            assert ad.sigmoid(x) + ad.sigmoid(-x) == pytest.approx(1.0, abs=1e-12)
        # the stable form must not overflow at extreme inputs
        assert ad.sigmoid(-745.0) >= 0.0
        assert ad.sigmoid(745.0) <= 1.0

    def test_sigmoid_node_matches_float(self):
        for x in (-3.7, -0.01, 0.0, 0.5, 6.0):
            tape = Tape()
            node = ad.sigmoid(tape.param(Parameter(x)))
            assert val(node) == pytest.approx(ad.sigmoid(x), abs=1e-15)

    def test_absval(self):
        assert ad.absval(-0.3) == pytest.approx(0.3)
        assert ad.absval(0.3) == pytest.approx(0.3)
        assert ad.absval(0.0) == 0.0


class TestBackward:
    def test_each_primitive_against_finite_differences(self):
        rng = random.Random(7)
        builders = {
            "add": lambda t, p: ad.add(t.param(p[0]), t.param(p[1])),
            "sub": lambda t, p: ad.sub(t.param(p[0]), t.param(p[1])),
            "mul": lambda t, p: ad.mul(t.param(p[0]), t.param(p[1])),
            "neg": lambda t, p: ad.neg(t.param(p[0])),
            "exp": lambda t, p: ad.exp(t.param(p[0])),
            "log": lambda t, p: ad.log(t.param(p[0])),
            "max0": lambda t, p: ad.max0(t.param(p[0])),
            "clamp01": lambda t, p: ad.clamp01(t.param(p[0])),
            "scale": lambda t, p: ad.scale(t.param(p[0]), 2.5),
            "sigmoid": lambda t, p: ad.sigmoid(t.param(p[0])),
            "absval": lambda t, p: ad.absval(t.param(p[0])),
        }
        for name, build in builders.items():
            for _ in range(20):
                # interior points only; kink neighborhoods get no FD checks
                v0 = rng.uniform(0.05, 0.95)
                v1 = rng.uniform(0.05, 0.95)
                params = [Parameter(v0, "a"), Parameter(v1, "b")]
                analytic = tape_grad(lambda t: build(t, params))
                numeric = fd_grad(
                    lambda: val(build(Tape(), params)), list(analytic))
                assert grads_agree(analytic, numeric), name

    def test_subgradient_conventions_at_kinks(self):
        tape = Tape()
        p = Parameter(0.0)
        y = ad.max0(tape.param(p))
        tape.backward(y)
        assert tape.gradients()[p] == 0.0  # max0 flat side at exactly 0

        tape = Tape()
        q = Parameter(1.0)
        z = ad.clamp01(tape.param(q))
        tape.backward(z)
        assert tape.gradients()[q] == 1.0  # boundary counts as inside

    def test_fanout_accumulates(self):
        # f = x*x + x, df/dx = 2x + 1
        tape = Tape()
        p = Parameter(0.3)
        x = tape.param(p)
        f = ad.add(ad.mul(x, x), x)
        tape.backward(f)
        assert tape.gradients()[p] == pytest.approx(1.6, abs=1e-12)

    def test_duplicate_leaf_registration_sums(self):
        tape = Tape()
        p = Parameter(2.0)
        a, b = tape.param(p), tape.param(p)
        f = ad.mul(a, b)  # value p^2 through two leaves
        tape.backward(f)
        assert tape.gradients()[p] == pytest.approx(4.0)

    def test_backward_rejects_foreign_root(self):
        t1, t2 = Tape(), Tape()
        root = ad.add(t2.param(Parameter(1.0)), 1.0)
        with pytest.raises(ValueError):
            t1.backward(root)

    def test_grads_reset_between_backward_calls(self):
        tape = Tape()
        p = Parameter(0.5)
        x = tape.param(p)
        f = ad.mul(x, 3.0)
        tape.backward(f)
        tape.backward(f)
        assert tape.gradients()[p] == pytest.approx(3.0)


class TestAdam:
    def test_first_step_frozen(self):
        # from p=1 with g=1 and lr=0.01, bias correction makes the first
        # step lr * 1/(1 + eps), so p lands at 0.9900000001 (10 digits)
        p = Parameter(1.0)
        state = AdamState(lr=0.01)
        state.step({p: 1.0})
        assert p.value == pytest.approx(0.9900000001, abs=1e-12)

    def test_quadratic_descent(self):
        p = Parameter(5.0)
        state = AdamState(lr=0.05)
        for _ in range(500):
            g = 2.0 * (p.value - 0.3)
            state.step({p: g})
        assert abs(p.value - 0.3) < 1e-3

    def test_deterministic(self):
        def run():
            p = Parameter(0.7)
            s = AdamState(lr=0.02)
            for i in range(50):
                s.step({p: math.sin(i) * (p.value - 0.1)})
            return p.value
        assert run() == run()

    def test_zero_gradient_does_not_move(self):
        p = Parameter(0.42)
        AdamState(lr=0.5).step({p: 0.0})
        assert p.value == 0.42

    def test_adam_step_alias(self):
        p = Parameter(1.0)
        s = AdamState(lr=0.01)
        ad.adam_step(s, {p: 1.0})
        assert s.t == 1
