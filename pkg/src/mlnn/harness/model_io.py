"""Declarative model files: JSON schema "mlnn-spec/1".

A model file names worlds (optionally crossed with time steps), proposition
bounds per state, relations (fixed matrices, learnable logits, or metric
embeddings), formulas as prefix s-expressions, axioms, and train/inference
config. Loading validates every cross-reference and reports offenders by
name. Saving is canonical (sorted keys, two-space indent), so
save -> load -> save is byte-identical.
"""

from __future__ import annotations

import json
import math

from .. import kripke
from ..inference import Axiom, InferenceConfig
from ..learn import TrainConfig
from ..logic import (And, Atom, Box, Diamond, Formula, Implies, Not, Or,
                     ProdImplies)

SCHEMA = "mlnn-spec/1"


class InputError(Exception):
    """Bad model file or bad CLI input; maps to exit code 2."""


# ── formula text syntax ─────────────────────────────────────────────────────

def _tokenize(text: str) -> list[str]:
    return text.replace("(", " ( ").replace(")", " ) ").split()


def parse_formula(text: str) -> Formula:
    """Parse a prefix s-expression like (box temporal (atom isOnline))."""
    tokens = _tokenize(text)
    if not tokens:
        raise InputError(f"empty formula text: {text!r}")
    pos = 0

    def fail(msg: str):
        raise InputError(f"cannot parse formula {text!r}: {msg}")

    def expect(tok: str):
        nonlocal pos
        if pos >= len(tokens) or tokens[pos] != tok:
            fail(f"expected {tok!r} at token {pos}")
        pos += 1

    def name() -> str:
        nonlocal pos
        if pos >= len(tokens) or tokens[pos] in "()":
            fail(f"expected a name at token {pos}")
        pos += 1
        return tokens[pos - 1]

    def form() -> Formula:
        nonlocal pos
        expect("(")
        head = name()
        if head == "atom":
            node = Atom(name())
        elif head == "not":
            node = Not(form())
        elif head in ("and", "or", "implies", "implies_prod"):
            cls = {"and": And, "or": Or, "implies": Implies,
                   "implies_prod": ProdImplies}[head]
            node = cls(form(), form())
        elif head in ("box", "diamond"):
            rel = name()
            cls = Box if head == "box" else Diamond
            node = cls(rel, form())
        else:
            fail(f"unknown operator {head!r}")
        expect(")")
        return node

    node = form()
    if pos != len(tokens):
        fail(f"trailing tokens after position {pos}")
    return node


def format_formula(f: Formula) -> str:
    return f.key()


# ── model spec ──────────────────────────────────────────────────────────────

def _check_unit(x, what: str) -> float:
    try:
        v = float(x)
    except (TypeError, ValueError):
        raise InputError(f"{what} must be a number, got {x!r}") from None
    if not (0.0 <= v <= 1.0) or not math.isfinite(v):
        raise InputError(f"{what} must lie in [0,1], got {v}")
    return v


class ModelSpec:
    """Declarative model description; `build()` turns it into runtime objects."""

    def __init__(self, worlds, times=None, propositions=None, relations=None,
                 formulas=None, axioms=None, train=None, inference=None):
        self.worlds = list(worlds)
        self.times = list(times) if times else None
        self.propositions = propositions or {}
        self.relations = relations or {}
        self.formulas = formulas or {}
        self.axioms = axioms or []
        self.train = train or {}
        self.inference = inference or {}

    # -- serialization --

    def to_dict(self) -> dict:
        return {
            "schema": SCHEMA,
            "worlds": self.worlds,
            "times": self.times,
            "propositions": self.propositions,
            "relations": self.relations,
            "formulas": self.formulas,
            "axioms": self.axioms,
            "train": self.train,
            "inference": self.inference,
        }

    @staticmethod
    def from_dict(d: dict) -> "ModelSpec":
        if not isinstance(d, dict):
            raise InputError("model file must contain a JSON object")
        schema = d.get("schema")
        if schema != SCHEMA:
            raise InputError(f"unsupported schema {schema!r}; expected {SCHEMA!r}")
        if not d.get("worlds"):
            raise InputError("model needs a non-empty 'worlds' list")
        return ModelSpec(
            worlds=d["worlds"], times=d.get("times"),
            propositions=d.get("propositions", {}),
            relations=d.get("relations", {}),
            formulas=d.get("formulas", {}),
            axioms=d.get("axioms", []),
            train=d.get("train", {}),
            inference=d.get("inference", {}),
        )

    # -- building runtime objects --

    def state_space(self) -> kripke.StateSpace:
        return kripke.StateSpace(self.worlds, self.times)

    def build(self) -> "BuiltModel":
        states = self.state_space()
        n = states.n

        atoms = kripke.BoundsTensor(states)
        for prop, pd in self.propositions.items():
            default = pd.get("default", [0.0, 1.0])
            lo = _check_unit(default[0], f"proposition {prop!r} default lower")
            hi = _check_unit(default[1], f"proposition {prop!r} default upper")
            atoms.add_proposition(prop, (lo, hi))
            for label, pair in pd.get("states", {}).items():
                try:
                    s = states.index(label)
                except KeyError as e:
                    raise InputError(f"proposition {prop!r}: {e.args[0]}") from None
                atoms.set_bounds(
                    prop, s,
                    _check_unit(pair[0], f"proposition {prop!r} at {label!r} lower"),
                    _check_unit(pair[1], f"proposition {prop!r} at {label!r} upper"))

        registry = kripke.RelationRegistry(states)
        for name, rd in self.relations.items():
            kind = rd.get("kind")
            if kind == "fixed":
                matrix = rd.get("matrix")
                self._check_square(matrix, n, f"relation {name!r}")
                rel = kripke.FixedRelation(matrix)
            elif kind == "logits":
                logits = rd.get("logits")
                self._check_square(logits, n, f"relation {name!r}")
                rel = kripke.LogitRelation(n, logits, mask=rd.get("mask"),
                                           top_k=rd.get("top_k"), name=name)
            elif kind == "metric":
                emb = rd.get("embeddings")
                if not emb or len(emb) != n:
                    raise InputError(f"relation {name!r}: embeddings must have "
                                     f"{n} rows")
                rel = kripke.MetricRelation(n, emb, mask=rd.get("mask"),
                                            top_k=rd.get("top_k"), name=name)
            else:
                raise InputError(f"relation {name!r}: unknown kind {kind!r} "
                                 f"(expected fixed, logits, or metric)")
            rel.reg = dict(rd.get("reg", {}))
            registry.add(name, rel)

        model = kripke.Model(states, atoms, registry)

        formulas: dict[str, Formula] = {}
        for fname, text in self.formulas.items():
            try:
                f = parse_formula(text)
            except InputError as e:
                raise InputError(f"formula {fname!r}: {e}") from None
            self._check_refs(fname, f, atoms, registry)
            formulas[fname] = f

        axioms: list[Axiom] = []
        for i, axd in enumerate(self.axioms):
            fname = axd.get("formula")
            if fname not in formulas:
                raise InputError(f"axiom {i}: unknown formula {fname!r}")
            sel = axd.get("state", "all")
            if sel == "all":
                state = None
            else:
                try:
                    state = states.index(sel)
                except KeyError as e:
                    raise InputError(f"axiom {i} ({fname!r}): {e.args[0]}") from None
            axioms.append(Axiom(formulas[fname], state,
                                _check_unit(axd.get("lower", 0.0),
                                            f"axiom {i} lower"),
                                _check_unit(axd.get("upper", 1.0),
                                            f"axiom {i} upper")))

        t = self.train
        train_cfg = TrainConfig(
            beta=t.get("beta", 1.0), lambda_t=t.get("lambda_t", 0.0),
            lambda_4=t.get("lambda_4", 0.0), lambda_s=t.get("lambda_s", 0.0),
            lambda_sparsity=t.get("lambda_sparsity", 0.0),
            lr=t.get("lr", 0.01), epochs=t.get("epochs", 1),
            seed=t.get("seed", 0), tau=t.get("tau", 0.1),
            inference=self._inference_cfg())
        return BuiltModel(model, formulas, axioms, train_cfg,
                          self._inference_cfg())

    def _inference_cfg(self) -> InferenceConfig:
        d = self.inference
        return InferenceConfig(
            max_iterations=d.get("max_iterations", 100),
            epsilon=d.get("epsilon", 1e-6),
            access_threshold=d.get("access_threshold", 0.5))

    @staticmethod
    def _check_square(matrix, n: int, what: str):
        if not matrix or len(matrix) != n or any(len(r) != n for r in matrix):
            raise InputError(f"{what}: matrix must be {n}x{n}")

    def _check_refs(self, fname: str, f: Formula, atoms, registry):
        """Every atom and relation named by the formula must resolve."""
        if isinstance(f, Atom):
            if f.name not in atoms.data:
                raise InputError(f"formula {fname!r} references unknown "
                                 f"proposition {f.name!r}")
        elif isinstance(f, Not):
            self._check_refs(fname, f.child, atoms, registry)
        elif isinstance(f, (And, Or, Implies, ProdImplies)):
            self._check_refs(fname, f.left, atoms, registry)
            self._check_refs(fname, f.right, atoms, registry)
        elif isinstance(f, (Box, Diamond)):
            if f.relation not in registry.relations:
                raise InputError(f"formula {fname!r} references unknown "
                                 f"relation {f.relation!r}")
            self._check_refs(fname, f.child, atoms, registry)


class BuiltModel:
    """Runtime bundle: semantic model, named formulas, axioms, configs."""

    def __init__(self, model, formulas, axioms, train_cfg, inference_cfg):
        self.model = model
        self.formulas = formulas
        self.axioms = axioms
        self.train_cfg = train_cfg
        self.inference_cfg = inference_cfg


def dumps_model(spec: ModelSpec) -> str:
    return json.dumps(spec.to_dict(), indent=2, sort_keys=True) + "\n"


def save_model(spec: ModelSpec, path: str) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(dumps_model(spec))


def load_model(path: str) -> ModelSpec:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            raw = json.load(fh)
    except OSError as e:
        raise InputError(f"cannot read {path}: {e}") from None
    except json.JSONDecodeError as e:
        raise InputError(f"{path} is not valid JSON: {e}") from None
    spec = ModelSpec.from_dict(raw)
    spec.build()  # validate all cross-references now, not at first use
    return spec
