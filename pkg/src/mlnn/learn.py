"""Gradient training of accessibility structure against logical axioms.

Each epoch: refresh any top-k masks, materialize relations onto a fresh
tape, build total loss = task + beta * contradiction + structural
regularizers + L1 sparsity, backprop, one Adam step. Masked cells are
constants, so they get no gradient and the optimizer never touches them.
"""

from __future__ import annotations

import math

from . import autodiff as ad
from . import kripke
from .autodiff import AdamState, Tape, val
from .inference import InferenceConfig, contradiction_loss
from .logic import SoftConfig


class TrainConfig:
    def __init__(self, beta: float = 1.0, lambda_t: float = 0.0,
                 lambda_4: float = 0.0, lambda_s: float = 0.0,
                 lambda_sparsity: float = 0.0, lr: float = 0.01,
                 epochs: int = 1, seed: int = 0, tau: float = 0.1,
                 inference: InferenceConfig | None = None):
        if beta < 0 or min(lambda_t, lambda_4, lambda_s, lambda_sparsity) < 0:
            raise ValueError("loss weights must be non-negative")
        if epochs < 1:
            raise ValueError("epochs must be >= 1")
        self.beta = float(beta)
        self.lambda_t = float(lambda_t)
        self.lambda_4 = float(lambda_4)
        self.lambda_s = float(lambda_s)
        self.lambda_sparsity = float(lambda_sparsity)
        self.lr = float(lr)
        self.epochs = int(epochs)
        self.seed = int(seed)
        self.tau = float(tau)
        self.inference = inference or InferenceConfig()


class TrainHistory:
    """Per-epoch loss components plus snapshots of watched matrix entries."""

    def __init__(self, watched_names: list[str]):
        self.total: list[float] = []
        self.task: list[float] = []
        self.contradiction: list[float] = []
        self.reg_t: list[float] = []
        self.reg_4: list[float] = []
        self.reg_s: list[float] = []
        self.sparsity: list[float] = []
        self.watched_names = watched_names
        self.watched: dict[str, list[float]] = {n: [] for n in watched_names}

    def __len__(self) -> int:
        return len(self.total)


def _rel_weight(rel, field: str, default: float) -> float:
    # per-relation override wins over the config-wide weight
    return float(getattr(rel, "reg", {}).get(field, default))


def _loss_components(model, axioms, task_terms, cfg: TrainConfig,
                     rels: dict | None = None):
    """Total loss node plus float component values for the history."""
    if rels is None:
        rels = model.relations.materialize_all(None)
    soft = SoftConfig(cfg.tau)

    task = 0.0
    for t in task_terms:
        task = ad.add(task, t)

    contra = contradiction_loss(model, axioms, soft, rels)
    total = ad.add(task, ad.scale(contra, cfg.beta))

    comps = {"task": val(task), "contradiction": val(contra),
             "reg_t": 0.0, "reg_4": 0.0, "reg_s": 0.0, "sparsity": 0.0}
    for name, rel in model.relations.relations.items():
        if not rel.parameters():
            continue
        A = rels[name]
        lt = _rel_weight(rel, "lambda_t", cfg.lambda_t)
        l4 = _rel_weight(rel, "lambda_4", cfg.lambda_4)
        ls = _rel_weight(rel, "lambda_s", cfg.lambda_s)
        lsp = _rel_weight(rel, "lambda_sparsity", cfg.lambda_sparsity)
        if lt > 0.0:
            r = kripke.reg_T(A)
            comps["reg_t"] += val(r)
            total = ad.add(total, ad.scale(r, lt))
        if l4 > 0.0:
            r = kripke.reg_4(A)
            comps["reg_4"] += val(r)
            total = ad.add(total, ad.scale(r, l4))
        if ls > 0.0:
            r = kripke.reg_S(A)
            comps["reg_s"] += val(r)
            total = ad.add(total, ad.scale(r, ls))
        if lsp > 0.0:
            s1 = 0.0
            for row in A:
                for a in row:  # entries are sigmoids or exact zeros: already >= 0
                    s1 = ad.add(s1, a)
            comps["sparsity"] += val(s1)
            total = ad.add(total, ad.scale(s1, lsp))
    comps["total"] = val(total)
    return total, comps


def total_loss(model, axioms, task_terms, cfg: TrainConfig,
               rels: dict | None = None):
    """task + beta * contradiction + structural regularizers + L1 sparsity."""
    node, _ = _loss_components(model, axioms, task_terms, cfg, rels)
    return node


def default_watched(model) -> list[tuple[str, int, int]]:
    """All learnable matrix cells, when the state space is small enough."""
    out = []
    if model.states.n > 32:
        return out
    for name, rel in model.relations.relations.items():
        if rel.parameters():
            for i in range(rel.n):
                for j in range(rel.n):
                    out.append((name, i, j))
    return out


def train(model, axioms, cfg: TrainConfig, task_fn=None,
          watched: list[tuple[str, int, int]] | None = None):
    """Optimize relation parameters; returns (model, TrainHistory).

    task_fn, when given, is called per epoch as task_fn(model, rels) and
    returns extra differentiable penalty terms. Deterministic for a fixed
    model init and config. A non-finite loss aborts immediately with a
    diagnostic rather than training on garbage.
    """
    if watched is None:
        watched = default_watched(model)
    names = [f"{r}[{i},{j}]" for r, i, j in watched]
    history = TrainHistory(names)
    adam = AdamState(lr=cfg.lr)

    for epoch in range(cfg.epochs):
        model.relations.refresh_masks()
        tape = Tape()
        rels = model.relations.materialize_all(tape)
        task_terms = task_fn(model, rels) if task_fn else []
        total, comps = _loss_components(model, axioms, task_terms, cfg, rels)

        if not math.isfinite(comps["total"]):
            raise RuntimeError(
                f"non-finite loss at epoch {epoch}: total={comps['total']}, "
                f"task={comps['task']}, contradiction={comps['contradiction']}")

        if isinstance(total, ad.Node):
            tape.backward(total)
            adam.step(tape.gradients())

        history.total.append(comps["total"])
        history.task.append(comps["task"])
        history.contradiction.append(comps["contradiction"])
        history.reg_t.append(comps["reg_t"])
        history.reg_4.append(comps["reg_4"])
        history.reg_s.append(comps["reg_s"])
        history.sparsity.append(comps["sparsity"])
        if watched:
            mats = {name: model.relations.get(name).materialize(None)
                    for name in {w[0] for w in watched}}
            for (rname, i, j), col in zip(watched, names):
                history.watched[col].append(ad.val(mats[rname][i][j]))

    return model, history


def structure_mse(A, target) -> float:
    """Mean squared error between a materialized matrix and a target matrix."""
    n = len(A)
    total = 0.0
    for i in range(n):
        for j in range(n):
            d = ad.val(A[i][j]) - ad.val(target[i][j])
            total += d * d
    return total / (n * n)
