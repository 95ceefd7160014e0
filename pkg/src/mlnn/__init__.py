"""Differentiable modal-logic reasoning over learnable possible-world structure.

Truth values are [lower, upper] bounds propagated through soft logical
operators; necessity and possibility aggregate over an accessibility matrix
that can itself be learned by minimizing logical contradiction.
"""

from .autodiff import AdamState, Node, Parameter, Tape
from .inference import (Axiom, AxiomSet, BoundStore, InferenceConfig,
                        contradiction_loss, downward_pass, run_to_fixpoint,
                        upward_pass)
from .kripke import (BoundsTensor, FixedRelation, LogitRelation,
                     MetricRelation, Model, RelationRegistry, StateSpace,
                     reg_4, reg_S, reg_T, topk_mask)
from .learn import TrainConfig, TrainHistory, structure_mse, total_loss, train
from .logic import (And, Atom, Box, Diamond, F, Formula, G, Implies, K, Not,
                    Or, ProdImplies, SoftConfig, box_bounds, conv_pool_tau,
                    diamond_bounds, eval_connective, eval_upward, softmax_tau,
                    softmin_tau)

__version__ = "0.1.0"

__all__ = [
    "AdamState", "Node", "Parameter", "Tape",
    "Axiom", "AxiomSet", "BoundStore", "InferenceConfig",
    "contradiction_loss", "downward_pass", "run_to_fixpoint", "upward_pass",
    "BoundsTensor", "FixedRelation", "LogitRelation", "MetricRelation",
    "Model", "RelationRegistry", "StateSpace",
    "reg_4", "reg_S", "reg_T", "topk_mask",
    "TrainConfig", "TrainHistory", "structure_mse", "total_loss", "train",
    "And", "Atom", "Box", "Diamond", "F", "Formula", "G", "Implies", "K",
    "Not", "Or", "ProdImplies", "SoftConfig", "box_bounds", "conv_pool_tau",
    "diamond_bounds", "eval_connective", "eval_upward", "softmax_tau",
    "softmin_tau",
]
