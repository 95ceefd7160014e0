"""Scenario builders, model-file I/O, crisp oracle, result export, CLI."""

from .model_io import (BuiltModel, InputError, ModelSpec, format_formula,
                       load_model, parse_formula, save_model)
from .oracle import CrispOracle, crisp_check, oracle_from_model
from .report import save_results
from .scenarios import (ring_ground_truth, scenario_epistemic_toy,
                        scenario_ring, scenario_royal_succession)

__all__ = [
    "BuiltModel", "InputError", "ModelSpec", "format_formula", "load_model",
    "parse_formula", "save_model",
    "CrispOracle", "crisp_check", "oracle_from_model",
    "save_results",
    "ring_ground_truth", "scenario_epistemic_toy", "scenario_ring",
    "scenario_royal_succession",
]
