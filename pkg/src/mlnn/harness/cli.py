"""Command-line front end.

  mlnn infer <model.json> [--out DIR]        fixed-point inference, print bounds
  mlnn train <model.json> [--out DIR] [--seed N]
  mlnn scenario <royal|toy|ring> [--n N --k K --tau T --fixed-r] [--out DIR]
  mlnn check <model.json>                    validate only

Exit codes: 0 success, 1 logical non-convergence, 2 input errors.
"""

from __future__ import annotations

import argparse
import sys

from .. import learn
from ..autodiff import val
from ..inference import run_to_fixpoint
from ..logic import SoftConfig, eval_upward
from . import scenarios
from .model_io import InputError, load_model, save_model
from .oracle import crisp_check, oracle_from_model
from .report import fmt, save_results


def _print_bounds(built, fixpoint=None):
    labels = built.model.states.labels
    soft = SoftConfig(built.train_cfg.tau)
    rels = built.model.relations.materialize_all(None)
    memo: dict = {}
    print(f"{'formula':<28} {'state':<12} {'lower':>10} {'upper':>10}")
    for name in sorted(built.formulas):
        f = built.formulas[name]
        rows = (fixpoint.bounds(f) if fixpoint is not None
                else eval_upward(f, built.model, soft, rels, memo))
        for s, (lo, hi) in enumerate(rows):
            print(f"{name:<28} {labels[s]:<12} {fmt(val(lo)):>10} {fmt(val(hi)):>10}")


def cmd_infer(args) -> int:
    built = load_model(args.model).build()
    result = run_to_fixpoint(built.model, list(built.formulas.values()),
                             built.inference_cfg,
                             SoftConfig(built.train_cfg.tau), built.axioms)
    _print_bounds(built, result)
    print(f"\nconverged: {result.converged} after {result.iterations} iterations"
          f" (last delta {fmt(result.deltas[-1]) if result.deltas else 'n/a'})")
    print(f"total contradiction: {fmt(result.contradiction())}")
    if args.out:
        save_results(built, args.out, fixpoint=result)
        print(f"results written to {args.out}")
    return 0 if result.converged else 1


def cmd_train(args) -> int:
    spec = load_model(args.model)
    if args.seed is not None:
        spec.train = dict(spec.train, seed=args.seed)
    built = spec.build()
    model, history = learn.train(built.model, built.axioms, built.train_cfg)
    print(f"trained {built.train_cfg.epochs} epochs: "
          f"total {fmt(history.total[-1])}, "
          f"contradiction {fmt(history.contradiction[-1])}")
    _print_bounds(built)
    if args.out:
        save_results(built, args.out, history=history)
        print(f"results written to {args.out}")
    return 0


def _scenario_royal(args) -> int:
    spec, expected = scenarios.scenario_royal_succession()
    built = spec.build()
    result = run_to_fixpoint(built.model, list(built.formulas.values()),
                             built.inference_cfg,
                             SoftConfig(built.train_cfg.tau), built.axioms)
    oracle = oracle_from_model(_facts_only(built))
    print("royal succession verdicts (engine bounds vs crisp oracle):")
    for name, verdict in sorted(expected.items()):
        lo, hi = result.bounds(built.formulas[name])[0]
        alive = ("necessarily_alive_william" if "william" in name
                 else "necessarily_alive_harry")
        crisp = crisp_check(oracle, built.formulas[alive], 0)
        status = "heir" if verdict else "cannot be heir"
        print(f"  {name}: bounds [{fmt(lo)}, {fmt(hi)}] -> expected {status}, "
              f"oracle necessarily-alive={crisp}")
    print(f"converged: {result.converged} after {result.iterations} iterations")
    if args.out:
        save_results(built, args.out, fixpoint=result,
                     extra={"expected": expected})
        save_model(spec, f"{args.out}/model.json")
        print(f"results written to {args.out}")
    return 0 if result.converged else 1


def _facts_only(built):
    """Royal model restricted to its crisp facts (heir atoms are unknowns)."""
    import copy
    m = copy.copy(built.model)
    m.atoms = copy.deepcopy(built.model.atoms)
    for prop in list(m.atoms.data):
        if prop.startswith("isHeir"):
            del m.atoms.data[prop]
    return m


def _scenario_toy(args) -> int:
    spec = scenarios.scenario_epistemic_toy()
    built = spec.build()
    model, history = learn.train(built.model, built.axioms, built.train_cfg)
    A = model.relations.get("epistemic").materialize(None)
    print("toy: learned epistemic accessibility, row s0:")
    print("  " + " ".join(fmt(val(x)) for x in A[0]))
    print(f"final contradiction: {fmt(history.contradiction[-1])}")
    _print_bounds(built)
    if args.out:
        save_results(built, args.out, history=history)
        save_model(spec, f"{args.out}/model.json")
        print(f"results written to {args.out}")
    return 0


def _scenario_ring(args) -> int:
    spec, truth = scenarios.scenario_ring(n=args.n, k=args.k, tau=args.tau,
                                          fixed_r=args.fixed_r, seed=args.seed)
    built = spec.build()
    history = None
    if built.model.parameters():
        model, history = learn.train(built.model, built.axioms, built.train_cfg)
        contra = history.contradiction[-1]
    else:
        from ..inference import contradiction_loss
        contra = val(contradiction_loss(built.model, built.axioms,
                                        SoftConfig(built.train_cfg.tau)))
    A = built.model.relations.get("trust").materialize(None)
    mse = learn.structure_mse(A, truth)
    arm = "fixed-R" if args.fixed_r else f"learnable (k={args.k}, tau={args.tau})"
    print(f"ring n={args.n}, {arm}: structure MSE {fmt(mse)}, "
          f"contradiction {fmt(contra)}")
    if args.out:
        save_results(built, args.out, history=history,
                     extra={"structure_mse": mse, "contradiction": contra,
                            "arm": arm})
        save_model(spec, f"{args.out}/model.json")
        print(f"results written to {args.out}")
    return 0


def cmd_scenario(args) -> int:
    if args.name == "royal":
        return _scenario_royal(args)
    if args.name == "toy":
        return _scenario_toy(args)
    return _scenario_ring(args)


def cmd_check(args) -> int:
    spec = load_model(args.model)
    built = spec.build()
    n_params = len(built.model.parameters())
    print(f"{args.model}: OK")
    print(f"  states: {built.model.states.n}, "
          f"relations: {len(spec.relations)}, "
          f"propositions: {len(spec.propositions)}, "
          f"formulas: {len(spec.formulas)}, "
          f"axioms: {len(spec.axioms)}, "
          f"parameters: {n_params}")
    return 0


def main(argv=None) -> int:
    p = argparse.ArgumentParser(
        prog="mlnn",
        description="Differentiable modal-logic reasoning over learned "
                    "accessibility structure.")
    sub = p.add_subparsers(dest="command", required=True)

    pi = sub.add_parser("infer", help="fixed-point inference on a model file")
    pi.add_argument("model")
    pi.add_argument("--out", help="directory for the results bundle")
    pi.set_defaults(fn=cmd_infer)

    pt = sub.add_parser("train", help="train a model file's parameters")
    pt.add_argument("model")
    pt.add_argument("--out")
    pt.add_argument("--seed", type=int, default=None)
    pt.set_defaults(fn=cmd_train)

    ps = sub.add_parser("scenario", help="run a built-in scenario")
    ps.add_argument("name", choices=["royal", "toy", "ring"])
    ps.add_argument("--n", type=int, default=20)
    ps.add_argument("--k", type=int, default=8)
    ps.add_argument("--tau", type=float, default=0.1)
    ps.add_argument("--fixed-r", action="store_true", dest="fixed_r")
    ps.add_argument("--seed", type=int, default=0)
    ps.add_argument("--out")
    ps.set_defaults(fn=cmd_scenario)

    pc = sub.add_parser("check", help="validate a model file")
    pc.add_argument("model")
    pc.set_defaults(fn=cmd_check)

    args = p.parse_args(argv)
    try:
        return args.fn(args)
    except InputError as e:
        print(f"error: {e}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
