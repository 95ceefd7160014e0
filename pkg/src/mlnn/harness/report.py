"""Result export: delimited tables, a machine-readable summary, and figures.

save_results writes into a directory:
  bounds.csv          formula, state, lower, upper
  accessibility.csv   one row per (relation, from-state), one column per to-state
  history.csv         per-epoch loss components and watched matrix entries
  summary.json        schema "mlnn-result/1", convergence and headline metrics
  loss_curves.png     loss components (and watched trajectories when few)
  accessibility_<rel>.png   heatmap per relation

CSV floats use 6 significant digits; the JSON summary keeps full precision.
"""

from __future__ import annotations

import csv
import json
import os

from ..autodiff import val
from ..logic import SoftConfig, eval_upward


def fmt(x: float) -> str:
    return f"{float(x):.6g}"


def _write_bounds_csv(path: str, built, fixpoint=None):
    soft = SoftConfig(built.train_cfg.tau)
    labels = built.model.states.labels
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["formula", "state", "lower", "upper"])
        memo: dict = {}
        rels = built.model.relations.materialize_all(None)
        for name in sorted(built.formulas):
            f = built.formulas[name]
            if fixpoint is not None:
                rows = fixpoint.bounds(f)
            else:
                rows = eval_upward(f, built.model, soft, rels, memo)
            for s, (lo, hi) in enumerate(rows):
                w.writerow([name, labels[s], fmt(val(lo)), fmt(val(hi))])


def _write_accessibility_csv(path: str, built):
    labels = built.model.states.labels
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["relation", "from"] + labels)
        for name in sorted(built.model.relations.relations):
            M = built.model.relations.get(name).materialize(None)
            for i, lab in enumerate(labels):
                w.writerow([name, lab] + [fmt(val(x)) for x in M[i]])


def _write_history_csv(path: str, history):
    cols = ["epoch", "total", "task", "contradiction",
            "reg_t", "reg_4", "reg_s", "sparsity"] + history.watched_names
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(cols)
        for e in range(len(history)):
            row = [e, fmt(history.total[e]), fmt(history.task[e]),
                   fmt(history.contradiction[e]), fmt(history.reg_t[e]),
                   fmt(history.reg_4[e]), fmt(history.reg_s[e]),
                   fmt(history.sparsity[e])]
            row += [fmt(history.watched[nm][e]) for nm in history.watched_names]
            w.writerow(row)


def _plot_losses(path: str, history):
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    watched = history.watched_names
    n_ax = 2 if 0 < len(watched) <= 64 else 1
    fig, axes = plt.subplots(1, n_ax, figsize=(6 * n_ax, 4))
    ax0 = axes[0] if n_ax == 2 else axes
    epochs = range(len(history))
    ax0.plot(epochs, history.total, label="total")
    ax0.plot(epochs, history.contradiction, label="contradiction")
    if any(history.task):
        ax0.plot(epochs, history.task, label="task")
    ax0.set_xlabel("epoch")
    ax0.set_ylabel("loss")
    ax0.legend()
    ax0.set_title("training loss")
    if n_ax == 2:
        for nm in watched:
            axes[1].plot(epochs, history.watched[nm], alpha=0.6, linewidth=1)
        axes[1].set_xlabel("epoch")
        axes[1].set_ylabel("accessibility value")
        axes[1].set_ylim(-0.05, 1.05)
        axes[1].set_title("watched entries")
    fig.tight_layout()
    fig.savefig(path, dpi=110)
    plt.close(fig)


def _plot_heatmap(path: str, name: str, M, labels):
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    vals = [[val(x) for x in row] for row in M]
    fig, ax = plt.subplots(figsize=(5, 4.2))
    im = ax.imshow(vals, vmin=0.0, vmax=1.0, cmap="viridis")
    ax.set_title(f"accessibility: {name}")
    if len(labels) <= 12:
        ax.set_xticks(range(len(labels)), labels, rotation=45, ha="right")
        ax.set_yticks(range(len(labels)), labels)
    fig.colorbar(im, ax=ax, shrink=0.85)
    fig.tight_layout()
    fig.savefig(path, dpi=110)
    plt.close(fig)


def save_results(built, outdir: str, history=None, fixpoint=None,
                 extra: dict | None = None) -> dict:
    """Write the full results bundle; returns the summary dict."""
    os.makedirs(outdir, exist_ok=True)
    _write_bounds_csv(os.path.join(outdir, "bounds.csv"), built, fixpoint)
    _write_accessibility_csv(os.path.join(outdir, "accessibility.csv"), built)
    if history is not None and len(history):
        _write_history_csv(os.path.join(outdir, "history.csv"), history)
        _plot_losses(os.path.join(outdir, "loss_curves.png"), history)
    for name in sorted(built.model.relations.relations):
        M = built.model.relations.get(name).materialize(None)
        _plot_heatmap(os.path.join(outdir, f"accessibility_{name}.png"),
                      name, M, built.model.states.labels)

    summary: dict = {"schema": "mlnn-result/1",
                     "states": built.model.states.labels,
                     "formulas": sorted(built.formulas)}
    if fixpoint is not None:
        summary["converged"] = fixpoint.converged
        summary["iterations"] = fixpoint.iterations
        summary["contradiction"] = fixpoint.contradiction()
    if history is not None and len(history):
        summary["epochs"] = len(history)
        summary["final_total_loss"] = history.total[-1]
        summary["final_contradiction"] = history.contradiction[-1]
    if extra:
        summary.update(extra)
    with open(os.path.join(outdir, "summary.json"), "w", encoding="utf-8") as fh:
        json.dump(summary, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return summary
