"""Command-line entry point: training, spectra, convergence reports, datasets."""

from __future__ import annotations

import argparse
import dataclasses
import json
import os
import sys

import numpy as np

from . import data as data_mod
from .errors import TagcnError
from .filters import apply_poly_filter, make_cyclic_graph, spectral_decompose, \
    spectral_filter_response
from .graph import ShiftKind, build_graph, normalize
from .limits import MonomialStackSpec, convergence_report
from .nn import load_model, save_model, accuracy, masked_softmax_xent
from .trainer import TrainConfig, aggregate_runs, train_model, train_multi

REFERENCE_DEFAULTS = TrainConfig()


def _dataset_path(arg: str) -> str:
    if os.path.exists(arg):
        return arg
    root = os.environ.get("TAGCN_DATA_DIR")
    if root:
        candidate = os.path.join(root, arg)
        if os.path.exists(candidate):
            return candidate
        candidate = os.path.join(root, f"{arg}.tagcn")
        if os.path.exists(candidate):
            return candidate
    raise TagcnError(f"dataset {arg!r} not found (set TAGCN_DATA_DIR?)")


def _emit(obj, out_path):
    text = json.dumps(obj, indent=2, sort_keys=True) + "\n"
    if out_path:
        with open(out_path, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _train_config(args) -> TrainConfig:
    return TrainConfig(
        learning_rate=args.lr,
        max_epochs=args.epochs,
        early_stop_window=args.window,
        dropout_rate=args.dropout,
        weight_decay=args.weight_decay,
        hidden_units=args.hidden,
        filter_size=args.filter_size,
        seed=args.seed,
    )


def _add_train_flags(p, require_seed: bool):
    p.add_argument("--filter-size", type=int, default=REFERENCE_DEFAULTS.filter_size)
    p.add_argument("--hidden", type=int, default=REFERENCE_DEFAULTS.hidden_units)
    p.add_argument("--lr", type=float, default=REFERENCE_DEFAULTS.learning_rate)
    p.add_argument("--dropout", type=float, default=REFERENCE_DEFAULTS.dropout_rate)
    p.add_argument("--weight-decay", type=float, default=REFERENCE_DEFAULTS.weight_decay)
    p.add_argument("--epochs", type=int, default=REFERENCE_DEFAULTS.max_epochs)
    p.add_argument("--window", type=int, default=REFERENCE_DEFAULTS.early_stop_window)
    p.add_argument("--seed", type=int, required=require_seed,
                   default=None if require_seed else 0)


def _print_run_header(cfg: TrainConfig):
    # unstated-by-default knobs are printed so every run is auditable
    sys.stderr.write(
        "config: " + json.dumps(dataclasses.asdict(cfg), sort_keys=True) + "\n"
    )


def cmd_train(args) -> int:
    dataset = data_mod.load_dataset(_dataset_path(args.dataset))
    cfg = _train_config(args)
    _print_run_header(cfg)
    model, metrics = train_model(dataset, cfg)
    if args.json:
        for e in range(metrics.epochs_run):
            sys.stdout.write(json.dumps({
                "epoch": e + 1,
                "train_loss": metrics.train_losses[e],
                "val_loss": metrics.val_losses[e],
                "val_accuracy": metrics.val_accuracies[e],
            }) + "\n")
    if args.checkpoint:
        save_model(model, args.checkpoint)
    _emit({
        "test_accuracy": metrics.test_accuracy,
        "epochs_run": metrics.epochs_run,
        "wall_time": metrics.wall_time,
        "seed": cfg.seed,
    }, args.out)
    return 0


def cmd_eval(args) -> int:
    dataset = data_mod.load_dataset(_dataset_path(args.dataset))
    from .nn import LayerKind

    s = normalize(dataset.graph, ShiftKind.SYM_NORMALIZED)
    shift_by_kind = {
        LayerKind.TAGCN: s,
        LayerKind.GCN: normalize(dataset.graph, ShiftKind.GCN_RENORMALIZED),
        LayerKind.CHEB: None,
        LayerKind.DCNN: normalize(dataset.graph, ShiftKind.RANDOM_WALK),
    }
    model = load_model(args.checkpoint, shift_by_kind)
    logits = model.forward(dataset.features, mode="eval")
    loss, _ = masked_softmax_xent(logits, dataset.labels, dataset.test_idx)
    _emit({
        "test_accuracy": accuracy(logits, dataset.labels, dataset.test_idx),
        "test_loss": loss,
    }, args.out)
    return 0


def _complex_pairs(values) -> list:
    return [[float(np.real(v)), float(np.imag(v))] for v in values]


def cmd_spectrum(args) -> int:
    if args.cyclic:
        graph = make_cyclic_graph(args.cyclic)
        s = normalize(graph, ShiftKind.RAW)
    else:
        dataset = data_mod.load_dataset(_dataset_path(args.dataset))
        s = normalize(dataset.graph, ShiftKind.SYM_NORMALIZED)
    decomp = spectral_decompose(s)
    out = {"eigenvalues": _complex_pairs(decomp.eigenvalues)}
    if args.coeffs:
        coeffs = np.array([float(v) for v in args.coeffs.split(",")])
        out["response"] = _complex_pairs(spectral_filter_response(coeffs, decomp))
    _emit(out, args.out)
    return 0


def random_connected_graph(num_nodes: int, seed: int, extra_edges: int | None = None):
    """Undirected connected non-bipartite test graph: ring + triangle + chords."""
    rng = np.random.default_rng(seed)
    edges = {(i, (i + 1) % num_nodes) for i in range(num_nodes)}
    edges.add((0, 2))  # odd cycle keeps the spectrum gap away from -1
    if extra_edges is None:
        extra_edges = num_nodes
    while len(edges) < num_nodes + 1 + extra_edges:
        i, j = rng.integers(0, num_nodes, 2)
        if i != j:
            edges.add((min(i, j), max(i, j)))
    canon = {(min(i, j), max(i, j)) for i, j in edges}
    return build_graph([(int(i), int(j), 1.0) for i, j in sorted(canon)],
                       num_nodes, directed=False)


def cmd_theorem1(args) -> int:
    graph = random_connected_graph(args.nodes, args.seed)
    s = normalize(graph, ShiftKind.SYM_NORMALIZED)
    rng = np.random.default_rng(args.seed)
    x = rng.random(args.nodes) + 0.1
    spec = MonomialStackSpec(gains=np.ones(args.layers),
                             powers=np.ones(args.layers, dtype=np.int64))
    report = convergence_report(spec, s, x)
    _emit({
        "num_nodes": args.nodes,
        "depth": args.layers,
        "cosine_to_v1_per_layer": report["cosine_to_v1_per_layer"].tolist(),
        "final_cosine": float(report["cosine_to_v1_per_layer"][-1]),
        "final_residual": report["final_residual"],
    }, args.out)
    return 0


def cmd_gen_sbm(args) -> int:
    block_sizes = [int(v) for v in args.blocks.split(",")]
    dataset = data_mod.generate_sbm(
        block_sizes, args.p_in, args.p_out, args.feature_dim,
        signal=args.signal, seed=args.seed,
    )
    data_mod.write_dataset(dataset, args.out)
    sys.stderr.write(f"wrote {args.out}\n")
    return 0


def cmd_validate(args) -> int:
    dataset = data_mod.load_dataset(_dataset_path(args.dataset))
    _emit(data_mod.validate_splits(dataset), args.out)
    return 0


def cmd_reproduce(args) -> int:
    dataset = data_mod.load_dataset(_dataset_path(args.dataset))
    cfg = _train_config(args)
    _print_run_header(cfg)
    runs = train_multi(dataset, cfg, num_runs=args.runs)
    summary = aggregate_runs(runs)
    summary["dataset"] = args.dataset
    summary["per_run_accuracy"] = [m.test_accuracy for m in runs]
    _emit(summary, args.out)
    print(f"{args.dataset}: {100 * summary['mean_accuracy']:.1f}"
          f"±{100 * summary['std_accuracy']:.1f}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="tagcn",
        description="Polynomial graph filters and semi-supervised node classification",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("train", help="train a single seeded model")
    p.add_argument("--dataset", required=True)
    _add_train_flags(p, require_seed=True)
    p.add_argument("--out")
    p.add_argument("--checkpoint")
    p.add_argument("--json", action="store_true",
                   help="stream per-epoch metrics as JSON lines on stdout")
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("eval", help="evaluate a checkpoint on the test split")
    p.add_argument("--dataset", required=True)
    p.add_argument("--checkpoint", required=True)
    p.add_argument("--out")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("spectrum", help="eigenvalues and filter spectrum as JSON")
    p.add_argument("--dataset")
    p.add_argument("--cyclic", type=int,
                   help="use a directed N-node cycle instead of a dataset graph")
    p.add_argument("--coeffs", help="comma-separated filter coefficients")
    p.add_argument("--out")
    p.set_defaults(func=cmd_spectrum)

    p = sub.add_parser("theorem1",
                       help="deep monomial-stack convergence report as JSON")
    p.add_argument("--nodes", type=int, default=12)
    p.add_argument("--layers", type=int, default=200)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--out")
    p.set_defaults(func=cmd_theorem1)

    p = sub.add_parser("gen-sbm", help="write a synthetic planted-partition dataset")
    p.add_argument("--blocks", required=True, help="comma-separated block sizes")
    p.add_argument("--p-in", type=float, required=True)
    p.add_argument("--p-out", type=float, required=True)
    p.add_argument("--feature-dim", type=int, default=16)
    p.add_argument("--signal", choices=["direct", "two_hop"], default="direct")
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_gen_sbm)

    p = sub.add_parser("validate-data", help="check dataset invariants, print stats")
    p.add_argument("--dataset", required=True)
    p.add_argument("--out")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("reproduce",
                       help="multi-seed protocol with reference hyperparameters")
    p.add_argument("dataset")
    _add_train_flags(p, require_seed=True)
    p.add_argument("--runs", type=int, default=10)
    p.add_argument("--out")
    p.set_defaults(func=cmd_reproduce)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command == "spectrum" and not (args.cyclic or args.dataset):
        parser.error("spectrum needs --dataset or --cyclic")
    try:
        return args.func(args)
    except TagcnError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return 1
    except FileNotFoundError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return 1


if __name__ == "__main__":
    sys.exit(main())
