"""Command-line front end.

    gcnmlp {train,eval,ablate,analyze,synth,attack,sweep} --config run.json [--seed N] [--jobs N] [--out DIR]

Exit codes: 0 success, 2 config error, 3 data error, 4 numerical failure.
"""
from __future__ import annotations

import argparse
import csv
import json
import logging
import sys
from dataclasses import replace
from pathlib import Path

from .config import RunConfig, load_run_config
from .encoders import save_checkpoint
from .errors import ConfigError, DataError, NumericalError
from .evaluation import ablation_run, evaluate_multiseed, run_seed
from .graph import normalized_adjacency, save_dataset
from .noise import noise_report
from .robustness import robustness_sweep, write_robustness_csv
from .synth import edge_homophily
from .training import train

log = logging.getLogger("gcnmlp")

EXIT_OK, EXIT_CONFIG, EXIT_DATA, EXIT_NUMERIC = 0, 2, 3, 4


def _write_json(path: Path, obj) -> None:
    path.write_text(json.dumps(obj, indent=2) + "\n", encoding="utf-8")


def cmd_train(cfg: RunConfig, args) -> None:
    data = cfg.load_dataset()
    gcn, mlp, trace = train(data, cfg.train, trace_path=cfg.out / "loss.csv")
    save_checkpoint(cfg.out / "params.hgcl", [gcn, mlp])
    _write_json(cfg.out / "train.json", {
        "variant": cfg.train.variant, "seed": cfg.train.seed, "epochs": cfg.train.epochs,
        "initial_loss": trace.losses[0], "final_loss": trace.losses[-1],
        "final_embedding_variance": trace.embedding_variance[-1],
    })


def cmd_eval(cfg: RunConfig, args) -> None:
    data = cfg.load_dataset()
    report = evaluate_multiseed(data, cfg.train, cfg.probe, cfg.seeds, cfg.beta_grid, args.jobs)
    report.write_json(cfg.out / "eval_report.json")
    print(f"{report.variant}: {100 * report.mean:.2f} +- {100 * report.std:.2f}")


def cmd_ablate(cfg: RunConfig, args) -> None:
    data = cfg.load_dataset()
    with open(cfg.out / "ablation.csv", "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["variant", "mean_acc", "std_acc"])
        for variant in cfg.ablate_variants:
            report = ablation_run(data, variant, cfg.train, cfg.probe, cfg.seeds, cfg.beta_grid, args.jobs)
            report.write_json(cfg.out / f"ablation_{variant}.json")
            w.writerow([variant, repr(report.mean), repr(report.std)])
            print(f"{variant}: {100 * report.mean:.2f} +- {100 * report.std:.2f}")


def cmd_analyze(cfg: RunConfig, args) -> None:
    a = cfg.analysis
    data = cfg.load_dataset()
    if a.spectral and data.num_nodes > a.cap:
        raise ConfigError(f"spectral analysis is capped at N <= {a.cap} (eigensolver cap); "
                          f"dataset has N = {data.num_nodes}. Set analysis.spectral=false or raise analysis.cap.")
    adj = normalized_adjacency(data.graph, with_self_loops=a.self_loops)
    hom = edge_homophily(data.graph, data.labels) if data.graph.num_edges else None
    rep = noise_report(data.features, data.labels, adj, a.k_max, a.bins, a.spectral, a.cap, hom)
    rep.write(cfg.out, a.include_matrices)
    print("E_k:", " ".join(f"{e:.6g}" for e in rep.E))


def cmd_synth(cfg: RunConfig, args) -> None:
    if cfg.synthetic is None:
        raise ConfigError("synth needs dataset.synthetic in the config")
    data = cfg.load_dataset()
    save_dataset(data, cfg.out)
    _write_json(cfg.out / "summary.json", {
        "num_nodes": data.num_nodes, "num_edges": data.graph.num_edges, "num_classes": data.num_classes,
        "feature_dim": int(data.features.shape[1]),
        "edge_homophily": edge_homophily(data.graph, data.labels) if data.graph.num_edges else None,
    })


def cmd_attack(cfg: RunConfig, args) -> None:
    data = cfg.load_dataset()
    results, cfgs = {}, {}
    for variant in cfg.attack.variants:
        cfgs[variant] = replace(cfg.train, variant=variant)
        results[variant] = [run_seed(data, cfgs[variant], cfg.probe, s, i, cfg.beta_grid)
                            for i, s in enumerate(cfg.seeds)]
    rows = robustness_sweep(data, results, cfg.attack.rates, cfgs, cfg.attack.seed)
    write_robustness_csv(rows, cfg.out / "robustness.csv")
    _write_json(cfg.out / "robustness.json", {
        "probe": "frozen (fit on clean embeddings)",
        "rows": [r.__dict__ for r in rows],
    })


def cmd_sweep(cfg: RunConfig, args) -> None:
    data = cfg.load_dataset()
    with open(cfg.out / "sweep.csv", "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["hidden_dim", "gcn_layers", "mean_acc", "std_acc"])
        for h in cfg.sweep.hidden_dims:
            for k in cfg.sweep.gcn_layers:
                tc = replace(cfg.train, hidden_dim=h, gcn_layers=k)
                report = evaluate_multiseed(data, tc, cfg.probe, cfg.seeds, cfg.beta_grid, args.jobs)
                report.write_json(cfg.out / f"sweep_h{h}_k{k}.json")
                w.writerow([h, k, repr(report.mean), repr(report.std)])
                print(f"h={h} k={k}: {100 * report.mean:.2f} +- {100 * report.std:.2f}")


COMMANDS = {
    "train": (cmd_train, "train one model; writes params.hgcl, loss.csv, train.json"),
    "eval": (cmd_eval, "multi-seed linear evaluation with beta selection; writes eval_report.json"),
    "ablate": (cmd_ablate, "gcn-mlp / gcn-gcn / mlp-mlp comparison; writes ablation_*.json, ablation.csv"),
    "analyze": (cmd_analyze, "feature/structural noise report; writes noise_report.json, cosine_hist_k*.csv"),
    "synth": (cmd_synth, "generate a CSBM dataset in the loader's file formats"),
    "attack": (cmd_attack, "random-edge evasion sweep; writes robustness.csv"),
    "sweep": (cmd_sweep, "grid over hidden_dim x gcn_layers; writes sweep.csv"),
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="gcnmlp", description="GCN-MLP graph contrastive learning toolkit")
    sub = parser.add_subparsers(dest="command", required=True, metavar="COMMAND")
    for name, (_, help_text) in COMMANDS.items():
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--config", required=True, type=Path, help="JSON run configuration")
        p.add_argument("--seed", type=int, help="override train.seed and run only this seed")
        p.add_argument("--jobs", type=int, default=1, help="parallel seed workers (default 1)")
        p.add_argument("--out", type=Path, help="output directory (overrides config 'out')")
        p.add_argument("-v", "--verbose", action="store_true")
    return parser


def dispatch(argv) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code in (0, None) else EXIT_CONFIG
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        if args.jobs < 1:
            raise ConfigError("--jobs must be >= 1")
        cfg = load_run_config(args.config)
        if args.seed is not None:
            cfg = replace(cfg, train=replace(cfg.train, seed=args.seed), seeds=(args.seed,))
        if args.out is not None:
            cfg = replace(cfg, out=args.out)
        cfg.out.mkdir(parents=True, exist_ok=True)
        COMMANDS[args.command][0](cfg, args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (DataError, OSError) as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except NumericalError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    return EXIT_OK


def main() -> None:
    sys.exit(dispatch(sys.argv[1:]))


if __name__ == "__main__":
    main()
