"""Random edge-insertion attack and evasion-setting evaluation."""
from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import AttackError, ConfigError, ValidationError
from .evaluation import LinearProbe, combine_views
from .graph import DatasetBundle, Graph, Split, normalized_adjacency
from .training import TrainConfig, embed, prepare_features


@dataclass(frozen=True)
class AttackConfig:
    perturbation_rate: float = 0.0
    seed: int = 0

    def __post_init__(self):
        if not 0.0 <= self.perturbation_rate <= 1.0:
            raise ConfigError("perturbation_rate must lie in [0, 1]")


def attack_budget(graph: Graph, rate: float) -> int:
    return int(round(rate * graph.num_edges))


def random_edge_attack(graph: Graph, cfg: AttackConfig) -> Graph:
    """Insert round(rate * |E|) new edges drawn uniformly from the non-edges.

    Original edges are kept. Raises AttackError if the graph has fewer
    non-edges than the budget.
    """
    budget = attack_budget(graph, cfg.perturbation_rate)
    if budget == 0:
        return graph
    n = graph.num_nodes
    total_pairs = n * (n - 1) // 2
    if total_pairs - graph.num_edges < budget:
        raise AttackError(f"need {budget} new edges but only {total_pairs - graph.num_edges} non-edges exist")
    rng = np.random.default_rng(cfg.seed)
    existing = set(map(tuple, graph.edges.tolist()))
    added: list[tuple[int, int]] = []
    chosen: set[tuple[int, int]] = set()
    if budget > 0.25 * (total_pairs - graph.num_edges):
        # dense regime: enumerate and sample without replacement
        iu, ju = np.triu_indices(n, k=1)
        free = np.array([(a, b) not in existing for a, b in zip(iu.tolist(), ju.tolist())])
        pick = rng.choice(np.flatnonzero(free), size=budget, replace=False)
        added = list(zip(iu[pick].tolist(), ju[pick].tolist()))
    else:
        while len(added) < budget:
            a, b = (int(v) for v in rng.integers(0, n, size=2))
            if a == b:
                continue
            e = (min(a, b), max(a, b))
            if e in existing or e in chosen:
                continue
            chosen.add(e)
            added.append(e)
    edges = np.concatenate([graph.edges, np.array(added, dtype=np.int64).reshape(-1, 2)])
    weights = np.concatenate([graph.weights, np.ones(len(added))])
    return Graph.from_edges(n, edges, weights)


def evasion_eval(views, dataset: DatasetBundle, attacked: Graph, beta: float, probe: LinearProbe,
                 split: Split, train_cfg: TrainConfig) -> float:
    """Test accuracy of a clean-fitted probe on embeddings recomputed over the attacked graph.

    The encoders and the probe stay frozen; only the normalized adjacency
    changes, so structure-free views are unaffected.
    """
    if attacked.num_nodes != dataset.num_nodes:
        raise ValidationError("attacked graph has a different node set")
    adj = normalized_adjacency(attacked, with_self_loops=True)
    za, zb = embed(views, adj, prepare_features(dataset, train_cfg))
    z = combine_views(za, zb, beta)
    return probe.accuracy(z, dataset.labels, split.test)


@dataclass(frozen=True)
class RobustnessRow:
    rate: float
    variant: str
    mean_acc: float
    std_acc: float


def write_robustness_csv(rows: list[RobustnessRow], path) -> None:
    with open(Path(path), "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["rate", "variant", "mean_acc", "std_acc"])
        for r in rows:
            w.writerow([repr(r.rate), r.variant, repr(r.mean_acc), repr(r.std_acc)])


def robustness_sweep(dataset: DatasetBundle, seed_results: dict[str, list], rates, train_cfgs: dict[str, TrainConfig],
                     attack_seed: int = 0) -> list[RobustnessRow]:
    """Evasion accuracy for every (rate, variant) over pre-trained per-seed results.

    ``seed_results[variant]`` is a list of :class:`~gcnmlp.evaluation.SeedResult`.
    The attacked graph for seed s at a given rate uses attack seed
    ``attack_seed + s``, shared across variants.
    """
    rows = []
    for rate in rates:
        attacked = {}
        for variant, results in seed_results.items():
            accs = []
            for res in results:
                if res.seed not in attacked:
                    attacked[res.seed] = random_edge_attack(dataset.graph, AttackConfig(rate, attack_seed + res.seed))
                accs.append(evasion_eval(res.views, dataset, attacked[res.seed], res.beta, res.probe, res.split,
                                         train_cfgs[variant]))
            rows.append(RobustnessRow(float(rate), variant, float(np.mean(accs)), float(np.std(accs))))
    return rows
