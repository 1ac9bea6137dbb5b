import csv

import numpy as np
import pytest

from gcnmlp.errors import AttackError, ConfigError, ValidationError
from gcnmlp.evaluation import ProbeConfig, combine_views, run_seed
from gcnmlp.graph import Graph, normalized_adjacency
from gcnmlp.robustness import (
    AttackConfig, RobustnessRow, attack_budget, evasion_eval, random_edge_attack, robustness_sweep,
    write_robustness_csv,
)
from gcnmlp.synth import CsbmConfig, generate_csbm
from gcnmlp.training import TrainConfig, embed, prepare_features

from conftest import er_graph


def graph_with_edges(rng, n, m):
    iu, ju = np.triu_indices(n, k=1)
    pick = rng.choice(len(iu), size=m, replace=False)
    return Graph.from_edges(n, np.stack([iu[pick], ju[pick]], axis=1))


def test_rate_zero_is_identity(rng):
    g = er_graph(rng, 30, 0.2)
    assert random_edge_attack(g, AttackConfig(0.0, 1)).equals(g)


def test_budget_arithmetic_and_preservation(rng):
    g = graph_with_edges(rng, 40, 100)
    a = random_edge_attack(g, AttackConfig(0.25, 7))
    assert a.num_edges == 125 and a.num_nodes == 40
    old = set(map(tuple, g.edges.tolist()))
    assert old <= set(map(tuple, a.edges.tolist()))
    assert np.all(a.edges[:, 0] < a.edges[:, 1])
    assert attack_budget(g, 0.25) == 25


def test_attack_deterministic(rng):
    g = er_graph(rng, 50, 0.1)
    assert random_edge_attack(g, AttackConfig(0.2, 3)).equals(random_edge_attack(g, AttackConfig(0.2, 3)))


def test_dense_regime_exact_budget():
    g = graph_with_edges(np.random.default_rng(0), 10, 30)  # 15 non-edges left
    a = random_edge_attack(g, AttackConfig(0.5, 0))
    assert a.num_edges == 45


def test_complete_graph_rejected():
    iu, ju = np.triu_indices(6, k=1)
    g = Graph.from_edges(6, np.stack([iu, ju], axis=1))
    with pytest.raises(AttackError):
        random_edge_attack(g, AttackConfig(0.1, 0))
    with pytest.raises(ConfigError):
        AttackConfig(-0.1)


@pytest.fixture(scope="module")
def trained():
    data = generate_csbm(CsbmConfig(num_nodes=90, feature_dim=8, seed=1, num_splits=2))
    cfg = TrainConfig(epochs=20, hidden_dim=16)
    return data, cfg, run_seed(data, cfg, ProbeConfig(probe_epochs=50), 0, 0)


def test_evasion_rate_zero_equals_clean(trained):
    data, cfg, res = trained
    acc = evasion_eval(res.views, data, random_edge_attack(data.graph, AttackConfig(0.0)), res.beta, res.probe,
                       res.split, cfg)
    assert acc == res.test_accuracy


def test_beta_zero_embeddings_bitwise_invariant(trained):
    data, cfg, res = trained
    x = prepare_features(data, cfg)
    clean = combine_views(*embed(res.views, normalized_adjacency(data.graph), x), 0.0)
    attacked = random_edge_attack(data.graph, AttackConfig(0.25, 4))
    dirty = combine_views(*embed(res.views, normalized_adjacency(attacked), x), 0.0)
    assert np.array_equal(clean, dirty)
    acc0 = evasion_eval(res.views, data, data.graph, 0.0, res.probe, res.split, cfg)
    assert evasion_eval(res.views, data, attacked, 0.0, res.probe, res.split, cfg) == acc0


def test_evasion_node_mismatch(trained):
    data, cfg, res = trained
    with pytest.raises(ValidationError):
        evasion_eval(res.views, data, Graph.from_edges(5, [(0, 1)]), 0.5, res.probe, res.split, cfg)


def test_sweep_rows_and_csv(trained, tmp_path):
    data, cfg, res = trained
    rows = robustness_sweep(data, {"gcn-mlp": [res]}, [0.0, 0.1], {"gcn-mlp": cfg})
    assert [r.rate for r in rows] == [0.0, 0.1]
    assert rows[0].mean_acc == res.test_accuracy and rows[0].std_acc == 0.0
    write_robustness_csv(rows, tmp_path / "r.csv")
    with open(tmp_path / "r.csv") as fh:
        got = list(csv.reader(fh))
    assert got[0] == ["rate", "variant", "mean_acc", "std_acc"] and len(got) == 3


@pytest.mark.slow
def test_csbm_gcn_mlp_drops_less_than_gcn_gcn(csbm_runs):
    data = csbm_runs["data"]
    runs = {v: csbm_runs["runs"][v] for v in ("gcn-mlp", "gcn-gcn")}
    rows = robustness_sweep(data, runs, [0.0, 0.25], {v: TrainConfig(variant=v) for v in runs})
    acc = {(r.rate, r.variant): r.mean_acc for r in rows}
    drop = {v: acc[(0.0, v)] - acc[(0.25, v)] for v in runs}
    assert drop["gcn-mlp"] <= drop["gcn-gcn"]
