import json

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from gcnmlp.errors import ConfigError, DataError, DimensionError
from gcnmlp.evaluation import (
    EvalReport, ProbeConfig, ablation_run, combine_views, evaluate_multiseed, fit_probe, linear_probe,
    probe_objective, select_beta,
)
from gcnmlp.graph import Split
from gcnmlp.synth import CsbmConfig, generate_csbm
from gcnmlp.training import TrainConfig

from oracles import central_difference, max_rel_error


def balanced_split(n, rng):
    perm = rng.permutation(n)
    a, b = n // 2, 3 * n // 4
    return Split("s", np.sort(perm[:a]), np.sort(perm[a:b]), np.sort(perm[b:]))


def test_combine_views_examples(rng):
    zs, zf = rng.normal(size=(4, 3)), rng.normal(size=(4, 3))
    assert np.array_equal(combine_views(zs, zf, 1.0), zs)
    assert np.array_equal(combine_views(zs, zf, 0.0), zf)
    assert np.array_equal(combine_views(np.array([[2.0]]), np.array([[0.0]]), 0.5), [[1.0]])
    with pytest.raises(ConfigError):
        combine_views(zs, zf, 1.5)
    with pytest.raises(DimensionError):
        combine_views(zs, zf[:2], 0.5)


@given(arrays(np.float64, (5, 3), elements=st.floats(-1e6, 1e6, allow_nan=False)),
       st.sampled_from([round(0.1 * i, 1) for i in range(11)]))
def test_combine_views_idempotent(z, beta):
    assert np.array_equal(combine_views(z, z, beta), z)


def test_probe_separable_one_hot(rng):
    labels = np.arange(60) % 3
    z = np.eye(3)[labels]
    acc, _ = linear_probe(z, labels, balanced_split(60, rng), ProbeConfig())
    assert acc == 1.0


def test_probe_identical_embeddings_half():
    labels = np.array([0, 1] * 20)
    z = np.ones((40, 4))
    split = Split("s", np.arange(20), np.arange(20, 30), np.arange(30, 40))
    acc, probe = linear_probe(z, labels, split, ProbeConfig())
    assert acc == 0.5
    assert np.all(probe.predict(z) == probe.predict(z)[0])


def test_probe_argmax_ties_go_to_lowest_class():
    from gcnmlp.evaluation import LinearProbe
    probe = LinearProbe(np.zeros((2, 3)), np.array([1.0, 1.0, 0.0]))
    assert probe.predict(np.ones((4, 2))).tolist() == [0, 0, 0, 0]


@given(st.integers(0, 2**31), st.floats(0.0, 0.1))
def test_probe_gradient_finite_difference(seed, wd):
    rng = np.random.default_rng(seed)
    z = rng.normal(size=(8, 4))
    y = np.eye(3)[rng.integers(0, 3, 8)]
    w, b = rng.normal(size=(4, 3)), rng.normal(size=3)
    _, gw, gb = probe_objective(w, b, z, y, wd)
    num = central_difference(lambda: probe_objective(w, b, z, y, wd)[0], [w, b])
    assert max_rel_error([gw, gb], num) <= 1e-4


def test_probe_loss_monotone_small_lr(rng):
    z = rng.normal(size=(50, 6))
    labels = rng.integers(0, 4, 50)
    probe = fit_probe(z, labels, np.arange(50), 4, ProbeConfig(probe_lr=1e-3, optimizer="gd", probe_epochs=200))
    assert np.all(np.diff(probe.losses) <= 0)


def test_probe_empty_train_split(rng):
    with pytest.raises(DataError):
        linear_probe(np.ones((4, 2)), np.array([0, 1, 0, 1]),
                     Split("s", np.array([], dtype=int), np.array([0]), np.array([1])), ProbeConfig())


def test_probe_deterministic(rng):
    z = rng.normal(size=(30, 5))
    labels = rng.integers(0, 3, 30)
    split = balanced_split(30, rng)
    a = linear_probe(z, labels, split, ProbeConfig(seed=4))[1]
    b = linear_probe(z, labels, split, ProbeConfig(seed=4))[1]
    assert np.array_equal(a.weight, b.weight) and a.losses == b.losses


def test_select_beta_single_value(rng):
    z = rng.normal(size=(20, 3))
    labels = rng.integers(0, 2, 20)
    assert select_beta(z, z, labels, balanced_split(20, rng), [0.5], ProbeConfig(probe_epochs=5)) == 0.5
    with pytest.raises(ConfigError):
        select_beta(z, z, labels, balanced_split(20, rng), [], ProbeConfig())


def test_select_beta_all_tied(rng):
    labels = np.arange(40) % 2
    z = np.eye(2)[labels]
    grid = [0.0, 0.2, 0.5, 0.9]
    assert select_beta(z, z, labels, balanced_split(40, rng), grid, ProbeConfig(probe_epochs=50)) == 0.5
    assert select_beta(z, z, labels, balanced_split(40, rng), [0.9, 0.2], ProbeConfig(probe_epochs=50)) == 0.2


def test_select_beta_prefers_separable_view(rng):
    labels = np.arange(120) % 3
    zs = 3.0 * np.eye(3)[labels] + 0.1 * rng.normal(size=(120, 3))
    zf = rng.normal(size=(120, 3))
    split = balanced_split(120, rng)
    cfg = ProbeConfig(probe_epochs=100)
    grid = [round(0.1 * i, 1) for i in range(11)]
    beta = select_beta(zs, zf, labels, split, grid, cfg)
    # exhaustive oracle: the chosen beta attains the best validation accuracy
    accs = {b: fit_probe(combine_views(zs, zf, b), labels, split.train, 3, cfg).accuracy(
        combine_views(zs, zf, b), labels, split.val) for b in grid}
    assert accs[beta] == max(accs.values())
    assert beta >= 0.5


def tiny_data():
    return generate_csbm(CsbmConfig(num_nodes=60, feature_dim=8, seed=2, num_splits=3))


TINY_TRAIN = TrainConfig(epochs=10, hidden_dim=8)
TINY_PROBE = ProbeConfig(probe_epochs=30)


def test_multiseed_single_seed_std_zero():
    rep = evaluate_multiseed(tiny_data(), TINY_TRAIN, TINY_PROBE, [5], beta_grid=(0.5,))
    assert rep.std == 0.0 and len(rep.accuracies) == 1 and rep.betas == [0.5]
    with pytest.raises(ConfigError):
        evaluate_multiseed(tiny_data(), TINY_TRAIN, TINY_PROBE, [])


def test_multiseed_deterministic_and_parallel_equal():
    data = tiny_data()
    a = evaluate_multiseed(data, TINY_TRAIN, TINY_PROBE, [0, 1, 2], beta_grid=(0.0, 0.5, 1.0))
    b = evaluate_multiseed(data, TINY_TRAIN, TINY_PROBE, [0, 1, 2], beta_grid=(0.0, 0.5, 1.0))
    c = evaluate_multiseed(data, TINY_TRAIN, TINY_PROBE, [0, 1, 2], beta_grid=(0.0, 0.5, 1.0), jobs=2)
    assert json.dumps(a.to_json()) == json.dumps(b.to_json()) == json.dumps(c.to_json())
    assert all(0.0 <= v <= 1.0 for v in a.accuracies)


def test_report_json_and_population_std(tmp_path):
    rep = EvalReport("gcn-mlp", [0, 1], [0.5, 1.0], [0.5, 0.3])
    assert rep.mean == 0.75 and rep.std == 0.25
    rep.write_json(tmp_path / "r.json")
    obj = json.loads((tmp_path / "r.json").read_text())
    assert set(obj) == {"variant", "seeds", "accuracies", "mean", "std", "betas"}


def test_ablation_rejects_unknown_variant():
    with pytest.raises(ConfigError):
        ablation_run(tiny_data(), "gat-gat", TINY_TRAIN, TINY_PROBE, [0])


@pytest.mark.slow
def test_csbm_gcn_mlp_mean_at_least_085(csbm_runs):
    accs = [r.test_accuracy for r in csbm_runs["runs"]["gcn-mlp"]]
    assert np.mean(accs) >= 0.85


@pytest.mark.slow
def test_csbm_ablation_ordering(csbm_runs):
    mean = {v: np.mean([r.test_accuracy for r in rs]) for v, rs in csbm_runs["runs"].items()}
    assert mean["gcn-mlp"] >= max(mean["gcn-gcn"], mean["mlp-mlp"]) - 0.01
