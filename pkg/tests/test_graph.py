import json
import warnings

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from gcnmlp.errors import ParseError, ValidationError
from gcnmlp.graph import (
    Graph, Split, load_dataset, make_bundle, normalized_adjacency, row_normalize_features, save_dataset,
)

from conftest import er_graph
from oracles import dense_normalized_adjacency, power_iteration_radius


def write_files(tmp_path, edges_text, features, labels, splits):
    (tmp_path / "e.txt").write_text(edges_text)
    (tmp_path / "f.csv").write_text("\n".join(",".join(str(v) for v in r) for r in features) + "\n")
    (tmp_path / "l.txt").write_text("\n".join(str(v) for v in labels) + "\n")
    (tmp_path / "s.json").write_text(json.dumps({"splits": splits}))
    return [tmp_path / n for n in ("e.txt", "f.csv", "l.txt", "s.json")]


SPLIT = [{"name": "a", "train": [0], "val": [], "test": [1]}]


def test_reversed_edge_is_deduplicated(tmp_path):
    bundle = load_dataset(*write_files(tmp_path, "0 1\n1 0\n", [[1, 0], [0, 1]], [0, 1], SPLIT))
    assert bundle.graph.num_edges == 1
    assert bundle.graph.edges.tolist() == [[0, 1]]


def test_short_feature_file_is_rejected(tmp_path):
    with pytest.raises(ValidationError):
        load_dataset(*write_files(tmp_path, "0 1\n1 2\n", [[1, 0], [0, 1]], [0, 1, 0], SPLIT))


def test_malformed_line_reports_line_number(tmp_path):
    files = write_files(tmp_path, "# header\n0 1\n0 x\n", [[1.0], [2.0]], [0, 1], SPLIT)
    with pytest.raises(ParseError) as err:
        load_dataset(*files)
    assert err.value.lineno == 3 and "e.txt:3:" in str(err.value)


def test_label_and_split_range_errors(tmp_path):
    with pytest.raises(ValidationError):
        load_dataset(*write_files(tmp_path, "0 1\n", [[1.0], [2.0]], [0, 5], SPLIT), num_classes=2)
    bad = [{"name": "a", "train": [0], "val": [], "test": [7]}]
    with pytest.raises(ValidationError):
        load_dataset(*write_files(tmp_path, "0 1\n", [[1.0], [2.0]], [0, 1], bad))
    overlap = [{"name": "a", "train": [0], "val": [0], "test": [1]}]
    with pytest.raises(ValidationError):
        load_dataset(*write_files(tmp_path, "0 1\n", [[1.0], [2.0]], [0, 1], overlap))


def test_self_loops_dropped_with_count(tmp_path):
    files = write_files(tmp_path, "0 0\n1 1\n0 1\n", [[1.0], [2.0]], [0, 1], SPLIT)
    with pytest.warns(UserWarning, match="dropped 2 self-loop"):
        bundle = load_dataset(*files)
    assert bundle.graph.num_edges == 1


def test_weighted_edges_symmetric(tmp_path):
    bundle = load_dataset(*write_files(tmp_path, "0 1 2.5\n1 2 0.5\n", [[1.0]] * 3, [0, 1, 0], SPLIT))
    a = bundle.graph.adjacency.toarray()
    assert np.array_equal(a, a.T)
    assert a[0, 1] == 2.5 and a[2, 1] == 0.5


def test_graph_invariants(rng):
    g = Graph.from_edges(4, [(2, 1), (1, 2), (3, 3), (0, 3), (0, 3)])
    assert g.edges.tolist() == [[0, 3], [1, 2]]
    assert g.has_edge(3, 0) and not g.has_edge(1, 1)
    with pytest.raises(ValidationError):
        Graph.from_edges(2, [(0, 2)])
    with pytest.raises(ValidationError):
        Graph.from_edges(2, [(0, 1)], [0.0])


def test_normalized_adjacency_examples():
    path = Graph.from_edges(2, [(0, 1)])
    assert np.allclose(normalized_adjacency(path, True).dense(), [[0.5, 0.5], [0.5, 0.5]], atol=1e-15)
    assert np.array_equal(normalized_adjacency(path, False).dense(), [[0, 1], [1, 0]])
    single = Graph.from_edges(1, np.zeros((0, 2)))
    assert np.array_equal(normalized_adjacency(single, True).dense(), [[1.0]])
    assert np.array_equal(normalized_adjacency(single, False).dense(), [[0.0]])


@given(st.integers(1, 30), st.floats(0.0, 0.6), st.booleans(), st.integers(0, 2**31))
def test_normalized_adjacency_properties(n, p, loops, seed):
    g = er_graph(np.random.default_rng(seed), n, p)
    a = normalized_adjacency(g, loops).dense()
    assert np.array_equal(a, a.T)
    assert a.min() >= 0
    assert np.allclose(a, dense_normalized_adjacency(g.edges.tolist(), n, loops), atol=1e-14)
    assert power_iteration_radius(a, iters=300) <= 1 + 1e-8
    lam = np.linalg.eigvalsh(np.eye(n) - a)
    assert lam.min() >= -1e-8 and lam.max() <= 2 + 1e-8


def test_row_normalize_features():
    x = np.array([[2.0, 2.0, 0.0], [0.0, 0.0, 0.0], [1.0, 0.0, 0.0]])
    assert np.array_equal(row_normalize_features(x), [[0.5, 0.5, 0], [0, 0, 0], [1, 0, 0]])


def random_bundle(rng, n=25, d=4, c=3):
    g = er_graph(rng, n, 0.2)
    labels = rng.integers(0, c, n)
    perm = rng.permutation(n)
    split = Split("s0", np.sort(perm[:10]), np.sort(perm[10:15]), np.sort(perm[15:]))
    return make_bundle(g, rng.normal(size=(n, d)), labels, [split], c)


@given(st.integers(0, 2**31))
def test_save_load_round_trip(tmp_path_factory, seed):
    bundle = random_bundle(np.random.default_rng(seed))
    d = tmp_path_factory.mktemp("rt")
    paths = save_dataset(bundle, d)
    again = load_dataset(paths["edges"], paths["features"], paths["labels"], paths["splits"], bundle.num_classes)
    assert again.equals(bundle)
    # and a second generation is byte-identical
    paths2 = save_dataset(again, d / "second")
    for k in paths:
        assert paths[k].read_bytes() == paths2[k].read_bytes()


@given(st.integers(0, 2**31))
def test_duplicated_edge_list_gives_same_graph(tmp_path_factory, seed):
    g = er_graph(np.random.default_rng(seed), 15, 0.3)
    once = "".join(f"{a} {b}\n" for a, b in g.edges.tolist())
    twice = once + "".join(f"{b} {a}\n" for a, b in g.edges.tolist())
    d = tmp_path_factory.mktemp("dup")
    feats, labels = [[0.0]] * 15, [0] * 15
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        a = load_dataset(*write_files(d, once, feats, labels, SPLIT))
        b = load_dataset(*write_files(d, twice, feats, labels, SPLIT))
    assert a.graph.equals(b.graph) and a.graph.equals(g)


def test_bundle_split_cycles():
    b = random_bundle(np.random.default_rng(0))
    assert b.split(0) is b.split(3)


