"""Graph representation, dataset file I/O and normalized adjacency operators."""
from __future__ import annotations

import csv
import json
import warnings
from dataclasses import dataclass
from pathlib import Path

import numpy as np
import scipy.sparse as sp

from .errors import ParseError, ValidationError
from .numerics import as_csr, as_dense


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.array(a, copy=True)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class Graph:
    """Undirected graph. ``edges`` holds each edge once as (src, dst) with src < dst."""

    num_nodes: int
    edges: np.ndarray  # (E, 2) int64, lexicographically sorted
    weights: np.ndarray  # (E,) float64
    adjacency: sp.csr_array

    @classmethod
    def from_edges(cls, num_nodes: int, edges, weights=None) -> "Graph":
        """Build a graph, symmetrizing, deduplicating and dropping self-loops.

        For repeated pairs the first occurrence's weight wins.
        """
        e = np.asarray(edges, dtype=np.int64).reshape(-1, 2)
        w = np.ones(len(e)) if weights is None else np.asarray(weights, dtype=np.float64).reshape(-1)
        if len(w) != len(e):
            raise ValidationError("edge weight count does not match edge count")
        if len(e) and (e.min() < 0 or e.max() >= num_nodes):
            raise ValidationError(f"edge endpoint outside [0, {num_nodes})")
        if not np.all(np.isfinite(w)) or np.any(w <= 0):
            raise ValidationError("edge weights must be finite and positive")
        keep = e[:, 0] != e[:, 1]
        e, w = e[keep], w[keep]
        e = np.sort(e, axis=1)
        _, first = np.unique(e, axis=0, return_index=True)
        first = np.sort(first)
        e, w = e[first], w[first]
        order = np.lexsort((e[:, 1], e[:, 0]))
        e, w = e[order], w[order]
        rows = np.concatenate([e[:, 0], e[:, 1]])
        cols = np.concatenate([e[:, 1], e[:, 0]])
        adj = as_csr(sp.coo_array((np.concatenate([w, w]), (rows, cols)), shape=(num_nodes, num_nodes)))
        return cls(int(num_nodes), _frozen(e), _frozen(w), adj)

    @property
    def num_edges(self) -> int:
        return len(self.edges)

    @property
    def degrees(self) -> np.ndarray:
        return np.asarray(self.adjacency.sum(axis=1)).reshape(-1)

    def has_edge(self, i: int, j: int) -> bool:
        return self.adjacency[i, j] != 0

    def equals(self, other: "Graph") -> bool:
        return (
            self.num_nodes == other.num_nodes
            and np.array_equal(self.edges, other.edges)
            and np.array_equal(self.weights, other.weights)
        )


@dataclass(frozen=True, eq=False)
class Split:
    name: str
    train: np.ndarray
    val: np.ndarray
    test: np.ndarray

    def to_json(self) -> dict:
        return {"name": self.name, "train": self.train.tolist(), "val": self.val.tolist(), "test": self.test.tolist()}


@dataclass(frozen=True, eq=False)
class DatasetBundle:
    graph: Graph
    features: np.ndarray
    labels: np.ndarray
    splits: tuple[Split, ...]
    num_classes: int

    def __post_init__(self):
        n = self.graph.num_nodes
        if self.features.shape[0] != n:
            raise ValidationError(f"feature matrix has {self.features.shape[0]} rows, graph has {n} nodes")
        if self.labels.shape != (n,):
            raise ValidationError(f"expected {n} labels, got {self.labels.shape[0]}")
        if n and (self.labels.min() < 0 or self.labels.max() >= self.num_classes):
            raise ValidationError(f"label outside [0, {self.num_classes})")
        for s in self.splits:
            parts = (s.train, s.val, s.test)
            for part in parts:
                if len(part) and (part.min() < 0 or part.max() >= n):
                    raise ValidationError(f"split {s.name!r}: index outside [0, {n})")
                if len(np.unique(part)) != len(part):
                    raise ValidationError(f"split {s.name!r}: repeated index")
            allidx = np.concatenate(parts)
            if len(np.unique(allidx)) != len(allidx):
                raise ValidationError(f"split {s.name!r}: train/val/test overlap")

    @property
    def num_nodes(self) -> int:
        return self.graph.num_nodes

    def with_graph(self, graph: Graph) -> "DatasetBundle":
        if graph.num_nodes != self.num_nodes:
            raise ValidationError("replacement graph has a different node count")
        return DatasetBundle(graph, self.features, self.labels, self.splits, self.num_classes)

    def split(self, index: int) -> Split:
        if not self.splits:
            raise ValidationError("dataset has no splits")
        return self.splits[index % len(self.splits)]

    def equals(self, other: "DatasetBundle") -> bool:
        if not (
            self.graph.equals(other.graph)
            and np.array_equal(self.features, other.features)
            and np.array_equal(self.labels, other.labels)
            and self.num_classes == other.num_classes
            and len(self.splits) == len(other.splits)
        ):
            return False
        return all(
            a.name == b.name
            and np.array_equal(a.train, b.train)
            and np.array_equal(a.val, b.val)
            and np.array_equal(a.test, b.test)
            for a, b in zip(self.splits, other.splits)
        )


def make_bundle(graph, features, labels, splits=(), num_classes=None) -> DatasetBundle:
    labels = np.asarray(labels, dtype=np.int64).reshape(-1)
    features = _frozen(as_dense(features, "features"))
    if num_classes is None:
        num_classes = int(labels.max()) + 1 if len(labels) else 0
    return DatasetBundle(graph, features, _frozen(labels), tuple(splits), int(num_classes))


@dataclass(frozen=True, eq=False)
class NormalizedAdjacency:
    matrix: sp.csr_array
    with_self_loops: bool

    @property
    def shape(self):
        return self.matrix.shape

    def dense(self) -> np.ndarray:
        return self.matrix.toarray()


def normalized_adjacency(graph: Graph, with_self_loops: bool = True) -> NormalizedAdjacency:
    """D^-1/2 (A [+ I]) D^-1/2. Zero-degree rows stay zero."""
    a = graph.adjacency
    if with_self_loops:
        a = a + sp.eye_array(graph.num_nodes, format="csr")
    deg = np.asarray(a.sum(axis=1)).reshape(-1)
    dinv = np.zeros_like(deg)
    nz = deg > 0
    dinv[nz] = 1.0 / np.sqrt(deg[nz])
    d = sp.diags_array(dinv)
    return NormalizedAdjacency(as_csr(d @ a @ d), with_self_loops)


def row_normalize_features(features: np.ndarray) -> np.ndarray:
    """L1-normalize each nonzero row."""
    x = np.asarray(features, dtype=np.float64)
    s = np.abs(x).sum(axis=1, keepdims=True)
    return np.divide(x, s, out=x.copy(), where=s > 0)


# ---------------------------------------------------------------- file I/O

def _read_edges(path: Path):
    edges, weights = [], []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            tok = line.split()
            if len(tok) not in (2, 3):
                raise ParseError(path, lineno, f"expected 2 or 3 fields, got {len(tok)}")
            try:
                edges.append((int(tok[0]), int(tok[1])))
                weights.append(float(tok[2]) if len(tok) == 3 else 1.0)
            except ValueError as exc:
                raise ParseError(path, lineno, str(exc)) from None
    return edges, weights


def _read_features(path: Path) -> np.ndarray:
    rows = []
    with open(path, encoding="utf-8", newline="") as fh:
        for lineno, rec in enumerate(csv.reader(fh), 1):
            if not rec:
                continue
            try:
                row = [float(v) for v in rec]
            except ValueError as exc:
                raise ParseError(path, lineno, str(exc)) from None
            if rows and len(row) != len(rows[0]):
                raise ParseError(path, lineno, f"expected {len(rows[0])} columns, got {len(row)}")
            if not all(np.isfinite(row)):
                raise ParseError(path, lineno, "non-finite feature value")
            rows.append(row)
    if not rows:
        raise ValidationError(f"{path}: empty feature file")
    return np.array(rows, dtype=np.float64)


def _read_labels(path: Path) -> np.ndarray:
    labels = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.strip()
            if not line:
                continue
            try:
                labels.append(int(line))
            except ValueError as exc:
                raise ParseError(path, lineno, str(exc)) from None
    return np.array(labels, dtype=np.int64)


def _read_splits(path: Path) -> list[Split]:
    try:
        obj = json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ParseError(path, exc.lineno, exc.msg) from None
    try:
        return [
            Split(
                str(s["name"]),
                _frozen(np.asarray(s["train"], dtype=np.int64)),
                _frozen(np.asarray(s["val"], dtype=np.int64)),
                _frozen(np.asarray(s["test"], dtype=np.int64)),
            )
            for s in obj["splits"]
        ]
    except (KeyError, TypeError, ValueError) as exc:
        raise ValidationError(f"{path}: malformed split file ({exc})") from None


def load_dataset(edge_path, feature_path, label_path, split_path, num_classes=None) -> DatasetBundle:
    """Load a dataset from the four text files described in the README.

    The node count is the number of feature rows. Reversed and repeated
    edges are merged; self-loops are dropped with a warning.
    """
    features = _read_features(Path(feature_path))
    n = features.shape[0]
    labels = _read_labels(Path(label_path))
    if len(labels) != n:
        raise ValidationError(f"{label_path}: {len(labels)} labels for {n} nodes")
    if num_classes is not None and len(labels) and labels.max() >= num_classes:
        raise ValidationError(f"{label_path}: label {labels.max()} >= num_classes {num_classes}")
    if len(labels) and labels.min() < 0:
        raise ValidationError(f"{label_path}: negative label")
    edges, weights = _read_edges(Path(edge_path))
    loops = sum(1 for a, b in edges if a == b)
    if loops:
        warnings.warn(f"{edge_path}: dropped {loops} self-loop(s)", stacklevel=2)
    graph = Graph.from_edges(n, edges, weights)
    splits = _read_splits(Path(split_path))
    return make_bundle(graph, features, labels, splits, num_classes)


def save_dataset(bundle: DatasetBundle, directory) -> dict[str, Path]:
    """Write a bundle in the loader's formats; reloading gives an identical bundle."""
    d = Path(directory)
    d.mkdir(parents=True, exist_ok=True)
    paths = {k: d / f for k, f in
             [("edges", "edges.txt"), ("features", "features.csv"), ("labels", "labels.txt"), ("splits", "splits.json")]}
    g = bundle.graph
    weighted = not np.all(g.weights == 1.0)
    with open(paths["edges"], "w", encoding="utf-8") as fh:
        fh.write(f"# {g.num_nodes} nodes, {g.num_edges} undirected edges\n")
        for (a, b), w in zip(g.edges.tolist(), g.weights.tolist()):
            fh.write(f"{a} {b} {w!r}\n" if weighted else f"{a} {b}\n")
    with open(paths["features"], "w", encoding="utf-8") as fh:
        for row in bundle.features.tolist():
            fh.write(",".join(repr(v) for v in row) + "\n")
    paths["labels"].write_text("".join(f"{v}\n" for v in bundle.labels.tolist()), encoding="utf-8")
    paths["splits"].write_text(json.dumps({"splits": [s.to_json() for s in bundle.splits]}), encoding="utf-8")
    return paths


def dataset_from_paths(paths: dict, num_classes=None) -> DatasetBundle:
    return load_dataset(paths["edges"], paths["features"], paths["labels"], paths["splits"], num_classes)
