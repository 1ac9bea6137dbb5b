"""Linear evaluation protocol: view combination, softmax probe, beta selection, multi-seed reports."""
from __future__ import annotations

import json
import logging
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from .encoders import Encoder
from .errors import ConfigError, DataError, DimensionError
from .graph import DatasetBundle, NormalizedAdjacency, Split, normalized_adjacency
from .training import VARIANTS, AdamState, LossTrace, TrainConfig, adam_step, embed, prepare_features, train

log = logging.getLogger(__name__)

DEFAULT_BETA_GRID = tuple(round(0.1 * i, 1) for i in range(11))


@dataclass(frozen=True)
class ProbeConfig:
    probe_lr: float = 0.01
    probe_epochs: int = 300
    probe_weight_decay: float = 1e-4
    seed: int = 0
    optimizer: str = "adam"  # or "gd"
    normalize: bool = False  # L2-normalize embedding rows first

    def __post_init__(self):
        if not self.probe_lr > 0 or self.probe_epochs < 1 or self.probe_weight_decay < 0:
            raise ConfigError("probe needs lr > 0, epochs >= 1, weight_decay >= 0")
        if self.optimizer not in ("adam", "gd"):
            raise ConfigError("probe optimizer must be 'adam' or 'gd'")


def combine_views(z_s: np.ndarray, z_f: np.ndarray, beta: float) -> np.ndarray:
    if z_s.shape != z_f.shape:
        raise DimensionError(f"combine_views: {z_s.shape} vs {z_f.shape}")
    if not 0.0 <= beta <= 1.0:
        raise ConfigError(f"beta must lie in [0, 1], got {beta}")
    if beta == 1.0:
        return z_s.copy()
    if beta == 0.0:
        return z_f.copy()
    # same affine map as beta*z_s + (1-beta)*z_f, but exact when z_s == z_f
    return z_f + beta * (z_s - z_f)


# -------------------------------------------------------------------- probe

@dataclass
class LinearProbe:
    weight: np.ndarray
    bias: np.ndarray
    normalize: bool = False
    losses: list[float] = field(default_factory=list)

    def logits(self, z: np.ndarray) -> np.ndarray:
        return _prep(z, self.normalize) @ self.weight + self.bias

    def predict(self, z: np.ndarray) -> np.ndarray:
        # np.argmax returns the first maximum: ties go to the lowest class id
        return np.argmax(self.logits(z), axis=1)

    def accuracy(self, z: np.ndarray, labels: np.ndarray, idx: np.ndarray) -> float:
        if len(idx) == 0:
            return float("nan")
        return float(np.mean(self.predict(z[idx]) == labels[idx]))


def _prep(z, normalize):
    if not normalize:
        return z
    nrm = np.linalg.norm(z, axis=1, keepdims=True)
    return z / np.where(nrm < 1e-12, 1.0, nrm)


def probe_objective(weight, bias, z, y_onehot, weight_decay):
    """Mean cross-entropy + (wd/2)|W|^2 and its gradients (bias unregularized)."""
    logits = z @ weight + bias
    logits = logits - logits.max(axis=1, keepdims=True)
    expl = np.exp(logits)
    prob = expl / expl.sum(axis=1, keepdims=True)
    n = z.shape[0]
    ce = -np.sum(y_onehot * (logits - np.log(expl.sum(axis=1, keepdims=True)))) / n
    loss = ce + 0.5 * weight_decay * float(np.sum(weight * weight))
    delta = (prob - y_onehot) / n
    return loss, z.T @ delta + weight_decay * weight, delta.sum(axis=0)


def fit_probe(z: np.ndarray, labels: np.ndarray, train_idx: np.ndarray, num_classes: int,
              cfg: ProbeConfig) -> LinearProbe:
    if len(train_idx) == 0:
        raise DataError("linear probe needs a nonempty training split")
    present = np.unique(labels[train_idx])
    if len(present) < num_classes:
        warnings.warn(f"probe training split covers {len(present)} of {num_classes} classes", stacklevel=2)
    x = _prep(z, cfg.normalize)[train_idx]
    y = np.eye(num_classes)[labels[train_idx]]
    rng = np.random.default_rng(cfg.seed)
    bound = np.sqrt(6.0 / (x.shape[1] + num_classes))
    probe = LinearProbe(rng.uniform(-bound, bound, (x.shape[1], num_classes)), np.zeros(num_classes), cfg.normalize)
    params = [probe.weight, probe.bias]
    state = AdamState.zeros_like(params)
    for _ in range(cfg.probe_epochs):
        loss, gw, gb = probe_objective(probe.weight, probe.bias, x, y, cfg.probe_weight_decay)
        probe.losses.append(loss)
        if cfg.optimizer == "adam":
            adam_step(params, [gw, gb], state, cfg.probe_lr)
        else:
            probe.weight -= cfg.probe_lr * gw
            probe.bias -= cfg.probe_lr * gb
    return probe


def linear_probe(z: np.ndarray, labels, split: Split, cfg: ProbeConfig, num_classes: int | None = None):
    """Fit on the train split, report test accuracy. Returns (accuracy, probe)."""
    labels = np.asarray(labels)
    c = int(labels.max()) + 1 if num_classes is None else num_classes
    probe = fit_probe(z, labels, split.train, c, cfg)
    return probe.accuracy(z, labels, split.test), probe


def select_beta(z_s, z_f, labels, split: Split, grid, cfg: ProbeConfig, num_classes: int | None = None) -> float:
    """Grid value with the best validation accuracy; ties prefer 0.5, then smaller beta."""
    grid = list(grid)
    if not grid:
        raise ConfigError("beta grid is empty")
    labels = np.asarray(labels)
    c = int(labels.max()) + 1 if num_classes is None else num_classes
    scored = []
    for beta in grid:
        z = combine_views(z_s, z_f, beta)
        probe = fit_probe(z, labels, split.train, c, cfg)
        scored.append((probe.accuracy(z, labels, split.val), beta))
    best = max(a for a, _ in scored)
    tied = [b for a, b in scored if a == best]
    return 0.5 if 0.5 in tied else min(tied)


# ------------------------------------------------------------------ reports

@dataclass
class EvalReport:
    variant: str
    seeds: list[int]
    accuracies: list[float]
    betas: list[float]

    @property
    def mean(self) -> float:
        return float(np.mean(self.accuracies))

    @property
    def std(self) -> float:
        return float(np.std(self.accuracies))  # population formula

    def to_json(self) -> dict:
        return {"variant": self.variant, "seeds": list(self.seeds), "accuracies": list(self.accuracies),
                "mean": self.mean, "std": self.std, "betas": list(self.betas)}

    def write_json(self, path) -> None:
        Path(path).write_text(json.dumps(self.to_json(), indent=2) + "\n", encoding="utf-8")


@dataclass
class SeedResult:
    seed: int
    views: tuple[Encoder, Encoder]
    beta: float
    test_accuracy: float
    probe: LinearProbe
    split: Split
    trace: LossTrace | None = None


def run_seed(dataset: DatasetBundle, train_cfg: TrainConfig, probe_cfg: ProbeConfig, seed: int,
             split_index: int, beta_grid=DEFAULT_BETA_GRID, adj: NormalizedAdjacency | None = None) -> SeedResult:
    """Train one model, pick beta on validation, fit the final probe, score the test split."""
    cfg = replace(train_cfg, seed=seed)
    if adj is None:
        adj = normalized_adjacency(dataset.graph, with_self_loops=True)
    va, vb, trace = train(dataset, cfg, adj)
    za, zb = embed((va, vb), adj, prepare_features(dataset, cfg))
    split = dataset.split(split_index)
    pcfg = replace(probe_cfg, seed=probe_cfg.seed + seed)
    beta = select_beta(za, zb, dataset.labels, split, beta_grid, pcfg, dataset.num_classes)
    z = combine_views(za, zb, beta)
    probe = fit_probe(z, dataset.labels, split.train, dataset.num_classes, pcfg)
    acc = probe.accuracy(z, dataset.labels, split.test)
    log.info("%s seed %d split %s: beta %.1f test acc %.4f", cfg.variant, seed, split.name, beta, acc)
    return SeedResult(seed, (va, vb), beta, acc, probe, split, trace)


def _run_seed_job(args):
    res = run_seed(*args)
    return res.test_accuracy, res.beta


def evaluate_multiseed(dataset: DatasetBundle, train_cfg: TrainConfig, probe_cfg: ProbeConfig, seeds,
                       beta_grid=DEFAULT_BETA_GRID, jobs: int = 1) -> EvalReport:
    """One training run per seed; the i-th seed uses split i (mod number of splits)."""
    seeds = list(seeds)
    if not seeds:
        raise ConfigError("seeds must be nonempty")
    jobs_args = [(dataset, train_cfg, probe_cfg, s, i, tuple(beta_grid)) for i, s in enumerate(seeds)]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(_run_seed_job, jobs_args))
    else:
        results = [_run_seed_job(a) for a in jobs_args]
    return EvalReport(train_cfg.variant, seeds, [r[0] for r in results], [r[1] for r in results])


def ablation_run(dataset: DatasetBundle, variant: str, train_cfg: TrainConfig, probe_cfg: ProbeConfig,
                 seeds, beta_grid=DEFAULT_BETA_GRID, jobs: int = 1) -> EvalReport:
    if variant not in VARIANTS:
        raise ConfigError(f"variant must be one of {VARIANTS}")
    return evaluate_multiseed(dataset, replace(train_cfg, variant=variant), probe_cfg, seeds, beta_grid, jobs)
