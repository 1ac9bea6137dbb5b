"""Feature noise, structural noise and their correlation.

Noise is measured against empirical class centroids computed from all
labelled nodes. ``correlation_Ek`` and ``spectral_Ek`` evaluate the same
average noise correlation E_k by two independent routes: repeated sparse
propagation of the noise matrix, and a Fourier expansion in the
eigenbasis of the normalized Laplacian.
"""
from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import ConfigError, ValidationError
from .graph import NormalizedAdjacency
from .numerics import EIG_CAP, cosine_rows, spmm, sym_eig


@dataclass(frozen=True)
class ClassCentroids:
    centroids: np.ndarray  # (C, d)
    counts: np.ndarray  # (C,)


def class_centroids(x: np.ndarray, labels, num_classes: int | None = None) -> ClassCentroids:
    labels = np.asarray(labels, dtype=np.int64)
    c = int(labels.max()) + 1 if num_classes is None else num_classes
    counts = np.bincount(labels, minlength=c)
    if np.any(counts == 0):
        raise ValidationError(f"empty class(es): {np.flatnonzero(counts == 0).tolist()}")
    # shifted mean around each class's first member: exact for constant classes
    _, first = np.unique(labels, return_index=True)
    ref = x[first]
    sums = np.zeros((c, x.shape[1]))
    np.add.at(sums, labels, x - ref[labels])
    return ClassCentroids(ref + sums / counts[:, None], counts)


def mean_feature_matrix(x: np.ndarray, labels) -> np.ndarray:
    """Row i is the centroid of node i's class."""
    return class_centroids(x, labels).centroids[np.asarray(labels)]


def feature_noise(x: np.ndarray, labels) -> np.ndarray:
    """Row i is x_i minus its class centroid."""
    return x - mean_feature_matrix(x, labels)


def propagate(adj: NormalizedAdjacency, x: np.ndarray, k: int) -> np.ndarray:
    if k < 0:
        raise ConfigError("k must be >= 0")
    y = x
    for _ in range(k):
        y = spmm(adj.matrix, y)
    return y


def structural_noise(x: np.ndarray, labels, adj: NormalizedAdjacency, k: int) -> np.ndarray:
    """Feature noise of the propagated features Ã^k X."""
    return feature_noise(propagate(adj, x, k), labels)


def correlation_Ek(x: np.ndarray, labels, adj: NormalizedAdjacency, k_max: int) -> np.ndarray:
    """E_k = (1/N) tr(N (Ã^k N)^T) for k = 0..k_max, with N the feature-noise matrix."""
    if k_max < 0:
        raise ConfigError("k_max must be >= 0")
    noise = feature_noise(x, labels)
    n = noise.shape[0]
    out = np.empty(k_max + 1)
    y = noise
    for k in range(k_max + 1):
        if k:
            y = spmm(adj.matrix, y)
        out[k] = float(np.sum(noise * y)) / n
    return out


@dataclass
class SpectralReport:
    eigenvalues: np.ndarray
    frequency_energy: np.ndarray  # per eigenvector: sum_j <w_i, m_j>^2
    spectral_E: np.ndarray
    direct_E: np.ndarray

    @property
    def max_deviation(self) -> float:
        return float(np.max(np.abs(self.spectral_E - self.direct_E)))

    @property
    def max_relative_deviation(self) -> float:
        return float(np.max(np.abs(self.spectral_E - self.direct_E) / (1.0 + np.abs(self.direct_E))))

    def to_json(self) -> dict:
        return {
            "eigenvalues": self.eigenvalues.tolist(),
            "frequency_energy": self.frequency_energy.tolist(),
            "spectral_E": self.spectral_E.tolist(),
            "direct_E": self.direct_E.tolist(),
            "max_deviation": self.max_deviation,
            "max_relative_deviation": self.max_relative_deviation,
        }


def fourier_coefficients(noise: np.ndarray, eigenvectors: np.ndarray) -> np.ndarray:
    """Entry (i, j) is <w_i, m_j>, m_j being column j of the noise matrix."""
    return eigenvectors.T @ noise


def spectral_Ek(x: np.ndarray, labels, adj: NormalizedAdjacency, k_max: int, cap: int = EIG_CAP) -> SpectralReport:
    """E_k from the Laplacian spectrum: (1/N) sum_i (1 - lambda_i)^k sum_j <w_i, m_j>^2."""
    if k_max < 0:
        raise ConfigError("k_max must be >= 0")
    n = adj.shape[0]
    lap = np.eye(n) - adj.dense()
    eig = sym_eig(lap, cap=cap)
    noise = feature_noise(x, labels)
    energy = np.sum(fourier_coefficients(noise, eig.eigenvectors) ** 2, axis=1)
    gamma = 1.0 - eig.eigenvalues
    spec = np.array([float(np.sum(gamma ** k * energy)) / n for k in range(k_max + 1)])
    return SpectralReport(eig.eigenvalues, energy, spec, correlation_Ek(x, labels, adj, k_max))


def ncr(x: np.ndarray, labels) -> np.ndarray:
    """Per class: mean noise norm over the class divided by centroid norm (inf if the centroid is ~0)."""
    labels = np.asarray(labels)
    cc = class_centroids(x, labels)
    norms = np.linalg.norm(x - cc.centroids[labels], axis=1)
    mean_noise = np.bincount(labels, weights=norms, minlength=len(cc.counts)) / cc.counts
    cnorm = np.linalg.norm(cc.centroids, axis=1)
    out = np.full(len(cnorm), math.inf)
    ok = cnorm >= 1e-12
    out[ok] = mean_noise[ok] / cnorm[ok]
    return out


def proposition_check(x: np.ndarray, labels, adj: NormalizedAdjacency, k_max: int) -> np.ndarray:
    """For k = 1..k_max: mean_i |n_i^(k) - r_i^(k)| / (1 + |n_i^(k)|).

    n^(k) is the structural noise of X and r^(k) the feature noise of
    Ã^k X̄, where X̄ replaces each row by its class centroid. Diagnostic only.
    """
    if k_max < 1:
        raise ConfigError("proposition_check needs k_max >= 1")
    xbar = mean_feature_matrix(x, labels)
    y, ybar = x, xbar
    out = np.empty(k_max)
    for k in range(1, k_max + 1):
        y = spmm(adj.matrix, y)
        ybar = spmm(adj.matrix, ybar)
        nk = feature_noise(y, labels)
        rk = feature_noise(ybar, labels)
        out[k - 1] = float(np.mean(np.linalg.norm(nk - rk, axis=1) / (1.0 + np.linalg.norm(nk, axis=1))))
    return out


def lemma_geometry_sweep(norm1: float, norm2: float, angles) -> np.ndarray:
    """Rows (angle, cosine, |v1 + v2|) for two vectors of fixed length at each angle.

    The angle grid must be strictly increasing within [0, pi]; the norm column
    is then strictly decreasing, which is checked.
    """
    if norm1 <= 0 or norm2 <= 0:
        raise ConfigError("norms must be positive")
    a = np.asarray(angles, dtype=np.float64)
    if a.ndim != 1 or len(a) == 0 or a.min() < 0 or a.max() > math.pi or np.any(np.diff(a) <= 0):
        raise ConfigError("angles must be a strictly increasing grid in [0, pi]")
    v1 = np.array([norm1, 0.0])
    table = np.empty((len(a), 3))
    for i, t in enumerate(a):
        v2 = norm2 * np.array([math.cos(t), math.sin(t)])
        table[i] = (t, math.cos(t), math.hypot(*(v1 + v2)))
    if np.any(np.diff(table[:, 2]) >= 0):
        raise ValidationError("aggregated norm is not strictly decreasing on this grid")
    return table


@dataclass
class Histogram:
    edges: np.ndarray
    counts: np.ndarray

    def write_csv(self, path) -> None:
        with open(path, "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["bin_left", "bin_right", "count"])
            for lo, hi, c in zip(self.edges[:-1], self.edges[1:], self.counts):
                w.writerow([repr(float(lo)), repr(float(hi)), int(c)])

    def to_json(self) -> dict:
        return {"edges": self.edges.tolist(), "counts": self.counts.tolist()}


def cosine_histogram(a: np.ndarray, b: np.ndarray, bins: int = 20) -> Histogram:
    """Per-row cosines binned uniformly on [-1, 1] (right edge in the last bin)."""
    if bins < 1:
        raise ConfigError("bins must be >= 1")
    counts, edges = np.histogram(cosine_rows(a, b), bins=bins, range=(-1.0, 1.0))
    return Histogram(edges, counts)


# ------------------------------------------------------------------ reports

@dataclass
class NoiseReport:
    E: np.ndarray
    ncr: np.ndarray
    noise_norms: np.ndarray  # (k_max + 1, N): |n_i^(k)|, row 0 is feature noise
    proposition: np.ndarray
    histograms: list[Histogram]
    edge_homophily: float | None = None
    spectral: SpectralReport | None = None
    noise: np.ndarray | None = None
    structural: list[np.ndarray] | None = None

    def to_json(self, include_matrices: bool = False) -> dict:
        out = {
            "E": self.E.tolist(),
            "ncr": [v if math.isfinite(v) else "inf" for v in self.ncr.tolist()],
            "mean_noise_norm": self.noise_norms.mean(axis=1).tolist(),
            "proposition": self.proposition.tolist(),
            "histograms": {str(k + 1): h.to_json() for k, h in enumerate(self.histograms)},
            "edge_homophily": self.edge_homophily,
            "spectral": self.spectral.to_json() if self.spectral is not None else None,
        }
        if include_matrices and self.noise is not None:
            out["noise"] = self.noise.tolist()
            out["structural_noise"] = [m.tolist() for m in self.structural]
        return out

    def write(self, directory, include_matrices: bool = False) -> None:
        d = Path(directory)
        d.mkdir(parents=True, exist_ok=True)
        (d / "noise_report.json").write_text(json.dumps(self.to_json(include_matrices), indent=2) + "\n",
                                             encoding="utf-8")
        for k, h in enumerate(self.histograms):
            h.write_csv(d / f"cosine_hist_k{k + 1}.csv")


def noise_report(x: np.ndarray, labels, adj: NormalizedAdjacency, k_max: int = 4, bins: int = 20,
                 spectral: bool = True, cap: int = EIG_CAP, homophily: float | None = None) -> NoiseReport:
    """Full analysis: E_k curve, NCR, structural noise per k, the closeness statistic and histograms.

    Histogram k compares feature noise n_i with k-hop structural noise n_i^(k).
    """
    if k_max < 1:
        raise ConfigError("k_max must be >= 1")
    if spectral and adj.shape[0] > cap:
        raise ConfigError(f"spectral analysis needs N <= eigensolver cap {cap}, dataset has N = {adj.shape[0]}")
    base = feature_noise(x, labels)
    structural = [structural_noise(x, labels, adj, k) for k in range(1, k_max + 1)]
    norms = np.stack([np.linalg.norm(m, axis=1) for m in [base, *structural]])
    return NoiseReport(
        E=correlation_Ek(x, labels, adj, k_max),
        ncr=ncr(x, labels),
        noise_norms=norms,
        proposition=proposition_check(x, labels, adj, k_max),
        histograms=[cosine_histogram(base, s, bins) for s in structural],
        edge_homophily=homophily,
        spectral=spectral_Ek(x, labels, adj, k_max, cap) if spectral else None,
        noise=base,
        structural=structural,
    )
