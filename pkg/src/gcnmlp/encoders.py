"""GCN and MLP view encoders with cached forward passes and exact gradients."""
from __future__ import annotations

import struct
from dataclasses import dataclass, field
from pathlib import Path
from typing import Union

import numpy as np

from .errors import DimensionError, StaleCacheError, ValidationError
from .graph import NormalizedAdjacency
from .numerics import matmul, relu, relu_mask, spmm


@dataclass(eq=False)
class GcnParams:
    weights: list[np.ndarray]
    final_activation: bool = False
    version: int = 0

    def __post_init__(self):
        if not self.weights:
            raise ValidationError("GCN needs at least one layer")
        _check_chain(self.weights)

    @property
    def k(self) -> int:
        return len(self.weights)

    def tensors(self) -> list[np.ndarray]:
        return self.weights


@dataclass(eq=False)
class MlpParams:
    weights: list[np.ndarray]
    biases: list[np.ndarray]
    version: int = 0

    def __post_init__(self):
        if not self.weights or len(self.weights) != len(self.biases):
            raise ValidationError("MLP needs L >= 1 layers with one bias per layer")
        _check_chain(self.weights)
        for w, b in zip(self.weights, self.biases):
            if b.shape != (w.shape[1],):
                raise DimensionError(f"bias shape {b.shape} does not match weight {w.shape}")

    @property
    def num_layers(self) -> int:
        return len(self.weights)

    def tensors(self) -> list[np.ndarray]:
        return [*self.weights, *self.biases]


Encoder = Union[GcnParams, MlpParams]


def _check_chain(weights):
    for a, b in zip(weights, weights[1:]):
        if a.shape[1] != b.shape[0]:
            raise DimensionError(f"layer dims do not chain: {a.shape} -> {b.shape}")


@dataclass(frozen=True)
class Dims:
    in_dim: int
    hidden_dim: int = 256
    gcn_layers: int = 2
    mlp_layers: int = 1


def glorot(rng: np.random.Generator, fan_in: int, fan_out: int) -> np.ndarray:
    bound = np.sqrt(6.0 / (fan_in + fan_out))
    return rng.uniform(-bound, bound, size=(fan_in, fan_out))


def init_gcn(rng, dims: Dims, final_activation: bool = False) -> GcnParams:
    sizes = [dims.in_dim] + [dims.hidden_dim] * dims.gcn_layers
    return GcnParams([glorot(rng, a, b) for a, b in zip(sizes, sizes[1:])], final_activation)


def init_mlp(rng, dims: Dims) -> MlpParams:
    sizes = [dims.in_dim] + [dims.hidden_dim] * dims.mlp_layers
    ws = [glorot(rng, a, b) for a, b in zip(sizes, sizes[1:])]
    return MlpParams(ws, [np.zeros(w.shape[1]) for w in ws])


def init_params(seed: int, dims: Dims, final_activation: bool = False) -> tuple[GcnParams, MlpParams]:
    """Glorot-uniform weights and zero biases; GCN drawn first, then MLP."""
    if dims.gcn_layers < 1 or dims.mlp_layers < 1 or dims.in_dim < 1 or dims.hidden_dim < 1:
        raise ValidationError(f"invalid dims {dims}")
    rng = np.random.default_rng(seed)
    gcn = init_gcn(rng, dims, final_activation)
    return gcn, init_mlp(rng, dims)


# ------------------------------------------------------------------ forward

@dataclass
class ForwardCache:
    params: Encoder
    version: int
    inputs: list[np.ndarray] = field(default_factory=list)  # per layer: Ã H (gcn) or H (mlp)
    preact: list[np.ndarray] = field(default_factory=list)

    def check(self):
        if self.version != self.params.version:
            raise StaleCacheError("parameters changed since this forward pass")


def gcn_forward(p: GcnParams, adj: NormalizedAdjacency, x: np.ndarray):
    """H <- sigma(Ã H W) per layer. Returns (Z_s, cache)."""
    n = adj.shape[0]
    if x.shape[0] != n or x.shape[1] != p.weights[0].shape[0]:
        raise DimensionError(f"gcn_forward: adjacency {adj.shape}, x {x.shape}, W0 {p.weights[0].shape}")
    cache = ForwardCache(p, p.version)
    h = x
    for layer, w in enumerate(p.weights):
        ah = spmm(adj.matrix, h)
        u = matmul(ah, w)
        cache.inputs.append(ah)
        cache.preact.append(u)
        last = layer == p.k - 1
        h = relu(u) if (not last or p.final_activation) else u
    return h, cache


def mlp_forward(p: MlpParams, x: np.ndarray):
    if x.shape[1] != p.weights[0].shape[0]:
        raise DimensionError(f"mlp_forward: x {x.shape}, W0 {p.weights[0].shape}")
    cache = ForwardCache(p, p.version)
    h = x
    for layer, (w, b) in enumerate(zip(p.weights, p.biases)):
        u = matmul(h, w) + b
        cache.inputs.append(h)
        cache.preact.append(u)
        h = relu(u) if layer < p.num_layers - 1 else u
    return h, cache


def forward(p: Encoder, adj: NormalizedAdjacency, x: np.ndarray):
    if isinstance(p, GcnParams):
        return gcn_forward(p, adj, x)
    return mlp_forward(p, x)


# ----------------------------------------------------------------- backward

def gcn_backward(cache: ForwardCache, adj: NormalizedAdjacency, dz: np.ndarray) -> list[np.ndarray]:
    """Gradients for each W^(l). Relies on Ã being symmetric."""
    cache.check()
    p = cache.params
    grads = [None] * p.k
    g = dz
    for layer in range(p.k - 1, -1, -1):
        last = layer == p.k - 1
        delta = g * relu_mask(cache.preact[layer]) if (not last or p.final_activation) else g
        grads[layer] = cache.inputs[layer].T @ delta
        if layer:
            g = spmm(adj.matrix, delta @ p.weights[layer].T)
    return grads


def mlp_backward(cache: ForwardCache, dz: np.ndarray) -> tuple[list[np.ndarray], list[np.ndarray]]:
    cache.check()
    p = cache.params
    gw, gb = [None] * p.num_layers, [None] * p.num_layers
    g = dz
    for layer in range(p.num_layers - 1, -1, -1):
        delta = g * relu_mask(cache.preact[layer]) if layer < p.num_layers - 1 else g
        gw[layer] = cache.inputs[layer].T @ delta
        gb[layer] = delta.sum(axis=0)
        if layer:
            g = delta @ p.weights[layer].T
    return gw, gb


def backward(cache: ForwardCache, adj: NormalizedAdjacency, dz: np.ndarray) -> list[np.ndarray]:
    """Gradients in the same order as ``cache.params.tensors()``."""
    if isinstance(cache.params, GcnParams):
        return gcn_backward(cache, adj, dz)
    gw, gb = mlp_backward(cache, dz)
    return [*gw, *gb]


# --------------------------------------------------------------- checkpoint
# b"HGCL1", u32 view count, then per view: u8 kind (0 gcn / 1 mlp),
# u8 final_activation, u32 layers, u32 rows and u32 cols per layer.
# Payload: per view, weights row-major f64 LE, then (mlp) biases.

MAGIC = b"HGCL1"


def save_checkpoint(path, views: list[Encoder]) -> None:
    header = [MAGIC, struct.pack("<I", len(views))]
    payload = []
    for v in views:
        gcn = isinstance(v, GcnParams)
        header.append(struct.pack("<BBI", 0 if gcn else 1, int(gcn and v.final_activation), len(v.weights)))
        for w in v.weights:
            header.append(struct.pack("<II", *w.shape))
        payload.extend(np.ascontiguousarray(t, dtype="<f8").tobytes() for t in v.tensors())
    Path(path).write_bytes(b"".join(header + payload))


def load_checkpoint(path) -> list[Encoder]:
    buf = Path(path).read_bytes()
    if buf[:5] != MAGIC:
        raise ValidationError(f"{path}: not a checkpoint (bad magic)")
    off = 5
    (nviews,) = struct.unpack_from("<I", buf, off)
    off += 4
    specs = []
    for _ in range(nviews):
        kind, fa, layers = struct.unpack_from("<BBI", buf, off)
        off += 6
        shapes = []
        for _ in range(layers):
            shapes.append(struct.unpack_from("<II", buf, off))
            off += 8
        specs.append((kind, bool(fa), shapes))

    def take(shape):
        nonlocal off
        count = int(np.prod(shape))
        a = np.frombuffer(buf, dtype="<f8", count=count, offset=off).astype(np.float64).reshape(shape)
        off += 8 * count
        return a

    views: list[Encoder] = []
    for kind, fa, shapes in specs:
        ws = [take(s) for s in shapes]
        if kind == 0:
            views.append(GcnParams(ws, fa))
        else:
            views.append(MlpParams(ws, [take((s[1],)) for s in shapes]))
    if off != len(buf):
        raise ValidationError(f"{path}: trailing bytes in checkpoint")
    return views
