"""JSON run configuration shared by the CLI and the scripts."""
from __future__ import annotations

import dataclasses
import json
from dataclasses import dataclass, field
from pathlib import Path

from .errors import ConfigError
from .evaluation import DEFAULT_BETA_GRID, ProbeConfig
from .graph import DatasetBundle, dataset_from_paths
from .numerics import EIG_CAP
from .synth import CsbmConfig, generate_csbm
from .training import VARIANTS, TrainConfig


@dataclass(frozen=True)
class AnalysisConfig:
    k_max: int = 4
    bins: int = 20
    spectral: bool = True
    self_loops: bool = False
    cap: int = EIG_CAP
    include_matrices: bool = False


@dataclass(frozen=True)
class AttackSweepConfig:
    rates: tuple[float, ...] = (0.0, 0.05, 0.10, 0.15, 0.20, 0.25)
    variants: tuple[str, ...] = ("gcn-mlp", "gcn-gcn")
    seed: int = 0


@dataclass(frozen=True)
class SweepConfig:
    hidden_dims: tuple[int, ...] = (32, 64, 128, 256)
    gcn_layers: tuple[int, ...] = (1, 2, 3, 4)


@dataclass(frozen=True)
class RunConfig:
    synthetic: CsbmConfig | None = None
    paths: dict | None = None
    num_classes: int | None = None
    train: TrainConfig = field(default_factory=TrainConfig)
    probe: ProbeConfig = field(default_factory=ProbeConfig)
    beta_grid: tuple[float, ...] = DEFAULT_BETA_GRID
    seeds: tuple[int, ...] = tuple(range(10))
    out: Path = Path("runs/out")
    analysis: AnalysisConfig = field(default_factory=AnalysisConfig)
    attack: AttackSweepConfig = field(default_factory=AttackSweepConfig)
    ablate_variants: tuple[str, ...] = VARIANTS
    sweep: SweepConfig = field(default_factory=SweepConfig)

    def __post_init__(self):
        if (self.synthetic is None) == (self.paths is None):
            raise ConfigError("exactly one dataset source (synthetic or paths) is required")
        if not self.seeds:
            raise ConfigError("seeds must be nonempty")
        if not self.beta_grid or any(not 0 <= b <= 1 for b in self.beta_grid):
            raise ConfigError("beta grid must be nonempty with values in [0, 1]")
        for v in (*self.attack.variants, *self.ablate_variants):
            if v not in VARIANTS:
                raise ConfigError(f"unknown variant {v!r}")

    def load_dataset(self) -> DatasetBundle:
        if self.synthetic is not None:
            return generate_csbm(self.synthetic)
        return dataset_from_paths(self.paths, self.num_classes)


def _build(cls, obj, where):
    if obj is None:
        return cls()
    if not isinstance(obj, dict):
        raise ConfigError(f"{where}: expected an object")
    names = {f.name for f in dataclasses.fields(cls)}
    unknown = set(obj) - names
    if unknown:
        raise ConfigError(f"{where}: unknown key(s) {sorted(unknown)}")
    kwargs = {k: tuple(v) if isinstance(v, list) else v for k, v in obj.items()}
    try:
        return cls(**kwargs)
    except TypeError as exc:
        raise ConfigError(f"{where}: {exc}") from None


_TOP_KEYS = {"dataset", "train", "probe", "beta", "beta_grid", "seeds", "out", "analysis", "attack", "ablate", "sweep"}


def run_config_from_dict(obj: dict, base_dir=".") -> RunConfig:
    """Parse a config dict. Relative dataset and output paths resolve against ``base_dir``."""
    if not isinstance(obj, dict):
        raise ConfigError("config must be a JSON object")
    unknown = set(obj) - _TOP_KEYS
    if unknown:
        raise ConfigError(f"unknown top-level key(s) {sorted(unknown)}")
    base = Path(base_dir)
    ds = obj.get("dataset") or {}
    if not isinstance(ds, dict) or set(ds) - {"synthetic", "paths", "num_classes"}:
        raise ConfigError("dataset: expected an object with keys synthetic | paths, num_classes")
    ablate = obj.get("ablate") or {}
    if not isinstance(ablate, dict) or set(ablate) - {"variants"}:
        raise ConfigError("ablate: expected an object with key variants")
    synthetic = paths = None
    if "synthetic" in ds:
        synthetic = _build(CsbmConfig, ds["synthetic"], "dataset.synthetic")
    if "paths" in ds:
        p = ds["paths"]
        missing = {"edges", "features", "labels", "splits"} - set(p)
        if missing:
            raise ConfigError(f"dataset.paths missing {sorted(missing)}")
        paths = {k: base / v for k, v in p.items()}
    grid = obj.get("beta_grid", DEFAULT_BETA_GRID)
    if obj.get("beta") is not None:
        grid = (float(obj["beta"]),)
    return RunConfig(
        synthetic=synthetic,
        paths=paths,
        num_classes=ds.get("num_classes"),
        train=_build(TrainConfig, obj.get("train"), "train"),
        probe=_build(ProbeConfig, obj.get("probe"), "probe"),
        beta_grid=tuple(float(b) for b in grid),
        seeds=tuple(int(s) for s in obj.get("seeds", range(10))),
        out=base / obj.get("out", "runs/out"),
        analysis=_build(AnalysisConfig, obj.get("analysis"), "analysis"),
        attack=_build(AttackSweepConfig, obj.get("attack"), "attack"),
        ablate_variants=tuple(ablate.get("variants", VARIANTS)),
        sweep=_build(SweepConfig, obj.get("sweep"), "sweep"),
    )


def load_run_config(path) -> RunConfig:
    path = Path(path)
    try:
        obj = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: invalid JSON ({exc})") from None
    return run_config_from_dict(obj, path.parent)
