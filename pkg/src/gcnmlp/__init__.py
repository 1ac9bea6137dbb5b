"""GCN-MLP dual-view graph contrastive learning and a feature/structural noise lab."""

from .encoders import Dims, GcnParams, MlpParams, gcn_forward, init_params, mlp_forward
from .evaluation import EvalReport, ProbeConfig, ablation_run, combine_views, evaluate_multiseed, linear_probe
from .graph import DatasetBundle, Graph, load_dataset, normalized_adjacency, save_dataset
from .noise import correlation_Ek, noise_report, spectral_Ek
from .synth import HETEROPHILIC, CsbmConfig, edge_homophily, generate_csbm
from .training import TrainConfig, cosmean_loss, train

__version__ = "0.1.0"
