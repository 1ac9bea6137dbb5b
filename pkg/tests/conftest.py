import os

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from gcnmlp.graph import Graph

settings.register_profile("dev", max_examples=40, deadline=None, suppress_health_check=[HealthCheck.too_slow])
settings.register_profile("thorough", max_examples=400, deadline=None, suppress_health_check=[HealthCheck.too_slow])
settings.register_profile("fast", max_examples=5, deadline=None)
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "dev"))


def er_graph(rng, n, p):
    iu, ju = np.triu_indices(n, k=1)
    hit = rng.random(len(iu)) < p
    return Graph.from_edges(n, np.stack([iu[hit], ju[hit]], axis=1))


def balanced_labels(rng, n, c):
    return rng.permutation(np.arange(n) % c)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture(scope="session")
def csbm_runs():
    """Ten seeds of all three variants on the heterophilic CSBM (shared by several modules)."""
    import time

    from gcnmlp.evaluation import ProbeConfig, run_seed
    from gcnmlp.synth import HETEROPHILIC, generate_csbm
    from gcnmlp.training import TrainConfig

    data = generate_csbm(HETEROPHILIC)
    tic = time.perf_counter()
    runs = {}
    for variant in ("gcn-mlp", "gcn-gcn", "mlp-mlp"):
        cfg = TrainConfig(variant=variant)
        runs[variant] = [run_seed(data, cfg, ProbeConfig(), s, i) for i, s in enumerate(range(1, 11))]
    return {"data": data, "runs": runs, "seconds": time.perf_counter() - tic}


def pytest_terminal_summary(terminalreporter):
    from acceptance_log import LINES

    if LINES:
        terminalreporter.section("acceptance criteria")
        for n in sorted(LINES):
            terminalreporter.write_line(LINES[n])
