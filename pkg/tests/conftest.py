"""
Pytest configuration and shared fixtures.
"""

import os

import numpy as np
import pytest

from sasr.config import RunConfig, SacConfig
from sasr.density import StorePair
from sasr.rff import new_projector
from sasr.shaping import ShapingConfig


def pytest_collection_modifyitems(config, items):
    """Skip ``slow`` tests unless SASR_RUN_SLOW=1."""
    if os.environ.get("SASR_RUN_SLOW") == "1":
        return
    skip_slow = pytest.mark.skip(reason="set SASR_RUN_SLOW=1 to run")
    for item in items:
        if "slow" in item.keywords:
            item.add_marker(skip_slow)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture
def projector():
    """2-D Gaussian projector with a modest feature count."""
    return new_projector(state_dim=2, feature_dim=256, bandwidth=0.5, seed=7)


@pytest.fixture
def stores():
    return StorePair.empty(256, 1.0)


@pytest.fixture
def tiny_sac():
    return SacConfig(batch_size=32, burn_in=100, hidden_sizes=(16, 16), buffer_size=10_000)


@pytest.fixture
def tiny_config(tmp_path, tiny_sac):
    """A SparseChain run that finishes in well under a second per seed."""
    return RunConfig(
        env="sparse-chain",
        total_steps=300,
        seeds=(0,),
        shaping=ShapingConfig(feature_dim=64),
        sac=tiny_sac,
        out_dir=str(tmp_path / "runs"),
        eval_interval=100,
        eval_episodes=2,
        log_window=100,
    )


@pytest.fixture
def config_file(tmp_path):
    """Factory writing a key = value config file under tmp_path."""

    def write(name="run.cfg", **values):
        path = tmp_path / name
        path.write_text("".join(f"{key} = {value}\n" for key, value in values.items()))
        return path

    return write
