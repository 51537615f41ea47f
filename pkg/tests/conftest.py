"""Gemeinsame Fixtures."""

import numpy as np
import pytest

from netrobust.core.graph_models import Graph
from netrobust.core.posteriors import WeightedSample
from netrobust.utils.rng import make_rng


@pytest.fixture
def rng():
    return make_rng(12345)


@pytest.fixture
def triangle():
    return Graph.from_edges(3, [[0, 1], [1, 2], [0, 2]])


@pytest.fixture
def path3():
    return Graph.from_edges(3, [[0, 1], [1, 2]])


@pytest.fixture
def coin_sample():
    """w = (½, ½), L = (0, 1)"""
    return WeightedSample([0.0, 1.0], [0.5, 0.5], losses=[0.0, 1.0])


def random_sample(rng: np.random.Generator, size: int) -> WeightedSample:
    """Dirichlet-Gewichte und gaußsche Verluste mit paarweise verschiedenen Werten."""
    weights = rng.dirichlet(np.ones(size))
    losses = rng.normal(size=size)
    return WeightedSample.from_unnormalized(np.arange(size, dtype=float), weights, losses)


@pytest.fixture
def make_sample():
    return random_sample
