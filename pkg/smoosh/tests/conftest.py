"""Shared fixtures for the numerical unit tests."""

import numpy as np
import pytest

from smoosh.models.discrete_motion import DirectionLaw, GatherMode, ModelConfig
from smoosh.models.geometry import Table


# ===== Test Fixtures =====

@pytest.fixture
def rng():
    """Fresh generator with a fixed seed"""
    return np.random.default_rng(12345)


@pytest.fixture
def unit_table():
    """Unit table with palm radius 0.2"""
    return Table.unit(0.2)


@pytest.fixture
def model(unit_table):
    """Discrete model on the unit table, gathering on every event"""
    return ModelConfig(table=unit_table, s0=0.1, p=0.5, lam=1.0,
                       direction=DirectionLaw.four_axis(), gather_mode=GatherMode.EVERY_EVENT)


@pytest.fixture
def spread_only_model(unit_table):
    """Discrete model that never gathers"""
    return ModelConfig(table=unit_table, s0=0.1, p=0.5, lam=1.0, gather_mode=GatherMode.NEVER)
