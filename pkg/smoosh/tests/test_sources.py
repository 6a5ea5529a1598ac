"""Unit Tests for the point-motion sources driven by the coupling engine."""

import math

import numpy as np
import pytest

from smoosh.core.types import MeetEvent, PointMotionSource
from smoosh.models.diffusion_model import DiffusionConfig
from smoosh.models.discrete_motion import GatherMode, ModelConfig
from smoosh.models.geometry import Table
from smoosh.models.lattice_1d import LatticeConfig
from smoosh.models.sources import DiscreteMotionSource, JumpDiffusionSource, LatticeSource


@pytest.fixture
def big_palm():
    """Discrete model whose palm covers most of the table"""
    return ModelConfig(table=Table.unit(0.6), s0=0.1, p=0.5, lam=1.0)


# ===== Protocol conformance =====

class TestProtocol:
    """Test every source satisfies PointMotionSource"""

    def test_runtime_check(self, rng, big_palm):
        """Test isinstance against the protocol"""
        sources = [
            LatticeSource(LatticeConfig(4, 2, 0.5), [1, 4], rng),
            DiscreteMotionSource(big_palm, [(0.2, 0.2), (0.8, 0.8)], rng),
            JumpDiffusionSource(DiffusionConfig(0.4, 0.5, dt=1e-2), [(0.2, 0.2), (0.8, 0.8)], rng),
        ]
        for source in sources:
            assert isinstance(source, PointMotionSource)
            assert source.m == 2
            assert source.time == 0.0
            assert source.rank_keys().shape == (2,)


# ===== Lattice =====

class TestLatticeSource:
    """Test the lattice source"""

    def test_meet_at_current_time(self, rng):
        """Test co-located cards are reported without advancing"""
        source = LatticeSource(LatticeConfig(5, 3, 0.5), [2, 2, 5], rng)
        assert source.advance_until_meet([(0, 1)], horizon=100) == MeetEvent(0.0, (0, 1))
        assert source.time == 0.0

    def test_horizon_without_meet(self, rng):
        """Test None at the horizon and the clock stopped there"""
        source = LatticeSource(LatticeConfig(50, 2, 0.1), [1, 50], rng)
        assert source.advance_until_meet([(0, 1)], horizon=10) is None
        assert source.time == 10.0

    def test_first_listed_pair_wins(self, rng):
        """Test the pair order breaks simultaneous meets"""
        source = LatticeSource(LatticeConfig(5, 4, 0.5), [3, 3, 3, 3], rng)
        assert source.advance_until_meet([(2, 3), (0, 1)], horizon=5).pair == (2, 3)

    def test_eventual_meet(self):
        """Test two cards on a small lattice meet"""
        source = LatticeSource(LatticeConfig(4, 2, 0.5), [1, 4], np.random.default_rng(3))
        meet = source.advance_until_meet([(0, 1)], horizon=1e6)
        assert meet is not None
        positions = source.state.positions
        assert positions[0] == positions[1]

    def test_advance_to(self, rng):
        """Test stepping the clock"""
        source = LatticeSource(LatticeConfig(4, 2, 0.5), [1, 4], rng)
        source.advance_to(7)
        assert source.time == 7.0


# ===== Discrete model =====

class TestDiscreteMotionSource:
    """Test the discrete-model source"""

    def test_meet_is_exact_equality(self, big_palm):
        """Test a reported meet has identical positions"""
        source = DiscreteMotionSource(big_palm, [(0.2, 0.2), (0.8, 0.8)], np.random.default_rng(1))
        meet = source.advance_until_meet([(0, 1)], horizon=1e6)
        assert meet is not None
        assert np.array_equal(source.positions[0], source.positions[1])
        assert meet.time == source.time > 0.0

    def test_no_gather_no_meet(self, rng):
        """Test spread-only dynamics never merge distinct cards"""
        model = ModelConfig(table=Table.unit(0.3), s0=0.1, p=0.5, gather_mode=GatherMode.NEVER)
        source = DiscreteMotionSource(model, [(0.2, 0.2), (0.8, 0.8)], rng)
        assert source.advance_until_meet([(0, 1)], horizon=5.0) is None
        assert source.time == 5.0

    def test_resume_keeps_pending_event(self, big_palm):
        """Test stopping at a horizon and resuming replays the same event sequence"""
        a = DiscreteMotionSource(big_palm, [(0.2, 0.2), (0.8, 0.8)], np.random.default_rng(9))
        b = DiscreteMotionSource(big_palm, [(0.2, 0.2), (0.8, 0.8)], np.random.default_rng(9))
        a.advance_to(3.0)
        a.advance_to(6.0)
        b.advance_to(6.0)
        np.testing.assert_array_equal(a.positions, b.positions)


# ===== Jump-diffusion =====

class TestJumpDiffusionSource:
    """Test the jump-diffusion source"""

    def test_meets_happen_at_gathers(self):
        """Test the reported meet coincides with a gather epoch"""
        source = JumpDiffusionSource(DiffusionConfig(0.6, 0.5, dt=1e-2), [(0.25, 0.5), (0.75, 0.5)],
                                     np.random.default_rng(4))
        meet = source.advance_until_meet([(0, 1)], horizon=1e4)
        assert meet is not None
        assert source.epochs >= 1
        assert np.array_equal(source.state.positions[0], source.state.positions[1])

    def test_advance_to_finite_time(self, rng):
        """Test the clock reaches the requested time"""
        source = JumpDiffusionSource(DiffusionConfig(0.3, 0.5, dt=1e-2), [(0.25, 0.5), (0.75, 0.5)], rng)
        source.advance_to(2.5)
        assert source.time == pytest.approx(2.5)

    def test_no_gathers_never_meet(self, rng):
        """Test gather_rate = 0 with an infinite horizon returns immediately"""
        config = DiffusionConfig(0.3, 0.5, dt=1e-2, gather_rate=0.0)
        source = JumpDiffusionSource(config, [(0.25, 0.5), (0.75, 0.5)], rng)
        assert source.advance_until_meet([(0, 1)], horizon=math.inf) is None

    def test_shared_corner_at_epoch_is_reported(self, rng):
        """Test two cards in the same corner at the start meet at time zero"""
        source = JumpDiffusionSource(DiffusionConfig(0.3, 0.5, dt=1e-2), [(0.0, 0.0), (0.0, 0.0)], rng)
        meet = source.advance_until_meet([(0, 1)], horizon=1.0)
        assert meet == MeetEvent(0.0, (0, 1))
