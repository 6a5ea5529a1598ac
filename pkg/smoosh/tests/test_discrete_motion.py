"""
Unit Tests for the discrete gather-and-spread model

Direction laws, the gather/spread/step maps, the event stream, full
simulation, one-card batches, cluster counting and path swapping.
"""

import math

import numpy as np
import pytest
from scipy import stats

from smoosh.core.errors import EventStreamError, ParameterError
from smoosh.models.discrete_motion import (
    DirectionKind,
    DirectionLaw,
    EventAtom,
    EventStream,
    GatherMode,
    ModelConfig,
    count_clusters,
    gather,
    next_event,
    rank_to_index,
    simulate,
    simulate_one_point_batch,
    spread,
    step,
    swap_paths,
)
from smoosh.models.geometry import Point2, Table


def _atom(center, angle, coins, gather_flag=True, time=1.0):
    return EventAtom(time=time, center=Point2(*center), angle=angle,
                     coins=np.asarray(coins, dtype=bool), gather_flag=gather_flag)


# ===== Direction laws =====

class TestDirectionLaw:
    """Test direction laws and their moment check"""

    def test_builtin_laws_have_half_variance(self):
        """Test sigma^2 = 1/2 for the uniform and four-axis laws"""
        assert DirectionLaw.uniform().sigma2 == 0.5
        assert DirectionLaw.four_axis().sigma2 == pytest.approx(0.5)

    def test_biased_custom_rejected(self):
        """Test that a single direction fails the moment check"""
        with pytest.raises(ParameterError):
            DirectionLaw.custom([(0.0, 1.0)])

    def test_eight_axis_custom_accepted(self):
        """Test a symmetric custom law"""
        law = DirectionLaw.custom([(k * math.pi / 4, 0.125) for k in range(8)])
        assert law.kind is DirectionKind.CUSTOM
        assert law.sigma2 == pytest.approx(0.5)

    def test_weights_must_sum_to_one(self):
        """Test weight normalisation"""
        with pytest.raises(ParameterError):
            DirectionLaw.custom([(k * math.pi / 2, 0.3) for k in range(4)])

    def test_from_name(self):
        """Test lookup by config name"""
        assert DirectionLaw.from_name('four_axis').kind is DirectionKind.FOUR_AXIS
        with pytest.raises(ParameterError):
            DirectionLaw.from_name('diagonal')

    def test_four_axis_samples(self, rng):
        """Test that four-axis draws are multiples of pi/2"""
        angles = DirectionLaw.four_axis().sample(rng, size=100)
        assert np.allclose(np.sin(2 * angles), 0.0)


class TestModelConfig:
    """Test model parameter validation"""

    def test_p_must_be_below_one(self, unit_table):
        """Test p = 1 is rejected in the 2D model"""
        with pytest.raises(ParameterError):
            ModelConfig(table=unit_table, s0=0.1, p=1.0)

    def test_rare_gather_needs_large_lambda(self, unit_table):
        """Test 1/lam must be a probability"""
        with pytest.raises(ParameterError):
            ModelConfig(table=unit_table, s0=0.1, p=0.5, lam=0.5, gather_mode=GatherMode.RARE_GATHER)

    def test_diffusion_scaled(self, unit_table):
        """Test lam = n, s0 = 1/sqrt(n) and gather probability 1/n"""
        config = ModelConfig.diffusion_scaled(100, unit_table, 0.5)
        assert config.lam == 100.0
        assert config.s0 == pytest.approx(0.1)
        assert config.gather_probability == pytest.approx(0.01)

    def test_event_rate(self, model):
        """Test the event rate is lam times the area of the extended table"""
        assert model.event_rate == pytest.approx(model.table.extended_area)


# ===== Gather, spread, step =====

class TestGather:
    """Test gathering"""

    def test_docstring_example(self):
        """Test only the covered card moves to the centre"""
        out = gather([(0.6, 0.6), (0.9, 0.9)], (0.5, 0.5), Table.unit(0.2))
        np.testing.assert_array_equal(out, [[0.5, 0.5], [0.9, 0.9]])

    def test_centre_outside_table_is_clamped(self):
        """Test gathering at a centre in the rim of the extended table"""
        out = gather([(0.05, 0.5)], (-0.1, 0.5), Table.unit(0.2))
        np.testing.assert_array_equal(out, [[0.0, 0.5]])

    def test_invalid_centre(self):
        """Test a centre beyond the rim"""
        with pytest.raises(EventStreamError):
            gather([(0.5, 0.5)], (2.0, 2.0), Table.unit(0.2))

    def test_input_untouched(self):
        """Test that gather returns a copy"""
        pos = np.array([[0.5, 0.5]])
        gather(pos, (0.5, 0.5), Table.unit(0.2))
        assert pos[0, 0] == 0.5

    def test_empty_configuration(self):
        """Test m = 0"""
        assert gather(np.empty((0, 2)), (0.5, 0.5), Table.unit(0.2)).shape == (0, 2)


class TestSpread:
    """Test spreading"""

    def test_heads_move_tails_stay(self):
        """Test only covered cards with heads move"""
        out = spread([(0.5, 0.5), (0.55, 0.5), (0.9, 0.9)], (0.5, 0.5), 0.0, 0.1,
                     [True, False, True], Table.unit(0.2))
        np.testing.assert_allclose(out, [[0.6, 0.5], [0.55, 0.5], [0.9, 0.9]])

    def test_coordinate_clamp(self):
        """Test a card pushed past the edge stops on it"""
        out = spread([(0.95, 0.5)], (0.95, 0.5), 0.0, 0.1, [True], Table.unit(0.2))
        np.testing.assert_allclose(out, [[1.0, 0.5]])

    def test_coin_count_mismatch(self):
        """Test one coin per card is required"""
        with pytest.raises(ParameterError):
            spread([(0.5, 0.5)], (0.5, 0.5), 0.0, 0.1, [True, True], Table.unit(0.2))


class TestStep:
    """Test one full event"""

    def test_gather_then_spread(self, model):
        """Test both covered cards are gathered and only the heads card then moves"""
        atom = _atom((0.5, 0.5), 0.0, [True, False])
        out = step([(0.45, 0.5), (0.55, 0.5)], atom, model)
        np.testing.assert_allclose(out, [[0.6, 0.5], [0.5, 0.5]])

    def test_no_gather_flag(self, model):
        """Test a spread-only event"""
        atom = _atom((0.5, 0.5), math.pi / 2, [True, True], gather_flag=False)
        out = step([(0.45, 0.5), (0.55, 0.5)], atom, model)
        np.testing.assert_allclose(out, [[0.45, 0.6], [0.55, 0.6]])

    def test_tails_card_sits_on_gather_point(self, model):
        """Test that a card with tails ends exactly on the clamped centre"""
        atom = _atom((0.3, 1.1), 0.0, [False])
        out = step([(0.35, 0.95)], atom, model)
        np.testing.assert_array_equal(out, [[0.3, 1.0]])


# ===== Event stream =====

class TestEventStream:
    """Test palm-event generation"""

    def test_next_event_fields(self, rng, model):
        """Test an atom's time, centre and coins"""
        atom = next_event(rng, model, m=4, last_time=2.0)
        assert atom.time > 2.0
        assert model.table.in_extended(atom.center)
        assert atom.coins.shape == (4,)
        assert atom.gather_flag is True
        assert len(atom.coin_bits()) == 4

    def test_never_gather(self, rng, spread_only_model):
        """Test gather flags under GatherMode.NEVER"""
        assert not any(next_event(rng, spread_only_model, 2).gather_flag for _ in range(20))

    def test_peek_does_not_consume(self, rng, model):
        """Test that peek returns the same atom until pop"""
        stream = EventStream(rng, model, 2)
        first = stream.peek()
        assert stream.peek() is first
        assert stream.pop() is first
        assert stream.peek().time > first.time

    def test_interarrival_rate(self, model):
        """Test the mean waiting time is 1 / (lam |D̄|)"""
        rng = np.random.default_rng(3)
        gaps = [next_event(rng, model, 1).time for _ in range(20_000)]
        expected = 1.0 / model.event_rate
        assert abs(np.mean(gaps) - expected) < 4 * expected / math.sqrt(len(gaps))


# ===== Simulation =====

class TestSimulate:
    """Test the m-point motion driver"""

    def test_zero_horizon(self, rng, model):
        """Test that horizon 0 returns the initial configuration"""
        path = simulate(model, [(0.2, 0.2), (0.8, 0.8)], 0.0, rng)
        assert path.times.tolist() == [0.0]
        np.testing.assert_array_equal(path.final, [[0.2, 0.2], [0.8, 0.8]])

    def test_cards_stay_on_table(self, rng, model):
        """Test containment and increasing jump times"""
        path = simulate(model, rng.random((6, 2)), 30.0, rng, record_events=True)
        assert model.table.contains(path.positions.reshape(-1, 2))
        assert np.all(np.diff(path.times) > 0)
        assert len(path.events) == path.times.size - 1
        assert path.horizon == 30.0

    def test_reproducible(self, model):
        """Test identical seeds give identical paths"""
        a = simulate(model, [(0.3, 0.3), (0.6, 0.6)], 20.0, np.random.default_rng(9))
        b = simulate(model, [(0.3, 0.3), (0.6, 0.6)], 20.0, np.random.default_rng(9))
        np.testing.assert_array_equal(a.positions, b.positions)

    def test_max_events(self, rng, model):
        """Test truncation at an event cap"""
        path = simulate(model, [(0.5, 0.5)], 1e9, rng, max_events=25)
        assert path.times.size == 26
        assert path.horizon == path.times[-1]

    def test_endpoints_only(self, rng, model):
        """Test record_path=False keeps the start and the end"""
        path = simulate(model, [(0.5, 0.5)], 50.0, rng, record_path=False)
        assert path.positions.shape[0] == 2

    def test_initial_off_table(self, rng, model):
        """Test that cards must start on the table"""
        with pytest.raises(ParameterError):
            simulate(model, [(1.5, 0.5)], 1.0, rng)

    def test_at_is_right_continuous(self, rng, model):
        """Test lookup at a jump time returns the post-jump configuration"""
        path = simulate(model, [(0.5, 0.5)], 10.0, rng)
        if path.times.size > 1:
            np.testing.assert_array_equal(path.at(path.times[1]), path.positions[1])
        with pytest.raises(ParameterError):
            path.at(-1.0)

    def test_gathers_form_clusters(self, model):
        """Test that many events merge cards into fewer heaps"""
        rng = np.random.default_rng(5)
        path = simulate(model, rng.random((40, 2)), 200.0, rng, record_path=False)
        assert count_clusters(path.final, model.table).n_clusters < 40


class TestExchangeability:
    """Test that co-located cards are exchangeable"""

    def test_swapped_paths_share_the_law(self, model):
        """Test card 0 and card 1 started together have the same final x law"""
        rng = np.random.default_rng(17)
        finals = np.array([simulate(model, [(0.5, 0.5), (0.5, 0.5), (0.2, 0.8)], 4.0, rng,
                                    record_path=False).final[:2, 0] for _ in range(1500)])
        assert stats.ks_2samp(finals[:, 0], finals[:, 1]).pvalue > 1e-3

    def test_swap_paths(self, rng, model):
        """Test the post-processor exchanges two trajectories"""
        path = simulate(model, [(0.1, 0.1), (0.9, 0.9), (0.5, 0.5)], 5.0, rng)
        swapped = swap_paths(path, 0, 1)
        np.testing.assert_array_equal(swapped.positions[:, 0], path.positions[:, 1])
        np.testing.assert_array_equal(swapped.positions[:, 2], path.positions[:, 2])


# ===== Orders and one-card batches =====

class TestRankToIndex:
    """Test the rank-to-index permutation"""

    def test_docstring_example(self):
        """Test distinct keys"""
        assert rank_to_index([0.2, 0.7, 0.4], np.random.default_rng(0)).tolist() == [0, 2, 1]

    def test_ties_are_uniform(self):
        """Test tied keys are ordered by fair coin"""
        rng = np.random.default_rng(1)
        firsts = [rank_to_index([0.5, 0.5], rng)[0] for _ in range(4000)]
        assert abs(np.mean(firsts) - 0.5) < 4 * 0.5 / math.sqrt(4000)

    def test_empty_rejected(self, rng):
        """Test at least one key is needed"""
        with pytest.raises(ParameterError):
            rank_to_index([], rng)


class TestOnePointBatch:
    """Test the vectorised one-card sampler"""

    def test_zero_replicas(self, rng, model):
        """Test an empty batch"""
        assert simulate_one_point_batch(model, (0.5, 0.5), 1.0, 0, rng).shape == (0, 2)

    def test_variance_matches_event_count(self):
        """Test Var x = lam pi delta^2 t p s0^2 / 2 away from the walls"""
        config = ModelConfig(table=Table.unit(0.2), s0=0.01, p=0.5, lam=100.0, gather_mode=GatherMode.NEVER)
        z = simulate_one_point_batch(config, (0.5, 0.5), 1.0, 20_000, np.random.default_rng(2))
        expected = 100.0 * math.pi * 0.04 * 0.5 * 1e-4 * 0.5
        assert np.var(z[:, 0]) == pytest.approx(expected, rel=0.1)
        assert abs(z[:, 0].mean() - 0.5) < 4 * math.sqrt(expected / 20_000)

    def test_stays_on_table(self, rng, model):
        """Test containment with gathering"""
        z = simulate_one_point_batch(model, (0.05, 0.95), 20.0, 500, rng)
        assert model.table.contains(z)


# ===== Clusters =====

class TestClusters:
    """Test heap counting"""

    def test_counts(self):
        """Test clusters, boundary clusters and sizes"""
        summary = count_clusters([(0.0, 0.5), (0.0, 0.5), (0.3, 0.3), (1.0, 1.0)], Table.unit(0.2))
        assert summary.n_clusters == 3
        assert summary.n_boundary == 2
        assert summary.sizes == (2, 1, 1)
        assert summary.to_dict()['sizes'] == [2, 1, 1]

    def test_empty(self):
        """Test no cards"""
        assert count_clusters(np.empty((0, 2)), Table.unit(0.2)).n_clusters == 0
