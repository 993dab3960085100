import numpy as np
import pytest
from scipy import stats

from app.models.channel import ChannelParams
from app.models.density import DeConfig
from app.services.channel_service import BpskAwgnChannel, uncoded_bit_error_rate
from app.services.density_evolution_service import (
    check_update_sample,
    de_init,
    de_iterate,
    de_run,
    estimate_ber,
    sample_socket_bits
)
from app.services.ensemble_service import make_regular, make_sc, make_uncoupled


def ber_se(p: float, samples: int, population: int) -> float:
    """Standard error of a BER estimate from `samples` draws per bit value over populations of size N."""
    p = max(p, 1e-4)
    return float(np.sqrt(p * (1.0 - p) * (1.0 / samples + 1.0 / population) / 2.0))


class TestInit:
    def test_regular_has_four_zero_populations(self):
        state = de_init(make_regular(3, 6), DeConfig(population_size=1000))
        populations = state.populations()
        assert len(populations) == state.population_count == 4
        assert all(p.size == 1000 and not p.samples.any() for p in populations)
        assert state.iteration == 0

    def test_coupled_population_count(self):
        state = de_init(make_sc(3, 6, 5), DeConfig(population_size=1000))
        assert state.population_count == 60

    def test_equal_seeds_give_identical_states(self):
        cfg = DeConfig(population_size=500, seed=11)
        channel = ChannelParams(sigma=0.8)
        first = de_iterate(de_init(make_sc(3, 6, 4), cfg), channel)
        second = de_iterate(de_init(make_sc(3, 6, 4), cfg), channel)
        np.testing.assert_array_equal(first.var, second.var)
        np.testing.assert_array_equal(first.chk, second.chk)


class TestCheckUpdate:
    def test_zero_annihilates(self):
        assert check_update_sample([0.0, 5.0]) == 0.0

    def test_two_unit_messages(self):
        assert check_update_sample([1.0, 1.0]) == pytest.approx(0.433781, abs=1e-6)

    def test_saturated_inputs_stay_clipped(self):
        value = check_update_sample([50.0] * 5)
        assert np.isfinite(value)
        assert value <= 50.0

    @pytest.mark.parametrize("incoming", [[1.0, -2.0], [-1.0, -0.5, 3.0], [0.3, 0.2, 0.1, -4.0]])
    def test_sign_is_product_of_signs(self, incoming):
        assert np.sign(check_update_sample(incoming)) == np.prod(np.sign(incoming))


class TestSocketBits:
    @pytest.mark.parametrize("z", [0, 1])
    @pytest.mark.parametrize("sockets", [1, 2, 5])
    def test_parity_including_target(self, rng, z, sockets):
        bits = sample_socket_bits(z, sockets, 10_000, rng)
        assert bits.shape == (10_000, sockets)
        assert np.all((bits.sum(axis=1) + z) % 2 == 0)

    def test_free_bits_are_uniform(self, rng):
        bits = sample_socket_bits(1, 5, 100_000, rng)
        assert np.abs(bits.mean(axis=0) - 0.5).max() < 0.01


class TestIterate:
    def test_first_sweep_from_zero_state(self):
        cfg = DeConfig(population_size=5000)
        state = de_iterate(de_init(make_regular(3, 6), cfg), ChannelParams(sigma=0.8))
        assert not state.chk.any()
        assert state.var.any()
        assert state.iteration == 1

    def test_sizes_and_clip_are_conserved(self):
        cfg = DeConfig(population_size=1000, message_clip=20.0)
        state = de_init(make_sc(3, 6, 6), cfg)
        shape = state.var.shape
        for _ in range(30):
            state = de_iterate(state, ChannelParams(sigma=0.5))
            assert state.var.shape == state.chk.shape == shape
            assert np.all(np.isfinite(state.var)) and np.all(np.isfinite(state.chk))
            assert np.abs(state.var).max() <= 20.0
            assert np.abs(state.chk).max() <= 20.0

    def test_symmetric_channel_gives_mirrored_populations(self):
        cfg = DeConfig(population_size=5000, seed=3)
        state = de_init(make_regular(3, 6), cfg)
        channel = BpskAwgnChannel(0.9)
        for _ in range(5):
            state = de_iterate(state, channel)
        assert stats.ks_2samp(state.var[0, 0], -state.var[0, 1]).pvalue > 1e-3
        assert stats.ks_2samp(state.chk[0, 0], -state.chk[0, 1]).pvalue > 1e-3


class TestEstimateBer:
    def test_polarized_messages(self):
        cfg = DeConfig(population_size=1000)
        state = de_init(make_sc(3, 6, 5), cfg)
        chk = np.empty_like(state.chk)
        chk[:, 0] = 50.0
        chk[:, 1] = -50.0
        state = state.model_copy(update={"chk": chk})
        ber = estimate_ber(state, ChannelParams(sigma=0.1))
        assert np.all(ber == 0.0)

    def test_zero_messages_give_uncoded_error(self):
        params = ChannelParams(sigma=1.0)
        cfg = DeConfig(population_size=1000, ber_samples=200_000)
        state = de_init(make_regular(3, 6), cfg)
        ber = estimate_ber(state, params, rng=np.random.default_rng(5))[0]
        expected = uncoded_bit_error_rate(params)
        se = np.sqrt(expected * (1 - expected) / (2 * cfg.estimator_samples))
        assert abs(ber - expected) < 3 * se

    def test_disjoint_seeds_agree(self):
        cfg = DeConfig(population_size=4000)
        state = de_init(make_regular(3, 6), cfg)
        params = ChannelParams(sigma=0.85)
        for _ in range(5):
            state = de_iterate(state, params)
        first = estimate_ber(state, params, rng=np.random.default_rng(100))[0]
        second = estimate_ber(state, params, rng=np.random.default_rng(200))[0]
        se = np.hypot(ber_se(first, 4000, 4000), ber_se(second, 4000, 4000))
        assert abs(first - second) < 6 * se


class TestRun:
    def test_below_threshold_decodes(self):
        trace = de_run(make_regular(3, 6), ChannelParams(sigma=0.6), DeConfig(population_size=5000, max_iterations=100))
        assert trace.decodable
        assert trace.decoded_at is not None and trace.decoded_at <= 100
        assert trace.final_ber == 0.0

    def test_above_threshold_stalls(self):
        trace = de_run(make_regular(3, 6), ChannelParams(sigma=0.9), DeConfig(population_size=2000, max_iterations=100))
        assert not trace.decodable
        assert trace.iterations == 100
        assert trace.final_ber >= 0.01

    def test_single_iteration(self):
        trace = de_run(make_regular(3, 6), ChannelParams(sigma=0.6), DeConfig(population_size=1000, max_iterations=1))
        assert trace.iterations == 1
        assert not trace.decodable

    def test_short_run_uses_whole_budget_as_streak(self):
        cfg = DeConfig(population_size=1000, max_iterations=3, zero_streak=10)
        trace = de_run(make_regular(3, 6), ChannelParams(sigma=0.05), cfg)
        assert trace.decodable
        assert trace.decoded_at == 1
        assert trace.iterations == 3

    def test_ber_entries_in_range(self, small_cfg):
        trace = de_run(make_sc(3, 6, 5), ChannelParams(sigma=0.9), small_cfg.model_copy(update={"max_iterations": 20}))
        assert trace.ber.shape == (20, 5)
        assert np.all((trace.ber >= 0.0) & (trace.ber <= 0.55))

    def test_sequential_runs_are_bit_identical(self):
        cfg = DeConfig(population_size=1000, max_iterations=15, seed=99)
        first = de_run(make_sc(3, 6, 5), ChannelParams(sigma=0.85), cfg)
        second = de_run(make_sc(3, 6, 5), ChannelParams(sigma=0.85), cfg)
        np.testing.assert_array_equal(first.ber, second.ber)

    def test_thread_count_does_not_change_results(self):
        cfg = DeConfig(population_size=1000, max_iterations=15, seed=99)
        sequential = de_run(make_sc(3, 6, 5), ChannelParams(sigma=0.85), cfg)
        threaded = de_run(make_sc(3, 6, 5), ChannelParams(sigma=0.85), cfg.model_copy(update={"threads": 4}))
        np.testing.assert_array_equal(sequential.ber, threaded.ber)

    def test_uncoupled_protograph_matches_regular_ensemble(self):
        sigma = ChannelParams(sigma=0.8)
        n = 5000
        regular = de_run(make_regular(3, 6), sigma, DeConfig(population_size=n, max_iterations=20, seed=1))
        copies = de_run(make_uncoupled(3, 6, copies=4), sigma, DeConfig(population_size=n, max_iterations=20, seed=2))
        for iteration in (1, 5, 20):
            p = regular.ber[iteration - 1, 0]
            q = copies.ber[iteration - 1].mean()
            se = np.hypot(ber_se(p, n, n), ber_se(q, 4 * n, 4 * n))
            assert abs(p - q) < 3 * se

    def test_rows_count_iterations_from_one(self, small_cfg):
        trace = de_run(make_sc(3, 6, 3), ChannelParams(sigma=0.9), small_cfg.model_copy(update={"max_iterations": 2}))
        rows = trace.rows()
        assert rows[0][:2] == (1, 1)
        assert rows[-1][:2] == (2, 3)
        assert len(rows) == 6


@pytest.mark.slow
class TestDeskScale:
    def test_coupled_chain_decodes_with_a_wave(self):
        trace = de_run(make_sc(3, 6, 25), ChannelParams(sigma=0.78), DeConfig(population_size=10_000, max_iterations=300))
        assert trace.decodable
        assert trace.decoded_at <= 300

        # the chain decodes from both ends inward
        resolved = trace.ber < 1e-3
        assert resolved[-1].all()
        half = 25 // 2
        left = [max(np.flatnonzero(row[:half]), default=-1) + 1 for row in resolved]
        right = [max(np.flatnonzero(row[:-half - 1:-1]), default=-1) + 1 for row in resolved]
        for front in (left, right):
            assert all(later >= earlier - 1 for earlier, later in zip(front, front[1:]))

        for iteration in (20, 60, 100):
            profile = trace.ber[iteration - 1]
            peak = int(np.argmax(profile))
            assert 0 < peak < 24
            assert profile[0] < profile[peak]
            assert profile[-1] < profile[peak]

    def test_uncoupled_does_not_decode_at_coupled_noise_level(self):
        trace = de_run(make_regular(3, 6), ChannelParams(sigma=0.78), DeConfig(population_size=10_000, max_iterations=500))
        assert not trace.decodable

    def test_above_threshold_long_run(self):
        trace = de_run(make_regular(3, 6), ChannelParams(sigma=0.9), DeConfig(population_size=10_000, max_iterations=500))
        assert trace.ber[499, 0] >= 0.01
