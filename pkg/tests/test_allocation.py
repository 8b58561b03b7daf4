"""Tests for gain strategies and the finite-size exponent statistic."""

import math
from dataclasses import replace

import numpy as np
import pytest

from macdet.allocation import (
    GainVector,
    NoCrossoverError,
    SchemeChoice,
    alpha_opt_n1,
    alpha_phase_only_n1,
    alpha_sdr_phase,
    alpha_uniform,
    build_gains,
    calibrate_crossover,
    finite_exponent,
    hybrid,
    method1,
    method2,
    received_covariance,
)
from macdet.exponents import e_awgn, e_csis1_numeric, SnrPoint
from macdet.model import (
    ChannelModel,
    NetworkParams,
    RandomSource,
    SensingNoiseModel,
    sample_channel,
)
from macdet.numerics import hermitian_eig
from macdet.sdr import AdmmNonConvergence, AdmmSettings, SdpProblem, solve_sdp


def make_params(l=8, n=2, sigma_eta_sq=1.0, sigma_nu_sq=1.0, p1=0.5, total_power=1.5):
    return NetworkParams(
        num_sensors=l,
        num_antennas=n,
        theta=1.0,
        sigma_eta_sq=sigma_eta_sq,
        sigma_nu_sq=sigma_nu_sq,
        p1=p1,
        total_power=total_power,
    )


def params_for(gamma_s, gamma_c, l=8, n=2, p1=0.5):
    # theta = sigma_nu_sq = 1 so gamma_s and gamma_c map directly
    return make_params(
        l=l, n=n, sigma_eta_sq=1.0 / gamma_s, sigma_nu_sq=1.0, p1=p1, total_power=gamma_c
    )


def random_channel(rng, n, l):
    return (rng.standard_normal((n, l)) + 1j * rng.standard_normal((n, l))) / math.sqrt(2.0)


def random_feasible_gains(rng, count, l, budget):
    # boundary points: random directions scaled to spend the budget exactly
    u = rng.standard_normal((count, l)) + 1j * rng.standard_normal((count, l))
    norms = np.sqrt(np.sum(np.abs(u) ** 2, axis=1, keepdims=True))
    return u * (math.sqrt(budget) / norms)


def n1_exponent_batch(h_row, alphas, params):
    # closed-form single-antenna statistic for a batch of gain vectors,
    # written independently of finite_exponent's solve path
    num = np.abs(alphas @ h_row) ** 2
    den = (
        params.sigma_eta_sq * (np.abs(alphas) ** 2 @ np.abs(h_row) ** 2)
        + params.sigma_nu_sq
    )
    return params.theta**2 * (num / den) / (8.0 * params.num_sensors)


class TestGainVector:
    def test_stores_readonly_copy(self):
        raw = np.ones(3, dtype=complex)
        gv = GainVector(values=raw, budget=4.0)
        raw[0] = 99.0
        assert gv.values[0] == 1.0
        assert not gv.values.flags.writeable
        assert gv.size == 3
        assert gv.power == pytest.approx(3.0)

    def test_rejects_power_above_budget(self):
        with pytest.raises(ValueError, match="exceeds"):
            GainVector(values=np.ones(4), budget=3.0)

    def test_allows_tiny_relative_overshoot(self):
        GainVector(values=np.ones(2) * math.sqrt(0.5 * (1 + 1e-10)), budget=1.0)

    @pytest.mark.parametrize("budget", [0.0, -1.0, math.inf])
    def test_rejects_bad_budget(self, budget):
        with pytest.raises(ValueError):
            GainVector(values=np.zeros(2), budget=budget)


class TestSchemeChoice:
    @pytest.mark.parametrize(
        "kind",
        ["uniform", "opt_single", "phase_only_n1", "method1", "method2", "sdr_phase"],
    )
    def test_accepts_plain_kinds(self, kind):
        SchemeChoice(kind=kind)

    def test_hybrid_requires_finite_crossover(self):
        SchemeChoice(kind="hybrid", gamma_s_crossover=2.0)
        with pytest.raises(ValueError):
            SchemeChoice(kind="hybrid")
        with pytest.raises(ValueError):
            SchemeChoice(kind="hybrid", gamma_s_crossover=math.inf)

    def test_crossover_rejected_elsewhere(self):
        with pytest.raises(ValueError):
            SchemeChoice(kind="uniform", gamma_s_crossover=1.0)

    def test_unknown_kind(self):
        with pytest.raises(ValueError):
            SchemeChoice(kind="oracle")


class TestReceivedCovariance:
    def test_zero_gains_leave_receiver_noise(self):
        params = make_params(l=4, n=3)
        h = random_channel(np.random.default_rng(0), 3, 4)
        r = received_covariance(h, np.zeros(4, dtype=complex), params)
        assert np.allclose(r, params.sigma_nu_sq * np.eye(3))

    def test_unit_channel_uniform_gains_structure(self):
        # all-ones channel with uniform gains: sigma_eta_sq P on every
        # entry plus receiver noise on the diagonal
        params = make_params(l=50, n=3, sigma_eta_sq=0.7)
        h = np.ones((3, 50), dtype=complex)
        r = received_covariance(h, alpha_uniform(params), params)
        p = params.gain_budget
        expected = 0.7 * p * np.ones((3, 3)) + params.sigma_nu_sq * np.eye(3)
        assert np.allclose(r, expected, rtol=1e-12)

    def test_diagonal_correlated_model_matches_iid_bitwise(self):
        params = make_params(l=6, n=2, sigma_eta_sq=0.8)
        h = random_channel(np.random.default_rng(1), 2, 6)
        alpha = random_feasible_gains(np.random.default_rng(2), 1, 6, params.gain_budget)[0]
        iid = received_covariance(h, alpha, params)
        corr = received_covariance(
            h, alpha, params, SensingNoiseModel(r_eta=0.8 * np.eye(6))
        )
        assert np.array_equal(iid, corr)

    def test_dimension_mismatch(self):
        params = make_params(l=4, n=2)
        h = np.ones((2, 5), dtype=complex)
        with pytest.raises(ValueError):
            received_covariance(h, np.zeros(4), params)
        with pytest.raises(ValueError):
            received_covariance(np.ones((2, 4)), np.zeros(5), params)


class TestFiniteExponent:
    def test_zero_gains_give_zero(self):
        params = make_params()
        h = random_channel(np.random.default_rng(3), 2, 8)
        assert finite_exponent(h, np.zeros(8), params) == 0.0

    def test_unit_channel_uniform_matches_closed_form(self):
        # the statistic is exact for the all-ones channel at any size
        params = params_for(gamma_s=2.0, gamma_c=5.0, l=10_000, n=2)
        h = np.ones((2, 10_000), dtype=complex)
        fe = finite_exponent(h, alpha_uniform(params), params)
        expected = e_awgn(SnrPoint.from_params(params).with_antennas(2))
        assert fe == pytest.approx(expected, rel=1e-10)

    def test_budget_scaling_is_monotone(self):
        rng = np.random.default_rng(4)
        params = make_params(l=6, n=3)
        for _ in range(20):
            h = random_channel(rng, 3, 6)
            alpha = random_feasible_gains(rng, 1, 6, params.gain_budget)[0]
            full = finite_exponent(h, alpha, params)
            for c in (0.2, 0.5, 0.9):
                assert finite_exponent(h, c * alpha, params) < full

    def test_correlated_noise_changes_value(self):
        params = make_params(l=3, n=2, sigma_eta_sq=1.0)
        h = random_channel(np.random.default_rng(5), 2, 3)
        alpha = random_feasible_gains(np.random.default_rng(6), 1, 3, params.gain_budget)[0]
        r_eta = np.array(
            [[1.0, 0.6, 0.0], [0.6, 1.0, 0.6], [0.0, 0.6, 1.0]], dtype=complex
        )
        base = finite_exponent(h, alpha, params)
        corr = finite_exponent(h, alpha, params, SensingNoiseModel(r_eta=r_eta))
        assert corr != pytest.approx(base, rel=1e-6)


class TestAlphaUniform:
    def test_single_sensor(self):
        params = make_params(l=1)
        gv = alpha_uniform(params)
        assert gv.values[0] == pytest.approx(math.sqrt(params.gain_budget))

    def test_spends_budget_exactly(self):
        params = make_params(l=7, total_power=2.4)
        assert alpha_uniform(params).power == pytest.approx(params.gain_budget, rel=1e-12)

    def test_rayleigh_statistic_decays_with_size(self):
        # no channel knowledge over Rayleigh fading: the statistic
        # shrinks as the network grows
        rng = RandomSource(master_seed=77)
        model = ChannelModel.rayleigh()
        means = []
        for l in (100, 1000, 10_000):
            params = params_for(gamma_s=1.0, gamma_c=10.0, l=l, n=1)
            gv = alpha_uniform(params)
            vals = [
                finite_exponent(
                    sample_channel(model, 1, l, rng.substream("decay", l, t)),
                    gv,
                    params,
                )
                for t in range(20)
            ]
            means.append(np.mean(vals))
        assert means[0] > means[1] > means[2]


class TestAlphaOptN1:
    def test_equal_magnitudes_reduce_to_uniform_with_conjugate_phases(self):
        params = make_params(l=4, n=1)
        h = np.exp(1j * np.array([0.3, -1.2, 2.5, 0.0]))
        gv = alpha_opt_n1(h, params)
        assert np.allclose(np.abs(gv.values), math.sqrt(params.gain_budget / 4))
        assert np.allclose(gv.values * h, np.abs(h) * np.abs(gv.values))

    def test_zero_sensing_noise_matches_channel_magnitudes(self):
        params = make_params(l=5, n=1, sigma_eta_sq=0.0)
        h = random_channel(np.random.default_rng(7), 1, 5)[0]
        gv = alpha_opt_n1(h, params)
        ratio = np.abs(gv.values) / np.abs(h)
        assert np.allclose(ratio, ratio[0])

    def test_spends_budget_exactly(self):
        params = make_params(l=6, n=1)
        h = random_channel(np.random.default_rng(8), 1, 6)[0]
        assert alpha_opt_n1(h, params).power == pytest.approx(
            params.gain_budget, rel=1e-12
        )

    def test_rejects_zero_row(self):
        with pytest.raises(ValueError, match="zero"):
            alpha_opt_n1(np.zeros(3, dtype=complex), make_params(l=3, n=1))

    def test_beats_random_search(self):
        # budget P = 1 with the default prior and unit noise figures
        params = make_params(l=2, n=1, total_power=1.5)
        assert params.gain_budget == pytest.approx(1.0)
        h = np.array([1.0, 2.0], dtype=complex)
        best = finite_exponent(h[None, :], alpha_opt_n1(h, params), params)
        rng = np.random.default_rng(9)
        candidates = random_feasible_gains(rng, 100_000, 2, params.gain_budget)
        batch = n1_exponent_batch(h, candidates, params)
        assert batch.max() <= best * (1 + 1e-12)
        # the batch evaluator agrees with the solve-based statistic
        for idx in range(0, 100_000, 2500):
            direct = finite_exponent(h[None, :], candidates[idx], params)
            assert direct == pytest.approx(batch[idx], rel=1e-10)

    def test_dominates_named_strategies_per_realization(self):
        params = params_for(gamma_s=2.0, gamma_c=4.0, l=12, n=1)
        model = ChannelModel.rayleigh()
        rng = RandomSource(master_seed=5)
        for t in range(25):
            h = sample_channel(model, 1, 12, rng.substream("dom", t)).entries[0]
            best = finite_exponent(h[None, :], alpha_opt_n1(h, params), params)
            others = [
                finite_exponent(h[None, :], alpha_uniform(params), params),
                finite_exponent(h[None, :], alpha_phase_only_n1(h, params), params),
            ]
            gains = random_feasible_gains(
                np.random.default_rng(t), 1000, 12, params.gain_budget
            )
            others.append(float(n1_exponent_batch(h, gains, params).max()))
            assert best >= max(others) * (1 - 1e-12)

    def test_large_network_mean_approaches_limit(self):
        params = params_for(gamma_s=1.0, gamma_c=10.0, l=2000, n=1)
        model = ChannelModel.rayleigh()
        rng = RandomSource(master_seed=21)
        vals = [
            finite_exponent(
                sample_channel(model, 1, 2000, rng.substream("limit", t)),
                alpha_opt_n1(
                    sample_channel(model, 1, 2000, rng.substream("limit", t)).entries[0],
                    params,
                ),
                params,
            )
            for t in range(50)
        ]
        limit = e_csis1_numeric(params, model)
        assert np.mean(vals) == pytest.approx(limit, rel=0.02)


class TestAlphaPhaseOnly:
    def test_real_positive_channel_reduces_to_uniform(self):
        params = make_params(l=5, n=1)
        h = np.array([0.5, 1.0, 2.0, 0.1, 3.0], dtype=complex)
        assert np.array_equal(
            alpha_phase_only_n1(h, params).values, alpha_uniform(params).values
        )

    def test_rayleigh_statistic_matches_quarter_pi_value(self):
        params = params_for(gamma_s=1.0, gamma_c=10.0, l=10_000, n=1)
        model = ChannelModel.rayleigh()
        rng = RandomSource(master_seed=31)
        vals = []
        for t in range(5):
            h = sample_channel(model, 1, 10_000, rng.substream("po", t)).entries[0]
            vals.append(
                finite_exponent(h[None, :], alpha_phase_only_n1(h, params), params)
            )
        expected = (math.pi / 4.0) * e_awgn(
            SnrPoint.from_params(params).with_antennas(1)
        )
        assert np.mean(vals) == pytest.approx(expected, rel=0.02)

    def test_never_beats_optimal_gains(self):
        params = params_for(gamma_s=1.0, gamma_c=3.0, l=10, n=1)
        model = ChannelModel.rayleigh()
        rng = RandomSource(master_seed=41)
        for t in range(100):
            h = sample_channel(model, 1, 10, rng.substream("po-vs-opt", t)).entries[0]
            po = finite_exponent(h[None, :], alpha_phase_only_n1(h, params), params)
            opt = finite_exponent(h[None, :], alpha_opt_n1(h, params), params)
            assert po <= opt * (1 + 1e-12)


class TestMethod1:
    def test_single_antenna_reduces_to_optimal_rule(self):
        params = make_params(l=6, n=1)
        h = random_channel(np.random.default_rng(10), 1, 6)
        gv, selected = method1(h, params)
        assert selected == 0
        assert np.array_equal(gv.values, alpha_opt_n1(h[0], params).values)

    def test_selects_dominant_antenna(self):
        params = make_params(l=2, n=2)
        h = np.array([[1.0, 1.0], [2.0, 2.0]], dtype=complex)
        _, selected = method1(h, params)
        assert selected == 1

    def test_ties_break_to_lowest_index(self):
        params = make_params(l=3, n=3)
        h = np.ones((3, 3), dtype=complex)
        _, selected = method1(h, params)
        assert selected == 0

    def test_full_array_dominates_selected_antenna(self):
        # fusing all antennas can only improve on the best single one
        params = params_for(gamma_s=2.0, gamma_c=5.0, l=16, n=3)
        single = replace(params, num_antennas=1)
        model = ChannelModel.ricean(1.0)
        rng = RandomSource(master_seed=51)
        for t in range(200):
            h = sample_channel(model, 3, 16, rng.substream("m1", t)).entries
            gv, n_star = method1(h, params)
            full = finite_exponent(h, gv, params)
            restricted = finite_exponent(h[n_star : n_star + 1], gv, single)
            assert full >= restricted * (1 - 1e-12)


class TestMethod2:
    def test_single_antenna_matched_filter(self):
        params = make_params(l=5, n=1)
        h = random_channel(np.random.default_rng(11), 1, 5)
        gv = method2(h, params)
        assert np.allclose(
            np.abs(gv.values), math.sqrt(params.gain_budget) * np.abs(h[0]) / np.linalg.norm(h[0])
        )
        rotations = np.angle(gv.values * h[0])
        assert np.allclose(rotations, rotations[0])

    def test_zero_sensing_noise_attains_top_eigenvalue(self):
        params = make_params(l=6, n=2, sigma_eta_sq=0.0)
        h = random_channel(np.random.default_rng(12), 2, 6)
        gv = method2(h, params)
        lam_max = hermitian_eig(h.conj().T @ h).eigenvalues[-1]
        expected = (
            params.theta**2
            * params.gain_budget
            * lam_max
            / (8.0 * params.num_sensors * params.sigma_nu_sq)
        )
        assert finite_exponent(h, gv, params) == pytest.approx(expected, rel=1e-10)

    def test_zero_sensing_noise_beats_random_search(self):
        params = make_params(l=8, n=3, sigma_eta_sq=0.0)
        h = random_channel(np.random.default_rng(13), 3, 8)
        best = finite_exponent(h, method2(h, params), params)
        candidates = random_feasible_gains(
            np.random.default_rng(14), 10_000, 8, params.gain_budget
        )
        received = candidates @ h.T
        batch = (
            params.theta**2
            * np.sum(np.abs(received) ** 2, axis=1)
            / (8.0 * params.num_sensors * params.sigma_nu_sq)
        )
        assert batch.max() <= best * (1 + 1e-12)

    def test_small_gram_path_matches_direct_eigenvector(self):
        params = make_params(l=5, n=2)
        h = random_channel(np.random.default_rng(15), 2, 5)
        gv = method2(h, params)
        direct = hermitian_eig(h.conj().T @ h).eigenvectors[:, -1]
        overlap = abs(np.vdot(gv.values, direct))
        assert overlap == pytest.approx(math.sqrt(params.gain_budget), rel=1e-8)

    def test_wide_array_path(self):
        params = make_params(l=3, n=4)
        h = random_channel(np.random.default_rng(16), 4, 3)
        gv = method2(h, params)
        assert gv.power == pytest.approx(params.gain_budget, rel=1e-12)

    def test_spends_budget_exactly(self):
        params = make_params(l=6, n=2)
        h = random_channel(np.random.default_rng(17), 2, 6)
        assert method2(h, params).power == pytest.approx(params.gain_budget, rel=1e-12)


class TestHybrid:
    def test_low_sensing_snr_uses_antenna_selection(self):
        params = params_for(gamma_s=0.5, gamma_c=5.0, l=6, n=2)
        h = random_channel(np.random.default_rng(18), 2, 6)
        assert np.array_equal(
            hybrid(h, params, crossover_gamma_s=2.0).values,
            method1(h, params)[0].values,
        )

    def test_high_sensing_snr_uses_beamforming(self):
        params = params_for(gamma_s=8.0, gamma_c=5.0, l=6, n=2)
        h = random_channel(np.random.default_rng(19), 2, 6)
        assert np.array_equal(
            hybrid(h, params, crossover_gamma_s=2.0).values,
            method2(h, params).values,
        )


class TestCalibrateCrossover:
    def test_zero_sensing_noise_grid_has_no_crossover(self):
        params = make_params(l=8, n=2)
        rng = RandomSource(master_seed=61)
        with pytest.raises(NoCrossoverError) as err:
            calibrate_crossover(
                params, ChannelModel.rayleigh(), [math.inf, math.inf], trials=4, rng=rng
            )
        assert err.value.dominant == "method2"

    def test_finds_deterministic_crossover(self):
        params = params_for(gamma_s=1.0, gamma_c=10.0, l=50, n=5)
        model = ChannelModel.ricean(1.0)
        grid = [10 ** (db / 10.0) for db in range(-4, 13, 2)]
        rng = RandomSource(master_seed=71)
        first = calibrate_crossover(params, model, grid, trials=8, rng=rng)
        second = calibrate_crossover(params, model, grid, trials=8, rng=rng)
        assert first == second
        assert grid[0] <= first <= grid[-1]

    def test_rejects_bad_grids(self):
        params = make_params()
        rng = RandomSource(master_seed=1)
        model = ChannelModel.rayleigh()
        with pytest.raises(ValueError):
            calibrate_crossover(params, model, [1.0], trials=1, rng=rng)
        with pytest.raises(ValueError):
            calibrate_crossover(params, model, [2.0, 1.0], trials=1, rng=rng)
        with pytest.raises(ValueError):
            calibrate_crossover(params, model, [1.0, 1.0], trials=1, rng=rng)
        with pytest.raises(ValueError):
            calibrate_crossover(params, model, [1.0, math.inf], trials=1, rng=rng)
        with pytest.raises(ValueError):
            calibrate_crossover(params, model, [1.0, 2.0], trials=0, rng=rng)


class TestAlphaSdrPhase:
    def test_single_antenna_aligns_with_channel_phases(self):
        params = make_params(l=6, n=1)
        h = random_channel(np.random.default_rng(20), 1, 6)
        gv = alpha_sdr_phase(h, params)
        p = params.gain_budget
        objective = abs(h[0] @ gv.values) ** 2
        assert objective == pytest.approx(
            (p / 6) * float(np.abs(h[0]).sum()) ** 2, rel=1e-5
        )
        overlap = abs(np.vdot(gv.values, alpha_phase_only_n1(h[0], params).values))
        assert overlap == pytest.approx(p, rel=1e-5)

    def test_spends_budget_exactly(self):
        params = make_params(l=6, n=2)
        h = random_channel(np.random.default_rng(21), 2, 6)
        assert alpha_sdr_phase(h, params).power == pytest.approx(
            params.gain_budget, rel=1e-12
        )

    @pytest.mark.parametrize("seed", [0, 1, 2])
    def test_brackets_brute_force_optimum(self, seed):
        from macdet.sdr import brute_force_phase

        params = make_params(l=6, n=2)
        h = random_channel(np.random.default_rng(30 + seed), 2, 6)
        cost = h.conj().T @ h
        d = params.gain_budget / 6
        relaxed = solve_sdp(SdpProblem(cost=cost, diag_value=d))
        best_grid, _ = brute_force_phase(cost, d, levels=16)
        assert relaxed.objective >= best_grid * (1 - 1e-9)
        gv = alpha_sdr_phase(h, params)
        rounded = float(np.vdot(gv.values, cost @ gv.values).real)
        slack = 1.0 - math.cos(math.pi / 16)
        assert rounded >= (math.pi / 4.0) * best_grid * (1 - slack)

    def test_propagates_non_convergence(self):
        params = make_params(l=6, n=2)
        h = random_channel(np.random.default_rng(22), 2, 6)
        with pytest.raises(AdmmNonConvergence):
            alpha_sdr_phase(h, params, AdmmSettings(max_iter=1))


class TestBuildGains:
    def test_dispatch_matches_direct_calls(self):
        params = params_for(gamma_s=1.0, gamma_c=5.0, l=6, n=1)
        h = random_channel(np.random.default_rng(23), 1, 6)
        cases = {
            "uniform": alpha_uniform(params).values,
            "opt_single": alpha_opt_n1(h[0], params).values,
            "phase_only_n1": alpha_phase_only_n1(h[0], params).values,
            "method1": method1(h, params)[0].values,
            "method2": method2(h, params).values,
            "sdr_phase": alpha_sdr_phase(h, params).values,
        }
        for kind, expected in cases.items():
            got = build_gains(SchemeChoice(kind=kind), h, params)
            assert np.array_equal(got.values, expected), kind

    def test_hybrid_dispatch(self):
        params = params_for(gamma_s=0.5, gamma_c=5.0, l=6, n=2)
        h = random_channel(np.random.default_rng(24), 2, 6)
        choice = SchemeChoice(kind="hybrid", gamma_s_crossover=1.0)
        assert np.array_equal(
            build_gains(choice, h, params).values, method1(h, params)[0].values
        )

    def test_single_antenna_rules_reject_arrays(self):
        params = make_params(l=6, n=2)
        h = random_channel(np.random.default_rng(25), 2, 6)
        with pytest.raises(ValueError):
            build_gains(SchemeChoice(kind="opt_single"), h, params)


if __name__ == "__main__":
    raise SystemExit(pytest.main([__file__, "-v"]))
