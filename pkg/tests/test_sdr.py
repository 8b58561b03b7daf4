"""Tests for the diagonally-constrained SDP solver and phase rounding."""

import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from macdet.sdr import (
    AdmmNonConvergence,
    AdmmSettings,
    SdpProblem,
    SdpSolution,
    brute_force_phase,
    extract_phases,
    solve_sdp,
)

# Oracle: for a rank-one cost h h^H the SDP optimum is known in closed
# form.  |X_ij| <= sqrt(X_ii X_jj) = d for any feasible X gives
# h^H X h <= d (sum |h_i|)^2, and X = d a a^H with a_i = h_i/|h_i|
# attains it, so the relaxation is tight.


def rank_one_optimum(h: np.ndarray, d: float) -> float:
    return d * float(np.abs(h).sum()) ** 2


def random_psd_cost(size: int, rng: np.random.Generator) -> np.ndarray:
    a = rng.standard_normal((size, size)) + 1j * rng.standard_normal((size, size))
    return a @ a.conj().T


def assert_feasible(x: np.ndarray, d: float) -> None:
    assert np.max(np.abs(x - x.conj().T)) <= 1e-10 * d * x.shape[0]
    assert np.max(np.abs(x.diagonal().real - d)) <= 1e-8 * d
    assert np.min(np.linalg.eigvalsh((x + x.conj().T) / 2.0)) >= -1e-8 * d


class TestSdpProblem:
    def test_hermitizes_and_freezes_cost(self):
        c = np.array([[1.0, 1.0 + 1e-12j], [1.0 - 1e-12j, 2.0]])
        problem = SdpProblem(cost=c, diag_value=1.0)
        assert np.array_equal(problem.cost, problem.cost.conj().T)
        assert not problem.cost.flags.writeable
        assert problem.size == 2

    def test_rejects_non_square(self):
        with pytest.raises(ValueError):
            SdpProblem(cost=np.ones((2, 3)), diag_value=1.0)

    def test_rejects_non_hermitian(self):
        with pytest.raises(ValueError):
            SdpProblem(cost=np.array([[1.0, 2.0], [0.0, 1.0]]), diag_value=1.0)

    @pytest.mark.parametrize("d", [0.0, -1.0])
    def test_rejects_bad_diag(self, d):
        with pytest.raises(ValueError):
            SdpProblem(cost=np.eye(2), diag_value=d)


class TestAdmmSettings:
    def test_default_tolerances_scale_with_problem(self):
        problem = SdpProblem(cost=np.eye(4), diag_value=2.0)
        tp, td = AdmmSettings().resolved_tols(problem)
        assert tp == pytest.approx(1e-7 * 4 * 2.0)
        assert td == tp

    def test_explicit_tolerances_kept(self):
        problem = SdpProblem(cost=np.eye(4), diag_value=2.0)
        tp, td = AdmmSettings(tol_primal=1e-3, tol_dual=1e-5).resolved_tols(problem)
        assert (tp, td) == (1e-3, 1e-5)

    def test_rejects_bad_values(self):
        with pytest.raises(ValueError):
            AdmmSettings(rho=0.0)
        with pytest.raises(ValueError):
            AdmmSettings(max_iter=0)


class TestSolveSdp:
    def test_identity_cost_objective_is_trace(self):
        # every feasible point has tr(X) = L d, so the objective is flat
        solution = solve_sdp(SdpProblem(cost=np.eye(5), diag_value=2.0))
        assert solution.converged
        assert solution.objective == pytest.approx(5 * 2.0, rel=1e-9)
        assert_feasible(solution.x, 2.0)

    @pytest.mark.parametrize("seed", [0, 1, 2])
    def test_rank_one_cost_matches_closed_form(self, seed):
        rng = np.random.default_rng(seed)
        h = rng.standard_normal(6) + 1j * rng.standard_normal(6)
        cost = np.outer(h, h.conj())
        solution = solve_sdp(SdpProblem(cost=cost, diag_value=1.5))
        assert solution.converged
        assert solution.objective == pytest.approx(rank_one_optimum(h, 1.5), rel=1e-5)
        assert_feasible(solution.x, 1.5)

    def test_rank_one_solution_matrix_and_phases(self):
        rng = np.random.default_rng(7)
        h = rng.standard_normal(5) + 1j * rng.standard_normal(5)
        a = h / np.abs(h)
        d = 2.0
        solution = solve_sdp(SdpProblem(cost=np.outer(h, h.conj()), diag_value=d))
        assert np.allclose(solution.x, d * np.outer(a, a.conj()), atol=1e-5 * d)
        phases = extract_phases(solution)
        assert np.allclose(np.abs(phases), 1.0, atol=1e-12)
        assert abs(np.vdot(phases, a)) == pytest.approx(5.0, abs=1e-6)

    @pytest.mark.parametrize("seed", range(5))
    def test_relaxation_upper_bounds_brute_force(self, seed):
        rng = np.random.default_rng(100 + seed)
        cost = random_psd_cost(6, rng)
        d = 1.0
        solution = solve_sdp(SdpProblem(cost=cost, diag_value=d))
        assert solution.converged
        assert_feasible(solution.x, d)
        best, _ = brute_force_phase(cost, d, levels=16)
        assert best <= solution.objective * (1.0 + 1e-6)
        phases = extract_phases(solution)
        alpha = math.sqrt(d) * phases
        rounded = float(np.vdot(alpha, cost @ alpha).real)
        assert rounded <= solution.objective * (1.0 + 1e-6)
        assert rounded >= 0.6 * solution.objective

    def test_objective_scales_linearly_in_diag_value(self):
        rng = np.random.default_rng(3)
        h = rng.standard_normal(4) + 1j * rng.standard_normal(4)
        cost = np.outer(h, h.conj())
        obj1 = solve_sdp(SdpProblem(cost=cost, diag_value=1.0)).objective
        obj3 = solve_sdp(SdpProblem(cost=cost, diag_value=3.5)).objective
        assert obj3 == pytest.approx(3.5 * obj1, rel=1e-5)

    def test_deterministic(self):
        rng = np.random.default_rng(11)
        cost = random_psd_cost(5, rng)
        first = solve_sdp(SdpProblem(cost=cost, diag_value=1.0))
        second = solve_sdp(SdpProblem(cost=cost, diag_value=1.0))
        assert np.array_equal(first.x, second.x)
        assert first.objective == second.objective
        assert first.iterations == second.iterations

    def test_history_tracks_iterations_and_final_objective(self):
        rng = np.random.default_rng(5)
        cost = random_psd_cost(6, rng)
        solution = solve_sdp(SdpProblem(cost=cost, diag_value=1.0))
        assert len(solution.objective_history) == solution.iterations
        scale = max(1.0, abs(solution.objective))
        assert abs(solution.objective_history[-1] - solution.objective) <= 1e-4 * scale

    def test_iteration_cap_reports_non_convergence(self):
        rng = np.random.default_rng(9)
        cost = random_psd_cost(6, rng)
        solution = solve_sdp(
            SdpProblem(cost=cost, diag_value=1.0), AdmmSettings(max_iter=2)
        )
        assert not solution.converged
        assert solution.iterations == 2
        assert_feasible(solution.x, 1.0)

    def test_non_convergence_error_carries_solution(self):
        solution = SdpSolution(
            x=np.eye(2),
            objective=2.0,
            iterations=7,
            converged=False,
            primal_residual=1e-2,
            dual_residual=1e-3,
            objective_history=np.zeros(7),
        )
        err = AdmmNonConvergence(solution)
        assert err.solution is solution
        assert "7 iterations" in str(err)


class TestExtractPhases:
    def test_zero_component_defaults_to_unit(self):
        u = np.array([1.0, 0.0, 1.0j])
        x = np.outer(u, u.conj())
        solution = SdpSolution(
            x=x,
            objective=0.0,
            iterations=1,
            converged=True,
            primal_residual=0.0,
            dual_residual=0.0,
            objective_history=np.zeros(1),
        )
        phases = extract_phases(solution)
        assert np.allclose(np.abs(phases), 1.0)
        assert phases[1] == 1.0


class TestBruteForcePhase:
    def test_all_ones_cost_hand_value(self):
        best, alpha = brute_force_phase(np.ones((2, 2)), 1.0, levels=4)
        assert best == pytest.approx(4.0, rel=1e-12)
        assert np.allclose(alpha, np.ones(2))

    def test_diag_value_scales_magnitudes(self):
        best, alpha = brute_force_phase(np.ones((2, 2)), 2.0, levels=4)
        assert best == pytest.approx(8.0, rel=1e-12)
        assert np.allclose(np.abs(alpha), math.sqrt(2.0))

    def test_first_phase_fixed_to_zero(self):
        rng = np.random.default_rng(13)
        cost = random_psd_cost(4, rng)
        _, alpha = brute_force_phase(cost, 3.0, levels=8)
        assert alpha[0] == pytest.approx(math.sqrt(3.0))
        assert alpha[0].imag == 0.0

    def test_chunked_enumeration_matches_aligned_optimum(self):
        # 3^11 grid points forces several chunks; the all-equal phase
        # assignment lies on the grid so the optimum is exact
        size = 12
        best, alpha = brute_force_phase(np.ones((size, size)), 1.0, levels=3)
        assert best == pytest.approx(float(size**2), rel=1e-12)
        assert np.allclose(alpha, np.ones(size))

    def test_rejects_oversized_grids(self):
        with pytest.raises(ValueError, match="cap"):
            brute_force_phase(np.eye(8), 1.0, levels=16)

    def test_rejects_too_few_levels(self):
        with pytest.raises(ValueError):
            brute_force_phase(np.eye(2), 1.0, levels=1)

    def test_single_sensor(self):
        best, alpha = brute_force_phase(np.array([[2.0]]), 1.5, levels=4)
        assert best == pytest.approx(3.0, rel=1e-12)
        assert alpha[0] == pytest.approx(math.sqrt(1.5))

    @given(
        a=st.floats(0.1, 5.0),
        b=st.floats(0.1, 5.0),
        re=st.floats(-2.0, 2.0),
        im=st.floats(-2.0, 2.0),
    )
    def test_two_sensor_grid_brackets_analytic_optimum(self, a, b, re, im):
        # alpha^H C alpha = a + b + 2 Re(conj(c) a0* a1) peaks at a + b + 2|c|;
        # a 64-point grid gets within the cosine resolution of that peak
        c = re + 1j * im
        cost = np.array([[a, c], [np.conj(c), b]])
        best, _ = brute_force_phase(cost, 1.0, levels=64)
        peak = a + b + 2.0 * abs(c)
        slack = 2.0 * abs(c) * (1.0 - math.cos(math.pi / 64))
        assert best <= peak + 1e-9 * (1.0 + peak)
        assert best >= peak - slack - 1e-9


if __name__ == "__main__":
    raise SystemExit(pytest.main([__file__, "-v"]))
