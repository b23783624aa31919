import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from peig.errors import ArgumentError, DomainError, RangeError
from peig.model_ode import (
    Branch,
    ModelProblem,
    ModelSolution,
    delta_m_curves,
    dense_residual,
    energy_identity_residual,
    find_a_for_max,
    first_max,
    solve_model,
)
from peig.ptrig import pi_p, sin_p

from oracles import radial_p2_n3_first_max, radial_p2_n3_profile


class TestModelProblem:
    def test_rejects_bad_lambda(self):
        for lam in (0.0, -1.0, math.inf):
            with pytest.raises(DomainError):
                ModelProblem(p=2.0, lam=lam)

    def test_rejects_bad_dimension(self):
        with pytest.raises(DomainError):
            ModelProblem(p=2.0, lam=1.0, n=1.0)

    def test_rejects_negative_start(self):
        with pytest.raises(DomainError):
            ModelProblem(p=2.0, lam=1.0, a=-0.1)

    def test_radial_branch_needs_finite_n(self):
        with pytest.raises(ArgumentError):
            ModelProblem(p=2.0, lam=1.0, n=math.inf, branch=Branch.T_RADIAL)

    def test_alpha_accessor(self):
        assert abs(ModelProblem(p=2.0, lam=4.0).alpha - 2.0) <= 1e-14
        prob = ModelProblem(p=3.0, lam=2.0)
        assert abs(prob.alpha - 1.0) <= 1e-14

    def test_accepts_bare_float_exponent(self):
        prob = ModelProblem(p=2.5, lam=1.0)
        assert abs(prob.p.q - 2.5 / 1.5) <= 1e-14


class TestSolveModel:
    @pytest.mark.parametrize("p", [1.5, 2.0, 3.0])
    def test_zero_branch_reproduces_shifted_sinp(self, p):
        a = 0.3
        prob = ModelProblem(p=p, lam=p - 1.0, a=a, branch=Branch.T_ZERO)
        sol = solve_model(prob, a + 1.2 * pi_p(p))
        w_exact = sin_p(sol.grid - a - pi_p(p) / 2.0, p)
        assert np.max(np.abs(sol.w - w_exact)) <= 1e-9
        assert sol.w[0] == -1.0 and sol.phi[0] == 0.0
        assert np.all(sol.w <= 1.0 + 1e-9) and np.all(sol.w >= -1.0 - 1e-9)

    def test_classical_cosine(self):
        prob = ModelProblem(p=2.0, lam=1.0, a=0.0)
        sol = solve_model(prob, 3.5)
        assert np.max(np.abs(sol.w - (-np.cos(sol.grid)))) <= 1e-10
        assert abs(sol.b - math.pi) <= 1e-9
        assert abs(sol.m_max - 1.0) <= 1e-9

    def test_radial_closed_form(self):
        prob = ModelProblem(p=2.0, lam=1.0, n=3.0, a=0.0,
                            branch=Branch.T_RADIAL)
        sol = solve_model(prob, 5.0)
        assert np.max(np.abs(sol.w - radial_p2_n3_profile(sol.grid))) <= 1e-9

    def test_strictly_increasing_before_first_max(self):
        prob = ModelProblem(p=2.5, lam=1.0, n=2.0, a=0.0,
                            branch=Branch.T_RADIAL)
        sol = solve_model(prob, 12.0)
        rising = sol.w[(sol.grid > 0.0) & (sol.grid < sol.b)]
        assert np.all(np.diff(rising) > 0.0)

    def test_short_horizon_leaves_max_unset(self):
        prob = ModelProblem(p=2.0, lam=1.0, a=0.0)
        sol = solve_model(prob, 1.0)  # b = pi is out of range
        assert sol.b is None and sol.delta is None and sol.m_max is None

    def test_rejects_horizon_before_start(self):
        prob = ModelProblem(p=2.0, lam=1.0, a=1.0)
        with pytest.raises(ArgumentError):
            solve_model(prob, 0.5)

    def test_defect_certificate(self):
        prob = ModelProblem(p=3.0, lam=2.0, n=4.0, a=0.0,
                            branch=Branch.T_RADIAL)
        sol = solve_model(prob, 8.0)
        assert dense_residual(sol) <= 1e-7


class TestFirstMax:
    @pytest.mark.parametrize("p", [1.5, 2.0, 3.0])
    def test_zero_branch_half_period(self, p):
        prob = ModelProblem(p=p, lam=p - 1.0, a=0.0)
        b, delta, m = first_max(prob)
        assert abs(delta - pi_p(p)) <= 1e-9
        assert abs(m - 1.0) <= 1e-9

    def test_zero_branch_scales_with_rate(self):
        prob = ModelProblem(p=3.0, lam=5.0, a=0.0)
        _, delta, m = first_max(prob)
        assert abs(delta - pi_p(3.0) / prob.alpha) <= 1e-9
        assert abs(m - 1.0) <= 1e-9

    def test_radial_anchor_values(self):
        prob = ModelProblem(p=2.0, lam=1.0, n=3.0, a=0.0,
                            branch=Branch.T_RADIAL)
        b, delta, m = first_max(prob)
        assert abs(b - 4.493409) <= 1e-5
        assert abs(delta - 4.493409) <= 1e-5
        assert abs(m - 0.217234) <= 1e-5
        b_oracle, m_oracle = radial_p2_n3_first_max()
        assert abs(b - b_oracle) <= 1e-9
        assert abs(m - m_oracle) <= 1e-9

    def test_near_one_dimension_approaches_zero_branch(self):
        prob = ModelProblem(p=2.0, lam=1.0, n=1.01, a=5.0,
                            branch=Branch.T_RADIAL)
        _, delta, _ = first_max(prob)
        assert abs(delta - math.pi) <= 1e-3 * math.pi


class TestDeltaMCurves:
    def test_radial_p2_n3_table(self):
        rows = delta_m_curves(2.0, 1.0, 3.0, [0.0, 1.0, 2.0, 5.0, 10.0, 50.0])
        target = pi_p(2.0) / 1.0  # alpha = 1
        assert abs(rows[0, 1] - 4.4934) <= 1e-3
        assert abs(rows[0, 2] - 0.2172) <= 1e-3
        assert np.all(np.diff(rows[:, 1]) < 0.0)  # delta decreasing
        assert np.all(np.diff(rows[:, 2]) > 0.0)  # max increasing
        assert np.all(rows[:, 1] > target)
        assert np.all(rows[:, 2] < 1.0)
        assert abs(rows[-1, 1] - target) <= 0.01 * target
        # the maximum approaches 1 like a/(a+delta), so ~0.941 at a=50
        assert rows[-1, 2] >= 0.94

    def test_other_exponent_keeps_the_shape(self):
        rows = delta_m_curves(1.5, 1.0, 2.0, [0.0, 2.0, 8.0, 30.0])
        alpha = (1.0 / 0.5) ** (1.0 / 1.5)
        target = pi_p(1.5) / alpha
        assert np.all(np.diff(rows[:, 1]) < 0.0)
        assert np.all(np.diff(rows[:, 2]) > 0.0)
        assert np.all(rows[:, 1] > target)
        assert abs(rows[-1, 1] - target) <= 0.01 * target

    def test_infinite_n_rows_are_flat(self):
        rows = delta_m_curves(2.0, 1.0, math.inf, [0.0, 1.0, 3.0])
        assert np.max(np.abs(rows[:, 1] - math.pi)) <= 1e-8
        assert np.max(np.abs(rows[:, 2] - 1.0)) <= 1e-8

    def test_rejects_disordered_grid(self):
        with pytest.raises(ArgumentError):
            delta_m_curves(2.0, 1.0, 3.0, [1.0, 0.5])


class TestFindAForMax:
    def test_boundary_target_returns_zero(self):
        prob = ModelProblem(p=2.0, lam=1.0, n=3.0, a=0.0,
                            branch=Branch.T_RADIAL)
        m0 = first_max(prob)[2]
        assert find_a_for_max(2.0, 1.0, 3.0, m0) == 0.0

    def test_roundtrip_through_first_max(self):
        a = find_a_for_max(2.0, 1.0, 3.0, 0.5)
        prob = ModelProblem(p=2.0, lam=1.0, n=3.0, a=a,
                            branch=Branch.T_RADIAL)
        assert abs(first_max(prob)[2] - 0.5) <= 1e-8

    def test_target_near_one_returns_sentinel(self):
        assert find_a_for_max(2.0, 1.0, 3.0, 1.0 - 1e-9) == math.inf

    def test_target_below_attainable_range(self):
        with pytest.raises(RangeError):
            find_a_for_max(2.0, 1.0, 3.0, 0.1)


class TestEnergyIdentity:
    def test_classical_pythagoras(self):
        prob = ModelProblem(p=2.0, lam=1.0, a=0.0)
        sol = solve_model(prob, 6.0)
        assert energy_identity_residual(sol) <= 1e-10

    def test_p3_case(self):
        prob = ModelProblem(p=3.0, lam=2.0, a=0.0)
        sol = solve_model(prob, 1.5 * pi_p(3.0))
        assert energy_identity_residual(sol) <= 1e-6

    def test_radial_branch_rejected(self):
        prob = ModelProblem(p=2.0, lam=1.0, n=3.0, a=0.0,
                            branch=Branch.T_RADIAL)
        sol = solve_model(prob, 5.0)
        with pytest.raises(ArgumentError):
            energy_identity_residual(sol)


class TestInvariants:
    def test_time_scaling_homogeneity(self):
        # w for (p, lam) at t equals w for (p, p-1) at alpha*t
        p, lam = 3.0, 5.0
        fast = solve_model(ModelProblem(p=p, lam=lam, a=0.0),
                           1.1 * pi_p(p) / ModelProblem(p=p, lam=lam).alpha)
        base = solve_model(ModelProblem(p=p, lam=p - 1.0, a=0.0),
                           1.2 * pi_p(p))
        alpha = ModelProblem(p=p, lam=lam).alpha
        ts = np.linspace(0.01, pi_p(p) / alpha, 400)
        gap = np.max(np.abs(fast.dense(ts)[0] - base.dense(alpha * ts)[0]))
        assert gap <= 1e-9

    @pytest.mark.parametrize("p,branch,n", [
        (1.5, Branch.T_ZERO, math.inf),
        (3.0, Branch.T_ZERO, math.inf),
        (2.5, Branch.T_RADIAL, 3.0),
    ])
    def test_phi_slope_continuous_at_first_max(self, p, branch, n):
        prob = ModelProblem(p=p, lam=1.0, n=n, a=0.0, branch=branch)
        horizon = 2.5 * pi_p(p) / prob.alpha
        sol = solve_model(prob, horizon)
        h = 1e-6
        left = (sol.dense(sol.b)[1] - sol.dense(sol.b - h)[1]) / h
        right = (sol.dense(sol.b + h)[1] - sol.dense(sol.b)[1]) / h
        assert abs(left - right) <= 1e-5

    def test_profile_keeps_oscillating(self):
        for prob in (ModelProblem(p=2.5, lam=1.5, a=0.0),
                     ModelProblem(p=2.0, lam=1.0, n=3.0, a=0.0,
                                  branch=Branch.T_RADIAL)):
            horizon = prob.a + 4.5 * pi_p(prob.p) / prob.alpha
            sol = solve_model(prob, horizon)
            zeros = np.sum(sol.w[:-1] * sol.w[1:] < 0.0)
            assert zeros >= 3

    def test_continuous_dependence_on_data(self):
        base = ModelProblem(p=2.5, lam=1.3, n=2.5, a=0.7,
                            branch=Branch.T_RADIAL)
        sol = solve_model(base, 8.0)
        ts = np.linspace(1.0, 7.0, 200)
        ref = sol.dense(ts)[0]
        for tweak in (ModelProblem(p=2.5, lam=1.3 + 1e-6, n=2.5, a=0.7,
                                   branch=Branch.T_RADIAL),
                      ModelProblem(p=2.5, lam=1.3, n=2.5 + 1e-6, a=0.7,
                                   branch=Branch.T_RADIAL),
                      ModelProblem(p=2.5, lam=1.3, n=2.5, a=0.7 + 1e-6,
                                   branch=Branch.T_RADIAL)):
            other = solve_model(tweak, 8.0)
            assert np.max(np.abs(other.dense(ts)[0] - ref)) <= 1e-4


@settings(max_examples=10, deadline=None)
@given(p=st.floats(1.3, 6.0), lam=st.floats(0.5, 5.0))
def test_zero_branch_offset_is_the_half_period(p, lam):
    prob = ModelProblem(p=p, lam=lam, a=0.0)
    _, delta, m = first_max(prob)
    assert abs(delta - pi_p(p) / prob.alpha) <= 1e-7
    assert abs(m - 1.0) <= 1e-7
