"""Discrete eigenpair solver and the a posteriori comparison checks."""

import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from peig.eigensolve import (
    EigenResult,
    Mesh1D,
    MeshKind,
    gradient_comparison_check,
    matched_model,
    max_comparison_check,
    principal_eigenpair,
    rayleigh,
    sharpness_tube,
    volume_density_E,
)
from peig.errors import (
    ArgumentError,
    ConvergenceError,
    DomainError,
    PreconditionError,
)
from peig.model_ode import Branch, ModelProblem, first_max, solve_model
from peig.ptrig import pi_p, sin_p
from peig._fd import central_only_deriv1

from oracles import dense_weighted_p2_eigenvalue


def interval_lambda(p: float, D: float) -> float:
    return (p - 1.0) * pi_p(p) ** p / D**p


# shared converged eigenpairs; the solves dominate the suite's runtime
@pytest.fixture(scope="module")
def classical_pair():
    mesh = Mesh1D.interval(-math.pi / 2, math.pi / 2, 2000)
    return principal_eigenpair(mesh, 2.0)


@pytest.fixture(scope="module")
def p15_pair():
    return principal_eigenpair(Mesh1D.interval(0.0, 2.0, 2000), 1.5)


@pytest.fixture(scope="module")
def p35_pair():
    return principal_eigenpair(Mesh1D.interval(0.0, 2.0, 2000), 3.5)


@pytest.fixture(scope="module")
def radial3_pair():
    mesh = Mesh1D.interval(1.0, 2.5, 1500, density=lambda x: x**2)
    result = principal_eigenpair(mesh, 2.0)
    return result, matched_model(result, 3.0)


@pytest.fixture(scope="module")
def drift_pair_p3():
    mesh = Mesh1D.interval(0.0, 1.0, 2000, density=lambda x: np.exp(0.2 * x))
    result = principal_eigenpair(mesh, 3.0)
    return result, matched_model(result, 5.0)


class TestMesh1D:
    def test_interval_fields(self):
        mesh = Mesh1D.interval(0.0, 2.0, 101)
        assert mesh.kind is MeshKind.INTERVAL
        assert mesh.h == pytest.approx(0.02)
        assert mesh.h * 100 == pytest.approx(mesh.length)
        assert mesh.weights[0] == pytest.approx(0.5 * mesh.h)
        assert mesh.weights[50] == pytest.approx(mesh.h)
        assert np.sum(mesh.weights) == pytest.approx(2.0)

    def test_circle_fields(self):
        mesh = Mesh1D.circle(2.0 * math.pi, 128)
        assert mesh.kind is MeshKind.CIRCLE
        assert mesh.h * 128 == pytest.approx(2.0 * math.pi)
        assert mesh.length == pytest.approx(2.0 * math.pi)
        assert np.all(mesh.weights == mesh.weights[0])

    def test_density_callable_and_array(self):
        f = lambda x: np.exp(x)
        m1 = Mesh1D.interval(0.0, 1.0, 64, density=f)
        m2 = Mesh1D.interval(0.0, 1.0, 64, density=np.exp(m1.nodes))
        assert np.allclose(m1.density, m2.density)

    def test_too_few_nodes(self):
        with pytest.raises(ArgumentError):
            Mesh1D.interval(0.0, 1.0, 49)

    def test_nonpositive_density(self):
        with pytest.raises(DomainError):
            Mesh1D.interval(-1.0, 1.0, 64, density=lambda x: x)

    def test_empty_interval(self):
        with pytest.raises(DomainError):
            Mesh1D.interval(1.0, 1.0, 64)


class TestRayleigh:
    def test_classical_sine(self):
        mesh = Mesh1D.interval(0.0, math.pi, 2000)
        assert rayleigh(mesh, np.sin(mesh.nodes), 2.0) == pytest.approx(
            1.0, abs=1e-5)

    def test_constant_is_zero(self):
        mesh = Mesh1D.interval(0.0, 1.0, 100)
        assert rayleigh(mesh, np.ones(100), 2.0) == 0.0

    @pytest.mark.parametrize("p", [1.5, 3.0])
    def test_shifted_p_sine(self, p):
        D = 2.0
        mesh = Mesh1D.interval(0.0, D, 3000)
        u = sin_p(pi_p(p) * (mesh.nodes - D / 2) / D, p)
        lam = interval_lambda(p, D)
        assert abs(rayleigh(mesh, u, p) / lam - 1.0) < mesh.h

    def test_zero_input_rejected(self):
        mesh = Mesh1D.interval(0.0, 1.0, 100)
        with pytest.raises(ArgumentError):
            rayleigh(mesh, np.zeros(100), 2.0)


class TestPrincipalEigenpair:
    def test_classical_interval(self, classical_pair):
        r = classical_pair
        assert abs(r.lam - 1.0) < 1e-4
        err = min(np.max(np.abs(r.u - np.sin(r.mesh.nodes))),
                  np.max(np.abs(r.u + np.sin(r.mesh.nodes))))
        assert err < 1e-3

    @pytest.mark.parametrize("pair_name", ["p15_pair", "p35_pair"])
    def test_general_p_interval(self, pair_name, request):
        r = request.getfixturevalue(pair_name)
        assert abs(r.lam / interval_lambda(r.p, 2.0) - 1.0) < 0.01

    def test_drift_matches_dense_oracle(self):
        mesh = Mesh1D.interval(0.0, 1.0, 1500, density=lambda x: np.exp(x))
        r = principal_eigenpair(mesh, 2.0)
        lam_oracle = dense_weighted_p2_eigenvalue(
            mesh.nodes, mesh.density, mesh.weights)
        assert abs(r.lam / lam_oracle - 1.0) < 1e-6

    def test_normalization(self, p35_pair):
        r = p35_pair
        assert r.u.min() == pytest.approx(-1.0, abs=0.0)
        assert r.u.max() <= 1.0 + 1e-12
        rw = r.mesh.density * r.mesh.weights
        moment = abs(np.sum(rw * np.sign(r.u) * np.abs(r.u) ** (r.p - 1.0)))
        assert moment <= 1e-8 * np.sum(rw * np.abs(r.u) ** (r.p - 1.0))

    def test_residual_certified(self, p15_pair, p35_pair):
        assert p15_pair.residual < 1e-8
        assert p35_pair.residual < 1e-8

    def test_hat_function_identity_p2(self):
        # raw weak rows against every hat function, no rounding allowance
        mesh = Mesh1D.interval(0.0, 2.0, 500)
        r = principal_eigenpair(mesh, 2.0)
        rho_cell = 0.5 * (mesh.density[:-1] + mesh.density[1:])
        g = rho_cell * np.diff(r.u) / mesh.h
        flux = np.concatenate(([-g[0]], g[:-1] - g[1:], [g[-1]]))
        rows = flux - r.lam * mesh.density * mesh.weights * r.u
        scale = r.lam * np.max(mesh.density * mesh.weights * np.abs(r.u))
        assert np.max(np.abs(rows)) / scale < 1e-8

    def test_deterministic(self):
        mesh = Mesh1D.interval(0.0, 1.0, 300)
        a = principal_eigenpair(mesh, 2.5, seed=7)
        b = principal_eigenpair(mesh, 2.5, seed=7)
        assert a.lam == b.lam
        assert np.array_equal(a.u, b.u)

    def test_p_not_above_one(self):
        mesh = Mesh1D.interval(0.0, 1.0, 100)
        with pytest.raises(DomainError):
            principal_eigenpair(mesh, 1.0)

    def test_nonconvergence_diagnostics(self):
        mesh = Mesh1D.interval(0.0, 1.0, 300)
        with pytest.raises(ConvergenceError):
            principal_eigenpair(mesh, 3.0, max_iters=2)


class TestInvariants:
    @pytest.mark.parametrize("p,K,density", [
        (1.5, 2000, None),
        (2.0, 1500, lambda x: np.exp(x)),
        (3.5, 2000, None),
    ])
    def test_lower_bound(self, p, K, density):
        # intrinsic diameter equals the interval length here (sigma = 1)
        mesh = Mesh1D.interval(0.0, 2.0, K, density=density)
        r = principal_eigenpair(mesh, p)
        assert r.lam >= interval_lambda(p, 2.0) * (1.0 - 1e-3)

    def test_scale_covariance_exact(self):
        lam1 = principal_eigenpair(Mesh1D.interval(0.0, 1.5, 800), 2.5).lam
        lam2 = principal_eigenpair(Mesh1D.interval(0.0, 3.0, 800), 2.5).lam
        assert abs(lam1 / lam2 / 2.0**2.5 - 1.0) < 1e-10

    @given(c=st.floats(0.5, 3.0), p=st.floats(1.6, 3.2))
    @settings(max_examples=6, deadline=None)
    def test_scale_covariance_property(self, c, p):
        lam1 = principal_eigenpair(Mesh1D.interval(0.0, 1.0, 300), p).lam
        lam2 = principal_eigenpair(Mesh1D.interval(0.0, c, 300), p).lam
        assert abs(lam1 / lam2 / c**p - 1.0) < 1e-6

    @pytest.mark.parametrize("p,density", [
        (2.0, lambda x: np.exp(x)),
        (3.0, None),
    ])
    def test_mesh_convergence(self, p, density):
        lams = [principal_eigenpair(
            Mesh1D.interval(0.0, 2.0, K, density=density), p).lam
            for K in (250, 500, 1000)]
        assert abs(lams[0] - lams[1]) >= 2.0 * abs(lams[1] - lams[2])

    @pytest.mark.parametrize("p", [1.5, 2.0, 3.0])
    def test_energy_constant(self, p):
        mesh = Mesh1D.interval(0.0, 2.0, 1000)
        r = principal_eigenpair(mesh, p)
        du = central_only_deriv1(r.u, mesh.h)
        e = np.abs(du) ** p + r.lam / (p - 1.0) * np.abs(r.u) ** p
        assert e.max() - e.min() <= 3.0 * mesh.h * np.max(np.abs(e))

    def test_nodal_quotient_consistent(self, p15_pair):
        # the one-sided nodal quotient is the cross-check route; it
        # differs from the minimized cell quotient by O(h)
        r = p15_pair
        assert abs(rayleigh(r.mesh, r.u, r.p) / r.lam - 1.0) < 10.0 * r.mesh.h


class TestMatchedModel:
    def test_pure_interval_takes_zero_branch(self, classical_pair):
        m = matched_model(classical_pair, math.inf)
        assert m.problem.branch is Branch.T_ZERO
        assert m.m_max == pytest.approx(1.0, abs=1e-9)

    def test_drift_matches_maximum(self, drift_pair_p3):
        result, model = drift_pair_p3
        assert model.problem.branch is Branch.T_RADIAL
        assert model.m_max == pytest.approx(float(result.u.max()), abs=1e-6)

    def test_radial_weight_recovers_start(self, radial3_pair):
        # density x^2 on [1, 2.5] is the n=3 model itself, so the
        # matched start point must come back to the mesh's left end
        result, model = radial3_pair
        assert model.problem.a == pytest.approx(1.0, abs=1e-4)
        assert model.b == pytest.approx(2.5, abs=1e-3)


class TestGradientComparison:
    def test_classical_equality(self, classical_pair):
        model = matched_model(classical_pair, math.inf)
        v = gradient_comparison_check(classical_pair, model)
        assert v <= 5.0 * classical_pair.mesh.h
        assert v >= -1e-3  # equality case: the bound is attained

    def test_p3_equality(self):
        mesh = Mesh1D.interval(0.0, 2.0, 1000)
        r = principal_eigenpair(mesh, 3.0)
        v = gradient_comparison_check(r, matched_model(r, math.inf))
        assert v <= 5.0 * mesh.h
        assert v >= -1e-3

    def test_drift_within_tolerance(self, drift_pair_p3):
        result, model = drift_pair_p3
        v = gradient_comparison_check(result, model)
        assert v <= 5.0 * result.mesh.h

    def test_strong_drift_detected(self):
        # e^x weight with n=3 violates the dimension-3 curvature
        # hypothesis outright; the check must say so
        mesh = Mesh1D.interval(0.0, 1.0, 2000, density=lambda x: np.exp(x))
        r = principal_eigenpair(mesh, 2.0)
        v = gradient_comparison_check(r, matched_model(r, 3.0))
        assert v > 5.0 * mesh.h

    def test_mismatched_model_rejected(self, drift_pair_p3):
        result, _ = drift_pair_p3
        prob = ModelProblem(p=result.p, lam=result.lam, n=5.0, a=0.05,
                            branch=Branch.T_RADIAL)
        b, _, _ = first_max(prob)
        small = solve_model(prob, 1.05 * b)
        with pytest.raises(PreconditionError):
            gradient_comparison_check(result, small)

    def test_model_without_maximum_rejected(self, classical_pair):
        prob = ModelProblem(p=2.0, lam=classical_pair.lam)
        short = solve_model(prob, 0.5)  # stops before the first maximum
        with pytest.raises(ArgumentError):
            gradient_comparison_check(classical_pair, short)


class TestVolumeDensityE:
    def test_radial_equality_constant(self, radial3_pair):
        result, model = radial3_pair
        table, verdict = volume_density_E(result, model, 3.0)
        assert verdict
        E = table[:, 1]
        assert np.all(np.abs(E - 1.0) < 1e-3)

    def test_large_n_nearly_constant(self):
        a0, n = 50.0, 200.0
        mesh = Mesh1D.interval(a0, a0 + 1.0, 1200,
                               density=lambda x: (x / a0) ** (n - 1.0))
        r = principal_eigenpair(mesh, 2.0)
        table, verdict = volume_density_E(r, matched_model(r, n), n)
        assert verdict
        E = table[:, 1]
        assert (E.max() - E.min()) / abs(E.mean()) < 1e-3

    def test_monotone_drift_case(self, drift_pair_p3):
        result, model = drift_pair_p3
        _, verdict = volume_density_E(result, model, 5.0)
        assert verdict

    def test_reversed_synthetic_detected(self, radial3_pair):
        result, model = radial3_pair
        mesh = result.mesh
        rw = mesh.density * mesh.weights
        u_bad = np.where(result.u < -0.3, -1.0, result.u)
        u_bad = u_bad - np.sum(rw * u_bad) / np.sum(rw)
        u_bad = u_bad / np.max(np.abs(u_bad))
        fake = EigenResult(mesh=mesh, p=2.0, lam=result.lam, u=u_bad,
                           residual=0.0, iterations=0)
        _, verdict = volume_density_E(fake, model, 3.0)
        assert not verdict

    def test_zero_branch_model_rejected(self, classical_pair):
        model = matched_model(classical_pair, math.inf)
        with pytest.raises(ArgumentError):
            volume_density_E(classical_pair, model, 3.0)


class TestMaxComparison:
    def test_radial_pair_passes(self, radial3_pair):
        result, _ = radial3_pair
        assert max_comparison_check(result, 2.0, 3.0, result.lam)

    def test_asymmetric_drift_passes(self):
        mesh = Mesh1D.interval(0.0, 1.0, 1000, density=lambda x: np.exp(x))
        r = principal_eigenpair(mesh, 2.0)
        assert max_comparison_check(r, 2.0, 3.0, r.lam)

    def test_synthetic_low_maximum_detected(self):
        mesh = Mesh1D.interval(0.0, 1.0, 1000, density=lambda x: np.exp(x))
        r = principal_eigenpair(mesh, 2.0)
        fake = EigenResult(mesh=mesh, p=2.0, lam=r.lam,
                           u=np.clip(r.u, -1.0, 0.1),
                           residual=0.0, iterations=0)
        assert not max_comparison_check(fake, 2.0, 3.0, r.lam)


@pytest.fixture(scope="module")
def table_p2():
    return sharpness_tube(2.0, 3, math.pi, [0.6, 0.9, 0.99], K=400)


class TestSharpnessTube:
    def test_closed_form_example(self, table_p2):
        row = table_p2[-1]
        assert row[1] == pytest.approx(1.0 / 0.99**2, rel=1e-12)
        assert row[3] == pytest.approx(1.0 / 0.99**2 - 1.0, abs=1e-9)

    def test_gap_identity(self, table_p2):
        ident = (math.pi / (math.pi * table_p2[:, 0])) ** 2 - 1.0
        assert np.max(np.abs(table_p2[:, 3] - ident)) < 1e-9

    def test_strictly_above_bound(self, table_p2):
        bound = interval_lambda(2.0, math.pi)
        assert np.all(table_p2[:, 1] > bound)
        assert np.all(table_p2[:, 2] > bound)

    def test_gap_shrinks(self, table_p2):
        assert np.all(np.diff(table_p2[:, 3]) < 0.0)

    def test_mesh_agrees_with_closed_form(self, table_p2):
        assert np.max(np.abs(table_p2[:, 2] / table_p2[:, 1] - 1.0)) < 5e-3

    def test_p3_row(self):
        rows = sharpness_tube(3.0, 2, 2.0, [0.5], K=400)
        lam_closed = interval_lambda(3.0, math.pi * 0.5)
        assert rows[0, 1] == pytest.approx(lam_closed, rel=1e-12)
        assert abs(rows[0, 2] / rows[0, 1] - 1.0) < 5e-3

    def test_tube_too_wide_rejected(self):
        with pytest.raises(DomainError):
            sharpness_tube(2.0, 3, math.pi, [1.01])

    def test_needs_sphere_factor(self):
        with pytest.raises(ArgumentError):
            sharpness_tube(2.0, 1, math.pi, [0.5])
