import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from peig import PExponent, arcsin_p, pi_p, sin_p, sin_p_prime
from peig.errors import DomainError

from oracles import arcsin_p_quad, pi_p_closed


class TestPExponent:
    def test_conjugate_identity(self):
        for p in (1.2, 1.5, 2.0, 3.0, 7.0, 100.0):
            e = PExponent(p)
            assert abs(1.0 / e.p + 1.0 / e.q - 1.0) < 1e-15

    def test_rejects_p_at_or_below_one(self):
        for bad in (1.0, 0.5, 0.0, -2.0):
            with pytest.raises(DomainError):
                PExponent(bad)


class TestPiP:
    def test_p2_is_pi(self):
        assert abs(pi_p(2.0) - math.pi) <= 1e-10

    def test_p4_closed_value(self):
        assert abs(pi_p(4.0) - 2.22144146907918) <= 1e-10
        assert abs(pi_p(4.0) - math.pi / math.sqrt(2.0)) <= 1e-10

    def test_matches_reflection_formula(self):
        for p in (1.1, 1.2, 1.5, 2.0, 3.0, 3.5, 7.0, 25.0):
            assert abs(pi_p(p) - pi_p_closed(p)) <= 1e-10 * pi_p_closed(p)

    def test_large_p_monotone_limit(self):
        assert 2.0 < pi_p(100.0) < 2.1

    def test_rejects_bad_exponent(self):
        with pytest.raises(DomainError):
            pi_p(1.0)
        with pytest.raises(DomainError):
            pi_p(0.7)


class TestArcsinP:
    def test_endpoint_is_half_period(self):
        for p in (1.2, 2.0, 3.0, 7.0):
            assert abs(arcsin_p(1.0, p) - 0.5 * pi_p(p)) <= 1e-12

    def test_zero(self):
        assert arcsin_p(0.0, 3.0) == 0.0

    def test_p2_reduction(self):
        assert abs(arcsin_p(0.5, 2.0) - math.pi / 6.0) <= 1e-12

    def test_out_of_range_rejected(self):
        with pytest.raises(DomainError):
            arcsin_p(1.5, 2.0)
        with pytest.raises(DomainError):
            arcsin_p(np.array([0.2, -1.01]), 2.0)

    def test_matches_quadrature_oracle(self):
        for p in (1.2, 1.5, 3.0, 7.0):
            for x in (-0.95, -0.4, 0.1, 0.5, 0.99):
                assert abs(arcsin_p(x, p) - arcsin_p_quad(x, p)) <= 1e-10


class TestSinP:
    def test_zero_and_peak(self):
        for p in (1.2, 2.0, 3.0, 7.0):
            assert sin_p(0.0, p) == 0.0
            assert abs(sin_p(0.5 * pi_p(p), p) - 1.0) <= 1e-12

    def test_p2_reduction_point(self):
        assert abs(sin_p(0.7, 2.0) - math.sin(0.7)) <= 1e-9

    def test_p2_reduction_dense(self):
        t = np.linspace(0.0, 2.0 * math.pi, 1001)
        assert np.max(np.abs(sin_p(t, 2.0) - np.sin(t))) <= 1e-10
        assert np.max(np.abs(sin_p_prime(t, 2.0) - np.cos(t))) <= 1e-10

    def test_derivative_anchors(self):
        for p in (1.2, 2.0, 3.0, 7.0):
            assert abs(sin_p_prime(0.0, p) - 1.0) <= 1e-12
            assert abs(sin_p_prime(0.5 * pi_p(p), p)) <= 1e-6
        assert abs(sin_p_prime(0.7, 2.0) - math.cos(0.7)) <= 1e-9

    def test_bounded_by_one(self):
        t = np.linspace(-10.0, 10.0, 4001)
        for p in (1.2, 3.0):
            assert np.max(np.abs(sin_p(t, p))) <= 1.0

    def test_reflection_and_periodicity(self):
        for p in (1.5, 3.0):
            pp = pi_p(p)
            t = np.linspace(-0.5 * pp, 0.5 * pp, 101)
            assert np.max(np.abs(sin_p(pp - t, p) - sin_p(t, p))) <= 1e-9
            assert np.max(np.abs(sin_p(t + 2.0 * pp, p) - sin_p(t, p))) <= 1e-9

    def test_oddness_on_base_interval(self):
        for p in (1.2, 2.5, 7.0):
            t = np.linspace(0.0, 0.5 * pi_p(p), 101)
            assert np.max(np.abs(sin_p(-t, p) + sin_p(t, p))) <= 1e-12


class TestIdentities:
    def test_pythagorean_identity_dense(self):
        for p in (1.2, 2.0, 3.0, 7.0):
            t = np.linspace(0.0, 2.0 * pi_p(p), 2001)
            s = sin_p(t, p)
            c = sin_p_prime(t, p)
            assert np.max(np.abs(np.abs(s) ** p + np.abs(c) ** p - 1.0)) <= 1e-8

    def test_inverse_roundtrip_from_value(self):
        # sin_p(arcsin_p(x)) = x is well conditioned for every x
        for p in (1.2, 2.0, 3.0, 7.0):
            x = np.linspace(-1.0, 1.0, 501)
            assert np.max(np.abs(sin_p(arcsin_p(x, p), p) - x)) <= 1e-8

    def test_inverse_roundtrip_from_angle(self):
        # arcsin_p(sin_p(t)) = t is only recoverable where 1 - |sin_p|
        # stays representable; near the peak the derivative collapses
        # faster than double resolution for p close to 1
        for p in (1.2, 2.0, 3.0, 7.0):
            t = np.linspace(-0.5 * pi_p(p), 0.5 * pi_p(p), 501)
            s = sin_p(t, p)
            ok = 1.0 - np.abs(s) >= 1e-9
            err = np.abs(arcsin_p(s[ok], p) - t[ok])
            assert np.max(err) <= 1e-8

    def test_defining_ode_residual(self):
        # (|s'|^{p-2} s')' + (p-1) |s|^{p-2} s = 0 away from s' = 0
        for p in (1.5, 2.0, 3.0):
            pp = pi_p(p)
            t = np.arange(0.05, 0.5 * pp - 0.05, 1e-4)
            s = sin_p(t, p)
            c = sin_p_prime(t, p)
            phi = np.abs(c) ** (p - 2.0) * c
            dphi = np.gradient(phi, t, edge_order=2)
            resid = dphi + (p - 1.0) * np.abs(s) ** (p - 2.0) * s
            assert np.max(np.abs(resid)) <= 1e-5


@settings(max_examples=150, deadline=None)
@given(p=st.floats(1.05, 9.0), t=st.floats(-30.0, 30.0))
def test_pythagorean_identity_property(p, t):
    s = sin_p(t, p)
    c = sin_p_prime(t, p)
    assert abs(abs(s) ** p + abs(c) ** p - 1.0) <= 1e-8


@settings(max_examples=100, deadline=None)
@given(p=st.floats(1.05, 9.0), t=st.floats(-30.0, 30.0))
def test_periodicity_property(p, t):
    assert abs(sin_p(t + 2.0 * pi_p(p), p) - sin_p(t, p)) <= 1e-9


@settings(max_examples=100, deadline=None)
@given(p=st.floats(1.05, 9.0), x=st.floats(-1.0, 1.0))
def test_arcsin_roundtrip_property(p, x):
    t = arcsin_p(x, p)
    assert abs(sin_p(t, p) - x) <= 1e-9
