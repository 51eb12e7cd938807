import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from numpy.testing import assert_allclose

from binodal.errors import DomainError
from binodal.jumpset import jump_pair
from binodal.material import (
    DiagonalStrain,
    MaterialParams,
    cof,
    energy,
    eshelby,
    excess,
    h_convexification_interval,
    h_prime,
    h_second,
    h_value,
    piola,
    rank_one,
)

from conftest import random_admissible


def rotation(t):
    c, s = math.cos(t), math.sin(t)
    return np.array([[c, -s], [s, c]])


def fd_gradient(F, p, step=1e-6):
    G = np.zeros((2, 2))
    for i in range(2):
        for j in range(2):
            E = np.zeros((2, 2))
            E[i, j] = step
            G[i, j] = (energy(F + E, p) - energy(F - E, p)) / (2 * step)
    return G


class TestParams:
    def test_defaults_are_running_example(self):
        p = MaterialParams(0.5)
        assert (p.d1, p.d2) == (1.0, 3.0)

    @pytest.mark.parametrize("mu,d1,d2", [(-1.0, 1.0, 3.0), (1.0, 3.0, 1.0), (1.0, 0.0, 3.0), (1.0, 2.0, 2.0), (math.nan, 1.0, 3.0)])
    def test_invalid(self, mu, d1, d2):
        with pytest.raises(DomainError):
            MaterialParams(mu, d1, d2)

    def test_liquid_limit_allowed(self):
        assert MaterialParams(0.0).mu == 0.0

    def test_diagonal_strain(self):
        s = DiagonalStrain(1.5, 2.0)
        assert s.det == 3.0
        assert_allclose(s.as_matrix(), np.diag([1.5, 2.0]))
        with pytest.raises(DomainError):
            DiagonalStrain(-1.0, 1.0)


class TestQuartic:
    def test_wells(self, p1):
        assert h_value(1.0, p1) == 0.0
        assert h_value(3.0, p1) == 0.0
        assert h_value(2.0, p1) == 1.0

    def test_derivatives_at_special_points(self, p1):
        assert h_prime(2.0, p1) == 0.0
        assert h_prime(1.0, p1) == 0.0
        assert h_second(1.0, p1) == 8.0
        assert h_second(p1.d1, p1) == 2 * (p1.d1 - p1.d2) ** 2

    @pytest.mark.parametrize("fn", [h_value, h_prime, h_second])
    def test_nonpositive_det_rejected(self, fn, p1):
        with pytest.raises(DomainError):
            fn(0.0, p1)
        with pytest.raises(DomainError):
            fn(np.array([1.0, -0.5]), p1)

    @given(st.floats(0.05, 6.0))
    def test_derivatives_match_central_differences(self, d):
        p = MaterialParams(1.0)
        s = 1e-5
        assert h_prime(d, p) == pytest.approx((h_value(d + s, p) - h_value(d - s, p)) / (2 * s), rel=1e-7, abs=1e-7)
        assert h_second(d, p) == pytest.approx((h_prime(d + s, p) - h_prime(d - s, p)) / (2 * s), rel=1e-7, abs=1e-7)

    def test_nonnegative_with_zeros_only_at_wells(self, p1):
        d = np.linspace(0.01, 6.0, 5000)
        v = h_value(d, p1)
        assert np.all(v >= 0)
        near = d[v < 1e-6]
        assert np.all((np.abs(near - 1.0) < 1e-3) | (np.abs(near - 3.0) < 1e-3))

    def test_array_input(self, p1):
        assert_allclose(h_value(np.array([1.0, 2.0, 3.0]), p1), [0.0, 1.0, 0.0])


class TestEnergy:
    def test_well_bottom(self, p1):
        assert energy(math.sqrt(p1.d1) * np.eye(2), p1) == pytest.approx(p1.mu * p1.d1)

    def test_direct_evaluation(self, p1):
        assert energy(np.diag([1.0, 2.0]), p1) == pytest.approx(3.5)

    def test_liquid(self):
        p = MaterialParams(0.0)
        F = np.array([[1.2, 0.3], [-0.1, 0.9]])
        assert energy(F, p) == pytest.approx(h_value(np.linalg.det(F), p))

    def test_nonpositive_det(self, p1):
        with pytest.raises(DomainError):
            energy(np.diag([1.0, -1.0]), p1)
        with pytest.raises(DomainError):
            piola(np.zeros((2, 2)), p1)

    @settings(max_examples=60)
    @given(st.floats(-3.0, 3.0), st.floats(-3.0, 3.0), st.floats(0.3, 2.0), st.floats(0.3, 2.0), st.floats(-0.5, 0.5))
    def test_objective_and_isotropic(self, t1, t2, a, b, s):
        p = MaterialParams(1.3)
        F = np.array([[a, s], [0.0, b]])
        W = energy(F, p)
        assert energy(rotation(t1) @ F, p) == pytest.approx(W, rel=1e-12, abs=1e-12)
        assert energy(F @ rotation(t2), p) == pytest.approx(W, rel=1e-12, abs=1e-12)


class TestPiola:
    def test_well_bottom(self, p1):
        assert_allclose(piola(math.sqrt(p1.d1) * np.eye(2), p1), p1.mu * math.sqrt(p1.d1) * np.eye(2))

    def test_liquid_diagonal(self):
        p = MaterialParams(0.0)
        a, b = 1.4, 1.1
        assert_allclose(piola(np.diag([a, b]), p), h_prime(a * b, p) * np.diag([b, a]))

    def test_finite_difference_at_example(self, p1):
        F = np.diag([1.3, 0.7])
        assert_allclose(piola(F, p1), fd_gradient(F, p1), rtol=1e-6)

    def test_finite_difference_random(self, rng):
        p = MaterialParams(0.8)
        for F in random_admissible(rng, 100):
            P = piola(F, p)
            G = fd_gradient(F, p)
            assert np.max(np.abs(P - G)) <= 1e-6 * max(np.max(np.abs(P)), 1.0)

    def test_cofactor_is_derivative_of_det(self, rng):
        F = rng.normal(size=(2, 2))
        H = rng.normal(size=(2, 2)) * 1e-7
        assert np.linalg.det(F + H) - np.linalg.det(F) == pytest.approx(np.sum(cof(F) * H), rel=1e-5)


class TestEshelby:
    def test_liquid_well(self):
        p = MaterialParams(0.0)
        assert_allclose(eshelby(np.eye(2), p), np.zeros((2, 2)), atol=1e-15)

    def test_trace_identity(self, p1):
        F = np.diag([1.2, 0.8])
        S = eshelby(F, p1)
        assert np.trace(S) == pytest.approx(2 * energy(F, p1) - np.sum(F * piola(F, p1)), rel=1e-14)

    def test_hydrostatic_isotropy(self, p1):
        e = 1.25
        F = e * np.eye(2)
        pe = piola(F, p1)[0, 0]
        assert_allclose(eshelby(F, p1), (energy(F, p1) - e * pe) * np.eye(2), atol=1e-13)


class TestExcess:
    def test_zero_increment(self, p1):
        assert excess(np.diag([1.1, 0.9]), np.zeros((2, 2)), p1) == 0.0

    def test_second_order(self, p1):
        # for H = e1 (x) e1, det H = 0 and excess / t^2 -> (mu + h''(d) F22^2) / 2
        F = np.diag([1.1, 0.9])
        H = rank_one([1.0, 0.0], [1.0, 0.0])
        q = [excess(F, t * H, p1) / t**2 for t in (1e-2, 5e-3)]
        limit = 2 * q[1] - q[0]
        exact = 0.5 * (p1.mu + h_second(0.99, p1) * 0.9**2)
        assert limit == pytest.approx(exact, rel=1e-4)

    def test_rank_one_nonnegative_for_stiff_shear(self):
        p = MaterialParams(50.0)
        F = np.diag([2.0, 2.0])
        for th in np.linspace(0, math.pi, 13):
            m = np.array([math.cos(th), math.sin(th)])
            for b1 in np.linspace(-1, 1, 9):
                for b2 in np.linspace(-1, 1, 9):
                    H = rank_one([b1, b2], m)
                    if np.linalg.det(F + H) > 0:
                        assert excess(F, H, p) >= -1e-12

    def test_degenerate_target(self, p1):
        with pytest.raises(DomainError):
            excess(np.eye(2), -np.eye(2), p1)

    @pytest.mark.parametrize("eps0", [1.2, 1.5, math.sqrt(3.0), 2.0])
    def test_symmetrised_excess_vanishes_on_jump_pairs(self, eps0, p1):
        pair = jump_pair(eps0, p1)
        Fp, Fm = pair.f_plus.as_matrix(), pair.f_minus.as_matrix()
        jump = Fp - Fm
        sym = 0.5 * (excess(Fm, jump, p1) + excess(Fp, -jump, p1))
        assert abs(sym) <= 1e-10


class TestConvexification:
    def test_interval(self, p1):
        assert h_convexification_interval(p1) == (1.0, 3.0)

    @given(st.floats(0.1, 2.0), st.floats(0.1, 3.0))
    def test_ordered(self, d1, gap):
        lo, hi = h_convexification_interval(MaterialParams(1.0, d1, d1 + gap))
        assert lo < hi

    def test_hull_is_zero_on_interval(self, p1):
        lo, hi = h_convexification_interval(p1)
        d = np.linspace(lo, hi, 401)
        v = h_value(d, p1)
        assert np.all(v >= 0)
        assert v[0] == 0 and v[-1] == 0
        assert np.all(v[1:-1] > 0)
