import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from gsci import (
    EIGHT_PI,
    ContractError,
    DomainError,
    FixtureSpec,
    PreconditionError,
    RadialProfile,
    area_integral,
    bubble_area,
    bubble_value,
    choose_scale_a,
    distribution_beta,
    gap_on_circle,
    psi_compose,
    radius_for_mass,
    symmetrize,
)
from gsci.radial import bubble_profile
from gsci.rearrangement import equal_measure_thresholds, scale_gap


def concentric_beta(t, R):
    """β(t) for the (1, 2) bubble pair on B_R, from the radial level sets."""
    # gap_on_circle(1, 2, r) = t  ⇔  (8 + 4r²)/(8 + r²) = q = 2e^{-t/2}  ⇔  r² = 8(q - 1)/(4 - q)
    q = 2.0 * np.exp(-0.5 * t)
    r2 = np.where(q > 1, 8.0 * (q - 1.0) / np.maximum(4.0 - q, 1e-300), np.inf)
    r = np.sqrt(np.minimum(r2, R * R))
    return np.where(t < 2 * math.log(2.0), bubble_area(1.0, r), 0.0)


class TestDistribution:
    def test_extremes(self, concentric_pair):
        v1, v2 = concentric_pair.v1, concentric_pair.v2
        total = area_integral(v1)
        # the linear reconstruction weighs cut cells at their centroids, a second-order difference
        for method, rel in (("cells", 1e-12), ("linear", 1e-4)):
            tab = distribution_beta(v1, v2, [-5.0, 10.0], method=method)
            assert tab.beta[0] == pytest.approx(total, rel=rel)
            assert tab.beta[1] == 0.0

    @pytest.mark.parametrize("method, tol", [("cells", 2e-2), ("linear", 2e-3)])
    def test_concentric_oracle(self, concentric_pair, method, tol):
        v1, v2 = concentric_pair.v1, concentric_pair.v2
        t = np.linspace(concentric_pair.c + 0.05, concentric_pair.M - 0.05, 40)
        tab = distribution_beta(v1, v2, t, method=method)
        np.testing.assert_allclose(tab.beta, concentric_beta(t, concentric_pair.spec.radius), atol=tol)

    def test_nonincreasing_and_right_continuous(self, mobius_pair):
        v1, v2 = mobius_pair.v1, mobius_pair.v2
        t = np.sort(np.concatenate([np.linspace(-0.1, 1.5, 300), (v2.values - v1.values)[v1.mask][:50]]))
        beta = distribution_beta(v1, v2, t).beta
        assert np.all(np.diff(beta) <= 0)
        # right-continuity at resolution: one ulp above t gives the same value
        np.testing.assert_array_equal(distribution_beta(v1, v2, np.nextafter(t, np.inf)).beta, beta)

    def test_equal_measure_thresholds(self, mobius_pair):
        v1, v2 = mobius_pair.v1, mobius_pair.v2
        t = equal_measure_thresholds(v1, v2, 64)
        assert np.all(np.diff(t) > 0)
        beta = distribution_beta(v1, v2, t, method="linear").beta
        steps = -np.diff(beta)
        total = distribution_beta(v1, v2, [-5.0], method="linear").beta[0]
        np.testing.assert_allclose(steps, total / 64, rtol=1e-9)

    def test_unknown_method(self, concentric_pair):
        with pytest.raises(ValueError):
            distribution_beta(concentric_pair.v1, concentric_pair.v2, [0.0], method="spline")


class TestScale:
    def test_vacuous_epsilon(self):
        assert choose_scale_a(math.log(4.0), 8.0, EIGHT_PI) == 1.0

    def test_displayed_bound(self):
        a = choose_scale_a(math.log(4.0), 8.0, 0.01)
        assert scale_gap(a, math.log(4.0), 8.0) < 0.01

    @given(M=st.floats(0.05, 5.0), K=st.floats(0.1, 100.0), eps=st.floats(1e-4, 1.0))
    def test_within_factor_two_of_minimal(self, M, K, eps):
        a = choose_scale_a(M, K, eps)
        assert scale_gap(a, M, K) < eps
        if a > 1.0:
            assert scale_gap(a / 2.0, M, K) >= eps

    @pytest.mark.parametrize("args", [(0.0, 1.0, 1.0), (1.0, -1.0, 1.0), (1.0, 1.0, 0.0)])
    def test_domain(self, args):
        with pytest.raises(DomainError):
            choose_scale_a(*args)


class TestSymmetrize:
    def test_constant_gap(self, concentric_pair):
        v1 = concentric_pair.v1
        res = symmetrize(v1, v1.replace(values=v1.values + 0.4), 1.0, levels=64, radial_nodes=64)
        np.testing.assert_allclose(res.phi.values, 0.4, atol=1e-12)
        assert res.residual == 0.0

    @pytest.mark.parametrize("a", [1.0, 1.7, 5.0])
    def test_concentric_profile(self, a):
        pair = FixtureSpec("concentric", 1.0, 2.0, 0.7, nx=256).build()
        res = symmetrize(pair.v1, pair.v2, a)
        # the level set of φ at radius s carries the same e^{v1} mass as B_{r(s)}
        mass = np.minimum(bubble_area(a, res.phi.radii), res.mass_v1 * (1 - 1e-15))
        r = np.array([radius_for_mass(1.0, m) for m in mass])
        np.testing.assert_allclose(res.phi.values, gap_on_circle(1.0, 2.0, r), atol=2e-4)

    def test_invariants(self, mobius_pair):
        res = symmetrize(mobius_pair.v1, mobius_pair.v2, 1.3)
        phi = res.phi.values
        assert np.all(np.diff(phi) <= 0)
        assert phi[-1] >= mobius_pair.c - 1e-3
        assert phi[0] <= mobius_pair.M + 1e-3
        assert bubble_area(1.3, res.R_a) == pytest.approx(res.mass_v1, rel=1e-12)
        assert res.mass_v1 == pytest.approx(area_integral(mobius_pair.v1), rel=1e-4)
        assert len(res.rows()) == len(res.phi.radii)

    def test_residual_shrinks(self):
        spec = FixtureSpec("mobius", 1.0, 2.0, 0.8, z0=0.3 + 0.1j, theta=0.4)
        res = [symmetrize(*(lambda p: (p.v1, p.v2))(spec.at(nx).build()), 1.0).residual for nx in (64, 128)]
        assert res[0] / res[1] >= 1.5

    def test_mass_conservation(self, mobius_pair):
        res = symmetrize(mobius_pair.v1, mobius_pair.v2, 2.0)
        psi = psi_compose(2.0, res.phi)
        from gsci import enclosed_mass

        assert enclosed_mass(psi, psi.R) == pytest.approx(area_integral(mobius_pair.v2), rel=2e-3)

    def test_rejects_large_mass(self, concentric_pair):
        v1 = concentric_pair.v1
        heavy = v1.replace(values=v1.values + 3.0)
        with pytest.raises(PreconditionError):
            symmetrize(heavy, heavy.replace(values=heavy.values + 0.1), 1.0)

    def test_rejects_other_normalization(self, concentric_pair):
        v1 = concentric_pair.v1.replace(weight=2)
        with pytest.raises(ContractError):
            symmetrize(v1, v1, 1.0)


class TestCompose:
    def test_zero_phi(self):
        r = np.linspace(0.0, 2.0, 65)
        psi = psi_compose(1.5, RadialProfile(r, np.zeros_like(r), np.zeros_like(r)))
        np.testing.assert_allclose(psi.values, bubble_value(1.5, r), atol=1e-15)

    def test_increasing_phi_rejected(self):
        p = bubble_profile(1.0, 2.0, 64)
        with pytest.raises(ContractError):
            psi_compose(1.0, p.with_values(-p.values, -p.derivatives))

    @given(a=st.floats(0.5, 5.0), slope=st.floats(0.0, 3.0))
    def test_strictly_decreasing(self, a, slope):
        r = np.linspace(0.0, 2.0, 65)
        phi = RadialProfile(r, -slope * r * r, -2 * slope * r)
        psi = psi_compose(a, phi)
        assert psi.strictly_decreasing
        assert np.all(np.diff(psi.values) <= np.diff(bubble_value(a, r)))
