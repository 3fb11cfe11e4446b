import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from gsci import (
    ContractError,
    Disk,
    DomainError,
    EmptyDomainError,
    Grid2D,
    MobiusParams,
    PlanarField,
    UnsupportedDomainError,
    area_integral,
    boundary_gap_check,
    boundary_weighted_length,
    bubble_area,
    bubble_value,
    lemma22_matching_x,
    max_difference,
    mobius_pullback_bubble,
    read_snapshot,
    restrict_mask,
    source_ordering_check,
    write_snapshot,
)
from gsci.fixtures import FixtureSpec
from gsci.planar import interpolate, pde_source, restricted


def radial_field(lam, R, nx, disk_R=None):
    disk_R = R if disk_R is None else disk_R
    g = Grid2D.covering(0j, disk_R, nx)
    return PlanarField.from_function(g, Disk(0j, disk_R), lambda y: bubble_value(lam, np.abs(y)))


class TestGridAndField:
    def test_covering_grid(self):
        g = Grid2D.covering(0.5 + 0.5j, 1.0, 64)
        assert g.shape == (64, 64)
        assert g.x0 < -0.5 and g.x0 + g.width > 1.5

    def test_shape_contract(self):
        g = Grid2D(0.0, 0.0, 0.1, 32, 32)
        with pytest.raises(ContractError):
            PlanarField(g, np.zeros((32, 31)), np.ones((32, 32), bool), np.ones((32, 32)))

    def test_finite_on_mask(self):
        g = Grid2D(0.0, 0.0, 0.1, 32, 32)
        v = np.zeros((32, 32))
        v[3, 3] = np.nan
        with pytest.raises(ContractError):
            PlanarField(g, v, np.ones((32, 32), bool), np.ones((32, 32)))

    def test_disk_masks_are_simply_connected(self):
        f = radial_field(1.0, 2.0, 64)
        assert f.connected and f.simply_connected

    def test_annulus_is_not_simply_connected(self):
        f = radial_field(1.0, 2.0, 64)
        r = np.abs(f.grid.points())
        ring = f.replace(mask=f.mask & (r > 1.0), domain=None)
        assert ring.connected and not ring.simply_connected


class TestMobius:
    def test_identity_map_is_radial(self):
        g = Grid2D.covering(0j, 2.0, 64)
        f = mobius_pullback_bubble(1.5, MobiusParams(0j, 0.0, 2.0), g)
        np.testing.assert_allclose(f.values[f.mask], bubble_value(1.5, np.abs(g.points()))[f.mask], atol=1e-13)

    @pytest.mark.parametrize("z0", [1.0, 1.2j, -1.0 - 0.1j])
    def test_parameter_error(self, z0):
        with pytest.raises(DomainError):
            MobiusParams(z0, 0.0, 1.0)

    @given(z0=st.complex_numbers(max_magnitude=0.9), theta=st.floats(-math.pi, math.pi))
    def test_automorphism_round_trip(self, z0, theta):
        m = MobiusParams(z0, theta, 2.0)
        y = np.array([0.3 + 0.2j, -1.1j, 1.5])
        np.testing.assert_allclose(m.inverse(m.map(y)), y, atol=1e-10)
        np.testing.assert_allclose(np.abs(m.map(2.0 * np.exp(1j * np.linspace(0, 6, 7)))), 2.0, rtol=1e-12)

    @pytest.mark.slow
    def test_area_invariant_under_z0(self):
        g = Grid2D.covering(0j, 2.0, 512)
        ref = area_integral(mobius_pullback_bubble(1.0, MobiusParams(0j, 0.0, 2.0), g), order=4)
        moved = area_integral(mobius_pullback_bubble(1.0, MobiusParams(0.3 + 0.1j, 0.4, 2.0), g), order=4)
        assert abs(moved - ref) / ref < 1e-4
        assert ref == pytest.approx(bubble_area(1.0, 2.0), rel=1e-6)

    def test_pde_residual_second_order(self):
        errs = []
        for nx in (64, 128, 256):
            g = Grid2D.covering(0j, 2.0, nx)
            f = mobius_pullback_bubble(1.0, MobiusParams(0.3, 0.0, 2.0), g)
            s = pde_source(f)
            errs.append(np.nanmax(np.abs(s[f.mask])))
        assert errs[-1] < 1e-3
        assert errs[0] / errs[1] > 3.5 and errs[1] / errs[2] > 3.5


class TestArea:
    def test_empty_mask(self):
        f = radial_field(1.0, 2.0, 64)
        assert area_integral(f.replace(mask=np.zeros_like(f.mask))) == 0.0

    def test_closed_form_and_refinement(self):
        errs = [abs(area_integral(radial_field(1.0, 2.0, nx)) - bubble_area(1.0, 2.0)) for nx in (128, 256, 512)]
        assert errs[-1] / bubble_area(1.0, 2.0) < 1e-5
        assert 3.0 < errs[0] / errs[1] < 5.0 and 3.0 < errs[1] / errs[2] < 5.0

    def test_fourth_order(self):
        errs = [abs(area_integral(radial_field(1.0, 2.0, nx), order=4) - bubble_area(1.0, 2.0))
                for nx in (64, 128)]
        assert errs[1] < errs[0] / 8

    def test_weight_two(self):
        f = radial_field(1.0, 2.0, 128)
        half = f.replace(values=0.5 * f.values)
        assert area_integral(half, 2) == pytest.approx(area_integral(f, 1), rel=1e-14)

    def test_order_four_needs_disk(self):
        f = radial_field(1.0, 2.0, 64)
        with pytest.raises(UnsupportedDomainError):
            area_integral(f.replace(domain=None), order=4)


class TestDifferences:
    def test_max_difference_examples(self):
        f = radial_field(1.0, 2.0, 64)
        assert max_difference(f, f) == 0.0
        assert max_difference(f, f.replace(values=f.values + 0.7)) == pytest.approx(0.7)
        g = radial_field(2.0, 2.0, 64)
        assert max_difference(f, g) == pytest.approx(2 * math.log(2.0), abs=1e-2)

    def test_grid_mismatch(self):
        with pytest.raises(ContractError):
            max_difference(radial_field(1.0, 2.0, 64), radial_field(1.0, 2.0, 66))

    def test_gap_at_matching_radius(self, concentric_pair):
        rep = boundary_gap_check(concentric_pair.v1, concentric_pair.v2, concentric_pair.c)
        assert rep.passed

    def test_classical_setting(self):
        f = radial_field(1.0, 2.0, 64)
        assert boundary_gap_check(f, f, 0.0).passed

    def test_oversized_mask_reports_interior_violation(self):
        pair = FixtureSpec("oversized", 1.0, 2.0, 0.7, nx=128).build()
        rep = boundary_gap_check(pair.v1, pair.v2, pair.c)
        assert not rep.passed and rep.interior_worst > rep.tol


class TestBoundaryLength:
    @pytest.mark.parametrize("r", [0.5, 1.0, math.sqrt(8.0), 3.0])
    def test_bol_equality_for_caps(self, r):
        f = radial_field(1.0, r, 256)
        A = bubble_area(1.0, r)
        L = boundary_weighted_length(f, n=1024, use_exact=True)
        assert L * L == pytest.approx(0.5 * A * (8 * math.pi - A), rel=1e-12)
        Lh = boundary_weighted_length(f, n=1024, order=3)
        assert Lh * Lh == pytest.approx(0.5 * A * (8 * math.pi - A), rel=1e-6)

    def test_constant_zero_on_unit_circle(self):
        g = Grid2D.covering(0j, 1.0, 64)
        f = PlanarField.from_function(g, Disk(0j, 1.0), lambda y: np.zeros(np.shape(y)))
        assert boundary_weighted_length(f) == pytest.approx(2 * math.pi, rel=1e-14)

    def test_spectral_convergence(self):
        g = Grid2D.covering(0j, 2.0, 64)
        f = mobius_pullback_bubble(1.0, MobiusParams(0.5 + 0.2j, 0.3, 2.0), g)
        ref = boundary_weighted_length(f, n=4096, use_exact=True)
        errs = [abs(boundary_weighted_length(f, n=n, use_exact=True) - ref) for n in (16, 32, 64)]
        assert errs[2] < 1e-12 < errs[0]

    def test_unsupported_domain(self):
        f = radial_field(1.0, 2.0, 64)
        with pytest.raises(UnsupportedDomainError):
            boundary_weighted_length(f.replace(domain=None))

    def test_cubic_stencil_must_fit(self):
        f = radial_field(1.0, 2.0, 64)
        with pytest.raises(ContractError):
            interpolate(f, np.array([f.grid.x0 + 0.1 * f.grid.h + 0j]), order=3)


class TestRestriction:
    def test_identity_when_gap_exceeds_c(self):
        f = radial_field(1.0, 2.0, 64)
        mask, frac = restrict_mask(f, f.replace(values=f.values + 1.0), 0.0)
        np.testing.assert_array_equal(mask, f.mask)
        np.testing.assert_allclose(frac, f.fraction)

    def test_empty_at_max(self, concentric_pair):
        v1, v2 = concentric_pair.v1, concentric_pair.v2
        with pytest.raises(EmptyDomainError):
            restrict_mask(v1, v2, max_difference(v1, v2))

    def test_recovers_matching_disk(self):
        pair = FixtureSpec("oversized", 1.0, 2.0, 0.7, nx=256).build()
        mask, frac = restrict_mask(pair.v1, pair.v2, pair.c)
        R = lemma22_matching_x(1.0, 2.0, 0.7)
        area = float(np.sum(frac)) * pair.v1.grid.h ** 2
        assert area == pytest.approx(math.pi * R * R, rel=1e-3)
        sub = restricted(pair.v1, mask, frac)
        assert sub.domain is None and sub.simply_connected

    @given(c1=st.floats(0.0, 1.3), c2=st.floats(0.0, 1.3))
    def test_monotone_in_c(self, concentric_pair, c1, c2):
        lo, hi = sorted((c1, c2))
        v1, v2 = concentric_pair.v1, concentric_pair.v2
        m_lo, _ = restrict_mask(v1, v2, lo)
        m_hi, _ = restrict_mask(v1, v2, hi)
        assert np.all(m_lo | ~m_hi)

    def test_disconnected_region_rejected(self):
        f = radial_field(1.0, 2.0, 64)
        x = np.real(f.grid.points())
        two_bumps = f.replace(values=f.values + np.exp(-((np.abs(x) - 1.0) / 0.2) ** 2))
        with pytest.raises(ContractError):
            restrict_mask(f, two_bumps, 0.5)


class TestSources:
    def test_exact_pairs_pass(self, concentric_pair, mobius_pair):
        for pair in (concentric_pair, mobius_pair):
            rep = source_ordering_check(pair.v1, pair.v2)
            assert rep.passed and abs(rep.f1_min) <= rep.eps_disc

    def test_broken_pair_fails(self):
        pair = FixtureSpec("broken", nx=128).build()
        rep = source_ordering_check(pair.v1, pair.v2)
        assert not rep.passed and rep.order_min < -rep.eps_disc


class TestSnapshot:
    def test_round_trip(self, tmp_path, mobius_pair):
        f = mobius_pair.v1
        path = tmp_path / "field.txt"
        write_snapshot(f, path)
        g = read_snapshot(path)
        assert g.grid == f.grid and g.weight == f.weight and g.domain == f.domain
        np.testing.assert_array_equal(g.values, f.values)
        np.testing.assert_array_equal(g.mask, f.mask)
        np.testing.assert_array_equal(g.fraction, f.fraction)
        assert area_integral(g, order=4) == area_integral(f, order=4)

    def test_rejects_foreign_file(self, tmp_path):
        path = tmp_path / "junk.txt"
        path.write_text("hello\n")
        with pytest.raises(ContractError):
            read_snapshot(path)
