import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from gsci import (
    Normalization,
    SourceSpec,
    area_integral,
    bubble_value,
    convert_normalization,
    enclosed_mass,
    solve_radial,
)
from gsci.planar import pde_source

U, V = Normalization.EXP_U, Normalization.EXP_2V


def test_enum_basics():
    assert U.weight == 1 and V.weight == 2
    assert U.total_mass == pytest.approx(8 * math.pi)
    assert V.total_mass == pytest.approx(4 * math.pi)
    assert Normalization.parse("exp_2v") is V
    with pytest.raises(ValueError):
        Normalization.parse("exp_3w")


@given(lam=st.floats(0.2, 5.0), R=st.floats(0.5, 5.0))
def test_profile_round_trip(lam, R):
    p = solve_radial(SourceSpec.zero(), 2 * math.log(lam), R, 64)
    back = convert_normalization(convert_normalization(p, U, V), V, U)
    np.testing.assert_allclose(back.radii, p.radii, rtol=1e-12)
    np.testing.assert_allclose(back.values, p.values, rtol=1e-12, atol=1e-12)
    np.testing.assert_allclose(back.derivatives, p.derivatives, rtol=1e-12, atol=1e-12)


@given(lam=st.floats(0.2, 5.0))
def test_mass_halves(lam):
    p = solve_radial(SourceSpec.zero(), 2 * math.log(lam), 3.0, 128)
    q = convert_normalization(p, U, V)
    # ∫ e^{2v} over the image disk, by the same Hermite rule on 2v
    doubled = q.with_values(2 * q.values, 2 * q.derivatives)
    assert enclosed_mass(doubled, q.R) == pytest.approx(0.5 * enclosed_mass(p, p.R), rel=1e-12)


def test_whole_bubble_has_4pi():
    g = convert_normalization(lambda y: bubble_value(1.0, np.abs(y)), U, V)
    from scipy import integrate

    val, _ = integrate.quad(lambda r: 2 * math.pi * r * math.exp(2 * g(r)), 0.0, np.inf, epsrel=1e-12)
    assert val == pytest.approx(4 * math.pi, rel=1e-10)


def test_converted_bubble_solves_other_equation():
    # Δv + e^{2v} = 0 for v(y) = ½U_1(√2 y)
    fn = convert_normalization(lambda y: bubble_value(1.0, np.abs(y)), U, V)
    r, h = 0.7, 1e-3
    lap = (fn(r + h) - 2 * fn(r) + fn(r - h)) / h**2 + (fn(r + h) - fn(r - h)) / (2 * h * r)
    assert abs(lap + math.exp(2 * fn(r))) < 1e-5


def test_constant_source_maps_to_constant():
    p = solve_radial(SourceSpec.constant(1.0), 0.0, 2.0, 64)
    q = convert_normalization(p, U, V)
    np.testing.assert_array_equal(q.values, 0.0)
    assert q.source == p.source


def test_gaussian_source_rescaled():
    p = solve_radial(SourceSpec.gaussian_bump(0.5, 1.0, 0.3), 0.0, 2.0, 64)
    q = convert_normalization(p, U, V)
    assert q.source.center == pytest.approx(1.0 / math.sqrt(2.0))
    assert q.source.width == pytest.approx(0.3 / math.sqrt(2.0))


def test_planar_field(mobius_pair):
    v1 = mobius_pair.v1
    w = convert_normalization(v1, U, V)
    assert w.weight == 2
    assert w.grid.h == pytest.approx(v1.grid.h / math.sqrt(2.0))
    assert area_integral(w) == pytest.approx(0.5 * area_integral(v1), rel=1e-12)
    s = pde_source(w)
    assert np.nanmax(np.abs(s[w.mask])) < 1e-2
    back = convert_normalization(w, V, U)
    np.testing.assert_allclose(back.values, v1.values, rtol=1e-12)
    assert back.grid.h == pytest.approx(v1.grid.h, rel=1e-14)
    assert back.exact(0.2 + 0.1j) == pytest.approx(v1.exact(0.2 + 0.1j), rel=1e-12)


def test_weight_mismatch(mobius_pair):
    with pytest.raises(ValueError):
        convert_normalization(mobius_pair.v1, V, U)


def test_identity_and_type_errors():
    p = solve_radial(SourceSpec.zero(), 0.0, 1.0, 64)
    assert convert_normalization(p, U, U) is p
    with pytest.raises(TypeError):
        convert_normalization(3.0, U, V)
