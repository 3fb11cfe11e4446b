import math

import numpy as np
import pytest

from gsci import (
    EIGHT_PI,
    Bubble,
    FixtureSpec,
    Normalization,
    SourceSpec,
    bol_check,
    bubble_area,
    concentric_sweep,
    convert_normalization,
    crossing_check,
    crossing_pair,
    pipeline_endtoend,
    remark13_check,
    sci_check,
    sharpness_scan,
    solve_radial,
    theorem24_margin,
)
from gsci.errors import ContractError, UnsupportedDomainError
from gsci.inequalities import CSV_COLUMNS

FOUR_PI = 4 * math.pi


# --- Bol ---------------------------------------------------------------------


@pytest.mark.parametrize("r", [0.1, 1.0, math.sqrt(8.0), 5.0, 40.0])
@pytest.mark.parametrize("lam", [0.5, 1.0, 3.0])
def test_bol_equality_on_bubble_caps(lam, r):
    rep = bol_check(Bubble(lam), r)
    assert abs(rep.margin) <= 1e-12 * rep.rhs
    assert rep.passed


def test_bol_branch():
    r4 = math.sqrt(8.0)  # U_1 has area 4π on this disk
    assert bol_check(Bubble(1.0), 0.9 * r4).branch == "increasing"
    assert bol_check(Bubble(1.0), 1.1 * r4).branch == "decreasing"


def test_bol_radial_profile():
    p = solve_radial(SourceSpec.zero(), 0.0, 2.0, 512)
    rep = bol_check(p)
    assert abs(rep.margin) / rep.rhs < 1e-6
    inner = bol_check(p, p.radii[100])
    assert inner.area == pytest.approx(bubble_area(1.0, p.radii[100]), rel=1e-8)


def test_bol_needs_radius_and_known_type():
    with pytest.raises(UnsupportedDomainError):
        bol_check(Bubble(1.0))
    with pytest.raises(UnsupportedDomainError):
        bol_check("disk")


def test_bol_planar_mobius(mobius_pair):
    rep = bol_check(mobius_pair.v1)
    assert rep.passed
    assert rep.eps_disc > 0


# --- the covering inequality -------------------------------------------------


def test_sci_concentric(concentric_pair):
    p = concentric_pair
    rep = sci_check(p.v1, p.v2, p.c)
    assert rep.claim and rep.passed
    target = theorem24_margin(1.0, 2.0, 0.7)
    assert abs(rep.margin - target) <= rep.eps_disc + 1e-6 * rep.total
    assert rep.M == pytest.approx(p.M, rel=1e-4)


def test_sci_mobius(mobius_pair):
    p = mobius_pair
    rep = sci_check(p.v1, p.v2, p.c)
    assert rep.claim and rep.passed
    assert rep.ratio > 1


def test_sci_mobius_exp2v(mobius_pair):
    p = mobius_pair
    U, V = Normalization.EXP_U, Normalization.EXP_2V
    w1, w2 = convert_normalization(p.v1, U, V), convert_normalization(p.v2, U, V)
    rep_u = sci_check(p.v1, p.v2, p.c)
    rep_v = sci_check(w1, w2, 0.5 * p.c, V)
    assert rep_v.passed
    assert rep_v.total == pytest.approx(0.5 * rep_u.total, rel=1e-12)
    assert rep_v.bound == pytest.approx(0.5 * rep_u.bound, rel=1e-9)


def test_sci_rejects_wrong_normalization(mobius_pair):
    with pytest.raises(ContractError):
        sci_check(mobius_pair.v1, mobius_pair.v2, mobius_pair.c, Normalization.EXP_2V)


def test_sci_radial_exp2v_constants():
    a, b = 1.0, 2.0
    M = 2 * math.log(b / a)
    for q, bound in [(0.0, FOUR_PI), (0.5, 2 * math.pi)]:
        from gsci import lemma22_matching_x

        R = float(lemma22_matching_x(a, b, 1 - q))
        p1 = solve_radial(SourceSpec.zero(), 0.0, R, 512)
        p2 = solve_radial(SourceSpec.zero(), 2 * math.log(b), R, 512)
        U, V = Normalization.EXP_U, Normalization.EXP_2V
        w1, w2 = convert_normalization(p1, U, V), convert_normalization(p2, U, V)
        rep = sci_check(w1, w2, 0.5 * q * M, V)
        assert rep.claim
        assert rep.bound == pytest.approx(bound, rel=1e-9)
        assert rep.M == pytest.approx(0.5 * M, rel=1e-12)


def test_sci_broken_has_no_claim():
    p = FixtureSpec("broken", nx=128).build()
    rep = sci_check(p.v1, p.v2, p.c)
    assert not rep.flags["source_ordering"]
    assert not rep.claim and not rep.passed


def test_sci_mixed_inputs():
    p = solve_radial(SourceSpec.zero(), 0.0, 1.0, 64)
    with pytest.raises(ContractError):
        sci_check(p, 3.0, 0.1)


# --- restricted domain -------------------------------------------------------


def test_restricted_domain_oversized():
    p = FixtureSpec("oversized", nx=128).build()
    rep = remark13_check(p.v1, p.v2, p.c)
    assert rep.claim and rep.passed
    assert rep.details["original_dominates"]
    assert rep.details["total_original"] > rep.total


def test_restricted_domain_near_degenerate(concentric_pair):
    p = concentric_pair
    M = p.M
    d = 0.05
    rep = remark13_check(p.v1, p.v2, M - d)
    assert rep.claim and rep.passed
    assert rep.bound == pytest.approx(8 * (d / M) * math.pi, rel=1e-4)


def test_restricted_domain_empty(concentric_pair):
    p = concentric_pair
    rep = remark13_check(p.v1, p.v2, p.M + 0.1)
    assert rep.flags == {"nonempty": False}
    assert not rep.claim


# --- scans -------------------------------------------------------------------


def test_sharpness_scan_rows():
    rows = sharpness_scan([0.5, 1.0, 4.0], [0.3, 1.0, 1.5])
    for r in rows:
        if r.k < 1:
            assert r.margin > 0
        elif r.k == 1:
            assert abs(r.margin) < 1e-9
        else:
            assert r.margin < 0
            assert r.cap_sum < r.k
    k15 = [r for r in rows if r.k == 1.5 and r.a == 1.0][0]
    assert k15.cap_sum == pytest.approx(1.4714045, abs=1e-6)
    assert len(k15.csv_values()) == len(CSV_COLUMNS)


def test_sharpness_scan_rejects_k():
    with pytest.raises(ValueError):
        sharpness_scan([1.0], [2.0])


@pytest.fixture(scope="module")
def sweep_rows():
    return concentric_sweep(n=256)


def test_concentric_sweep_ratio(sweep_rows):
    for row, rep in sweep_rows:
        assert rep.claim
        assert row.total / row.bound >= 1 - 1e-9


def test_concentric_sweep_margin_order_c(sweep_rows):
    rows = [r for r, _ in sweep_rows]
    assert abs(rows[0].margin) < 1e-8
    m = np.array([r.margin for r in rows[1:]])
    c = np.array([r.c for r in rows[1:]])
    assert np.all(m > 0)
    # linear onset: margin/c stays bounded away from 0 and ∞ for small c
    q = m[:3] / c[:3]
    assert q.max() / q.min() < 1.5


def test_concentric_sweep_exp2v():
    rows = concentric_sweep(ratios=(0.0, 0.5), n=256, norm="EXP_2V")
    assert rows[0][0].bound == pytest.approx(FOUR_PI, rel=1e-9)
    assert rows[1][0].bound == pytest.approx(2 * math.pi, rel=1e-9)


# --- crossing ----------------------------------------------------------------


def test_crossing_fires_at_8pi():
    psi, b = crossing_pair()
    rep = crossing_check(psi, b)
    assert rep.R0 == pytest.approx(math.sqrt(8 / 6), rel=1e-9)
    assert rep.fired
    assert rep.total == pytest.approx(EIGHT_PI, rel=1e-8)


def test_crossing_absent():
    # U_2 meets U_1 only at r = 2
    psi = solve_radial(SourceSpec.zero(), 2 * math.log(2.0), 1.5, 256)
    rep = crossing_check(psi, 1.0)
    assert rep.R0 is None and not rep.fired


# --- pipeline ----------------------------------------------------------------


def test_pipeline_broken_halts():
    rep = pipeline_endtoend(FixtureSpec("broken", nx=128))
    assert rep.halted_at == "hypothesis.source_ordering"
    assert not rep.passed


@pytest.fixture(scope="module")
def concentric_chain():
    return pipeline_endtoend(FixtureSpec("concentric", nx=128), radial_nodes=512)


def test_pipeline_concentric_passes(concentric_chain):
    rep = concentric_chain
    assert rep.passed, rep.failing
    names = [l.name for l in rep.links]
    for step in ("scale_choice", "supersolution", "comparison", "endpoint", "final_bound"):
        assert step in names


def test_pipeline_final_margin_matches_sci(concentric_chain, concentric_pair):
    final = concentric_chain.link("final_bound")
    p = concentric_pair
    sci = sci_check(p.v1, p.v2, p.c)
    assert final.margin == pytest.approx(sci.margin, abs=sci.eps_disc + 1e-9)


def test_pipeline_additive_links_do_not_gate(concentric_chain):
    for l in concentric_chain.links:
        if l.name.startswith("additive."):
            assert not l.gating
