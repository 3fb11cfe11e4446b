"""Weighted equimeasurable rearrangement of a gap v2 - v1 onto a model disk.

Given fields v1 ≤ v2 on ω and a bubble scale a, the gap is rearranged into a
radially nonincreasing φ on B_{R_a} so that

    ∫_{φ > t} e^{U_a} dy = ∫_{v2 - v1 > t} e^{v1} dy   for every level t,

where R_a is chosen so both sides agree at the lowest level.  The cell-sum
distribution function on the right (one sort and a prefix sum) is what the
equimeasurability residual is measured against.  φ itself inverts a smooth
version of it: each cell carries a linear reconstruction of the gap, so its
contribution to the distribution is a trapezoid law in t with a closed-form
density.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.interpolate import CubicHermiteSpline, PchipInterpolator

from .errors import ContractError, DomainError, PreconditionError
from .liouville import EIGHT_PI, bubble_area, bubble_derivative, bubble_value, radius_for_mass
from .planar import PlanarField, require_same_support
from .radial import RadialProfile

DEFAULT_LEVELS = 512
DEFAULT_RADIAL_NODES = 1024


def scale_gap(a: float, M: float, K: float) -> float:
    """8π[(a+M)²(K/a²)/(8 + (a+M)²K/a²) - K/(8+K)], the area excess of U_{a+M} over U_a on B_{R_a}."""
    X = K * (1.0 + M / a) ** 2
    return EIGHT_PI * (X / (8.0 + X) - K / (8.0 + K))


def choose_scale_a(M: float, K: float, eps: float, a_min: float = 1.0) -> float:
    """Smallest-to-within-2x scale a ≥ a_min with scale_gap(a, M, K) < eps.

    The excess decreases to 0 as a grows, so doubling finds a feasible a and
    bisection then tightens it.
    """
    if not (M > 0 and K > 0 and eps > 0 and a_min > 0):
        raise DomainError("need M, K, eps, a_min > 0")
    if scale_gap(a_min, M, K) < eps:
        return a_min
    hi = a_min
    while scale_gap(hi, M, K) >= eps:
        hi *= 2.0
    lo = hi / 2.0
    while hi - lo > 1e-9 * hi:
        mid = 0.5 * (lo + hi)
        if scale_gap(mid, M, K) < eps:
            hi = mid
        else:
            lo = mid
    return hi


@dataclass
class _Samples:
    """Masked cells sorted by decreasing gap, with prefix sums of e^{v1} weights."""

    gaps: np.ndarray
    weights: np.ndarray
    cum: np.ndarray

    @classmethod
    def from_fields(cls, v1: PlanarField, v2: PlanarField) -> "_Samples":
        require_same_support(v1, v2)
        m = v1.mask & (v1.fraction > 0)
        h2 = v1.grid.h ** 2
        gaps = (v2.values - v1.values)[m]
        w = np.exp(v1.weight * v1.values[m]) * v1.fraction[m] * h2
        order = np.argsort(-gaps, kind="stable")
        gaps, w = gaps[order], w[order]
        return cls(gaps, w, np.cumsum(w))

    @property
    def total(self) -> float:
        return float(self.cum[-1]) if len(self.cum) else 0.0

    def beta(self, t) -> np.ndarray:
        """Weight of samples with gap strictly above t."""
        t = np.asarray(t, dtype=float)
        count = np.searchsorted(-self.gaps, -t, side="left")
        return np.where(count > 0, self.cum[np.maximum(count - 1, 0)], 0.0)

    def quantile(self, mass) -> np.ndarray:
        """Generalized inverse of the piecewise-linear distribution: gap at cumulative mass."""
        mid = self.cum - 0.5 * self.weights
        return np.interp(mass, mid, self.gaps)


class _CellDistribution:
    """β(t) for a gap reconstructed linearly inside every cell.

    Inside a square cell the gap g_c + p·(y - y_c) exceeds t on a fraction of
    the cell given by the survival function of p_x h U1 + p_y h U2 with U1, U2
    uniform on (-1/2, 1/2), a trapezoidal law.  Summing these fractions gives a
    continuous, piecewise-quadratic β with an exact derivative.  Cut cells use
    the gap at the centroid of their covered part.
    """

    def __init__(self, v1: PlanarField, v2: PlanarField):
        require_same_support(v1, v2)
        h = v1.grid.h
        d = v2.values - v1.values
        with np.errstate(invalid="ignore"):
            gy, gx = np.gradient(d, h)
        m = v1.mask & (v1.fraction > 0)
        g = d.copy()
        logw = v1.values.copy()
        geo = v1.geometry
        if geo is not None:
            j, i = geo.cut_index
            A = geo.cut_moments[:, 0]
            # slivers lose their moments to rounding; keep centroids inside the cell
            ok = A > 1e-12 * h * h
            ox = np.clip(np.where(ok, geo.cut_moments[:, 1] / np.where(ok, A, 1.0), 0.0), -0.5 * h, 0.5 * h)
            oy = np.clip(np.where(ok, geo.cut_moments[:, 2] / np.where(ok, A, 1.0), 0.0), -0.5 * h, 0.5 * h)
            g[j, i] = d[j, i] + gx[j, i] * ox + gy[j, i] * oy
            with np.errstate(invalid="ignore"):
                v1y, v1x = np.gradient(v1.values, h)
            logw[j, i] = v1.values[j, i] + v1x[j, i] * ox + v1y[j, i] * oy
        frac = v1.fraction[m]
        px = np.abs(gx[m]) * h
        py = np.abs(gy[m]) * h
        if geo is not None:
            # cut cells: a uniform law with the variance of p·y over the covered part
            A = geo.cut_moments[:, 0]
            ok = A > 1e-12 * h * h
            Ai = np.where(ok, A, 1.0)
            sxx = geo.cut_moments[:, 3] / Ai - ox * ox
            sxy = geo.cut_moments[:, 4] / Ai - ox * oy
            syy = geo.cut_moments[:, 5] / Ai - oy * oy
            var = gx[j, i] ** 2 * sxx + 2 * gx[j, i] * gy[j, i] * sxy + gy[j, i] ** 2 * syy
            # tiny covered areas lose the moments to rounding; never exceed the full cell's spread
            width = np.minimum(np.sqrt(12.0 * np.maximum(var, 0.0)), (np.abs(gx[j, i]) + np.abs(gy[j, i])) * h)
            cut = np.zeros(v1.values.shape)
            cut[j, i] = np.where(ok, width, np.nan)
            cw = cut[m]
            sel = np.isfinite(cw) & (frac < 1.0)
            px[sel] = cw[sel]
            py[sel] = 0.0
        bad = ~(np.isfinite(px) & np.isfinite(py))
        px[bad] = 0.0
        py[bad] = 0.0
        g = g[m]
        w = np.exp(logw[m]) * frac * h * h
        order = np.argsort(g, kind="stable")
        self.g = g[order]
        self.w = w[order]
        self.p = np.maximum(px, py)[order]
        self.q = np.minimum(px, py)[order]
        # treat nearly one-dimensional trapezoids as uniform laws
        self.q[self.q < 1e-9 * self.p] = 0.0
        self.r = 0.5 * (self.p + self.q)
        self.rmax = float(self.r.max()) if len(self.r) else 0.0
        lower = self.g - self.r
        lo_order = np.argsort(lower, kind="stable")
        self.lower_sorted = lower[lo_order]
        self.lower_cum = np.cumsum(self.w[lo_order])
        self.total = float(self.lower_cum[-1]) if len(self.lower_cum) else 0.0
        live = self.w > 0
        self.t_min = float(lower[live].min()) if live.any() else 0.0
        self.t_max = float((self.g + self.r)[live].max()) if live.any() else 0.0
        partial = (frac < 1.0)[order]
        # levels below this see cells cut by the domain boundary
        self.t_cut = float((self.g + self.r)[partial].max()) if partial.any() else -math.inf

    def _pairs(self, t):
        i0 = np.searchsorted(self.g, t - self.rmax, side="right")
        i1 = np.searchsorted(self.g, t + self.rmax, side="right")
        counts = i1 - i0
        owner = np.repeat(np.arange(len(t)), counts)
        start = np.repeat(i0 - np.concatenate(([0], np.cumsum(counts)[:-1])), counts)
        idx = start + np.arange(counts.sum())
        return owner, idx

    def _law(self, x, p, q):
        """(survival, density) of p U1 + q U2 at x, with p ≥ q ≥ 0."""
        y = x + 0.5 * (p + q)
        surv = np.zeros_like(y)
        dens = np.zeros_like(y)
        atom = p == 0
        surv[atom] = (y[atom] < 0).astype(float)
        uni = (~atom) & (q == 0)
        yu, pu = y[uni], p[uni]
        surv[uni] = 1.0 - np.clip(yu / pu, 0.0, 1.0)
        dens[uni] = np.where((yu > 0) & (yu < pu), 1.0 / pu, 0.0)
        tr = (~atom) & (q > 0)
        yt, pt, qt = y[tr], p[tr], q[tr]
        cdf = np.where(
            yt <= 0, 0.0,
            np.where(yt <= qt, yt * yt / (2 * pt * qt),
                     np.where(yt <= pt, (yt - 0.5 * qt) / pt,
                              np.where(yt < pt + qt, 1.0 - (pt + qt - yt) ** 2 / (2 * pt * qt), 1.0))))
        den = np.where(
            (yt <= 0) | (yt >= pt + qt), 0.0,
            np.where(yt <= qt, yt / (pt * qt), np.where(yt <= pt, 1.0 / pt, (pt + qt - yt) / (pt * qt))))
        surv[tr] = 1.0 - cdf
        dens[tr] = den
        return surv, dens

    def evaluate(self, t):
        """(β(t), β'(t)) for an array of levels."""
        t = np.atleast_1d(np.asarray(t, dtype=float))
        k = np.searchsorted(self.lower_sorted, t, side="right")
        full = self.total - np.where(k > 0, self.lower_cum[np.maximum(k - 1, 0)], 0.0)
        owner, idx = self._pairs(t)
        x = t[owner] - self.g[idx]
        inside = self.g[idx] - self.r[idx] <= t[owner]
        surv, dens = self._law(x, self.p[idx], self.q[idx])
        part = np.bincount(owner, weights=np.where(inside, surv, 0.0) * self.w[idx], minlength=len(t))
        slope = -np.bincount(owner, weights=dens * self.w[idx], minlength=len(t))
        return full + part, slope

    def inverse(self, m, iterations: int = 200):
        """sup{t : β(t) > m} for an array of masses in (0, total).

        Newton steps on the exact β' inside a shrinking bracket, falling back
        to bisection where the step leaves the bracket or β is flat.
        """
        m = np.asarray(m, dtype=float)
        lo = np.full_like(m, self.t_min - 1e-12)
        hi = np.full_like(m, self.t_max + 1e-12)
        x = 0.5 * (lo + hi)
        done = np.zeros(m.shape, dtype=bool)
        tol_m = 1e-14 * max(self.total, 1e-300)
        for _ in range(iterations):
            act = np.flatnonzero(~done)
            if len(act) == 0:
                break
            xa, ma = x[act], m[act]
            b, db = self.evaluate(xa)
            above = b > ma
            lo[act] = np.where(above, xa, lo[act])
            hi[act] = np.where(above, hi[act], xa)
            steep = db < 0
            converged = (steep & (np.abs(b - ma) <= tol_m)) | (hi[act] - lo[act] <= 4e-16 * np.maximum(1.0, np.abs(hi[act])))
            done[act[converged]] = True
            with np.errstate(divide="ignore", invalid="ignore"):
                newton = xa - (b - ma) / db
            ok = steep & (newton > lo[act]) & (newton < hi[act])
            x[act] = np.where(converged, xa, np.where(ok, newton, 0.5 * (lo[act] + hi[act])))
        return x


@dataclass
class DistributionTable:
    thresholds: np.ndarray
    beta: np.ndarray

    def rows(self):
        return list(zip(self.thresholds.tolist(), self.beta.tolist()))


def distribution_beta(v1: PlanarField, v2: PlanarField, thresholds, *, method: str = "cells") -> DistributionTable:
    """β(t) = ∫_{v2 - v1 > t} e^{v1} dy at each threshold.

    ``method="cells"`` sums e^{v1}·(covered cell area) over masked cells whose
    gap exceeds t, from one sort of the gaps.  ``method="linear"`` uses the
    per-cell linear reconstruction, which is continuous in t.
    """
    t = np.asarray(thresholds, dtype=float)
    if method == "cells":
        beta = _Samples.from_fields(v1, v2).beta(t)
    elif method == "linear":
        beta = _CellDistribution(v1, v2).evaluate(t.ravel())[0].reshape(t.shape)
    else:
        raise ValueError(f"unknown method {method!r}")
    return DistributionTable(t, beta)


def equal_measure_thresholds(v1: PlanarField, v2: PlanarField, levels: int = DEFAULT_LEVELS) -> np.ndarray:
    """Increasing thresholds at which β drops in equal steps of (total mass)/levels."""
    dist = _CellDistribution(v1, v2)
    masses = dist.total * np.arange(1, levels) / levels
    return dist.inverse(masses)[::-1]


@dataclass
class RearrangementResult:
    a: float
    R_a: float
    phi: RadialProfile
    residual: float
    table: DistributionTable
    mass_v1: float
    level_masses: np.ndarray
    level_values: np.ndarray

    def rows(self):
        """(radius, phi, psi) triples on the radial grid."""
        r = self.phi.radii
        return list(zip(r.tolist(), self.phi.values.tolist(), (bubble_value(self.a, r) + self.phi.values).tolist()))


def _superlevel_mass(a: float, phi: RadialProfile, t) -> np.ndarray:
    """μ_a{φ > t} for nonincreasing radial φ, crossings found on the Hermite interpolant."""
    t = np.atleast_1d(np.asarray(t, dtype=float))
    v = phi.values
    out = np.where(v[-1] > t, float(bubble_area(a, phi.R)), 0.0)
    live = (v[0] > t) & (v[-1] <= t)
    if live.any():
        tl = t[live]
        # first node at or below each level; -v is nondecreasing
        j = np.searchsorted(-v, -tl, side="left")
        lo, hi = phi.radii[j - 1], phi.radii[j]
        for _ in range(60):
            mid = 0.5 * (lo + hi)
            above = phi(mid) > tl
            lo = np.where(above, mid, lo)
            hi = np.where(above, hi, mid)
        out[live] = bubble_area(a, 0.5 * (lo + hi))
    return out


def _graph_distance(a: float, phi: RadialProfile, samples: _Samples, t: np.ndarray) -> float:
    """max over levels of the gap between μ_a{φ > t} and the cell-sum β(t).

    Both are compared as monotone graphs at rounding scale: each side is the
    interval between its values at t ± δ, so an atom of β at a level (a gap
    that is constant on a patch) counts as matched when μ jumps there too.
    """
    delta = 1e-12 * (1.0 + float(np.max(np.abs(samples.gaps))))
    b_hi, b_lo = samples.beta(t - delta), samples.beta(t + delta)
    m_hi, m_lo = _superlevel_mass(a, phi, t - delta), _superlevel_mass(a, phi, t + delta)
    return float(max(np.max(b_lo - m_hi), np.max(m_lo - b_hi), 0.0))


def _end_slope(m, t):
    # derivative at m[0] of the quadratic through three points
    (m0, m1, m2), (t0, t1, t2) = m, t
    d01 = (t1 - t0) / (m1 - m0)
    d12 = (t2 - t1) / (m2 - m1)
    return d01 + (d01 - d12) * (m1 - m0) / (m2 - m0)


def _level_slopes(t, dbeta):
    slope = np.zeros_like(t)
    ok = dbeta < 0
    slope[ok] = 1.0 / dbeta[ok]
    return slope


def symmetrize(
    v1: PlanarField,
    v2: PlanarField,
    a: float,
    *,
    levels: int = DEFAULT_LEVELS,
    radial_nodes: int = DEFAULT_RADIAL_NODES,
) -> RearrangementResult:
    """Rearrange v2 - v1 with respect to e^{v1}dy and e^{U_a}dy.

    φ(s) = sup{t : β(t) > ∫_{B_s} e^{U_a}}, the generalized inverse of the
    distribution function, evaluated at ``levels`` equal steps of mass and
    interpolated between them by cubic Hermite polynomials in mass using the
    exact slope 1/β'(t).  The residual compares the resulting profile against
    the plain cell-sum distribution at every level.
    """
    if not a > 0:
        raise DomainError("a must be positive")
    if v1.weight != 1 or v2.weight != 1:
        raise ContractError("symmetrize works in the e^u normalization; convert first")
    dist = _CellDistribution(v1, v2)
    m1 = dist.total
    if m1 >= EIGHT_PI:
        raise PreconditionError(f"∫e^v1 = {m1:.6g} is not below 8π")
    if m1 <= 0:
        raise PreconditionError("empty domain")
    R_a = radius_for_mass(a, m1)

    inner = m1 * np.arange(1, levels) / levels
    t_in = dist.inverse(inner)
    _, dbeta = dist.evaluate(t_in)
    s_in = _level_slopes(t_in, dbeta)
    plateau = np.zeros_like(t_in, dtype=bool)
    plateau[1:] |= t_in[1:] == t_in[:-1]
    plateau[:-1] |= t_in[1:] == t_in[:-1]
    s_in[plateau] = 0.0
    band = t_in <= dist.t_cut
    clean = np.flatnonzero(~band)
    if band.any() and band.mean() < 0.25 and len(clean) >= 6:
        # boundary cells distort β' there; take the slope of a quadratic fit to the nearest clean levels
        near = clean[-6:]
        fit = np.polynomial.Polynomial.fit(inner[near], t_in[near], 2)
        s_in[band] = np.minimum(fit.deriv()(inner[band]), 0.0)
    # ends: extrapolate from the neighbouring levels, keeping monotonicity
    s0 = min(_end_slope(inner[:3], t_in[:3]), 0.0)
    t0 = max(t_in[0] - s0 * inner[0], t_in[0])
    sN = min(_end_slope(inner[::-1][:3], t_in[::-1][:3]), 0.0)
    if band.any():
        sN = s_in[-1]
    tN = min(t_in[-1] + sN * (m1 - inner[-1]), t_in[-1])
    nodes_m = np.concatenate(([0.0], inner, [m1]))
    nodes_t = np.concatenate(([t0], t_in, [tN]))
    nodes_s = np.concatenate(([s0], s_in, [sN]))
    G = CubicHermiteSpline(nodes_m, nodes_t, nodes_s)
    r = np.linspace(0.0, R_a, radial_nodes + 1)
    mass_r = np.minimum(bubble_area(a, r), m1)
    phi = G(mass_r)
    dG = G.derivative()(mass_r)
    if np.any(np.diff(phi) > 0):
        G = PchipInterpolator(nodes_m, nodes_t)
        phi = G(mass_r)
        dG = G.derivative()(mass_r)
    dphi = dG * 2.0 * math.pi * r * np.exp(bubble_value(a, r))
    dphi[0] = 0.0
    prof = RadialProfile(r, phi, dphi, label="phi")

    samples = _Samples.from_fields(v1, v2)
    beta_cells = samples.beta(t_in)
    residual = _graph_distance(a, prof, samples, t_in)
    table = DistributionTable(t_in[::-1].copy(), beta_cells[::-1].copy())
    return RearrangementResult(a, R_a, prof, residual, table, m1, inner, t_in)


def psi_compose(a: float, phi: RadialProfile) -> RadialProfile:
    """ψ = U_a + φ on φ's radial grid; strictly decreasing because U_a is."""
    if np.any(np.diff(phi.values) > 0):
        raise ContractError("phi must be nonincreasing")
    r = phi.radii
    vals = bubble_value(a, r) + phi.values
    d = bubble_derivative(a, r) + phi.derivatives
    d[0] = 0.0
    return RadialProfile(r, vals, d, eps_disc=phi.eps_disc, label="psi")
