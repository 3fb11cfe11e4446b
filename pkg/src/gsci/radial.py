"""Radial Liouville profiles: shooting solver, fluxes, masses, comparison checks.

The radial reduction of  Δu + e^u = f  is

    u'' + u'/r + e^u = f(r),   u(0) = v0,  u'(0) = 0.

`solve_radial` launches from the origin with a power series (which absorbs the
u'/r singularity) and continues with classical RK4 on a uniform grid.  The
remaining functions operate on any `RadialProfile`, whether it came from the
solver, from a closed form, or from the rearrangement module.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .errors import BlowUpError, ContractError, DomainError, PreconditionError
from .liouville import bubble_area, bubble_derivative, bubble_value

OVERFLOW_GUARD = 50.0
SERIES_TERMS = 10
MAX_SLOPE_RATIO = 1e6


@dataclass(frozen=True)
class SourceSpec:
    """A nonnegative radial source f(r).

    ``kind`` is one of ``"zero"``, ``"constant"`` or ``"gaussian"``; the
    Gaussian bump is ``amplitude * exp(-((r - center)/width)**2)``.
    """

    kind: str = "zero"
    value: float = 0.0
    amplitude: float = 0.0
    center: float = 0.0
    width: float = 1.0

    def __post_init__(self):
        if self.kind not in ("zero", "constant", "gaussian"):
            raise ValueError(f"unknown source kind {self.kind!r}")
        if self.kind == "constant" and self.value < 0:
            raise DomainError("constant source must be nonnegative")
        if self.kind == "gaussian":
            if self.amplitude < 0 or self.center < 0 or not self.width > 0:
                raise DomainError("gaussian source needs amplitude >= 0, center >= 0, width > 0")

    @classmethod
    def zero(cls) -> "SourceSpec":
        return cls("zero")

    @classmethod
    def constant(cls, value: float) -> "SourceSpec":
        return cls("constant", value=float(value))

    @classmethod
    def gaussian_bump(cls, amplitude: float, center: float, width: float) -> "SourceSpec":
        return cls("gaussian", amplitude=float(amplitude), center=float(center), width=float(width))

    def __call__(self, r):
        r = np.asarray(r, dtype=float)
        if self.kind == "zero":
            out = np.zeros_like(r)
        elif self.kind == "constant":
            out = np.full_like(r, self.value)
        else:
            out = self.amplitude * np.exp(-(((r - self.center) / self.width) ** 2))
        return out if out.ndim else float(out)

    def scalar(self, r: float) -> float:
        if self.kind == "zero":
            return 0.0
        if self.kind == "constant":
            return self.value
        s = (r - self.center) / self.width
        return self.amplitude * math.exp(-s * s)

    def derivative(self, r):
        r = np.asarray(r, dtype=float)
        if self.kind != "gaussian":
            out = np.zeros_like(r)
        else:
            s = (r - self.center) / self.width
            out = -2.0 * s / self.width * self.amplitude * np.exp(-s * s)
        return out if out.ndim else float(out)

    def taylor(self, order: int) -> np.ndarray:
        """Taylor coefficients of f about r = 0, up to r**order."""
        coef = np.zeros(order + 1)
        if self.kind == "constant":
            coef[0] = self.value
        elif self.kind == "gaussian":
            w2 = self.width**2
            q = np.zeros(order + 1)
            q[0] = -self.center**2 / w2
            if order >= 1:
                q[1] = 2.0 * self.center / w2
            if order >= 2:
                q[2] = -1.0 / w2
            coef = self.amplitude * _exp_series(q)
        return coef


def _exp_series(p: np.ndarray) -> np.ndarray:
    """Coefficients of exp(P(r)) given those of P, by n E_n = Σ i P_i E_{n-i}."""
    n = len(p)
    e = np.zeros(n)
    e[0] = math.exp(p[0])
    for m in range(1, n):
        e[m] = sum(i * p[i] * e[m - i] for i in range(1, m + 1)) / m
    return e


@dataclass(frozen=True, eq=False)
class RadialProfile:
    """Samples of a radial function on nodes 0 = r_0 < r_1 < ... < r_n.

    ``eps_disc`` is an optional discretization-error estimate (in mass units)
    attached by whoever built the profile; the checks below use it as their
    slack when no explicit tolerance is given.
    """

    radii: np.ndarray
    values: np.ndarray
    derivatives: np.ndarray
    source: Optional[SourceSpec] = None
    eps_disc: float = 0.0
    label: str = ""

    def __post_init__(self):
        radii = np.array(self.radii, dtype=float)
        values = np.array(self.values, dtype=float)
        derivatives = np.array(self.derivatives, dtype=float)
        if radii.ndim != 1 or len(radii) < 3:
            raise ContractError("a radial profile needs at least 3 nodes")
        if values.shape != radii.shape or derivatives.shape != radii.shape:
            raise ContractError("radii, values and derivatives must have equal length")
        if radii[0] != 0.0:
            raise ContractError("first node must be the origin")
        if derivatives[0] != 0.0:
            raise ContractError("derivative at the origin must vanish")
        if np.any(np.diff(radii) <= 0):
            raise ContractError("radii must be strictly increasing")
        if not (np.all(np.isfinite(values)) and np.all(np.isfinite(derivatives))):
            raise ContractError("profile values must be finite")
        for arr in (radii, values, derivatives):
            arr.setflags(write=False)
        object.__setattr__(self, "radii", radii)
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "derivatives", derivatives)

    @property
    def R(self) -> float:
        return float(self.radii[-1])

    @property
    def strictly_decreasing(self) -> bool:
        return bool(np.all(np.diff(self.values) < 0))

    def node_index(self, r: float) -> int:
        i = int(np.searchsorted(self.radii, r))
        for j in (i - 1, i):
            if 0 <= j < len(self.radii) and math.isclose(self.radii[j], r, rel_tol=1e-12, abs_tol=1e-14):
                return j
        raise ContractError(f"radius {r!r} is not a node of the profile")

    def __call__(self, r):
        """Cubic Hermite interpolation of the samples."""
        r = np.asarray(r, dtype=float)
        x, y, d = self.radii, self.values, self.derivatives
        i = np.clip(np.searchsorted(x, r, side="right") - 1, 0, len(x) - 2)
        hseg = x[i + 1] - x[i]
        t = (r - x[i]) / hseg
        h00 = (1 + 2 * t) * (1 - t) ** 2
        h10 = t * (1 - t) ** 2
        h01 = t * t * (3 - 2 * t)
        h11 = t * t * (t - 1)
        out = h00 * y[i] + h10 * hseg * d[i] + h01 * y[i + 1] + h11 * hseg * d[i + 1]
        return out if out.ndim else float(out)

    def with_values(self, values, derivatives, **kw) -> "RadialProfile":
        return RadialProfile(self.radii, values, derivatives, **kw)


def bubble_profile(lam: float, R: float, n: int) -> RadialProfile:
    """U_λ sampled exactly on a uniform grid of n intervals."""
    r = np.linspace(0.0, R, n + 1)
    d = bubble_derivative(lam, r)
    d[0] = 0.0
    return RadialProfile(r, bubble_value(lam, r), d, source=SourceSpec.zero(), label=f"U_{lam:g}")


def _series_launch(f: SourceSpec, v0: float, h: float):
    """u(h), u'(h) from the power series of the solution at the origin."""
    N = SERIES_TERMS
    fc = f.taylor(N)
    a = np.zeros(N + 1)
    E = np.zeros(N + 1)
    a[0] = v0
    E[0] = math.exp(v0)
    # n² a_n = g_{n-2} with g = f - e^u;  E_m needs a_1..a_m
    for n in range(2, N + 1):
        m = n - 2
        if m > 0:
            E[m] = sum(i * a[i] * E[m - i] for i in range(1, m + 1)) / m
        a[n] = (fc[m] - E[m]) / (n * n)
    powers = h ** np.arange(N + 1)
    terms = a * powers
    partial = np.cumsum(terms)
    rising = a[2] > 0
    if rising and (not np.all(np.isfinite(partial)) or np.max(partial) > OVERFLOW_GUARD):
        raise BlowUpError(f"solution exceeds {OVERFLOW_GUARD} within the first step", last_radius=0.0)
    u = float(partial[-1])
    if not math.isfinite(u) or abs(terms[-1]) + abs(terms[-2]) > 1e-6 * (1.0 + abs(u)):
        raise ContractError("series launch does not converge on the first step; increase n")
    du = float(np.dot(a[1:] * np.arange(1, N + 1), powers[:-1]))
    return u, du


def _rk4(f: SourceSpec, v0: float, R: float, n: int):
    h = R / n
    r = np.linspace(0.0, R, n + 1)
    u = np.empty(n + 1)
    w = np.empty(n + 1)
    u[0], w[0] = v0, 0.0
    u[1], w[1] = _series_launch(f, v0, h)
    fs = f.scalar
    exp = math.exp

    def rhs(rr, uu, ww):
        return ww, fs(rr) - exp(uu) - ww / rr

    for i in range(1, n):
        ri, ui, wi = r[i], u[i], w[i]
        k1u, k1w = rhs(ri, ui, wi)
        k2u, k2w = rhs(ri + 0.5 * h, ui + 0.5 * h * k1u, wi + 0.5 * h * k1w)
        k3u, k3w = rhs(ri + 0.5 * h, ui + 0.5 * h * k2u, wi + 0.5 * h * k2w)
        k4u, k4w = rhs(ri + h, ui + h * k3u, wi + h * k3w)
        un = ui + h * (k1u + 2.0 * k2u + 2.0 * k3u + k4u) / 6.0
        wn = wi + h * (k1w + 2.0 * k2w + 2.0 * k3w + k4w) / 6.0
        if not (math.isfinite(un) and un <= OVERFLOW_GUARD and math.isfinite(wn)):
            raise BlowUpError(f"radial solution exceeded {OVERFLOW_GUARD} before R={R}", last_radius=float(ri))
        u[i + 1], w[i + 1] = un, wn
    return r, u, w


def solve_radial(f: SourceSpec, v0: float, R: float, n: int, *, estimate_error: bool = True) -> RadialProfile:
    """Integrate u'' + u'/r + e^u = f(r) from u(0) = v0, u'(0) = 0 to r = R.

    Uses n uniform steps.  With ``estimate_error`` the problem is also solved
    on 2n steps and twice the largest disagreement in enclosed mass or flux at
    the shared nodes is stored as the profile's ``eps_disc``.
    """
    if not R > 0:
        raise DomainError("R must be positive")
    if n < 64:
        raise DomainError("need at least 64 radial steps")
    if v0 > OVERFLOW_GUARD:
        raise BlowUpError("initial value already above the overflow guard", last_radius=0.0)
    r, u, w = _rk4(f, v0, R, n)
    prof = RadialProfile(r, u, w, source=f, label="solve_radial")
    if estimate_error:
        r2, u2, w2 = _rk4(f, v0, R, 2 * n)
        fine = RadialProfile(r2, u2, w2, source=f)
        mass_c, mass_f = enclosed_mass(prof), enclosed_mass(fine)[::2]
        flux_c = 2 * math.pi * r * np.abs(w)
        flux_f = 2 * math.pi * r2[::2] * np.abs(w2[::2])
        eps = 2.0 * max(np.max(np.abs(mass_c - mass_f)), np.max(np.abs(flux_c - flux_f)))
        prof = RadialProfile(r, u, w, source=f, eps_disc=float(eps), label="solve_radial")
    return prof


def _cumulative_hermite(x, F, dF):
    # corrected trapezoid: exact for cubics, 4th order on smooth integrands
    h = np.diff(x)
    seg = 0.5 * h * (F[:-1] + F[1:]) + h * h / 12.0 * (dF[:-1] - dF[1:])
    return np.concatenate(([0.0], np.cumsum(seg)))


def enclosed_mass(p: RadialProfile, r: Optional[float] = None):
    """2π ∫_0^r e^{u(s)} s ds at one node, or at every node when r is None."""
    x, u, du = p.radii, p.values, p.derivatives
    eu = np.exp(u)
    F = eu * x
    dF = eu * (1.0 + x * du)
    cum = 2.0 * math.pi * _cumulative_hermite(x, F, dF)
    if r is None:
        return cum
    return float(cum[p.node_index(r)])


def source_mass(p: RadialProfile) -> np.ndarray:
    """2π ∫_0^r f(s) s ds at every node (zero without a source)."""
    if p.source is None:
        return np.zeros_like(p.radii)
    x = p.radii
    fx = p.source(x)
    return 2.0 * math.pi * _cumulative_hermite(x, fx * x, fx + x * p.source.derivative(x))


def radial_flux(p: RadialProfile, r: Optional[float] = None):
    """∫_{∂B_r} |∇u| ds = 2π r |u'(r)| for a strictly decreasing profile."""
    if not p.strictly_decreasing:
        raise ContractError("radial_flux needs a strictly decreasing profile")
    flux = 2.0 * math.pi * p.radii * np.abs(p.derivatives)
    if r is None:
        return flux
    return float(flux[p.node_index(r)])


def green_residual(p: RadialProfile) -> np.ndarray:
    """2π r u'(r) + ∫_{B_r} (e^u - f) at every node; zero for exact solutions."""
    return 2.0 * math.pi * p.radii * p.derivatives + enclosed_mass(p) - source_mass(p)


def quadrature_eps(p: RadialProfile) -> float:
    """Twice the change in enclosed and source mass when every other node is dropped."""
    if len(p.radii) < 5:
        return 0.0
    idx = np.arange(0, len(p.radii), 2)
    coarse = RadialProfile(p.radii[idx], p.values[idx], p.derivatives[idx], source=p.source)
    dm = np.abs(enclosed_mass(p)[idx] - enclosed_mass(coarse))
    ds = np.abs(source_mass(p)[idx] - source_mass(coarse))
    return 2.0 * float(max(np.max(dm), np.max(ds)))


def lipschitz_constant(p: RadialProfile) -> float:
    return float(max(np.max(np.abs(np.diff(p.values) / np.diff(p.radii))), np.max(np.abs(p.derivatives))))


def check_lipschitz(p: RadialProfile) -> float:
    """Return the discrete Lipschitz constant, rejecting effectively unbounded slopes."""
    L = lipschitz_constant(p)
    span = float(np.ptp(p.values)) or 1.0
    secant = float(np.max(np.abs(np.diff(p.values) / np.diff(p.radii))))
    nodal = float(np.max(np.abs(p.derivatives)))
    # a secant far steeper than every sampled derivative means an unresolved jump
    if L * p.R / span > MAX_SLOPE_RATIO or secant > MAX_SLOPE_RATIO * max(nodal, 1e-300):
        raise ContractError(f"discrete slope {L:.3g} is not resolved on this grid")
    return L


@dataclass
class SupersolutionReport:
    radii: np.ndarray
    mass: np.ndarray
    flux: np.ndarray
    margins: np.ndarray
    eps_disc: np.ndarray
    min_margin: float
    argmin_radius: float
    passed: bool
    lipschitz: float = field(default=float("nan"))

    @property
    def worst_slack(self) -> float:
        """Smallest margin + ε over the nodes; negative exactly when the check fails."""
        return float(np.min(self.margins + self.eps_disc))

    def as_dict(self) -> dict:
        return {
            "min_margin": self.min_margin,
            "argmin_radius": self.argmin_radius,
            "eps_disc": float(np.max(self.eps_disc)),
            "worst_slack": self.worst_slack,
            "lipschitz": self.lipschitz,
            "passed": self.passed,
        }


def default_eps(p: RadialProfile) -> float:
    return max(p.eps_disc, quadrature_eps(p), 1e-12)


def _node_eps(p: RadialProfile, eps) -> np.ndarray:
    # a scalar slack or one value per node of p
    if eps is None:
        eps = default_eps(p)
    eps = np.asarray(eps, dtype=float)
    if eps.ndim == 0:
        return np.full(len(p.radii), float(eps))
    if eps.shape != p.radii.shape:
        raise ContractError("per-node tolerances must match the profile nodes")
    return eps


def check_supersolution(p: RadialProfile, eps=None) -> SupersolutionReport:
    """Record ∫_{B_r} e^ψ - ∫_{∂B_r} |∇ψ| at every interior node.

    ``eps`` is a scalar slack or one slack per node.  Passes when every
    margin is at least minus its slack.  Failures are reported, never raised.
    """
    eps = _node_eps(p, eps)[1:]
    mass = enclosed_mass(p)
    flux = radial_flux(p)
    margins = (mass - flux)[1:]
    i = int(np.argmin(margins))
    return SupersolutionReport(
        radii=p.radii[1:],
        mass=mass[1:],
        flux=flux[1:],
        margins=margins,
        eps_disc=eps,
        min_margin=float(margins[i]),
        argmin_radius=float(p.radii[1 + i]),
        passed=bool(np.all(margins >= -eps)),
        lipschitz=lipschitz_constant(p),
    )


@dataclass
class ComparisonReport:
    b: float
    radii: np.ndarray
    margins: np.ndarray
    eps_disc: np.ndarray
    min_margin: float
    argmin_radius: float
    passed: bool
    start_gap: float

    def as_dict(self) -> dict:
        return {
            "b": self.b,
            "min_margin": self.min_margin,
            "argmin_radius": self.argmin_radius,
            "eps_disc": float(np.max(self.eps_disc)),
            "worst_slack": float(np.min(self.margins + self.eps_disc)),
            "start_gap": self.start_gap,
            "passed": self.passed,
        }


def comparison_check(
    psi: RadialProfile, b: float, eps=None, *, exact_start: bool = True, sup_eps=None
) -> ComparisonReport:
    """Certify ∫_{B_r} e^ψ ≥ ∫_{B_r} e^{U_b} at every node radius.

    Requires ψ(0) = U_b(0) (within 1e-9) and a passing supersolution check.
    With ``exact_start=False`` the start condition is relaxed to
    ψ(0) ≥ U_b(0), which suffices because bubble masses on a fixed ball grow
    with the scale.  ``eps`` and ``sup_eps`` (default: ``eps``) are scalar or
    per-node slacks for the mass comparison and the supersolution gate.
    """
    start_gap = float(psi.values[0] - bubble_value(b, 0.0))
    if exact_start and abs(start_gap) > 1e-9:
        raise PreconditionError(f"psi(0) differs from U_b(0) by {start_gap:.3e}")
    if not exact_start and start_gap < -1e-9:
        raise PreconditionError(f"psi(0) lies below U_b(0) by {-start_gap:.3e}")
    if not psi.strictly_decreasing:
        raise PreconditionError("psi is not strictly decreasing")
    check_lipschitz(psi)
    sup = check_supersolution(psi, eps if sup_eps is None else sup_eps)
    if not sup.passed:
        raise PreconditionError(
            f"psi fails the supersolution inequality (margin {sup.min_margin:.3e} at r={sup.argmin_radius:.4g})"
        )
    eps = _node_eps(psi, eps)
    margins = enclosed_mass(psi) - bubble_area(b, psi.radii)
    i = int(np.argmin(margins))
    return ComparisonReport(
        b=float(b),
        radii=psi.radii,
        margins=margins,
        eps_disc=eps,
        min_margin=float(margins[i]),
        argmin_radius=float(psi.radii[i]),
        passed=bool(np.all(margins >= -eps)),
        start_gap=start_gap,
    )
