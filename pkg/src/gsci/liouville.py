"""Closed-form objects for the Liouville equation  Δu + e^u = 0.

Everything here is an explicit formula: the bubble family U_λ, its enclosed
areas, the auxiliary function behind the cap-sum inequality, and the matching
radius at which two concentric bubbles differ by a prescribed constant.  These
serve as the analytical oracle for the numerical modules.

All functions accept scalars or numpy arrays and are pure.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError

EIGHT_PI = 8.0 * math.pi

# below this distance from x = 1 the direct form of lemma_f loses all digits
_SERIES_SWITCH = 1e-4


@dataclass(frozen=True)
class Bubble:
    """The radial solution U_λ(r) = 2 ln λ - 2 ln(1 + λ²r²/8)."""

    lam: float

    def __post_init__(self):
        if not self.lam > 0:
            raise DomainError(f"bubble scale must be positive, got {self.lam!r}")

    def __call__(self, r):
        return bubble_value(self.lam, r)

    def derivative(self, r):
        return bubble_derivative(self.lam, r)

    def area(self, R):
        return bubble_area(self.lam, R)

    def radius_for_mass(self, m):
        return radius_for_mass(self.lam, m)


@dataclass(frozen=True)
class GapParams:
    """Parameters of a concentric pair U_a < U_b matched on a circle.

    ``M`` is the gap at the common centre and ``c`` the gap on the matching
    circle, so that ``k = 1 - c/M``.
    """

    a: float
    b: float
    k: float

    def __post_init__(self):
        if not (self.b > self.a > 0):
            raise DomainError(f"need b > a > 0, got a={self.a!r}, b={self.b!r}")

    @property
    def M(self) -> float:
        return 2.0 * math.log(self.b / self.a)

    @property
    def c(self) -> float:
        return 2.0 * (1.0 - self.k) * math.log(self.b / self.a)

    @property
    def radius(self) -> float:
        return float(lemma22_matching_x(self.a, self.b, self.k))

    @classmethod
    def from_gap(cls, a: float, b: float, c: float) -> "GapParams":
        M = 2.0 * math.log(b / a)
        return cls(a, b, 1.0 - c / M)


def _check_lambda(lam):
    if np.any(np.asarray(lam) <= 0):
        raise DomainError("bubble scale lambda must be positive")


def bubble_value(lam, r):
    """U_λ(r).  Strictly decreasing in r, equal to 2 ln λ at the origin."""
    _check_lambda(lam)
    lam = np.asarray(lam, dtype=float)
    r = np.asarray(r, dtype=float)
    out = 2.0 * np.log(lam) - 2.0 * np.log1p(lam * lam * r * r / 8.0)
    return out if out.ndim else float(out)


def bubble_derivative(lam, r):
    """dU_λ/dr = -(λ² r / 2) / (1 + λ²r²/8)."""
    _check_lambda(lam)
    lam = np.asarray(lam, dtype=float)
    r = np.asarray(r, dtype=float)
    q = lam * lam
    out = -0.5 * q * r / (1.0 + q * r * r / 8.0)
    return out if out.ndim else float(out)


def bubble_area(lam, R):
    """∫_{B_R} e^{U_λ} dy = 8π λ²R² / (8 + λ²R²).

    Bounded by the total mass 8π; ``R = inf`` returns 8π.
    """
    _check_lambda(lam)
    lam = np.asarray(lam, dtype=float)
    R = np.asarray(R, dtype=float)
    if np.any(R < 0):
        raise DomainError("radius must be nonnegative")
    X = lam * lam * R * R
    with np.errstate(invalid="ignore"):
        out = np.where(np.isinf(X), EIGHT_PI, EIGHT_PI * X / (8.0 + X))
    return out if out.ndim else float(out)


def radius_for_mass(lam: float, m: float) -> float:
    """R with bubble_area(lam, R) = m, from R² = 8m / (λ²(8π - m))."""
    if not lam > 0:
        raise DomainError("bubble scale must be positive")
    if m < 0:
        raise DomainError("mass must be nonnegative")
    if m >= EIGHT_PI:
        raise DomainError("mass must be below the total bubble mass 8π")
    return math.sqrt(8.0 * m / (lam * lam * (EIGHT_PI - m)))


def bubble_pde_residual(lam: float, r: float, h: float) -> float:
    """Centred-difference value of U'' + U'/r + e^U at radius r.

    The bubble is an exact solution, so the result is pure truncation error,
    O(h²).
    """
    if not (r > h > 0):
        raise DomainError(f"need r > h > 0, got r={r!r}, h={h!r}")
    up, u0, um = bubble_value(lam, r + h), bubble_value(lam, r), bubble_value(lam, r - h)
    lap = (up - 2.0 * u0 + um) / (h * h) + (up - um) / (2.0 * h * r)
    return lap + math.exp(u0)


def _lemma_f_series(eps, k):
    # Taylor expansion of lemma_f in eps = x - 1; the constant and linear terms vanish.
    p = k * (k - 2.0) * (k - 1.0)
    return (-p / 6.0) * eps**2 + (p / 6.0) * eps**3 - p * (k * k - 2.0 * k + 17.0) / 120.0 * eps**4


def lemma_f(x, k):
    """f(x) = (x^{2-k} - x^k)/(x² - 1) + k - 1 for x > 1, 0 ≤ k ≤ 1.

    Nonpositive for every admissible (x, k), negative for 0 < k < 1.  Uses a
    fourth-order series when x - 1 < 1e-4.  Values of k above 1 are evaluated
    too (the sign flips there), which the falsification scans rely on.
    """
    x = np.asarray(x, dtype=float)
    k = np.asarray(k, dtype=float)
    if np.any(x <= 1.0):
        raise DomainError("lemma_f needs x > 1")
    eps = x - 1.0
    L = np.log1p(eps)
    with np.errstate(over="ignore", invalid="ignore"):
        # x^{2-k} - x^k = x^k (x^{2-2k} - 1)
        direct = np.exp(k * L) * np.expm1((2.0 - 2.0 * k) * L) / (eps * (2.0 + eps)) + k - 1.0
    out = np.where(eps < _SERIES_SWITCH, _lemma_f_series(eps, k), direct)
    return out if out.ndim else float(out)


def _ratio_pow(a, b, k):
    return np.exp(k * (np.log(b) - np.log(a)))


def lemma22_matching_x(a, b, k):
    """The unique x > 0 with (8 + b²x²)/(8 + a²x²) = (b/a)^k.

    x² = 8((b/a)^k - 1) / (b² - (b/a)^k a²).  Defined for b > a > 0 and
    0 < k < 2; the degenerate k = 0 root x = 0 is rejected.
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    k = np.asarray(k, dtype=float)
    if np.any(~(b > a)) or np.any(a <= 0):
        raise DomainError("need b > a > 0")
    if np.any(k <= 0):
        raise DomainError("matching radius degenerates to 0 for k <= 0")
    if np.any(k >= 2):
        raise DomainError("matching relation has no positive root for k >= 2")
    lt = np.log(b) - np.log(a)
    num = 8.0 * np.expm1(k * lt)
    # b² - t^k a² = a² t^k (t^{2-k} - 1) > 0 for k < 2
    den = a * a * np.exp(k * lt) * np.expm1((2.0 - k) * lt)
    if np.any(den <= 1e-14 * b * b):
        raise DomainError("matching denominator b² - (b/a)^k a² is not positive")
    out = np.sqrt(num / den)
    return out if out.ndim else float(out)


def cap_sum(a, b, x):
    """a²x²/(8 + a²x²) + b²x²/(8 + b²x²); equals bubble areas on B_x over 8π."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    x = np.asarray(x, dtype=float)
    A = a * a * x * x
    B = b * b * x * x
    out = A / (8.0 + A) + B / (8.0 + B)
    return out if out.ndim else float(out)


def cap_sum_closed_form(a, b, k):
    """1 - ((b/a)^{2-k} - (b/a)^k)/((b/a)² - 1), the cap sum at the matching x.

    Equals ``k - lemma_f(b/a, k)``.  Accepts any real k so that the failure
    regime k > 1 can be tabulated.
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    k = np.asarray(k, dtype=float)
    if np.any(~(b > a)) or np.any(a <= 0):
        raise DomainError("need b > a > 0")
    lt = np.log(b) - np.log(a)
    # (t^{2-k} - t^k)/(t² - 1) with t = b/a, written through expm1
    ratio = np.exp(k * lt) * np.expm1((2.0 - 2.0 * k) * lt) / np.expm1(2.0 * lt)
    out = 1.0 - ratio
    return out if out.ndim else float(out)


def gap_on_circle(a, b, R):
    """U_b(R) - U_a(R) = 2 ln(b/a) - 2 ln((8 + b²R²)/(8 + a²R²)).

    Strictly decreasing in R, from 2 ln(b/a) at the origin to -2 ln(b/a) at
    infinity.
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    R = np.asarray(R, dtype=float)
    if np.any(~(b > a)) or np.any(a <= 0):
        raise DomainError("need b > a > 0")
    out = bubble_value(b, R) - bubble_value(a, R)
    out = np.asarray(out)
    return out if out.ndim else float(out)


def theorem24_margin(a, b, k):
    """Total area of U_a, U_b on the matching disk minus 8kπ.

    Nonnegative for 0 < k ≤ 1 and zero exactly at k = 1, where the two caps
    are complementary.
    """
    R = lemma22_matching_x(a, b, k)
    out = np.asarray(bubble_area(a, R) + bubble_area(b, R) - EIGHT_PI * np.asarray(k, dtype=float))
    return out if out.ndim else float(out)
