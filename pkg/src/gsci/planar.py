"""Masked planar grids carrying conformal-factor exponents.

A `PlanarField` stores one value per cell centre of a uniform square grid,
a boolean mask for the region ω, and the fraction of each cell covered by ω.
Disk domains get exact cut-cell geometry (area and moments up to second
order); regions cut out by a level set get 4x4 sub-sampled fractions.

Non-radial exact solutions come from Möbius pullbacks of bubbles: for a
conformal map Φ, u∘Φ + 2 ln|Φ'| solves Δu + e^u = 0 whenever u does.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Optional

import numpy as np
from numpy.polynomial.legendre import leggauss
from scipy import ndimage

from .errors import ContractError, DomainError, EmptyDomainError, UnsupportedDomainError
from .liouville import bubble_value

MIN_CELLS = 32
DEFAULT_PAD = 3
_GL_X, _GL_W = leggauss(12)


@dataclass(frozen=True)
class Grid2D:
    """Uniform grid of nx by ny square cells of side h; node (i, j) is a cell centre.

    Arrays on the grid are indexed ``[j, i]`` (row = y, column = x).
    """

    x0: float
    y0: float
    h: float
    nx: int
    ny: int

    def __post_init__(self):
        if self.nx < MIN_CELLS or self.ny < MIN_CELLS:
            raise ContractError(f"grid needs at least {MIN_CELLS} cells per side")
        if not self.h > 0:
            raise ContractError("cell size must be positive")

    @classmethod
    def covering(cls, center: complex, radius: float, nx: int, pad: int = DEFAULT_PAD) -> "Grid2D":
        """Square grid of nx cells around a disk, leaving ``pad`` cells outside it."""
        h = 2.0 * radius / (nx - 2 * pad)
        c = complex(center)
        return cls(c.real - radius - pad * h, c.imag - radius - pad * h, h, nx, nx)

    @property
    def width(self) -> float:
        return self.h * self.nx

    @property
    def height(self) -> float:
        return self.h * self.ny

    @property
    def shape(self) -> tuple:
        return (self.ny, self.nx)

    def xs(self) -> np.ndarray:
        return self.x0 + (np.arange(self.nx) + 0.5) * self.h

    def ys(self) -> np.ndarray:
        return self.y0 + (np.arange(self.ny) + 0.5) * self.h

    def points(self) -> np.ndarray:
        """Complex coordinates of all nodes, shape (ny, nx)."""
        X, Y = np.meshgrid(self.xs(), self.ys())
        return X + 1j * Y

    def scaled(self, s: float) -> "Grid2D":
        return Grid2D(self.x0 * s, self.y0 * s, self.h * s, self.nx, self.ny)


@dataclass(frozen=True)
class Disk:
    center: complex
    radius: float

    def __post_init__(self):
        if not self.radius > 0:
            raise DomainError("disk radius must be positive")

    def boundary(self, n: int) -> np.ndarray:
        t = 2.0 * np.pi * np.arange(n) / n
        return complex(self.center) + self.radius * np.exp(1j * t)

    def scaled(self, s: float) -> "Disk":
        return Disk(complex(self.center) * s, self.radius * s)


@dataclass(frozen=True)
class CellGeometry:
    """Per-cell coverage of a disk: area fraction and, for cut cells, moments.

    Moments are taken about the cell centre and ordered
    (area, x, y, xx, xy, yy).
    """

    fraction: np.ndarray
    cut_index: tuple
    cut_moments: np.ndarray


def _segment_moments(xa, xb, top, bot, R):
    """∫_{xa}^{xb} ∫_{bot(x)}^{top(x)} x^p y^q dy dx for p + q ≤ 2.

    ``top``/``bot`` are either a float or the string 's' / '-s' meaning ±√(R²-x²).
    Integrates in θ with x = R sin θ so the square root is smooth.
    """
    ta, tb = math.asin(max(-1.0, min(1.0, xa / R))), math.asin(max(-1.0, min(1.0, xb / R)))
    th = 0.5 * (tb - ta) * _GL_X + 0.5 * (tb + ta)
    w = 0.5 * (tb - ta) * _GL_W * R * np.cos(th)
    x = R * np.sin(th)
    s = R * np.cos(th)
    T = s if top == "s" else np.full_like(x, top)
    B = -s if bot == "-s" else np.full_like(x, bot)
    i0 = T - B
    i1 = 0.5 * (T * T - B * B)
    i2 = (T**3 - B**3) / 3.0
    return np.array([w @ i0, w @ (x * i0), w @ i1, w @ (x * x * i0), w @ (x * i1), w @ i2])


def _cell_moments(x0, x1, y0, y1, R):
    """Moments of [x0,x1]x[y0,y1] ∩ B_R (disk at the origin), about the origin."""
    cuts = {x0, x1}
    for v in (R, -R):
        cuts.add(v)
    for yy in (y0, y1):
        if abs(yy) < R:
            q = math.sqrt(R * R - yy * yy)
            cuts.update((q, -q))
    lo, hi = max(x0, -R), min(x1, R)
    pts = sorted(c for c in cuts if lo <= c <= hi)
    out = np.zeros(6)
    for xa, xb in zip(pts[:-1], pts[1:]):
        if xb - xa <= 0:
            continue
        xm = 0.5 * (xa + xb)
        sm = math.sqrt(max(R * R - xm * xm, 0.0))
        top = y1 if y1 < sm else "s"
        bot = y0 if y0 > -sm else "-s"
        tv = y1 if top != "s" else sm
        bv = y0 if bot != "-s" else -sm
        if tv <= bv:
            continue
        out += _segment_moments(xa, xb, top, bot, R)
    return out


def _shift_moments(m, dx, dy):
    # moments about the origin -> moments about (dx, dy)
    A, Mx, My, Mxx, Mxy, Myy = m
    return np.array([
        A,
        Mx - dx * A,
        My - dy * A,
        Mxx - 2 * dx * Mx + dx * dx * A,
        Mxy - dx * My - dy * Mx + dx * dy * A,
        Myy - 2 * dy * My + dy * dy * A,
    ])


@lru_cache(maxsize=32)
def disk_geometry(grid: Grid2D, disk: Disk) -> CellGeometry:
    """Exact coverage of every cell of ``grid`` by ``disk``."""
    h = grid.h
    cx, cy = complex(disk.center).real, complex(disk.center).imag
    R = disk.radius
    xl = grid.x0 + np.arange(grid.nx) * h - cx
    yl = grid.y0 + np.arange(grid.ny) * h - cy
    XL, YL = np.meshgrid(xl, yl)
    XH, YH = XL + h, YL + h
    far = np.maximum(np.maximum(XL**2, XH**2) + np.maximum(YL**2, YH**2), 0.0)
    nx_ = np.clip(0.0, XL, XH)
    ny_ = np.clip(0.0, YL, YH)
    near = nx_**2 + ny_**2
    inside = far <= R * R
    outside = near >= R * R
    frac = np.where(inside, 1.0, 0.0)
    cut = np.nonzero(~inside & ~outside)
    moments = np.empty((len(cut[0]), 6))
    for n, (j, i) in enumerate(zip(*cut)):
        m = _cell_moments(XL[j, i], XH[j, i], YL[j, i], YH[j, i], R)
        moments[n] = _shift_moments(m, XL[j, i] + 0.5 * h, YL[j, i] + 0.5 * h)
        frac[j, i] = m[0] / (h * h)
    frac.setflags(write=False)
    moments.setflags(write=False)
    return CellGeometry(frac, cut, moments)


def _connected(mask: np.ndarray) -> tuple:
    """(region connected, region has no holes) under 4-connectivity."""
    _, n = ndimage.label(mask)
    comp, nc = ndimage.label(np.pad(~mask, 1, constant_values=True))
    return n == 1, nc <= 1


@dataclass(frozen=True, eq=False)
class PlanarField:
    """Values of a conformal-factor exponent on a masked grid.

    ``weight`` is the exponent coefficient of the normalization: 1 for
    Δu + e^u = f, 2 for Δv + e^{2v} = f.  ``exact`` optionally holds the
    closed-form function the samples came from (complex argument).
    """

    grid: Grid2D
    values: np.ndarray
    mask: np.ndarray
    fraction: np.ndarray
    domain: Optional[Disk] = None
    weight: int = 1
    exact: Optional[object] = field(default=None, repr=False)
    label: str = ""

    def __post_init__(self):
        values = np.array(self.values, dtype=float)
        mask = np.array(self.mask, dtype=bool)
        fraction = np.array(self.fraction, dtype=float)
        if values.shape != self.grid.shape or mask.shape != self.grid.shape or fraction.shape != self.grid.shape:
            raise ContractError("values, mask and fraction must match the grid shape")
        if mask.any() and not np.all(np.isfinite(values[mask])):
            raise ContractError("field values must be finite on the mask")
        for arr in (values, mask, fraction):
            arr.setflags(write=False)
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "mask", mask)
        object.__setattr__(self, "fraction", fraction)

    @classmethod
    def on_disk(cls, grid: Grid2D, disk: Disk, values, *, weight: int = 1, exact=None, label: str = "") -> "PlanarField":
        geo = disk_geometry(grid, disk)
        mask = geo.fraction > 0
        return cls(grid, values, mask, geo.fraction, domain=disk, weight=weight, exact=exact, label=label)

    @classmethod
    def from_function(cls, grid: Grid2D, disk: Disk, fn, *, weight: int = 1, label: str = "") -> "PlanarField":
        return cls.on_disk(grid, disk, fn(grid.points()), weight=weight, exact=fn, label=label)

    @property
    def connected(self) -> bool:
        return _connected(self.mask)[0]

    @property
    def simply_connected(self) -> bool:
        return all(_connected(self.mask))

    @property
    def geometry(self) -> Optional[CellGeometry]:
        return disk_geometry(self.grid, self.domain) if self.domain is not None else None

    def same_support(self, other: "PlanarField") -> bool:
        return self.grid == other.grid and np.array_equal(self.mask, other.mask)

    def replace(self, **kw) -> "PlanarField":
        args = dict(grid=self.grid, values=self.values, mask=self.mask, fraction=self.fraction,
                    domain=self.domain, weight=self.weight, exact=self.exact, label=self.label)
        args.update(kw)
        return PlanarField(**args)


def require_same_support(v1: PlanarField, v2: PlanarField):
    if not v1.same_support(v2):
        raise ContractError("fields must share grid and mask")


# --- Möbius pullbacks -------------------------------------------------------


@dataclass(frozen=True)
class MobiusParams:
    """Disk automorphism w ↦ e^{iθ}(w - z0)/(1 - conj(z0) w), scaled to radius R_model."""

    z0: complex = 0j
    theta: float = 0.0
    R_model: float = 1.0

    def __post_init__(self):
        if not abs(complex(self.z0)) < 1:
            raise DomainError(f"Möbius parameter must satisfy |z0| < 1, got {self.z0!r}")
        if not self.R_model > 0:
            raise DomainError("R_model must be positive")

    def map(self, y):
        w = np.asarray(y) / self.R_model
        z0 = complex(self.z0)
        return self.R_model * np.exp(1j * self.theta) * (w - z0) / (1.0 - np.conj(z0) * w)

    def derivative(self, y):
        w = np.asarray(y) / self.R_model
        z0 = complex(self.z0)
        return np.exp(1j * self.theta) * (1.0 - abs(z0) ** 2) / (1.0 - np.conj(z0) * w) ** 2

    def inverse(self, z):
        p = np.exp(1j * self.theta)
        w = np.asarray(z) / (self.R_model * p)
        z0 = complex(self.z0)
        return self.R_model * (w + z0) / (1.0 + np.conj(z0) * w)

    @property
    def peak(self) -> complex:
        """Preimage of the origin, where pulled-back bubbles peak."""
        return complex(self.inverse(0j))


def pullback(lam: float, m: MobiusParams):
    """The function y ↦ U_λ(|Φ(y)|) + 2 ln|Φ'(y)|."""

    def fn(y):
        with np.errstate(divide="ignore", invalid="ignore"):
            return bubble_value(lam, np.abs(m.map(y))) + 2.0 * np.log(np.abs(m.derivative(y)))

    return fn


def mobius_pullback_bubble(lam: float, m: MobiusParams, g: Grid2D) -> PlanarField:
    """Pull U_λ back through the automorphism of B_{R_model} given by ``m``.

    The result solves Δu + e^u = 0 exactly and is masked to B_{R_model},
    which the automorphism maps onto itself.
    """
    disk = Disk(0j, m.R_model)
    if g.x0 > -m.R_model or g.y0 > -m.R_model or g.x0 + g.width < m.R_model or g.y0 + g.height < m.R_model:
        raise DomainError("grid does not cover the model disk")
    return PlanarField.from_function(g, disk, pullback(lam, m), label=f"mobius(U_{lam:g})")


# --- quadrature -------------------------------------------------------------


def _fd_derivatives(g: np.ndarray, h: float):
    gx = np.zeros_like(g)
    gy = np.zeros_like(g)
    gxx = np.zeros_like(g)
    gyy = np.zeros_like(g)
    gxy = np.zeros_like(g)
    gx[:, 1:-1] = (g[:, 2:] - g[:, :-2]) / (2 * h)
    gy[1:-1, :] = (g[2:, :] - g[:-2, :]) / (2 * h)
    gxx[:, 1:-1] = (g[:, 2:] - 2 * g[:, 1:-1] + g[:, :-2]) / (h * h)
    gyy[1:-1, :] = (g[2:, :] - 2 * g[1:-1, :] + g[:-2, :]) / (h * h)
    gxy[1:-1, 1:-1] = (g[2:, 2:] - g[2:, :-2] - g[:-2, 2:] + g[:-2, :-2]) / (4 * h * h)
    return gx, gy, gxx, gxy, gyy


def area_integral(fld: PlanarField, weight_exponent: Optional[int] = None, *, order: int = 2) -> float:
    """∫_ω e^{w·v} dy over the masked region.

    ``order=2`` is the midpoint rule with exact cut-cell area fractions.
    ``order=4`` adds the h²/24 Laplacian correction on full cells and a
    second-order Taylor expansion against exact cut-cell moments; it needs a
    disk domain and finite values one cell outside the mask.
    """
    w = fld.weight if weight_exponent is None else weight_exponent
    if w not in (1, 2):
        raise ValueError("weight_exponent must be 1 or 2")
    if not fld.mask.any():
        return 0.0
    h = fld.grid.h
    g = np.where(fld.mask, np.exp(w * np.where(fld.mask, fld.values, 0.0)), 0.0)
    if order == 2:
        return float(np.sum(g * fld.fraction) * h * h)
    if order != 4:
        raise ValueError("order must be 2 or 4")
    geo = fld.geometry
    if geo is None:
        raise UnsupportedDomainError("fourth-order quadrature needs a disk domain")
    with np.errstate(over="ignore", invalid="ignore"):
        gfull = np.exp(w * fld.values)
    full = geo.fraction == 1.0
    gx, gy, gxx, gxy, gyy = _fd_derivatives(gfull, h)
    interior = np.sum((gfull + h * h / 24.0 * (gxx + gyy))[full]) * h * h
    j, i = geo.cut_index
    M = geo.cut_moments
    cut = (M[:, 0] * gfull[j, i] + M[:, 1] * gx[j, i] + M[:, 2] * gy[j, i]
           + 0.5 * (M[:, 3] * gxx[j, i] + 2 * M[:, 4] * gxy[j, i] + M[:, 5] * gyy[j, i]))
    total = interior + np.sum(cut)
    if not math.isfinite(total):
        raise ContractError("field is not finite next to the mask")
    return float(total)


def max_difference(v1: PlanarField, v2: PlanarField) -> float:
    """max over masked nodes of v2 - v1."""
    require_same_support(v1, v2)
    if not v1.mask.any():
        raise EmptyDomainError("empty mask")
    return float(np.max((v2.values - v1.values)[v1.mask]))


def boundary_nodes(fld: PlanarField) -> np.ndarray:
    """Mask nodes whose cell is cut by ∂ω or that touch an unmasked neighbour."""
    m = fld.mask
    edge = m & ~ndimage.binary_erosion(m, border_value=0)
    return edge | (m & (fld.fraction < 1.0))


@dataclass
class GapReport:
    c: float
    tol: float
    boundary_worst: float
    boundary_worst_at: complex
    interior_worst: float
    interior_worst_at: complex
    passed: bool

    def as_dict(self) -> dict:
        return {
            "c": self.c,
            "tol": self.tol,
            "boundary_worst": self.boundary_worst,
            "interior_worst": self.interior_worst,
            "passed": self.passed,
        }


def gap_gradient(v1: PlanarField, v2: PlanarField) -> np.ndarray:
    d = v2.values - v1.values
    gx, gy, *_ = _fd_derivatives(np.where(np.isfinite(d), d, 0.0), v1.grid.h)
    return np.hypot(gx, gy)


def boundary_gap_check(v1: PlanarField, v2: PlanarField, c: float, tol: Optional[float] = None) -> GapReport:
    """Check v2 - v1 = c on boundary nodes and v2 ≥ v1 + c on the whole mask.

    Boundary nodes sit up to a cell diagonal away from ∂ω, so the default
    tolerance is the largest |∇(v2 - v1)| on boundary nodes times h√2, plus
    a rounding floor.
    """
    require_same_support(v1, v2)
    d = v2.values - v1.values
    bnd = boundary_nodes(v1)
    pts = v1.grid.points()
    if tol is None:
        grad = gap_gradient(v1, v2)
        tol = float(np.max(grad[bnd])) * v1.grid.h * math.sqrt(2.0) + 1e-12 if bnd.any() else 1e-12
    bdev = np.abs(d - c)
    bdev = np.where(bnd, bdev, -np.inf)
    jb = np.unravel_index(np.argmax(bdev), d.shape)
    inner = np.where(v1.mask, c - d, -np.inf)
    ji = np.unravel_index(np.argmax(inner), d.shape)
    bw = float(bdev[jb]) if bnd.any() else 0.0
    iw = float(inner[ji])
    return GapReport(
        c=float(c),
        tol=float(tol),
        boundary_worst=bw,
        boundary_worst_at=complex(pts[jb]),
        interior_worst=iw,
        interior_worst_at=complex(pts[ji]),
        passed=bool(bw <= tol and iw <= tol),
    )


def interpolate(fld: PlanarField, pts: np.ndarray, order: int = 1) -> np.ndarray:
    """Interpolate field values at complex points.

    ``order=1`` is bilinear; ``order=3`` is tensor cubic Lagrange on the
    surrounding 4x4 nodes (no global prefilter, so the grid edge does not leak
    in).
    """
    g = fld.grid
    fx = (np.real(pts) - g.x0) / g.h - 0.5
    fy = (np.imag(pts) - g.y0) / g.h - 0.5
    if order == 1:
        return ndimage.map_coordinates(fld.values, [fy, fx], order=1, mode="nearest")
    if order != 3:
        raise ValueError("order must be 1 or 3")
    ix = np.floor(fx).astype(int)
    iy = np.floor(fy).astype(int)
    if ix.min() < 1 or iy.min() < 1 or ix.max() > g.nx - 3 or iy.max() > g.ny - 3:
        raise ContractError("cubic interpolation stencil leaves the grid")
    tx, ty = fx - ix, fy - iy

    def weights(t):
        return np.stack([
            -t * (t - 1) * (t - 2) / 6,
            (t + 1) * (t - 1) * (t - 2) / 2,
            -(t + 1) * t * (t - 2) / 2,
            (t + 1) * t * (t - 1) / 6,
        ])

    wx, wy = weights(tx), weights(ty)
    out = np.zeros(np.shape(pts))
    for a in range(4):
        for b in range(4):
            out += wy[a] * wx[b] * fld.values[iy + a - 1, ix + b - 1]
    return out


def boundary_weighted_length(fld: PlanarField, half: bool = True, *, n: int = 1024, order: int = 1,
                             use_exact: bool = False) -> float:
    """∫_{∂ω} e^{v/2} ds (``half``) or ∫_{∂ω} e^{v} ds for a disk domain ω.

    Periodic trapezoid rule on the parametrized circle.  Boundary values come
    from bilinear interpolation by default, local cubic Lagrange with
    ``order=3``, or the field's closed form with ``use_exact``.
    """
    if fld.domain is None:
        raise UnsupportedDomainError("boundary quadrature needs a parametrized disk boundary")
    pts = fld.domain.boundary(n)
    if use_exact:
        if fld.exact is None:
            raise ContractError("field carries no closed form")
        vals = np.asarray(fld.exact(pts), dtype=float)
    else:
        vals = interpolate(fld, pts, order=order)
    p = 0.5 if half else 1.0
    return float(np.sum(np.exp(p * fld.weight * vals)) * 2.0 * math.pi * fld.domain.radius / n)


def _subsample_fraction(d: np.ndarray, grad_x, grad_y, h: float, c: float, s: int = 4) -> np.ndarray:
    """Fraction of each cell where the linear reconstruction of d exceeds c."""
    off = (np.arange(s) + 0.5) / s - 0.5
    frac = np.zeros_like(d)
    for ox in off:
        for oy in off:
            frac += (d + h * (ox * grad_x + oy * grad_y)) > c
    return frac / (s * s)


def restrict_mask(v1: PlanarField, v2: PlanarField, c: float) -> tuple:
    """Sub-region {v2 - v1 > c} of the mask, with 4x4 sub-sampled cell fractions.

    Returns ``(mask, fraction)``.  Raises `EmptyDomainError` when no node
    qualifies, which callers read as M ≤ c.
    """
    if v1.grid != v2.grid:
        raise ContractError("fields must share a grid")
    d = v2.values - v1.values
    base = v1.mask & v2.mask
    inside = base & (d > c)
    if not inside.any():
        raise EmptyDomainError(f"no node has v2 - v1 > {c}")
    gx, gy, *_ = _fd_derivatives(np.where(np.isfinite(d), d, 0.0), v1.grid.h)
    sub = _subsample_fraction(d, gx, gy, v1.grid.h, c)
    near = ndimage.binary_dilation(~(d > c), structure=np.ones((3, 3), bool))
    # like disk masks, a cell belongs to the region when any part of it does
    frac = np.where(base, np.where(near, sub, np.where(inside, 1.0, 0.0)), 0.0)
    frac = np.minimum(frac, v1.fraction)
    mask = frac > 0
    labels, n = ndimage.label(mask)
    if n > 1:
        raise ContractError("restricted region is not connected")
    return mask, frac


def restricted(v: PlanarField, mask: np.ndarray, fraction: np.ndarray) -> PlanarField:
    return v.replace(mask=mask, fraction=fraction, domain=None)


# --- PDE residual -----------------------------------------------------------


@dataclass
class SourceReport:
    f1_min: float
    order_min: float
    eps_disc: float
    passed: bool

    def as_dict(self) -> dict:
        return {"f1_min": self.f1_min, "f2_minus_f1_min": self.order_min, "eps_disc": self.eps_disc,
                "passed": self.passed}


def pde_source(fld: PlanarField, stride: int = 1) -> np.ndarray:
    """Δ_h v + e^{w v} at every node (5-point Laplacian with spacing stride·h); NaN at the rim."""
    v = fld.values
    s = stride
    h = fld.grid.h * s
    out = np.full_like(v, np.nan)
    with np.errstate(over="ignore", invalid="ignore"):
        lap = (v[s:-s, 2 * s:] + v[s:-s, :-2 * s] + v[2 * s:, s:-s] + v[:-2 * s, s:-s] - 4 * v[s:-s, s:-s]) / (h * h)
        out[s:-s, s:-s] = lap + np.exp(fld.weight * v[s:-s, s:-s])
    return out


def source_ordering_check(v1: PlanarField, v2: PlanarField, eps: Optional[float] = None) -> SourceReport:
    """Check f2 ≥ f1 ≥ 0 for the finite-difference sources of the pair on the mask.

    The default slack is twice the largest change of either source between the
    h and 2h stencils.
    """
    require_same_support(v1, v2)
    m = v1.mask
    f1, f2 = pde_source(v1), pde_source(v2)
    if not (np.all(np.isfinite(f1[m])) and np.all(np.isfinite(f2[m]))):
        raise ContractError("source evaluation needs finite values around the mask")
    if eps is None:
        d1 = np.abs(f1 - pde_source(v1, 2))[m]
        d2 = np.abs(f2 - pde_source(v2, 2))[m]
        d1, d2 = d1[np.isfinite(d1)], d2[np.isfinite(d2)]
        eps = 2.0 * max(d1.max(initial=0.0), d2.max(initial=0.0)) + 1e-9
    f1_min = float(np.min(f1[m]))
    order_min = float(np.min((f2 - f1)[m]))
    return SourceReport(f1_min, order_min, float(eps), bool(f1_min >= -eps and order_min >= -eps))


# --- snapshot I/O -----------------------------------------------------------

SNAPSHOT_MAGIC = "# gsci-field 1"


def write_snapshot(fld: PlanarField, path) -> None:
    """Write a self-describing text snapshot: header, row-major values, mask bits."""
    g = fld.grid
    lines = [
        SNAPSHOT_MAGIC,
        f"origin = {g.x0!r} {g.y0!r}",
        f"extent = {g.width!r} {g.height!r}",
        f"cells = {g.nx} {g.ny}",
        f"h = {g.h!r}",
        f"weight = {fld.weight}",
    ]
    if fld.domain is not None:
        c = complex(fld.domain.center)
        lines.append(f"disk = {c.real!r} {c.imag!r} {fld.domain.radius!r}")
    lines.append("values")
    for row in fld.values:
        lines.append(" ".join(repr(float(x)) for x in row))
    lines.append("mask")
    for row in fld.mask:
        lines.append("".join("1" if b else "0" for b in row))
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


def read_snapshot(path) -> PlanarField:
    with open(path) as fh:
        lines = fh.read().splitlines()
    if not lines or lines[0].strip() != SNAPSHOT_MAGIC:
        raise ContractError("not a field snapshot")
    header = {}
    i = 1
    while lines[i].strip() != "values":
        key, _, val = lines[i].partition("=")
        header[key.strip()] = val.split()
        i += 1
    nx, ny = (int(t) for t in header["cells"])
    x0, y0 = (float(t) for t in header["origin"])
    grid = Grid2D(x0, y0, float(header["h"][0]), nx, ny)
    values = np.array([[float(t) for t in lines[i + 1 + j].split()] for j in range(ny)])
    k = i + 1 + ny
    if lines[k].strip() != "mask":
        raise ContractError("snapshot is missing its mask block")
    mask = np.array([[ch == "1" for ch in lines[k + 1 + j].strip()] for j in range(ny)])
    weight = int(header.get("weight", ["1"])[0])
    if "disk" in header:
        cx, cy, r = (float(t) for t in header["disk"])
        disk = Disk(complex(cx, cy), r)
        geo = disk_geometry(grid, disk)
        return PlanarField(grid, values, mask, np.where(mask, geo.fraction, 0.0), domain=disk, weight=weight)
    return PlanarField(grid, values, mask, mask.astype(float), weight=weight)
