"""Exact-solution pairs used by the inequality suite, the CLI and the tests.

Every planar pair is built from bubbles, so f1 = f2 = 0 and the boundary gap
is known in closed form.  A `FixtureSpec` can rebuild its pair on any grid,
which is how the suite estimates discretization error (nx against nx/2).
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, replace

import numpy as np

from .errors import DomainError
from .liouville import GapParams, bubble_value, lemma22_matching_x
from .planar import Disk, Grid2D, MobiusParams, PlanarField, mobius_pullback_bubble
from .radial import RadialProfile, SourceSpec, bubble_profile, solve_radial

KINDS = ("concentric", "mobius", "broken", "oversized")


@dataclass(frozen=True)
class FixturePair:
    v1: PlanarField
    v2: PlanarField
    c: float
    M: float
    spec: "FixtureSpec"


@dataclass(frozen=True)
class FixtureSpec:
    """Descriptor of a bubble pair U_a, U_b on the disk where their gap is c.

    ``kind``:
      concentric  both bubbles centred at the origin
      mobius      both pulled back by the same disk automorphism (z0, theta)
      broken      concentric, with a bump added to v2 so that f2 < f1 near the centre
      oversized   concentric on a disk 1.25 times the matching radius
    """

    kind: str = "concentric"
    a: float = 1.0
    b: float = 2.0
    k: float = 0.7
    z0: complex = 0j
    theta: float = 0.0
    nx: int = 256

    def __post_init__(self):
        if self.kind not in KINDS:
            raise DomainError(f"unknown fixture kind {self.kind!r}")
        GapParams(self.a, self.b, self.k)
        if not 0 < self.k <= 1:
            raise DomainError("fixtures need 0 < k <= 1")
        if abs(self.z0) >= 1:
            raise DomainError("|z0| must be below 1")

    @property
    def params(self) -> GapParams:
        return GapParams(self.a, self.b, self.k)

    @property
    def radius(self) -> float:
        return float(lemma22_matching_x(self.a, self.b, self.k))

    @property
    def c(self) -> float:
        return self.params.c

    def at(self, nx: int) -> "FixtureSpec":
        return replace(self, nx=nx)

    def as_dict(self) -> dict:
        d = asdict(self)
        d["z0"] = [complex(self.z0).real, complex(self.z0).imag]
        return d

    def build(self) -> FixturePair:
        R = self.radius
        M = self.params.M
        if self.kind == "mobius":
            m = MobiusParams(complex(self.z0), self.theta, R)
            g = Grid2D.covering(0j, R, self.nx)
            v1 = mobius_pullback_bubble(self.a, m, g)
            v2 = mobius_pullback_bubble(self.b, m, g)
            return FixturePair(v1, v2, self.c, M, self)
        disk_R = 1.25 * R if self.kind == "oversized" else R
        g = Grid2D.covering(0j, disk_R, self.nx)
        disk = Disk(0j, disk_R)

        def u1(y, lam=self.a):
            return bubble_value(lam, np.abs(y))

        def u2(y, lam=self.b):
            return bubble_value(lam, np.abs(y))

        if self.kind == "broken":
            width = 0.25 * R
            base = u2

            def u2(y, base=base, width=width):
                return base(y) + 0.2 * np.exp(-np.abs(y) ** 2 / width**2)

            M = float(2.0 * math.log(self.b / self.a) + 0.2)
        v1 = PlanarField.from_function(g, disk, u1, label=f"U_{self.a:g}")
        v2 = PlanarField.from_function(g, disk, u2, label=f"U_{self.b:g}")
        return FixturePair(v1, v2, self.c, M, self)


def shipped_fixtures(nx: int = 256) -> dict:
    """The three pairs the supersolution and comparison checks are certified on."""
    return {
        "concentric": FixtureSpec("concentric", 1.0, 2.0, 0.7, nx=nx),
        "mobius": FixtureSpec("mobius", 1.0, 2.0, 0.8, z0=0.3 + 0.1j, theta=0.4, nx=nx),
        "mobius-c0": FixtureSpec("mobius", 1.0, 3.0, 1.0, z0=0.3, theta=0.0, nx=nx),
    }


def crossing_pair(b: float = 2.0, b_high: float = 3.0, R: float = 3.0, n: int = 1024):
    """Radial ψ = U_{b_high} against U_b; the two cross at r = √(8/(b·b_high)).

    A stand-in for the configuration the endpoint claim rules out: ψ starts
    above U_b and meets it again inside the disk.
    """
    psi = solve_radial(SourceSpec.zero(), 2.0 * math.log(b_high), R, n)
    return psi, b


def steepened_tail(lam: float = 1.0, R: float = 3.0, n: int = 512, start: float = 0.6, strength: float = 2.0) -> RadialProfile:
    """U_λ with an extra -strength·(r - start·R)² beyond start·R.

    The flux through large circles then exceeds the enclosed mass, so this
    profile must fail the supersolution check.
    """
    p = bubble_profile(lam, R, n)
    r = p.radii
    s = np.maximum(r - start * R, 0.0)
    return p.with_values(p.values - strength * s * s, p.derivatives - 2.0 * strength * s, label="steepened")
