"""Moving between the two normalizations of the Liouville equation.

EXP_U is Δu + e^u = f and EXP_2V is Δv + e^{2v} = f.  Halving the amplitude
alone would leave a factor 2 in front of the nonlinearity, so the map also
dilates coordinates:

    v(y) = ½ u(√2 y),   f̃(y) = f(√2 y).

Weighted areas halve (∫e^{2v} = ½∫e^u) and gap ratios c/M are unchanged.
"""

from __future__ import annotations

import dataclasses
import enum
import math

from .planar import PlanarField
from .radial import RadialProfile, SourceSpec

SQRT2 = math.sqrt(2.0)


class Normalization(enum.Enum):
    EXP_U = 1
    EXP_2V = 2

    @property
    def weight(self) -> int:
        """Coefficient of the exponent in the nonlinearity."""
        return self.value

    @property
    def total_mass(self) -> float:
        """Weighted area of a whole bubble: 8π or 4π."""
        return 8.0 * math.pi / self.value

    @classmethod
    def parse(cls, name) -> "Normalization":
        if isinstance(name, cls):
            return name
        try:
            return cls[str(name).upper()]
        except KeyError:
            raise ValueError(f"unknown normalization {name!r}") from None


def _factors(src: Normalization, dst: Normalization):
    # (amplitude, coordinate scale): new(y) = amp * old(y / scale)
    if src is dst:
        return 1.0, 1.0
    if src is Normalization.EXP_U:
        return 0.5, 1.0 / SQRT2
    return 2.0, SQRT2


def _scaled_source(f: SourceSpec, scale: float) -> SourceSpec:
    if f is None or f.kind in ("zero", "constant"):
        return f
    return dataclasses.replace(f, center=f.center * scale, width=f.width * scale)


def convert_normalization(obj, src, dst):
    """Re-express a profile, planar field or callable in the other normalization."""
    src, dst = Normalization.parse(src), Normalization.parse(dst)
    amp, scale = _factors(src, dst)
    if src is dst:
        return obj
    if isinstance(obj, RadialProfile):
        return dataclasses.replace(
            obj,
            radii=obj.radii * scale,
            values=obj.values * amp,
            derivatives=obj.derivatives * (amp / scale),
            source=_scaled_source(obj.source, scale),
            eps_disc=obj.eps_disc * (dst.total_mass / src.total_mass),
        )
    if isinstance(obj, PlanarField):
        if obj.weight != src.weight:
            raise ValueError(f"field is in weight {obj.weight}, not {src.name}")
        exact = None
        if obj.exact is not None:
            exact = convert_normalization(obj.exact, src, dst)
        return obj.replace(
            grid=obj.grid.scaled(scale),
            values=obj.values * amp,
            domain=obj.domain.scaled(scale) if obj.domain is not None else None,
            weight=dst.weight,
            exact=exact,
        )
    if callable(obj):
        def converted(y, _fn=obj):
            return amp * _fn(y / scale)

        return converted
    raise TypeError(f"cannot convert {type(obj).__name__}")
