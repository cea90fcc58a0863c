"""Density of a smooth volume with respect to the spherical Hausdorff measure.

At a regular point the density is ``f(q) = m(q) · V(b(q)) / 2^Q``: the
nilpotent unit ball measured with the frozen density ``m(q)`` of the
smooth volume (Lebesgue in privileged coordinates), scaled by the
dimension-dependent factor ``2^{-Q}``.

The structure is supplied as a :class:`~srvolume.algebra.StructureField`
already written in normal-form coordinates at every point.
"""

from __future__ import annotations

import itertools
from dataclasses import asdict, dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy.interpolate import RegularGridInterpolator

from .algebra import (
    StructureConstants,
    StructureField,
    growth_vector,
    hausdorff_dimension,
    popp_coefficient_45,
)
from .exceptions import Inconsistent, ValidationError
from .expr import Expression, parse_expression
from .volume import unit_ball_volume

__all__ = [
    "SmoothVolumeSpec",
    "DensitySample",
    "GridSpec",
    "density_at",
    "popp_density_45",
    "density_map",
    "structure_Q",
]


@dataclass(frozen=True)
class SmoothVolumeSpec:
    """A smooth volume ``μ = m(q) dq`` on the coordinate box."""

    density: Callable = field(repr=False)
    name: str = "mu"

    def __call__(self, q) -> float:
        val = float(self.density(np.atleast_1d(np.asarray(q, dtype=float))))
        if not np.isfinite(val) or val <= 0:
            raise ValidationError(f"volume density of {self.name!r} must be positive, got {val}")
        return val

    @classmethod
    def lebesgue(cls) -> "SmoothVolumeSpec":
        return cls(lambda q: 1.0, "lebesgue")

    @classmethod
    def constant(cls, value: float, name: str = "mu") -> "SmoothVolumeSpec":
        value = float(value)
        if value <= 0:
            raise ValidationError("constant volume density must be positive")
        return cls(lambda q: value, name)

    @classmethod
    def from_expression(cls, text, dim_manifold: int, name: str = "mu",
                        source: str | None = None) -> "SmoothVolumeSpec":
        allowed = {f"q{i + 1}" for i in range(dim_manifold)}
        expr = text if isinstance(text, Expression) else parse_expression(
            str(text), allowed=allowed, source=source or name)

        def m(q):
            return expr.evaluate({f"q{i + 1}": float(v) for i, v in enumerate(q)})

        return cls(m, name)

    @classmethod
    def from_grid(cls, axes: Sequence, values, name: str = "mu") -> "SmoothVolumeSpec":
        interp = RegularGridInterpolator([np.asarray(a, float) for a in axes],
                                         np.asarray(values, float), method="linear")
        return cls(lambda q: interp(q[None, :])[0], name)

    def __add__(self, other: "SmoothVolumeSpec") -> "SmoothVolumeSpec":
        return SmoothVolumeSpec(lambda q: self.density(q) + other.density(q),
                                f"{self.name}+{other.name}")

    def scaled(self, kappa: float) -> "SmoothVolumeSpec":
        if kappa <= 0:
            raise ValidationError("scale factor must be positive")
        return SmoothVolumeSpec(lambda q: kappa * self.density(q), f"{kappa}*{self.name}")


@dataclass(frozen=True)
class DensitySample:
    q: tuple
    b: tuple
    Q: int
    ball_volume: float
    m: float
    f_muS: float

    def __post_init__(self):
        if not self.f_muS > 0:
            raise ValidationError("density must be positive")

    def to_dict(self):
        return asdict(self)


@dataclass(frozen=True)
class GridSpec:
    """Tensor grid with ``shape[i]`` nodes on ``[lower[i], upper[i]]``."""

    lower: tuple
    upper: tuple
    shape: tuple

    def __post_init__(self):
        if not len(self.lower) == len(self.upper) == len(self.shape):
            raise ValidationError("grid lower, upper and shape must have equal length")
        if any(n < 1 for n in self.shape):
            raise ValidationError("grid needs at least one node per axis")
        if any(lo > hi for lo, hi in zip(self.lower, self.upper)):
            raise ValidationError("grid lower bound exceeds upper bound")

    @property
    def axes(self) -> list:
        return [np.linspace(lo, hi, n) if n > 1 else np.array([lo])
                for lo, hi, n in zip(self.lower, self.upper, self.shape)]

    def nodes(self):
        """Grid nodes in lexicographic order (last axis fastest)."""
        return itertools.product(*self.axes)

    def refined(self, factor: int = 2) -> "GridSpec":
        return GridSpec(self.lower, self.upper,
                        tuple(factor * (n - 1) + 1 if n > 1 else 1 for n in self.shape))


def structure_Q(L) -> int:
    """Hausdorff dimension of the 2-step algebra with bracket matrix ``L``."""
    return hausdorff_dimension(growth_vector(StructureConstants.from_matrices([np.asarray(L)])))


def density_at(q, field_: StructureField, vol: SmoothVolumeSpec) -> DensitySample:
    """``f(q) = m(q) V(b(q)) / 2^Q`` at one point."""
    q = np.atleast_1d(np.asarray(q, dtype=float))
    L = field_(q)
    spec = field_.spectrum(q)
    Q = structure_Q(L)
    V = unit_ball_volume(spec).value
    m = vol(q)
    return DensitySample(tuple(float(v) for v in q), tuple(float(v) for v in spec.freqs), Q,
                         float(V), float(m), float(m * V / 2.0 ** Q))


def popp_density_45(q, field_: StructureField) -> float:
    """Density of Popp's volume for a (4,5) field, ``f_PS(q)``."""
    q = np.atleast_1d(np.asarray(q, dtype=float))
    spec = field_.spectrum(q)
    if spec.kind != "contact" or spec.ell != 2:
        raise ValidationError("Popp density formula needs a (4,5) structure")
    popp = SmoothVolumeSpec(lambda _: popp_coefficient_45(*spec.freqs), "popp")
    return density_at(q, field_, popp).f_muS


def density_map(grid: GridSpec, field_: StructureField, vol: SmoothVolumeSpec | str) -> list:
    """Density at every grid node; ``vol="popp"`` selects Popp's volume.

    The Hausdorff dimension must be the same at every node.
    """
    rows = []
    for node in grid.nodes():
        if vol == "popp":
            spec = field_.spectrum(node)
            if spec.kind != "contact" or spec.ell != 2:
                raise ValidationError("Popp density formula needs a (4,5) structure")
            m = SmoothVolumeSpec.constant(popp_coefficient_45(*spec.freqs), "popp")
            rows.append(density_at(node, field_, m))
        else:
            rows.append(density_at(node, field_, vol))
    Qs = {r.Q for r in rows}
    if len(Qs) > 1:
        raise Inconsistent(f"Hausdorff dimension varies across the grid: {sorted(Qs)}")
    return rows
