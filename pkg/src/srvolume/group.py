"""Contact / quasi-contact nilpotent group in exponential coordinates.

Points are ``(x_1..x_l, y_1..y_l, [extra], z)``.  The Lie algebra
relations are ``[X_i, Y_i] = s * b_i * Z`` with orientation ``s``:

* ``s = -1`` (default) gives the reference frame
  ``X_i = d/dx_i + 1/2 b_i y_i d/dz``, ``Y_i = d/dy_i - 1/2 b_i x_i d/dz``;
* ``s = +1`` is its mirror image under ``z -> -z``.  This is the chart in
  which the closed-form exponential map of :mod:`srvolume.geodesics` is
  written (see the module notes there).

The product is the 2-step Baker-Campbell-Hausdorff law
``p q = p + q + 1/2 [p, q]``, which in coordinates reads
``z'' = z + z' + s/2 * sum_i b_i (x_i y'_i - y_i x'_i)``.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .algebra import FrequencySpectrum, as_spectrum
from .exceptions import DimensionMismatch, ParseError, ValidationError

__all__ = [
    "GroupPoint",
    "Dilation",
    "identity",
    "product",
    "inverse",
    "dilate",
    "frame_at",
    "left_translation",
]

REFERENCE = -1
GEODESIC_CHART = +1


@dataclass(frozen=True)
class GroupPoint:
    x: tuple
    y: tuple
    z: float = 0.0
    extra: float | None = None

    def __post_init__(self):
        x = tuple(float(v) for v in np.atleast_1d(self.x))
        y = tuple(float(v) for v in np.atleast_1d(self.y))
        if len(x) != len(y) or len(x) < 1:
            raise DimensionMismatch("x and y must have the same length >= 1")
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "y", y)
        object.__setattr__(self, "z", float(self.z))
        if self.extra is not None:
            object.__setattr__(self, "extra", float(self.extra))

    @property
    def ell(self) -> int:
        return len(self.x)

    @property
    def kind(self) -> str:
        return "contact" if self.extra is None else "quasi-contact"

    def as_array(self) -> np.ndarray:
        """Flat coordinates ``[x..., y..., extra?, z]``."""
        tail = [] if self.extra is None else [self.extra]
        return np.array(list(self.x) + list(self.y) + tail + [self.z])

    @classmethod
    def from_array(cls, arr, kind: str = "contact") -> "GroupPoint":
        arr = np.asarray(arr, dtype=float).ravel()
        quasi = kind == "quasi-contact"
        m = arr.size - 1 - quasi
        if m < 2 or m % 2:
            raise DimensionMismatch(f"{arr.size} coordinates do not fit a {kind} group")
        ell = m // 2
        return cls(arr[:ell], arr[ell:2 * ell], arr[-1], arr[2 * ell] if quasi else None)

    def to_json(self) -> str:
        return json.dumps({"kind": self.kind, "coords": [float(v) for v in self.as_array()]})

    @classmethod
    def from_json(cls, text: str) -> "GroupPoint":
        try:
            obj = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ParseError(exc.msg, line=exc.lineno, column=exc.colno) from None
        if not isinstance(obj, dict) or "coords" not in obj or "kind" not in obj:
            raise ParseError("GroupPoint JSON needs 'kind' and 'coords'")
        if obj["kind"] not in ("contact", "quasi-contact"):
            raise ParseError(f"unknown kind {obj['kind']!r}")
        return cls.from_array(obj["coords"], obj["kind"])


@dataclass(frozen=True)
class Dilation:
    t: float

    def __post_init__(self):
        if not self.t > 0:
            raise ValidationError("dilation factor must be positive")

    def __call__(self, q: GroupPoint) -> GroupPoint:
        return dilate(q, self.t)


def identity(ell: int, kind: str = "contact") -> GroupPoint:
    return GroupPoint((0.0,) * ell, (0.0,) * ell, 0.0, 0.0 if kind == "quasi-contact" else None)


def _check(p: GroupPoint, q: GroupPoint, b: FrequencySpectrum):
    if p.ell != q.ell or p.kind != q.kind:
        raise DimensionMismatch("points belong to different groups")
    if p.ell != b.ell:
        raise DimensionMismatch(f"points have l={p.ell} but spectrum has l={b.ell}")


def _cocycle(p, q, b, orientation):
    bx = np.asarray(b.freqs)
    return 0.5 * orientation * float(
        np.sum(bx * (np.asarray(p.x) * np.asarray(q.y) - np.asarray(p.y) * np.asarray(q.x))))


def product(p: GroupPoint, q: GroupPoint, b, orientation: int = REFERENCE) -> GroupPoint:
    b = as_spectrum(b)
    _check(p, q, b)
    extra = None if p.extra is None else p.extra + q.extra
    return GroupPoint(np.add(p.x, q.x), np.add(p.y, q.y),
                      p.z + q.z + _cocycle(p, q, b, orientation), extra)


def inverse(p: GroupPoint, b, orientation: int = REFERENCE) -> GroupPoint:
    """Solve ``p * q = e``: horizontal part negates, z from the cocycle."""
    b = as_spectrum(b)
    neg = GroupPoint(np.negative(p.x), np.negative(p.y), 0.0,
                     None if p.extra is None else -p.extra)
    z = -p.z - _cocycle(p, neg, b, orientation)
    return GroupPoint(neg.x, neg.y, z, neg.extra)


def dilate(q: GroupPoint, t: float) -> GroupPoint:
    if not t > 0:
        raise ValidationError("dilation factor must be positive")
    extra = None if q.extra is None else t * q.extra
    return GroupPoint(np.multiply(q.x, t), np.multiply(q.y, t), t * t * q.z, extra)


def left_translation(p: GroupPoint, b, orientation: int = REFERENCE):
    """The map ``q -> p * q`` acting on flat coordinate arrays."""
    b = as_spectrum(b)
    kind = p.kind

    def L(arr):
        return product(p, GroupPoint.from_array(arr, kind), b, orientation).as_array()

    return L


def frame_at(q: GroupPoint, b, orientation: int = REFERENCE) -> np.ndarray:
    """Left-invariant frame at ``q`` as rows ``X_1..X_l, Y_1..Y_l, [K], Z``."""
    b = as_spectrum(b)
    if q.ell != b.ell:
        raise DimensionMismatch("point and spectrum disagree on l")
    ell = q.ell
    quasi = q.extra is not None
    dim = 2 * ell + 1 + quasi
    F = np.zeros((dim, dim))
    half = -0.5 * orientation
    for i, bi in enumerate(b.freqs):
        F[i, i] = 1.0
        F[i, -1] = half * bi * q.y[i]
        F[ell + i, ell + i] = 1.0
        F[ell + i, -1] = -half * bi * q.x[i]
    if quasi:
        F[2 * ell, 2 * ell] = 1.0
    F[-1, -1] = 1.0
    return F
