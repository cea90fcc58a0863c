"""Geodesics of contact and quasi-contact nilpotent groups.

The exponential map from the origin, in polar covector coordinates
``u_i + i v_i = r_i exp(i(theta_i + pi/2))`` and vertical covector ``w``,
is::

    x_i = r_i/(b_i w) (cos(b_i w t + theta_i) - cos theta_i)
    y_i = r_i/(b_i w) (sin(b_i w t + theta_i) - sin theta_i)
    z   = sum_i r_i^2 (b_i w t - sin(b_i w t)) / (2 b_i w^2)
    extra = u_e t                                   (quasi-contact)

Chart note.  These curves are horizontal for the frame with
``[X_i, Y_i] = +b_i Z``, i.e. the reference frame of :mod:`srvolume.group`
seen through ``z -> -z``.  All group operations that interact with
geodesics (distances between two points, left translations) therefore
use ``orientation=GEODESIC_CHART``.  The reflection preserves Lebesgue
measure, so ball volumes are unaffected.

The Hamiltonian system integrated by :func:`hamiltonian_flow` is the
one whose projections are exactly these curves: ``u' = -b w v``,
``v' = b w u``, ``x' = u``, ``y' = v``, ``z' = 1/2 sum b (x v - y u)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import solve_ivp
from scipy.optimize import brentq

from .algebra import FrequencySpectrum, as_spectrum
from .exceptions import DimensionMismatch, IntegratorFailure, NoConvergence, ValidationError, WZero
from .group import GroupPoint

__all__ = [
    "CovectorParam",
    "CircleData",
    "GeodesicPath",
    "Shot",
    "exp_map",
    "exp_coords",
    "cut_time",
    "hamiltonian_flow",
    "hamiltonian_trajectory",
    "path_length",
    "projection_circle",
    "geodesic_path",
    "shoot",
    "shoot_all",
    "sr_distance",
    "projection_distance",
]

TWO_PI = 2.0 * math.pi
_SERIES = 0.1  # switch to Taylor series below this |b w t|
_MULTISTART = 64
_MAXITER = 200


@dataclass(frozen=True)
class CovectorParam:
    r: tuple
    theta: tuple
    w: float
    extra_u: float | None = None

    def __post_init__(self):
        r = tuple(float(v) for v in np.atleast_1d(self.r))
        th = tuple(float(v) for v in np.atleast_1d(self.theta))
        if len(r) != len(th) or not r:
            raise DimensionMismatch("r and theta must have the same length >= 1")
        if any(v < 0 for v in r):
            raise ValidationError("polar radii must be nonnegative")
        object.__setattr__(self, "r", r)
        object.__setattr__(self, "theta", th)
        object.__setattr__(self, "w", float(self.w))
        if self.extra_u is not None:
            object.__setattr__(self, "extra_u", float(self.extra_u))

    @property
    def ell(self) -> int:
        return len(self.r)

    @property
    def kind(self) -> str:
        return "contact" if self.extra_u is None else "quasi-contact"

    @property
    def speed(self) -> float:
        e = 0.0 if self.extra_u is None else self.extra_u
        return math.sqrt(sum(v * v for v in self.r) + e * e)

    def is_arclength(self, tol=1e-12) -> bool:
        return abs(self.speed - 1.0) <= tol

    def covector(self):
        """Horizontal covector components ``(u, v)`` at time 0."""
        r, th = np.array(self.r), np.array(self.theta)
        return -r * np.sin(th), r * np.cos(th)


@dataclass(frozen=True)
class CircleData:
    period: float
    radius: float
    center: tuple


@dataclass(frozen=True)
class GeodesicPath:
    param: CovectorParam
    b: FrequencySpectrum
    t_samples: list = field(default_factory=list)


@dataclass(frozen=True)
class Shot:
    """One solution of the shooting problem."""

    param: CovectorParam
    length: float
    residual: float
    degenerate: bool = False


def _check_param(p: CovectorParam, b: FrequencySpectrum):
    if p.ell != b.ell:
        raise DimensionMismatch(f"param has l={p.ell}, spectrum has l={b.ell}")
    if p.kind != b.kind:
        raise DimensionMismatch(f"param is {p.kind} but spectrum is {b.kind}")


# -- analytic building blocks -------------------------------------------------

_F1 = [(-1.0) ** k / math.factorial(2 * k + 1) for k in range(8)]  # sin x / x
_F2 = [(-1.0) ** k / math.factorial(2 * k + 2) for k in range(8)]  # (1 - cos x)/x
_F3 = [(-1.0) ** k / math.factorial(2 * k + 3) for k in range(8)]  # (x - sin x)/x^2


def _series(x, coeffs, odd):
    x2 = x * x
    acc = np.zeros_like(x) + coeffs[-1]
    for c in reversed(coeffs[:-1]):
        acc = acc * x2 + c
    return acc * x if odd else acc


def _trig_factors(phi):
    """``sin(phi)/phi``, ``(1-cos phi)/phi``, ``(phi - sin phi)/phi^2``."""
    phi = np.asarray(phi, dtype=float)
    small = np.abs(phi) < _SERIES
    safe = np.where(small, 1.0, phi)
    f1 = np.where(small, _series(phi, _F1, False), np.sin(safe) / safe)
    f2 = np.where(small, _series(phi, _F2, True), (1.0 - np.cos(safe)) / safe)
    f3 = np.where(small, _series(phi, _F3, True), (safe - np.sin(safe)) / safe ** 2)
    return f1, f2, f3


_MU = [1.0 / 12, 1.0 / 360, 1.0 / 10080, 1.0 / 302400, 1.0 / 9580032]


def _mu(phi):
    """z-response of one mode: (phi - sin phi) / (8 sin^2(phi/2))."""
    phi = np.asarray(phi, dtype=float)
    small = np.abs(phi) < _SERIES
    safe = np.where(small, 1.0, phi)
    s = np.sin(0.5 * safe)
    return np.where(small, _series(phi, _MU, True), (safe - np.sin(safe)) / (8.0 * s * s))


def exp_coords(r, theta, w, b, t=1.0, extra_u=None) -> np.ndarray:
    """Vectorised exponential map.

    ``r`` and ``theta`` have shape ``(..., l)``, ``w`` shape ``(...)``.
    Returns flat coordinates ``(..., 2l [+1] + 1)``.
    """
    bv = np.asarray(b.freqs if isinstance(b, FrequencySpectrum) else b, dtype=float)
    r = np.asarray(r, dtype=float)
    theta = np.asarray(theta, dtype=float)
    w = np.asarray(w, dtype=float)
    t = np.asarray(t, dtype=float)
    phi = bv * (w * t)[..., None]
    f1, f2, f3 = _trig_factors(phi)
    c, s = np.cos(theta), np.sin(theta)
    rt = r * t[..., None] if t.ndim else r * t
    x = rt * (-c * f2 - s * f1)
    y = rt * (-s * f2 + c * f1)
    tt = (t * t)[..., None] if t.ndim else t * t
    z = 0.5 * np.sum(r * r * bv * tt * f3, axis=-1)
    parts = [x, y]
    if extra_u is not None:
        parts.append((np.asarray(extra_u, dtype=float) * t)[..., None])
    parts.append(z[..., None])
    return np.concatenate(parts, axis=-1)


def exp_map(p: CovectorParam, b, t: float) -> GroupPoint:
    """Endpoint at time ``t`` of the geodesic with initial covector ``p``."""
    b = as_spectrum(b, p.kind)
    _check_param(p, b)
    if t < 0:
        raise ValidationError("time must be nonnegative")
    arr = exp_coords(p.r, p.theta, p.w, b, t, p.extra_u)
    return GroupPoint.from_array(arr, p.kind)


def cut_time(p: CovectorParam, b) -> float:
    b = as_spectrum(b, p.kind)
    if p.w == 0:
        return math.inf
    return TWO_PI / (abs(p.w) * b.b1)


def path_length(p: CovectorParam, t: float) -> float:
    if t < 0:
        raise ValidationError("time must be nonnegative")
    return t * p.speed


def projection_circle(p: CovectorParam, b, i: int) -> CircleData:
    """Circle traced by the projection onto the i-th plane (1-based)."""
    b = as_spectrum(b, p.kind)
    _check_param(p, b)
    if not 1 <= i <= p.ell:
        raise ValidationError("mode index out of range")
    if p.w == 0:
        raise WZero("projection is a straight line when w = 0")
    a = b.freqs[i - 1] * p.w
    r, th = p.r[i - 1], p.theta[i - 1]
    return CircleData(TWO_PI / abs(a), r / abs(a), (-r / a * math.cos(th), -r / a * math.sin(th)))


def projection_distance(p: CovectorParam, b, t: float) -> np.ndarray:
    """|(x_i, y_i)| at time t, i.e. ``r_i t |sinc(b_i w t / 2)|``."""
    b = as_spectrum(b, p.kind)
    f1, _, _ = _trig_factors(0.5 * b.array * p.w * t)
    return np.array(p.r) * t * np.abs(f1)


def geodesic_path(p: CovectorParam, b, t_max: float, n: int = 101) -> GeodesicPath:
    b = as_spectrum(b, p.kind)
    _check_param(p, b)
    ts = np.linspace(0.0, t_max, n)
    pts = exp_coords(np.broadcast_to(p.r, (n, p.ell)), np.broadcast_to(p.theta, (n, p.ell)),
                     np.full(n, p.w), b, ts,
                     None if p.extra_u is None else np.full(n, p.extra_u))
    samples = [(float(t), GroupPoint.from_array(row, p.kind)) for t, row in zip(ts, pts)]
    return GeodesicPath(p, b, samples)


# -- Hamiltonian oracle -------------------------------------------------------


def _rhs(b, w, ell, quasi, extra_u):
    bw = b * w

    def f(_, s):
        u, v = s[:ell], s[ell:2 * ell]
        x, y = s[2 * ell:3 * ell], s[3 * ell:4 * ell]
        out = np.empty_like(s)
        out[:ell] = -bw * v
        out[ell:2 * ell] = bw * u
        out[2 * ell:3 * ell] = u
        out[3 * ell:4 * ell] = v
        if quasi:
            out[4 * ell] = extra_u
        out[-1] = 0.5 * np.sum(b * (x * v - y * u))
        return out

    return f


def hamiltonian_trajectory(p: CovectorParam, b, t: float, tol: float = 1e-12, n_eval: int = 0):
    """Integrate the Hamiltonian system; returns ``(times, states, H)``.

    State layout: ``u, v, x, y, [extra], z``.  ``H = 1/2 (|u|^2 + |v|^2
    + u_e^2)`` is evaluated at every returned time.
    """
    b = as_spectrum(b, p.kind)
    _check_param(p, b)
    if not tol > 0:
        raise ValidationError("tolerance must be positive")
    ell = p.ell
    quasi = p.extra_u is not None
    u0, v0 = p.covector()
    s0 = np.concatenate([u0, v0, np.zeros(2 * ell + quasi + 1)])
    t_eval = np.linspace(0.0, t, n_eval) if n_eval else None
    sol = solve_ivp(_rhs(b.array, p.w, ell, quasi, p.extra_u), (0.0, t), s0, method="DOP853",
                    rtol=tol, atol=tol * 1e-2, t_eval=t_eval)
    if not sol.success:
        raise IntegratorFailure(sol.message)
    e2 = 0.0 if p.extra_u is None else p.extra_u ** 2
    H = 0.5 * (np.sum(sol.y[: 2 * ell] ** 2, axis=0) + e2)
    return sol.t, sol.y.T, H


def hamiltonian_flow(p: CovectorParam, b, t: float, tol: float = 1e-12) -> GroupPoint:
    """Endpoint of the numerically integrated normal extremal."""
    if t == 0:
        return exp_map(p, b, 0.0)
    _, states, _ = hamiltonian_trajectory(p, b, t, tol)
    return GroupPoint.from_array(states[-1, 2 * p.ell:], p.kind)


# -- inverse problem ------------------------------------------------------------


def _target_data(target: GroupPoint):
    x, y = np.array(target.x), np.array(target.y)
    return x, y, np.hypot(x, y), target.z, target.extra


def _build_param(x, y, eta, w, T, bv, extra, degenerate_r=None):
    """Covector reaching (x, y) at time T for vertical covector w."""
    phi = bv * w * T
    f1, f2, _ = _trig_factors(phi)
    f1h, _, _ = _trig_factors(0.5 * phi)
    r = np.where(eta > 0, eta / (T * np.abs(np.where(f1h == 0, 1.0, f1h))), 0.0)
    if degenerate_r is not None:
        r = np.where(degenerate_r > 0, degenerate_r, r)
    base = np.angle(-f2 + 1j * f1)
    theta = np.where(eta > 0, np.angle(x + 1j * y) - base, 0.0)
    theta = np.mod(theta + math.pi, TWO_PI) - math.pi
    extra_u = None if extra is None else extra / T
    return CovectorParam(tuple(r), tuple(theta), float(w), extra_u)


def shoot_all(target: GroupPoint, b, t_fix: float, xtol: float = 1e-15) -> list:
    """Every geodesic with ``|w| < 2 pi/(b_1 t_fix)`` reaching ``target`` at ``t_fix``.

    The horizontal projections fix ``r_i`` as functions of ``w`` through
    ``|(x_i, y_i)| = r_i t sinc(b_i w t/2)``; the remaining scalar equation
    for ``z`` is bracketed on a multistart grid in ``w`` and refined with
    Brent's method.  Results are sorted by length.
    """
    b = as_spectrum(b, target.kind)
    if target.ell != b.ell:
        raise DimensionMismatch("target and spectrum disagree on l")
    if not t_fix > 0:
        raise ValidationError("t_fix must be positive")
    bv = b.array
    T = float(t_fix)
    x, y, eta, z, extra = _target_data(target)
    W = TWO_PI / (b.b1 * T)
    scale = max(1.0, float(np.max(np.abs(target.as_array()))))

    if not np.any(eta > 0) and z == 0:
        p = CovectorParam((0.0,) * b.ell, (0.0,) * b.ell, 0.0,
                          None if extra is None else extra / T)
        return [Shot(p, path_length(p, T), 0.0, degenerate=True)]

    eta2b = eta ** 2 * bv

    def F(w):
        return float(np.sum(eta2b * _mu(bv * w * T))) - z

    top = bv == b.b1
    shots = []
    if not np.any(eta[top] > 0):
        # top modes invisible horizontally: z beyond the reach of the rest
        # is absorbed at the cut boundary by a circle family
        edge = math.copysign(W, z) if z != 0 else W
        rest = float(np.sum(np.where(top, 0.0, eta2b) * _mu(bv * edge * T)))
        left = z - rest
        if left == 0 or np.sign(left) == np.sign(edge):
            r_top = math.sqrt(abs(left) * b.b1 * edge ** 2 / math.pi)
            dr = np.where(top & (np.arange(b.ell) == np.argmax(top)), r_top, 0.0)
            p = _build_param(x, y, eta, edge, T, bv, extra, degenerate_r=dr)
            shots.append(Shot(p, path_length(p, T), _residual(p, b, T, target, scale), True))
            return shots

    grid = np.concatenate([
        W * np.linspace(-1.0, 1.0, _MULTISTART)[1:-1],
        W * (1.0 - np.logspace(-2, -14, 13)),
        -W * (1.0 - np.logspace(-2, -14, 13)),
    ])
    grid = np.unique(grid)
    vals = np.array([F(w) for w in grid])
    roots = []
    for k in np.nonzero(vals == 0)[0]:
        roots.append(grid[k])
    for k in np.nonzero(np.sign(vals[:-1]) * np.sign(vals[1:]) < 0)[0]:
        try:
            roots.append(brentq(F, grid[k], grid[k + 1], xtol=xtol * W, rtol=1e-15,
                                maxiter=_MAXITER))
        except RuntimeError:  # pragma: no cover - brentq budget
            continue
    for w in roots:
        p = _build_param(x, y, eta, w, T, bv, extra)
        shots.append(Shot(p, path_length(p, T), _residual(p, b, T, target, scale)))
    shots.sort(key=lambda s: s.length)
    return shots


def _residual(p, b, T, target, scale):
    return float(np.max(np.abs(exp_map(p, b, T).as_array() - target.as_array()))) / scale


def shoot(target: GroupPoint, b, t_fix: float, tol: float = 1e-8) -> CovectorParam:
    """Covector with ``exp_map(p, b, t_fix) = target`` and speed <= 1."""
    shots = [s for s in shoot_all(target, b, t_fix) if s.residual <= tol]
    if not shots:
        raise NoConvergence("no geodesic reaches the target within the budget")
    best = shots[0]
    if best.length > t_fix * (1.0 + 1e-9):
        raise NoConvergence(
            f"target lies outside the ball of radius {t_fix} (distance {best.length:.6g})")
    return best.param


def sr_distance(points, b, kind: str | None = None, iters: int = 60) -> np.ndarray:
    """Vectorised distance from the origin (geodesic chart coordinates).

    ``points`` has shape ``(N, dim)`` with layout ``[x..., y..., extra?, z]``.
    Solves the monotone equation ``sum eta_i^2 b_i mu(b_i w) = |z|`` for
    ``w`` by bisection, then returns the length of the resulting geodesic.
    """
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    dim = pts.shape[1]
    if kind is None:
        kind = "contact" if dim % 2 == 1 else "quasi-contact"
    b = as_spectrum(b, kind)
    ell = b.ell
    bv = b.array
    quasi = kind == "quasi-contact"
    if dim != 2 * ell + 1 + quasi:
        raise DimensionMismatch(f"points have {dim} coordinates, expected {2 * ell + 1 + quasi}")
    x, y = pts[:, :ell], pts[:, ell:2 * ell]
    eta2 = x * x + y * y
    az = np.abs(pts[:, -1])
    extra2 = pts[:, 2 * ell] ** 2 if quasi else 0.0
    ratio = bv / b.b1
    top = ratio == 1.0
    eta2b = eta2 * bv

    lo = np.zeros(len(pts))
    hi = np.full(len(pts), TWO_PI)
    for _ in range(iters):
        mid = 0.5 * (lo + hi)
        val = np.sum(eta2b * _mu(ratio * mid[:, None]), axis=1) - az
        go_up = val < 0
        lo = np.where(go_up, mid, lo)
        hi = np.where(go_up, hi, mid)
    phi = 0.5 * (lo + hi)
    f1h, _, _ = _trig_factors(0.5 * ratio * phi[:, None])
    r2 = np.sum(np.where(eta2 > 0, eta2 / f1h ** 2, 0.0), axis=1)

    # top modes with no horizontal footprint: solution sits on the cut locus
    # (only when |z| exceeds what the lower modes reach at the cut time)
    rest = np.sum(np.where(top, 0.0, eta2b) * _mu(ratio * TWO_PI), axis=1)
    boundary = np.all(eta2[:, top] == 0, axis=1) & (az > rest)
    if np.any(boundary):
        left = az[boundary] - rest[boundary]
        f1e, _, _ = _trig_factors(0.5 * ratio * TWO_PI)
        r_rest = np.sum(np.where(top, 0.0, eta2[boundary] / np.where(top, 1.0, f1e) ** 2), axis=1)
        r2 = r2.copy()
        r2[boundary] = r_rest + 4.0 * math.pi * left / b.b1
    return np.sqrt(r2 + extra2)
