"""One-sided derivatives of the ball volume along curves of frequencies.

Write ``a(t) = π / max_i b_i(t)`` and ``V(t) = C ∫_0^{a(t)} G(b(t), s) ds``.
Near a point ``t0`` where the two largest frequencies cross, ``a`` is only
Lipschitz, and every loss of smoothness sits in the tail

    W(t) = ∫_{a(t0)}^{a(t)} G(b(t), s) ds.

On each side of ``t0`` the maximum is attained by a single analytic branch
``b_d``, so ``W`` restricted to that side is the analytic function
``F(t, π/b_d(t))`` with ``F(t, σ) = ∫_{a(t0)}^{σ} G(b(t), s) ds``.  Its Taylor
coefficients come out of one bivariate jet of ``G`` at ``(t0, a(t0))``:
integrate in ``s`` and substitute the branch.  Nothing is differenced.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from typing import Sequence

import numpy as np
from scipy import integrate
from scipy.interpolate import CubicSpline
from scipy.optimize import brentq, minimize_scalar

from .exceptions import NonTransversal, ValidationError
from .expr import Expression, parse_assignments
from .jets import Jet
from .volume import horizontal_constant, integrand_G, mode_terms

__all__ = [
    "FrequencyCurve",
    "Resonance",
    "RegularityReport",
    "resonance_scan",
    "W_tail",
    "W_branch",
    "one_sided_derivative",
    "volume_derivative",
    "boundary_slopes",
    "boundary_partials",
    "c3_certificate",
    "tail_exponent",
    "paper_prediction",
    "MAX_ORDER",
]

MAX_ORDER = 5
_LEFT, _RIGHT = -1, +1


def _side(side) -> int:
    if side in ("left", "-", -1):
        return _LEFT
    if side in ("right", "+", 1, +1):
        return _RIGHT
    raise ValidationError(f"side must be 'left' or 'right', got {side!r}")


@dataclass(frozen=True)
class FrequencyCurve:
    """Frequencies ``b_1(t), ..., b_l(t)`` on ``[lower, upper]``.

    Each entry of ``funcs`` must accept floats and :class:`~srvolume.jets.Jet`
    arguments alike (closed-form expressions do).  Curves built from
    samples carry ``exact=False`` and only support derivatives up to order 2.
    """

    funcs: tuple
    lower: float = -1.0
    upper: float = 1.0
    names: tuple = ()
    exact: bool = True
    kind: str = "contact"

    def __post_init__(self):
        if not self.funcs:
            raise ValidationError("a frequency curve needs at least one frequency")
        if not self.lower < self.upper:
            raise ValidationError("curve interval must have lower < upper")
        ts = np.linspace(self.lower, self.upper, 257)
        vals = np.array([self(t) for t in ts])
        bad = ~np.isfinite(vals) | (vals <= 0)
        if np.any(bad):
            k, i = np.argwhere(bad)[0]
            name = self.names[i] if self.names else f"b{i + 1}"
            raise ValidationError(f"frequency {name} is not positive at t={ts[k]:.6g} "
                                  f"(interval [{self.lower}, {self.upper}])")

    @property
    def ell(self) -> int:
        return len(self.funcs)

    def __call__(self, t: float) -> np.ndarray:
        return np.array([float(_as_value(f(float(t)))) for f in self.funcs])

    def jets(self, t0: float, order: int = MAX_ORDER) -> list:
        """Univariate Taylor jets of every ``b_i`` at ``t0`` (variable ``t - t0``)."""
        if not self.exact and order > 2:
            raise ValidationError(
                "sampled curves only provide derivatives up to order 2; "
                "supply closed-form frequencies for higher orders")
        var = Jet.variable(float(t0), 0, 1, order)
        out = []
        for f in self.funcs:
            v = f(var)
            out.append(v if isinstance(v, Jet) else Jet.constant(float(v), 1, order))
        return out

    def derivatives(self, t0: float, order: int = MAX_ORDER) -> np.ndarray:
        """Array ``[i, k] = b_i^{(k)}(t0)``."""
        return np.array([[j.derivative(k) for k in range(order + 1)] for j in self.jets(t0, order)])

    @classmethod
    def from_expressions(cls, text, lower: float = -1.0, upper: float = 1.0,
                         kind: str = "contact") -> "FrequencyCurve":
        """``"b1=1+t; b2=1+2*t"`` or a mapping ``{name: expression}`` in ``t``."""
        if isinstance(text, str):
            exprs = parse_assignments(text, allowed={"t"}, source="curve")
        else:
            from .expr import parse_expression

            exprs = {k: v if isinstance(v, Expression) else
                     parse_expression(str(v), allowed={"t"}, source=f"curve.{k}")
                     for k, v in dict(text).items()}
        names = tuple(exprs)
        funcs = tuple((lambda e: (lambda t: e.evaluate(t=t)))(e) for e in exprs.values())
        return cls(funcs, float(lower), float(upper), names, True, kind)

    @classmethod
    def from_samples(cls, t, values, kind: str = "contact") -> "FrequencyCurve":
        """Cubic-spline curve through samples ``values[k, i] = b_i(t_k)``."""
        t = np.asarray(t, dtype=float)
        values = np.atleast_2d(np.asarray(values, dtype=float))
        if values.shape[0] != t.size:
            values = values.T
        splines = [CubicSpline(t, values[:, i]) for i in range(values.shape[1])]

        def make(sp):
            def f(x):
                if isinstance(x, Jet):
                    t0 = float(x.value)
                    known = [float(sp(t0, k)) for k in range(min(x.order, 3) + 1)]
                    return Jet.from_derivatives(known + [0.0] * (x.order + 1 - len(known)), x.order)
                return float(sp(x))
            return f

        return cls(tuple(make(s) for s in splines), float(t[0]), float(t[-1]),
                   tuple(f"b{i + 1}" for i in range(len(splines))), False, kind)


def _as_value(v):
    return v.value if isinstance(v, Jet) else v


# -- resonances ---------------------------------------------------------------


@dataclass(frozen=True)
class Resonance:
    t0: float
    pair: tuple
    multiplicity: int
    tangential: bool = False

    @property
    def transversal(self) -> bool:
        return self.multiplicity == 1


def _touch_point(curve, i, j, a, b, diff, xtol):
    """Even-order contact: zero of (b_i - b_j)' if bracketed, else argmin |b_i - b_j|."""
    if curve.exact:
        def slope(t):
            d = curve.jets(t, 1)
            return float(d[i].coef[1] - d[j].coef[1])

        if slope(a) * slope(b) < 0:
            return float(brentq(slope, a, b, xtol=xtol))
    res = minimize_scalar(lambda t: abs(diff(t)), bounds=(a, b), method="bounded",
                          options={"xatol": xtol})
    return float(res.x)


def _crossing_multiplicity(curve, t0, i, j, tol=1e-6):
    if not curve.exact:
        return 1
    d = curve.jets(t0, MAX_ORDER)
    diff = d[i] - d[j]
    scale = max(1.0, abs(float(d[i].value)))
    for k in range(1, MAX_ORDER + 1):
        if abs(diff.coef[k]) > tol * scale:
            return k
    return MAX_ORDER + 1


def resonance_scan(curve: FrequencyCurve, interval=None, n: int = 2001,
                   xtol: float = 1e-12) -> list:
    """Points where the two largest frequencies coincide.

    Sign changes of ``b_i - b_j`` on a uniform grid are refined by Brent's
    method; even-order contacts (no sign change) are located by minimising
    ``|b_i - b_j|`` around grid minima and flagged ``tangential``.  Only
    crossings among the current top two frequencies are kept.
    """
    lo, hi = (curve.lower, curve.upper) if interval is None else map(float, interval)
    ts = np.linspace(lo, hi, n)
    vals = np.array([curve(t) for t in ts])
    scale = float(np.max(vals))
    found: list[Resonance] = []

    def is_top(t0, i, j):
        b = curve(t0)
        others = np.delete(b, [i, j])
        return not others.size or max(b[i], b[j]) >= others.max() - 1e-9 * scale

    for i in range(curve.ell):
        for j in range(i + 1, curve.ell):
            d = vals[:, i] - vals[:, j]
            roots = []

            def diff(t):
                b = curve(t)
                return b[i] - b[j]

            for k in np.nonzero(d == 0)[0]:
                roots.append((ts[k], False))
            for k in np.nonzero(d[:-1] * d[1:] < 0)[0]:
                roots.append((brentq(diff, ts[k], ts[k + 1], xtol=xtol, rtol=4 * np.finfo(float).eps),
                              False))
            ad = np.abs(d)
            for k in range(1, n - 1):
                if ad[k] <= ad[k - 1] and ad[k] <= ad[k + 1] and ad[k] > 0 \
                        and d[k - 1] * d[k + 1] > 0 and np.sign(d[k - 1]) == np.sign(d[k]):
                    t_star = _touch_point(curve, i, j, ts[k - 1], ts[k + 1], diff, xtol)
                    if abs(diff(t_star)) < 1e-10 * scale:
                        roots.append((t_star, True))
            for t0, tangential in roots:
                if not is_top(t0, i, j):
                    continue
                mult = _crossing_multiplicity(curve, t0, i, j)
                if any(abs(t0 - r.t0) < 1e-6 and r.pair == (i + 1, j + 1) for r in found):
                    continue
                found.append(Resonance(float(t0), (i + 1, j + 1), mult,
                                       tangential or mult % 2 == 0))
    found.sort(key=lambda r: r.t0)
    return found


# -- tail integral ----------------------------------------------------------


def _a(curve, t):
    return math.pi / float(np.max(curve(t)))


def _G_of(b, s, mode):
    if mode is None:
        return integrand_G(b, s)
    return mode_terms(b, s)[mode - 1]


def W_tail(curve: FrequencyCurve, t: float, t0: float, mode: int | None = None) -> float:
    """``∫_{a(t0)}^{a(t)} G(b(t), s) ds`` by adaptive quadrature."""
    b = curve(t)
    a0, a1 = _a(curve, t0), _a(curve, t)
    if a0 == a1:
        return 0.0
    val, _ = integrate.quad(lambda s: float(_G_of(b, s, mode)), a0, a1,
                            epsabs=1e-300, epsrel=1e-13, limit=200)
    return float(val)


def W_branch(curve: FrequencyCurve, t: float, t0: float, side, mode: int | None = None) -> float:
    """Analytic continuation of the one-sided tail through ``t0``.

    Uses the frequency that dominates on ``side`` for the upper limit at
    every ``t``, so the result is smooth and may be differenced freely.
    """
    d = _dominant(curve, t0, _side(side))
    b = curve(t)
    a0, a1 = _a(curve, t0), math.pi / b[d]
    if a0 == a1:
        return 0.0
    val, _ = integrate.quad(lambda s: float(_G_of(b, s, mode)), a0, a1,
                            epsabs=1e-300, epsrel=1e-13, limit=200)
    return float(val)


def _top_set(bvals, tol=1e-9):
    top = bvals.max()
    return [i for i, v in enumerate(bvals) if v >= top - tol * max(1.0, top)]


def _dominant(curve, t0, side, order=MAX_ORDER):
    """Index of the branch realising ``max b_i`` just to one side of ``t0``."""
    order = order if curve.exact else 2
    jets_ = curve.jets(t0, order)
    top = _top_set(np.array([j.value for j in jets_]))

    def key(i):
        return tuple(side ** k * float(jets_[i].coef[k]) for k in range(1, order + 1))

    return max(top, key=key)


def _tail_jet(curve, t0, side, order, mode):
    b_jets = curve.jets(t0, order)
    bvals = np.array([float(j.value) for j in b_jets])
    a0 = math.pi / bvals.max()
    d = _dominant(curve, t0, side, order)
    tau = [j.embed(2, 0) for j in b_jets]
    sig = Jet.variable(a0, 1, 2, order)
    F = _G_of(tau, sig, mode).integrate(1)
    branch = math.pi / b_jets[d]
    coef = branch.coef.copy()
    coef[0] = 0.0
    return F.substitute(1, Jet(coef, 1, order))


def _transversality(curve, t0, tol):
    b = curve.jets(t0, 1)
    vals = np.array([j.value for j in b])
    top = _top_set(vals)
    if len(top) < 2:
        return math.inf
    slopes = sorted(float(b[i].coef[1]) for i in top)
    return min(np.diff(slopes))


def one_sided_derivative(curve: FrequencyCurve, t0: float, side, order: int,
                         mode: int | None = None, tol: float = 1e-9) -> float:
    """``lim_{t -> t0±} W^{(k)}(t)`` for the tail ``W`` anchored at ``t0``.

    ``mode`` restricts the integrand to one summand ``G_i`` (1-based).
    """
    if not 0 <= order <= MAX_ORDER:
        raise ValidationError(f"order must lie in 0..{MAX_ORDER}")
    if order >= 3 and not curve.exact:
        raise ValidationError("sampled curves cannot be differentiated beyond order 2")
    if order >= 4 and _transversality(curve, t0, tol) < tol:
        raise NonTransversal("top frequencies cross with equal slopes at t0")
    if mode is not None and not 1 <= mode <= curve.ell:
        from .exceptions import IndexOutOfRange

        raise IndexOutOfRange(f"mode index {mode} outside 1..{curve.ell}")
    W = _tail_jet(curve, float(t0), _side(side), max(order, 1), mode)
    return float(math.factorial(order) * W.coef[order])


_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(160)


def volume_derivative(curve: FrequencyCurve, t0: float, side, order: int,
                      mode: int | None = None) -> float:
    """One-sided ``k``-th derivative of the calibrated ball volume ``V(t)``.

    The fixed-interval part ``∫_0^{a(t0)} ∂_t^k G`` is integrated with
    160-point Gauss-Legendre on jets batched over the nodes.
    """
    b_jets = curve.jets(t0, max(order, 1))
    a0 = math.pi / max(float(j.value) for j in b_jets)
    s = 0.5 * a0 * (_GL_NODES + 1.0)
    G = _G_of(b_jets, s, mode)
    smooth = 0.5 * a0 * float(np.sum(_GL_WEIGHTS * G.coef[order])) * math.factorial(order)
    full = 0.5 * a0 * float(np.sum(_GL_WEIGHTS * integrand_G([float(j.value) for j in b_jets], s)))
    C = horizontal_constant(curve.ell, curve.kind)
    tail = one_sided_derivative(curve, t0, side, order, mode)
    return C * math.copysign(1.0, -full if full else -1.0) * -(smooth + tail)


def boundary_slopes(curve: FrequencyCurve, t0: float) -> tuple:
    """One-sided slopes ``(a'_-, a'_+)`` of ``a(t) = π / max b_i(t)``."""
    out = []
    for side in (_LEFT, _RIGHT):
        d = _dominant(curve, t0, side)
        j = curve.jets(t0, 1)[d]
        out.append(-math.pi * float(j.coef[1]) / float(j.value) ** 2)
    return tuple(out)


def boundary_partials(curve: FrequencyCurve, t0: float, order: int = 2) -> dict:
    """``{(i, j): ∂_t^i ∂_s^j G(t0, a(t0))}`` for ``i + j <= order``."""
    b_jets = curve.jets(t0, order)
    a0 = math.pi / max(float(j.value) for j in b_jets)
    G = integrand_G([j.embed(2, 0) for j in b_jets], Jet.variable(a0, 1, 2, order))
    return {(i, j): float(G.derivative(i, j))
            for i in range(order + 1) for j in range(order + 1 - i)}


# -- reports --------------------------------------------------------------------


@dataclass
class RegularityReport:
    t0: float
    order: int
    left_limit: float
    right_limit: float
    jump: float = field(init=False)
    paper_prediction: dict | None = None
    continuous: bool = field(init=False)
    tol: float = 1e-6

    def __post_init__(self):
        self.jump = self.right_limit - self.left_limit
        scale = max(abs(self.left_limit), abs(self.right_limit))
        self.continuous = abs(self.jump) <= self.tol * scale or abs(self.jump) < 1e-12

    def to_dict(self):
        return asdict(self)


def paper_prediction(curve: FrequencyCurve, t0: float, order: int) -> dict | None:
    """Closed-form one-sided limits of ``W^{(k)}`` quoted for two crossing modes.

    Available for ``k <= 3`` (zero), ``k = 4`` (two-mode contact curves) and
    ``k = 5`` (two-mode contact curves with affine frequencies).  Values are
    rescaled from the normalisation ``b_i = 1 + c_i t`` by homogeneity,
    ``W^{(k)} -> β^{1-k} W^{(k)}`` with ``β = b(t0)``.  On each side ``c_d``
    is the slope of the dominating branch and ``c_o`` the other one.
    """
    if order <= 3:
        return {"left": 0.0, "right": 0.0}
    if curve.ell != 2 or curve.kind != "contact" or not curve.exact:
        return None
    D = curve.derivatives(t0, MAX_ORDER)
    if abs(D[0, 0] - D[1, 0]) > 1e-9 * D[0, 0]:
        return None
    beta = float(D[0, 0])
    c = D[:, 1]
    if order == 4:
        v = -(12.0 / math.pi) * c[0] ** 2 * c[1] ** 2 / beta ** 3
        return {"left": v, "right": v}
    if order == 5 and np.all(np.abs(D[:, 2:]) < 1e-12):
        out = {}
        for name, side in (("left", _LEFT), ("right", _RIGHT)):
            d = _dominant(curve, t0, side)
            cd, co = c[d], c[1 - d]
            out[name] = -(2.0 / math.pi) * cd ** 3 * (13 * cd ** 2 - 29 * cd * co + 22 * co ** 2) \
                / beta ** 4
        return out
    return None


def c3_certificate(curve: FrequencyCurve, t0: float, orders: Sequence[int] = range(1, 6),
                   tol: float = 1e-6, mode: int | None = None) -> list:
    """Left/right limits of ``W^{(k)}`` at ``t0`` for each requested order."""
    reports = []
    for k in orders:
        left = one_sided_derivative(curve, t0, _LEFT, k, mode)
        right = one_sided_derivative(curve, t0, _RIGHT, k, mode)
        pred = paper_prediction(curve, t0, k) if mode is None else None
        reports.append(RegularityReport(float(t0), int(k), left, right, pred, tol))
    return reports


def tail_exponent(curve: FrequencyCurve, t0: float, side="right",
                  hs: Sequence[float] | None = None) -> float:
    """Least-squares slope of ``log|W(t0 ± h)|`` against ``log h``."""
    sgn = _side(side)
    hs = np.geomspace(1e-3, 3e-2, 12) if hs is None else np.asarray(hs, dtype=float)
    w = np.array([abs(W_tail(curve, t0 + sgn * h, t0)) for h in hs])
    if np.any(w == 0):
        raise ValidationError("tail vanishes identically on the sampled range")
    slope, _ = np.polyfit(np.log(hs), np.log(w), 1)
    return float(slope)
