"""Unit-ball volumes of contact and quasi-contact nilpotent groups.

With ``x_i = b_i s`` the one-dimensional integrand factors into entire
functions of ``x``::

    G(b, s) = sum_i b_i^2 sinc(x_i) kappa(x_i) prod_{j != i} sinc(x_j)^2
    kappa(x) = (x cos x - sin x) / x^3

which equals the raw expression with the ``1/(s^{2l+2} B^2)`` prefactor
but has no removable singularities (``s -> 0`` and ``b_i -> 0`` are both
regular).  The same code path evaluates floats, arrays and Taylor jets.

The ball volume is ``V = C_l |∫_0^{π/b_1} G ds|`` with
``C_l = 2 ω_n / (n + 2)``, ``n`` the horizontal dimension and ``ω_n``
the volume of the Euclidean unit n-ball.  This constant comes from
integrating ``R r_i^2`` over the covector ball and ``dθ`` over the torus.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy import integrate
from scipy.special import gamma

from . import jets
from .algebra import FrequencySpectrum, as_spectrum
from .exceptions import IndexOutOfRange, QuadratureBudgetExceeded, ValidationError

__all__ = [
    "VolumeResult",
    "IntegrandContext",
    "integrand_G",
    "mode_Gi",
    "mode_terms",
    "jacobian_det",
    "horizontal_constant",
    "unit_ball_volume",
    "volume_45",
    "w45_integral",
    "heisenberg_volume_exact",
]

QUAD_DEFAULTS = {"epsabs": 1e-12, "epsrel": 1e-12, "limit": 200}


@dataclass(frozen=True)
class VolumeResult:
    value: float
    quadrature_error: float
    calibration: float
    integral: float = 0.0

    def __post_init__(self):
        if not self.value > 0:
            raise ValidationError("ball volume must be positive")


@dataclass(frozen=True)
class IntegrandContext:
    b: FrequencySpectrum
    a: float
    ell: int

    @classmethod
    def of(cls, b) -> "IntegrandContext":
        b = as_spectrum(b)
        return cls(b, math.pi / b.b1, b.ell)


def _freqs(b):
    if isinstance(b, FrequencySpectrum):
        return list(b.freqs)
    if isinstance(b, (list, tuple)):
        return list(b)
    return list(np.atleast_1d(np.asarray(b, dtype=float)))


def mode_terms(b, s) -> list:
    """All summands ``G_i`` (list); entries of ``b`` and ``s`` may be jets."""
    bs = _freqs(b)
    xs = [bi * s for bi in bs]
    sincs = [jets.sinc(x) for x in xs]
    terms = []
    for i, (bi, x) in enumerate(zip(bs, xs)):
        term = bi * bi * sincs[i] * jets.kappa(x)
        for j, sj in enumerate(sincs):
            if j != i:
                term = term * sj * sj
        terms.append(term)
    return terms


def integrand_G(b, s):
    """Integrand of the ball volume; vanishes at ``s = π/b_1``."""
    terms = mode_terms(b, s)
    out = terms[0]
    for t in terms[1:]:
        out = out + t
    return out


def mode_Gi(b, s, i: int):
    """The i-th summand of :func:`integrand_G` (1-based index)."""
    bs = _freqs(b)
    if not 1 <= i <= len(bs):
        raise IndexOutOfRange(f"mode index {i} outside 1..{len(bs)}")
    return mode_terms(bs, s)[i - 1]


def jacobian_det(r, theta, w, b, paper_sign: bool = False) -> float:
    """Determinant of ``d(x_1, y_1, ..., x_l, y_l, z) / d(r_1, θ_1, ..., r_l, θ_l, w)``.

    Evaluated at ``t = 1``; both sides are ordered plane by plane.

    Equals ``-(R/4) sum_i r_i^2 G_i(b, w/2)`` with ``R = prod r_i``, which
    is ``>= 0`` on the optimal domain.  The published closed form carries
    the opposite overall sign; pass ``paper_sign=True`` to get it.  The
    extra quasi-contact coordinate contributes a unit factor.
    """
    r = np.atleast_1d(np.asarray(r, dtype=float))
    terms = mode_terms(b, 0.5 * float(w))
    val = -0.25 * float(np.prod(r)) * float(sum(ri * ri * g for ri, g in zip(r, terms)))
    return -val if paper_sign else val


def horizontal_constant(ell: int, kind: str = "contact") -> float:
    """``C_l = 2 ω_n / (n + 2)`` with ``n = 2l`` (contact) or ``2l + 1``."""
    if ell < 1:
        raise ValidationError("need l >= 1")
    if kind not in ("contact", "quasi-contact"):
        raise ValidationError("kind must be 'contact' or 'quasi-contact'")
    n = 2 * ell + (kind == "quasi-contact")
    omega = math.pi ** (n / 2) / gamma(n / 2 + 1)
    return 2.0 * omega / (n + 2)


def heisenberg_volume_exact() -> float:
    """Closed form (1 + 2π Si(2π)) / 12 for the Heisenberg unit ball."""
    from scipy.special import sici

    return (1.0 + 2.0 * math.pi * sici(2.0 * math.pi)[0]) / 12.0


def unit_ball_volume(b, kind: str | None = None, quad_opts: dict | None = None) -> VolumeResult:
    """Lebesgue volume of the unit ball via adaptive Gauss-Kronrod quadrature."""
    spec = as_spectrum(b, kind)
    return _unit_ball_volume(spec.freqs, spec.kind, tuple(sorted((quad_opts or {}).items())))


@lru_cache(maxsize=4096)
def _unit_ball_volume(freqs, kind, opts) -> VolumeResult:
    opts = dict(QUAD_DEFAULTS, **dict(opts))
    a = math.pi / freqs[0]
    bv = np.array(freqs)

    def f(s):
        return float(integrand_G(bv, s))

    with warnings.catch_warnings():
        warnings.simplefilter("ignore", integrate.IntegrationWarning)
        val, err, info, *rest = integrate.quad(f, 0.0, a, full_output=1, **opts)
    msg = rest[0] if rest else ""
    if rest and err > max(opts["epsabs"], opts["epsrel"] * abs(val)) * 100:
        raise QuadratureBudgetExceeded(f"quadrature did not converge: {msg}")
    C = horizontal_constant(len(freqs), kind)
    return VolumeResult(C * abs(val), C * err, C, val)


def w45_integral(alpha: float, quad_opts: dict | None = None) -> float:
    """Signed s-integral of the (4,5) integrand at frequencies (1, |α|)."""
    al = abs(float(alpha))
    if al > 1:
        raise ValidationError("alpha must lie in [-1, 1]")
    return _unit_ball_volume((1.0, al), "contact",
                             tuple(sorted((quad_opts or {}).items()))).integral


def volume_45(alpha: float, quad_opts: dict | None = None) -> float:
    """Unit-ball volume of the bi-Heisenberg group with ``α = b_2/b_1``.

    Even in α by construction (only ``|α|`` enters); at α = 0 the
    ``sin²(αs)/α²`` factors are evaluated through their entire extension.
    """
    return horizontal_constant(2) * abs(w45_integral(alpha, quad_opts))
