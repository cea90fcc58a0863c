"""Truncated multivariate Taylor arithmetic (forward-mode AD of any order).

A :class:`Jet` stores the Taylor coefficients of a function of ``nvar``
variables around a base point, truncated at total degree ``order``.
Coefficients may carry trailing batch dimensions so a single jet can
represent many expansions at once (one per quadrature node, say).

Elementary functions are applied by composing their derivative series
with the nilpotent part of the argument, which keeps every operation
exact up to the truncation order.
"""

from __future__ import annotations

import itertools
import math
import numpy as np

__all__ = [
    "Jet",
    "sin",
    "cos",
    "exp",
    "log",
    "sqrt",
    "absolute",
    "sinc",
    "kappa",
    "where",
]

# the direct quotients lose ~x^-(3+k) digits in the k-th coefficient; below 2
# the 16-term series is exact to rounding (next term below 2^32/33!)
_SERIES_SWITCH = 2.0


def _multi_indices(nvar, order):
    return [m for m in itertools.product(range(order + 1), repeat=nvar) if sum(m) <= order]


class Jet:
    """Truncated Taylor polynomial in ``nvar`` variables.

    Parameters
    ----------
    coef : ndarray
        Array of shape ``(order+1,)*nvar + batch``; ``coef[i, j]`` is the
        coefficient of ``h1**i * h2**j``.  Entries above total degree
        ``order`` are ignored and zeroed.
    """

    __array_priority__ = 100

    def __init__(self, coef, nvar: int, order: int):
        coef = np.asarray(coef, dtype=float)
        if coef.shape[:nvar] != (order + 1,) * nvar:
            raise ValueError("coefficient array does not match nvar/order")
        self.nvar = nvar
        self.order = order
        self.coef = coef * _mask(nvar, order, coef.ndim - nvar)

    # -- constructors
    @classmethod
    def constant(cls, value, nvar=1, order=5):
        value = np.asarray(value, dtype=float)
        coef = np.zeros((order + 1,) * nvar + value.shape)
        coef[(0,) * nvar] = value
        return cls(coef, nvar, order)

    @classmethod
    def variable(cls, value, index=0, nvar=1, order=5):
        """The jet of ``x_index`` expanded at ``value``."""
        jet = cls.constant(value, nvar, order)
        if order >= 1:
            idx = [0] * nvar
            idx[index] = 1
            jet.coef[tuple(idx)] = 1.0
        return jet

    @classmethod
    def from_derivatives(cls, derivs, order=None):
        """Univariate jet from the derivative values f, f', f'', ..."""
        derivs = [np.asarray(d, dtype=float) for d in derivs]
        if order is None:
            order = len(derivs) - 1
        shape = np.broadcast_shapes(*(d.shape for d in derivs))
        coef = np.zeros((order + 1,) + shape)
        for m, d in enumerate(derivs[: order + 1]):
            coef[m] = d / math.factorial(m)
        return cls(coef, 1, order)

    # -- basic accessors
    @property
    def value(self):
        return self.coef[(0,) * self.nvar]

    @property
    def batch_shape(self):
        return self.coef.shape[self.nvar:]

    def derivative(self, *index):
        """Partial derivative with multi-index ``index`` at the base point."""
        if len(index) == 1 and isinstance(index[0], (tuple, list)):
            index = tuple(index[0])
        if len(index) != self.nvar:
            raise ValueError("multi-index length must equal nvar")
        if sum(index) > self.order:
            raise ValueError("derivative order exceeds jet order")
        scale = math.prod(math.factorial(i) for i in index)
        return self.coef[tuple(index)] * scale

    def derivatives(self):
        """Univariate jets only: array of f, f', ..., f^(order)."""
        if self.nvar != 1:
            raise ValueError("derivatives() needs a univariate jet")
        fact = np.array([math.factorial(m) for m in range(self.order + 1)], dtype=float)
        return self.coef * fact.reshape((-1,) + (1,) * len(self.batch_shape))

    def __repr__(self):
        return f"Jet(nvar={self.nvar}, order={self.order}, value={self.value!r})"

    # -- arithmetic
    def _coerce(self, other):
        if isinstance(other, Jet):
            if other.nvar != self.nvar or other.order != self.order:
                raise ValueError("incompatible jets")
            return other
        return Jet.constant(other, self.nvar, self.order)

    def _aligned(self, other):
        """Coefficient arrays of self and other broadcast to a common batch."""
        other = self._coerce(other)
        batch = np.broadcast_shapes(self.batch_shape, other.batch_shape)
        return _lift(self.coef, self.nvar, batch), _lift(other.coef, self.nvar, batch)

    def _like(self, coef):
        return Jet(coef, self.nvar, self.order)

    def __add__(self, other):
        a, b = self._aligned(other)
        return self._like(a + b)

    __radd__ = __add__

    def __neg__(self):
        return self._like(-self.coef)

    def __pos__(self):
        return self

    def __sub__(self, other):
        a, b = self._aligned(other)
        return self._like(a - b)

    def __rsub__(self, other):
        return self._coerce(other) - self

    def __mul__(self, other):
        if not isinstance(other, Jet):
            other = np.asarray(other, dtype=float)
            batch = np.broadcast_shapes(self.batch_shape, other.shape)
            return self._like(_lift(self.coef, self.nvar, batch) * other)
        a, b = self._aligned(other)
        return self._like(_convolve(a, b, self.nvar, self.order))

    __rmul__ = __mul__

    def reciprocal(self):
        x0 = self.value
        # Taylor coefficients of 1/x at x0 (already divided by m!)
        derivs = [(-1.0) ** m / x0 ** (m + 1) for m in range(self.order + 1)]
        return _compose(self, derivs, scaled=True)

    def __truediv__(self, other):
        if not isinstance(other, Jet):
            return self * (1.0 / np.asarray(other, dtype=float))
        return self * other.reciprocal()

    def __rtruediv__(self, other):
        return self.reciprocal() * other

    def __pow__(self, p):
        if isinstance(p, Jet):
            return exp(p * log(self))
        if float(p).is_integer() and p >= 0:
            p = int(p)
            out = Jet.constant(np.ones(self.batch_shape), self.nvar, self.order)
            base = self
            while p:
                if p & 1:
                    out = out * base
                p >>= 1
                if p:
                    base = base * base
            return out
        x0 = self.value
        derivs = []
        c = np.ones_like(x0)
        for m in range(self.order + 1):
            derivs.append(c * x0 ** (p - m))
            c = c * (p - m) / (m + 1)
        # derivs already carry the 1/m! factor
        return _compose(self, derivs, scaled=True)

    def __rpow__(self, base):
        return exp(self * math.log(base))

    # -- restructuring
    def embed(self, nvar, axis=0):
        """Lift a univariate jet into ``nvar`` variables along ``axis``."""
        if self.nvar != 1:
            raise ValueError("embed() needs a univariate jet")
        coef = np.zeros((self.order + 1,) * nvar + self.batch_shape)
        for m in range(self.order + 1):
            idx = [0] * nvar
            idx[axis] = m
            coef[tuple(idx)] = self.coef[m]
        return Jet(coef, nvar, self.order)

    def integrate(self, axis):
        """Antiderivative in variable ``axis`` vanishing at h_axis = 0."""
        coef = np.zeros_like(self.coef)
        for idx in _multi_indices(self.nvar, self.order - 1):
            tgt = list(idx)
            tgt[axis] += 1
            coef[tuple(tgt)] = self.coef[idx] / tgt[axis]
        return self._like(coef)

    def substitute(self, axis, g: "Jet"):
        """Replace variable ``axis`` of a bivariate jet by ``g(h_other)``.

        ``g`` must be a univariate jet with zero constant term; the result
        is univariate in the remaining variable.
        """
        if self.nvar != 2 or g.nvar != 1:
            raise ValueError("substitute() maps a bivariate jet to a univariate one")
        if np.any(np.abs(g.value) > 0):
            raise ValueError("substituted series must vanish at the base point")
        other = 1 - axis
        out = np.zeros((self.order + 1,) + self.batch_shape)
        power = Jet.constant(np.ones(g.batch_shape), 1, self.order)
        for j in range(self.order + 1):
            for i in range(self.order + 1 - j):
                idx = [0, 0]
                idx[axis] = j
                idx[other] = i
                c = self.coef[tuple(idx)]
                # c * h^i * g^j, truncated
                out[i:] += c * power.coef[: self.order + 1 - i]
            power = power * g
        return Jet(out, 1, self.order)


def _lift(coef, nvar, batch):
    lead = coef.shape[:nvar]
    own = coef.shape[nvar:]
    pad = (1,) * (len(batch) - len(own))
    return np.broadcast_to(coef.reshape(lead + pad + own), lead + tuple(batch))


def _mask(nvar, order, nbatch):
    grids = np.indices((order + 1,) * nvar).sum(axis=0)
    m = (grids <= order).astype(float)
    return m.reshape(m.shape + (1,) * nbatch)


def _convolve(a, b, nvar, order):
    batch = np.broadcast_shapes(a.shape[nvar:], b.shape[nvar:])
    out = np.zeros((order + 1,) * nvar + batch)
    for idx in _multi_indices(nvar, order):
        aval = a[idx]
        if not np.any(aval):
            continue
        tgt = tuple(slice(i, None) for i in idx)
        src = tuple(slice(0, order + 1 - i) for i in idx)
        out[tgt] += aval * b[src]
    return out * _mask(nvar, order, len(batch))


def _compose(x: Jet, derivs, scaled=False):
    """Evaluate sum_m f^(m)(x0)/m! * (x - x0)^m for a jet x."""
    h = x - x.value
    out = Jet.constant(np.zeros(x.batch_shape), x.nvar, x.order)
    power = Jet.constant(np.ones(x.batch_shape), x.nvar, x.order)
    for m in range(x.order + 1):
        c = derivs[m] if scaled else derivs[m] / math.factorial(m)
        out = out + power * c
        if m < x.order:
            power = power * h
    return out


# -- polymorphic elementary functions: accept floats, arrays or jets


def sin(x):
    if not isinstance(x, Jet):
        return np.sin(x)
    s, c = np.sin(x.value), np.cos(x.value)
    cycle = [s, c, -s, -c]
    return _compose(x, [cycle[m % 4] for m in range(x.order + 1)])


def cos(x):
    if not isinstance(x, Jet):
        return np.cos(x)
    s, c = np.sin(x.value), np.cos(x.value)
    cycle = [c, -s, -c, s]
    return _compose(x, [cycle[m % 4] for m in range(x.order + 1)])


def exp(x):
    if not isinstance(x, Jet):
        return np.exp(x)
    e = np.exp(x.value)
    return _compose(x, [e] * (x.order + 1))


def log(x):
    if not isinstance(x, Jet):
        return np.log(x)
    x0 = x.value
    derivs = [np.log(x0)] + [(-1.0) ** (m - 1) * math.factorial(m - 1) / x0 ** m
                             for m in range(1, x.order + 1)]
    return _compose(x, derivs)


def sqrt(x):
    if not isinstance(x, Jet):
        return np.sqrt(x)
    return x ** 0.5


def absolute(x):
    if not isinstance(x, Jet):
        return np.abs(x)
    sign = np.sign(x.value)
    if np.any(sign == 0):
        raise ValueError("abs() is not differentiable at 0")
    return x * sign


def where(mask, a, b):
    """Elementwise select between two jets (or arrays) by a batch mask."""
    if not isinstance(a, Jet) and not isinstance(b, Jet):
        return np.where(mask, a, b)
    ref = a if isinstance(a, Jet) else b
    ca, cb = ref._coerce(a)._aligned(b)
    return ref._like(np.where(mask, ca, cb))


def _even_series(x, coeffs):
    """sum_k coeffs[k] * x^(2k), Horner in x^2 (works for jets)."""
    x2 = x * x
    acc = coeffs[-1]
    for c in reversed(coeffs[:-1]):
        acc = acc * x2 + c
    return acc


_SINC_SERIES = [(-1.0) ** k / math.factorial(2 * k + 1) for k in range(16)]
_KAPPA_SERIES = [(-1.0) ** (m + 1) * (2 * m + 2) / math.factorial(2 * m + 3) for m in range(16)]


def _switched(x, direct, series):
    small = np.abs(x.value if isinstance(x, Jet) else x) < _SERIES_SWITCH
    if np.all(small):
        return series(x)
    if not np.any(small):
        return direct(x)
    return where(small, series(x), direct(_nudge(x, small)))


def _nudge(x, small):
    # the direct branch is discarded where `small`; move those entries to 1
    if isinstance(x, Jet):
        coef = x.coef.copy()
        base = coef[(0,) * x.nvar]
        coef[(0,) * x.nvar] = np.where(small, 1.0, base)
        return x._like(coef)
    return np.where(small, 1.0, x)


def sinc(x):
    """sin(x)/x, analytic at 0."""
    return _switched(x, lambda u: sin(u) / u, lambda u: _even_series(u, _SINC_SERIES))


def kappa(x):
    """(x cos x - sin x)/x**3, analytic at 0 with kappa(0) = -1/3."""
    return _switched(x, lambda u: (u * cos(u) - sin(u)) / (u * u * u),
                     lambda u: _even_series(u, _KAPPA_SERIES))

