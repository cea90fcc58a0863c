"""scikit-learn transformers over rows of frequencies.

``BallVolume`` maps each row ``b`` (any order, any positive scale) to the
unit-ball volume; ``HausdorffDensity`` maps rows of manifold coordinates
through a structure field to ``f_{μS}``.  Both are stateless apart from
the input width recorded by ``fit``, so they drop into a ``Pipeline``.
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_array, check_is_fitted

from .algebra import FrequencySpectrum
from .density import SmoothVolumeSpec, density_at
from .volume import unit_ball_volume

__all__ = ["BallVolume", "HausdorffDensity"]


class BallVolume(TransformerMixin, BaseEstimator):
    """Rows of frequencies -> column of unit-ball volumes.

    Parameters
    ----------
    kind : {"contact", "quasi-contact"}
    normalize : bool
        Divide each volume by the largest frequency of its row (the volume
        is homogeneous of degree one in ``b``).
    """

    def __init__(self, kind: str = "contact", normalize: bool = False):
        self.kind = kind
        self.normalize = normalize

    def fit(self, X, y=None):
        X = check_array(X, ensure_all_finite=True)
        self.n_features_in_ = X.shape[1]
        return self

    def transform(self, X):
        check_is_fitted(self, "n_features_in_")
        X = check_array(X, ensure_all_finite=True)
        if X.shape[1] != self.n_features_in_:
            raise ValueError(f"expected {self.n_features_in_} features, got {X.shape[1]}")
        out = np.empty((X.shape[0], 1))
        for k, row in enumerate(X):
            spec = FrequencySpectrum.of(row, self.kind)
            v = unit_ball_volume(spec).value
            out[k, 0] = v / spec.b1 if self.normalize else v
        return out


class HausdorffDensity(TransformerMixin, BaseEstimator):
    """Rows of manifold coordinates -> column of ``f_{μS}`` values.

    Parameters
    ----------
    field : StructureField
    volume : SmoothVolumeSpec or None
        ``None`` means Lebesgue measure in the given coordinates.
    """

    def __init__(self, field=None, volume=None):
        self.field = field
        self.volume = volume

    def fit(self, X, y=None):
        X = check_array(X)
        if self.field is None:
            raise ValueError("HausdorffDensity needs a structure field")
        if X.shape[1] != self.field.dim_manifold:
            raise ValueError(f"field lives on R^{self.field.dim_manifold}, got {X.shape[1]} columns")
        self.n_features_in_ = X.shape[1]
        return self

    def transform(self, X):
        check_is_fitted(self, "n_features_in_")
        X = check_array(X)
        vol = self.volume if self.volume is not None else SmoothVolumeSpec.lebesgue()
        return np.array([[density_at(q, self.field, vol).f_muS] for q in X])
