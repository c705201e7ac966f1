"""scikit-learn style front end.

``HittingTimeTail`` has no data-driven fitting: ``fit`` builds and certifies
the exponent model and the bound constants, ``predict`` maps rows ``(t, x)``
to ``(-d/dt)^n P(tau_x > t)``.
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_array, check_is_fitted

from .config import DEFAULT, Tolerances
from .hitting import bound_corollary, bound_theorem, constants, tail
from .models import make_model


class HittingTimeTail(BaseEstimator):
    """Tail of the first hitting time of a point.

    Parameters
    ----------
    family : str
        Built-in exponent family (see :func:`levyhit.models.make_model`).
    params : tuple or dict
        Family parameters.
    n : int
        Order of the time derivative.
    tolerances : Tolerances or None
        Numerical settings; ``None`` uses the defaults.
    """

    def __init__(self, family: str = "stable", params=(1.5,), n: int = 0,
                 tolerances: Tolerances | None = None):
        self.family = family
        self.params = params
        self.n = n
        self.tolerances = tolerances

    def fit(self, X=None, y=None):
        tol = self.tolerances or DEFAULT
        self.model_ = make_model(self.family, self.params, tol=tol)
        self.alpha_star_ = self.model_.require_certified()
        self.constants_ = constants(self.alpha_star_, self.n, tol)
        return self

    def _rows(self, X) -> np.ndarray:
        check_is_fitted(self, "model_")
        X = check_array(X, dtype=float, ensure_min_features=2)
        if X.shape[1] != 2:
            raise ValueError(f"expected two columns (t, x), got {X.shape[1]}")
        if np.any(X[:, 0] <= 0):
            raise ValueError("all times must be positive")
        if np.any(X[:, 1] == 0):
            raise ValueError("x must be non-zero")
        return X

    def predict(self, X) -> np.ndarray:
        X = self._rows(X)
        tol = self.tolerances or DEFAULT
        return np.array([tail(self.model_, self.n, t, x, tol).value for t, x in X])

    def certify(self, X) -> list:
        """Bound certificates for every row (theorem envelope, plus the all-time one when ``n = 0``)."""
        X = self._rows(X)
        tol = self.tolerances or DEFAULT
        out = []
        for t, x in X:
            obs = tail(self.model_, self.n, t, x, tol)
            out.append(bound_theorem(self.model_, self.n, t, x, self.alpha_star_, tol, obs))
            if self.n == 0:
                out.append(bound_corollary(self.model_, t, x, self.alpha_star_, tol, obs))
        return out
