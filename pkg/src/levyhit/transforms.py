"""The second-order transform kernel shared by the phase and the eigenfunction.

For a spectral parameter ``lam`` and ``s0 = lam^2`` the kernel is

    k(xi) = s0 psi'(s0) / (psi(xi^2) - psi(s0)) - s0 / (xi^2 - s0).

Both fractions blow up at ``xi = lam`` but the difference is analytic.  With
``d = xi^2 - s0`` the exact divided-difference identities

    psi(s0 + d) - psi(s0) = d  int_0^1 psi'(s0 + v d) dv
    psi(s0 + d) - psi(s0) - d psi'(s0) = d^2 int_0^1 (1 - v) psi''(s0 + v d) dv

give ``k(xi) = -s0 int (1-v) psi''(s0 + v d) dv / int psi'(s0 + v d) dv``,
which has no cancellation at all.  Inside the window ``|d| <= w s0`` both
integrals are evaluated by 12-point Gauss-Legendre quadrature (exact to
machine precision for these analytic integrands); outside the window the
direct formula is already well conditioned.
"""

from __future__ import annotations

import numpy as np

from .config import DEFAULT, Tolerances
from .models import ExponentModel

_GL_X, _GL_W = np.polynomial.legendre.leggauss(12)
GL_NODES = 0.5 * (_GL_X + 1.0)
GL_WEIGHTS = 0.5 * _GL_W


class KernelEvaluator:
    """Evaluate the kernel ``1 / (psi_lam)_lam(xi^2)`` for a fixed ``lam``.

    Cached at construction: ``psi(lam^2)``, ``psi'(lam^2)``, ``psi''(lam^2)``
    and the value at the removable singularity,
    ``k(lam) = -lam^2 psi''(lam^2) / (2 psi'(lam^2))``.
    """

    __slots__ = ("model", "lam", "s0", "psi0", "dpsi0", "d2psi0", "k_lambda", "window")

    def __init__(self, model: ExponentModel, lam: float, tol: Tolerances = DEFAULT):
        if not lam > 0:
            raise ValueError(f"lambda must be positive, got {lam}")
        self.model = model
        self.lam = float(lam)
        self.s0 = self.lam * self.lam
        p, d1, d2 = model.evaluate_small(np.array([self.s0]))
        self.psi0 = float(p[0])
        self.dpsi0 = float(d1[0])
        self.d2psi0 = float(d2[0])
        if not (self.dpsi0 > 0 and np.isfinite(self.d2psi0)):
            raise ValueError(f"model derivative is not positive/finite at lambda={lam}")
        self.k_lambda = -self.s0 * self.d2psi0 / (2.0 * self.dpsi0)
        self.window = tol.kernel_window

    @property
    def boundary_value(self) -> float:
        """Limit of the kernel as ``xi -> 0+``: ``1 - s0 psi'(s0) / psi(s0)``."""
        return 1.0 - self.s0 * self.dpsi0 / self.psi0

    def __call__(self, xi) -> np.ndarray:
        xi = np.abs(np.asarray(xi, dtype=float))
        scalar = xi.ndim == 0
        xi = np.atleast_1d(xi)
        out = np.empty_like(xi)
        s0 = self.s0
        d = xi * xi - s0
        near = np.abs(d) <= self.window * s0
        far = ~near
        if np.any(far):
            P = self.model.Psi(xi[far])
            out[far] = s0 * self.dpsi0 / (P - self.psi0) - s0 / d[far]
        if np.any(near):
            dn = d[near]
            u = s0 + dn[:, None] * GL_NODES[None, :]
            _, d1, d2 = self.model.evaluate_small(u.ravel())
            d1 = d1.reshape(u.shape)
            d2 = d2.reshape(u.shape)
            num = d2 @ (GL_WEIGHTS * (1.0 - GL_NODES))
            den = d1 @ GL_WEIGHTS
            out[near] = -s0 * num / den
        if not np.all(np.isfinite(out)):
            bad = xi[~np.isfinite(out)][0]
            raise FloatingPointError(
                f"kernel is not finite at xi={bad!r} (lambda={self.lam}); "
                "the model is probably not increasing"
            )
        return out[0] if scalar else out

    def scaled(self, s) -> np.ndarray:
        """Kernel at ``xi = lam * s``."""
        return self(self.lam * np.asarray(s, dtype=float))


def kernel(model: ExponentModel, lam: float, xi, tol: Tolerances = DEFAULT):
    """Convenience wrapper: ``KernelEvaluator(model, lam)(xi)``."""
    return KernelEvaluator(model, lam, tol)(xi)
