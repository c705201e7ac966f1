"""Generalised eigenfunctions ``F_lam(x) = sin(lam|x| + theta) - G_lam(x)``.

With ``omega = lam |x|`` and the kernel ``k`` of :mod:`levyhit.transforms`,

    G_lam(x) = (2 cos theta / pi) int_0^inf cos(omega s) k(lam s) ds.

For ``omega >= diff_switch`` this is computed directly (smooth part up to
``s = max(2, 2/omega)``, accelerated half-period panels beyond).  For small
``omega`` the identity ``G_lam(0) = sin theta`` turns it into the
cancellation-free form

    F = 2 cos(theta + omega/2) sin(omega/2)
        + (2 cos theta / pi) int_0^inf (1 - cos(omega s)) k(lam s) ds.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .config import DEFAULT, Tolerances
from .models import ExponentModel
from .numerics import QuadResult, cosine_difference_integral, integrate_oscillatory
from .phase import PHASES, PhaseResult
from .transforms import KernelEvaluator


@dataclass(frozen=True)
class EigenfunctionSample:
    lam: float
    x: float
    f_value: float
    g_value: float
    theta: PhaseResult
    quad_error: float


def _phase(model, lam, tol, phase):
    if phase is not None:
        if phase.lam != lam:
            raise ValueError("supplied PhaseResult is for a different lambda")
        return phase
    return PHASES.get(model, lam, tol)


def g_hat(model: ExponentModel, lam: float, xi, tol: Tolerances = DEFAULT,
          phase: PhaseResult | None = None):
    """Fourier transform of ``G_lam``: ``(2 cos theta / lam) k(xi)``."""
    ph = _phase(model, float(lam), tol, phase)
    return 2.0 * ph.cos / lam * KernelEvaluator(model, lam, tol)(xi)


def _cosine_transform(ev: KernelEvaluator, omega: float, tol: Tolerances) -> QuadResult:
    """``int_0^inf cos(omega s) k(lam s) ds`` for ``omega > 0``."""
    f = ev.scaled
    split = max(2.0, 2.0 / omega)
    return integrate_oscillatory(
        f, omega, 0.0, abs_tol=tol.f_abs, rel_tol=tol.f_rel, split=split,
        n_terms=tol.osc_terms, max_terms=tol.osc_max_terms,
    )


def _difference_transform(ev: KernelEvaluator, omega: float, tol: Tolerances) -> QuadResult:
    """``int_0^inf (1 - cos(omega s)) k(lam s) ds``."""
    return cosine_difference_integral(
        ev.scaled, omega, 2.0, abs_tol=tol.f_abs, rel_tol=tol.f_rel,
        min_upper=max(2e4, tol.tail_scale / ev.lam),
        n_terms=tol.osc_terms, max_terms=tol.osc_max_terms,
        inner_points=(0.5, 1.0, 2.0),
    )


def g(model: ExponentModel, lam: float, x: float, tol: Tolerances = DEFAULT,
      phase: PhaseResult | None = None) -> float:
    """``G_lam(x)``; ``G_lam(0) = sin theta`` is returned exactly."""
    return f(model, lam, x, tol, phase).g_value


def f(model: ExponentModel, lam: float, x: float, tol: Tolerances = DEFAULT,
      phase: PhaseResult | None = None) -> EigenfunctionSample:
    """Evaluate ``F_lam(x)`` and ``G_lam(x)`` with an absolute error estimate."""
    lam = float(lam)
    if not (lam > 0 and math.isfinite(lam)):
        raise ValueError(f"lambda must be positive and finite, got {lam}")
    ax = abs(float(x))
    ph = _phase(model, lam, tol, phase)
    c, s = ph.cos, ph.sin
    if ax == 0.0:
        return EigenfunctionSample(lam, float(x), 0.0, s, ph, 0.0)
    omega = lam * ax
    ev = KernelEvaluator(model, lam, tol)
    pref = 2.0 * c / math.pi
    if ev.k_lambda == 0.0 and ev.boundary_value == 0.0:
        # kernel vanishes identically (Brownian); no transform to compute
        val = math.sin(omega + ph.theta)
        return EigenfunctionSample(lam, float(x), val, 0.0, ph, ph.quad_error)
    if omega < tol.diff_switch:
        d = _difference_transform(ev, omega, tol)
        f_val = 2.0 * math.cos(ph.theta + 0.5 * omega) * math.sin(0.5 * omega) + pref * d.value
        g_val = s - pref * d.value
        err = pref * d.abs_error + ph.quad_error * (abs(math.sin(0.5 * omega)) * 2 + d.value)
    else:
        r = _cosine_transform(ev, omega, tol)
        g_val = pref * r.value
        f_val = math.sin(omega + ph.theta) - g_val
        err = pref * r.abs_error + ph.quad_error * (1.0 + abs(r.value))
    return EigenfunctionSample(lam, float(x), f_val, g_val, ph, err)


def potential_v(model: ExponentModel, x: float, tol: Tolerances = DEFAULT) -> QuadResult:
    """Compensated potential kernel ``v(x) = (1/pi) int_0^inf (1 - cos xi x)/Psi(xi) dxi``."""
    ax = abs(float(x))
    if ax == 0.0:
        return QuadResult(0.0, 0.0, 0)

    def amp(s):
        return 1.0 / model.Psi(np.asarray(s) / ax)

    # substitute s = xi |x|; the integrand becomes (1 - cos s)/Psi(s/|x|) / |x|
    r = cosine_difference_integral(
        amp, 1.0, 2.0, abs_tol=tol.f_abs, rel_tol=tol.f_rel,
        min_upper=max(2e4, tol.tail_scale * ax),
        n_terms=tol.osc_terms, max_terms=tol.osc_max_terms,
        inner_points=tuple(ax * 10.0 ** k for k in range(-3, 4)),
    )
    return r.scaled(1.0 / (math.pi * ax))



def envelope(model: ExponentModel, lam: float, x: float, alpha_star: float | None = None):
    """Two-sided bound on ``F_lam(x)`` valid for ``lam |x| < pi - pi/alpha_star``.

    Returns ``(lower, upper, applicable)`` with both ends proportional to
    ``lam psi'(lam^2) / (|x| psi(1/x^2))``, where ``psi'(lam^2) = Psi'(lam)/(2 lam)``.
    """
    a = alpha_star if alpha_star is not None else model.require_certified()
    ax = abs(float(x))
    scale = 0.5 * float(model.dPsi(np.array([lam]))[0]) / (ax * model.psi_scalar(1.0 / ax))
    applicable = lam * ax < math.pi - math.pi / a
    return (a - 1.0) / math.pi * scale, 40.0 / (math.pi * (a - 1.0)) * scale, applicable
