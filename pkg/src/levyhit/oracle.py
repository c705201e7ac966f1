"""Independent cross-checks for the hitting-time engine.

``laplace_mgf`` computes ``E exp(-lam tau_x)`` from the lam-potential density
alone; it uses only the exponent model and the numerics module, never the
phase or eigenfunction code.  ``laplace_consistency`` compares it with the
Laplace transform of the computed tail.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .config import DEFAULT, Tolerances
from .models import ExponentModel
from .numerics import (
    QuadResult,
    cosine_difference_integral,
    integrate_adaptive,
    integrate_power_tail,
)

PASS, FAIL, INCONCLUSIVE = "pass", "fail", "inconclusive"


@dataclass(frozen=True)
class OracleReport:
    description: str
    points: list = field(default_factory=list)
    max_discrepancy: float = 0.0
    tolerance: float = 0.0
    status: str = PASS

    @property
    def passed(self) -> bool:
        return self.status == PASS


def brownian_tail(t: float, x: float) -> float:
    """``P(tau_x > t)`` for ``Psi(xi) = xi^2`` by the reflection principle."""
    return math.erf(abs(x) / (2.0 * math.sqrt(t)))


def brownian_mgf(lam: float, x: float) -> float:
    return math.exp(-math.sqrt(lam) * abs(x))


def _potential_at_zero(model: ExponentModel, lam: float, tol: Tolerances) -> QuadResult:
    """``int_0^inf dxi / (lam + Psi(xi))``."""
    xi0 = model.inverse(lam, tol)

    def f(xi):
        return 1.0 / (lam + model.Psi(xi))

    head = integrate_adaptive(f, 0.0, xi0, 1e-300, 1e-13, tol.quad_limit,
                              points=[xi0 * 2.0 ** -k for k in range(1, 40)])
    tail = integrate_power_tail(f, xi0, 1e-300, 1e-12, min_upper=max(1e4 * xi0, tol.tail_scale))
    return head + tail


def laplace_mgf(model: ExponentModel, lam: float, x: float, tol: Tolerances = DEFAULT) -> float:
    """``E exp(-lam tau_x) = u_lam(x) / u_lam(0)``.

    Evaluated as ``1 - D / U`` with ``U = int dxi/(lam + Psi)`` and
    ``D = int (1 - cos xi x)/(lam + Psi) dxi`` so that nothing cancels.
    """
    if not lam > 0:
        raise ValueError(f"lam must be positive, got {lam}")
    ax = abs(float(x))
    if ax == 0.0:
        return 1.0
    u0 = _potential_at_zero(model, lam, tol)

    def amp(s):
        return 1.0 / (lam + model.Psi(np.asarray(s) / ax))

    xi0 = model.inverse(lam, tol)
    d = cosine_difference_integral(
        amp, 1.0, 2.0, abs_tol=1e-300, rel_tol=1e-12,
        min_upper=max(2e4, tol.tail_scale * ax),
        n_terms=tol.osc_terms, max_terms=tol.osc_max_terms,
        inner_points=tuple(ax * xi0 * 10.0 ** k for k in range(-3, 4)),
    )
    return 1.0 - (d.value / ax) / u0.value


def _gauss_legendre_log(fun, lo: float, hi: float, nodes: int) -> float:
    """Composite Gauss-Legendre of ``fun(t) dt`` in ``log t`` over ``[lo, hi]``."""
    a, b = math.log(lo), math.log(hi)
    panels = max(1, math.ceil(b - a))
    xg, wg = np.polynomial.legendre.leggauss(nodes)
    edges = np.linspace(a, b, panels + 1)
    total = 0.0
    for p, q in zip(edges[:-1], edges[1:]):
        s = 0.5 * (p + q) + 0.5 * (q - p) * xg
        vals = np.array([fun(math.exp(v)) * math.exp(v) for v in s])
        total += 0.5 * (q - p) * float(vals @ wg)
    return total


def laplace_consistency(
    model: ExponentModel,
    lam: float,
    x: float,
    t_max: float | None = None,
    n_nodes: int = 10,
    tolerance: float = 5e-5,
    tol: Tolerances = DEFAULT,
) -> OracleReport:
    """Compare ``1 - lam int e^{-lam t} P(tau_x > t) dt`` with :func:`laplace_mgf`.

    The time integral runs over ``[t_min, t_max]`` by composite Gauss-Legendre
    in ``log t`` (``n_nodes`` per unit of ``log t``; the same rule with fewer
    nodes gives the quadrature error).  Below ``t_min`` the tail lies in
    ``[P(tau_x > t_min), 1]``; beyond ``t_max`` it lies in
    ``[0, min(1, all-time upper envelope)]``.  Both pieces enter at their
    midpoint with half their width as error; ``t_min`` shrinks and ``t_max``
    grows until each width is below ``tolerance / 10``.
    """
    from .hitting import bound_corollary, tail

    ax = abs(float(x))
    cut = tolerance / 10.0

    def p(t: float) -> float:
        return tail(model, 0, t, ax, tol).value

    # lower end
    t_min = min(1e-2 / model.psi_scalar(1.0 / ax), 0.1 / lam)
    for _ in range(60):
        p_min = p(t_min)
        width_lo = (1.0 - p_min) * -math.expm1(-lam * t_min)
        if width_lo <= cut:
            break
        t_min *= 0.5
    head = 0.5 * (1.0 + p_min) * -math.expm1(-lam * t_min)

    # upper end
    if t_max is None:
        t_max = max(10.0 * t_min, math.log(1.0 / cut) / lam)
    for _ in range(60):
        env = bound_corollary(model, t_max, ax, tol=tol, observed=None).upper
        width_hi = math.exp(-lam * t_max) * min(1.0, env)
        if width_hi <= cut:
            break
        t_max *= 1.5
    tail_part = 0.5 * width_hi

    def integrand(t):
        return lam * math.exp(-lam * t) * p(t)

    body = _gauss_legendre_log(integrand, t_min, t_max, n_nodes)
    body_coarse = _gauss_legendre_log(integrand, t_min, t_max, max(3, n_nodes // 2 + 1))
    lhs = 1.0 - (head + body + tail_part)
    rhs = laplace_mgf(model, lam, ax, tol)
    disc = abs(lhs - rhs)
    bounds_ok = width_lo <= cut and width_hi <= cut
    status = PASS if disc <= tolerance else FAIL
    if not bounds_ok:
        status = INCONCLUSIVE
    point = {
        "lam": lam, "x": ax, "t_min": t_min, "t_max": t_max,
        "from_tail": lhs, "from_potential": rhs, "discrepancy": disc,
        "quadrature_error": abs(body - body_coarse),
        "truncation_error": 0.5 * (width_lo + width_hi),
    }
    return OracleReport(
        f"Laplace transform of P(tau_x > t) vs lambda-potential ratio ({model.name})",
        [point], disc, tolerance, status,
    )


def laplace_battery(model: ExponentModel, lams, xs, tolerance: float = 5e-5,
                    tol: Tolerances = DEFAULT) -> OracleReport:
    reports = [laplace_consistency(model, lam, x, tolerance=tolerance, tol=tol)
               for lam in lams for x in xs]
    points = [pt for r in reports for pt in r.points]
    statuses = {r.status for r in reports}
    status = FAIL if FAIL in statuses else (INCONCLUSIVE if INCONCLUSIVE in statuses else PASS)
    return OracleReport(
        f"Laplace identity battery ({model.name})", points,
        max(r.max_discrepancy for r in reports), tolerance, status,
    )
