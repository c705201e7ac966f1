"""Hitting-time tail, its time derivatives, bounds and asymptotics.

The engine evaluates

    (-d/dt)^n P(tau_x > t)
        = (1/pi) int_0^inf cos(theta) e^{-t Psi} Psi' Psi^{n-1} F_lam(x) dlam

in the variable ``u = log lam`` on a fixed lattice of panels of width
``lattice_width``.  Because the lattice does not depend on ``t``, the
expensive eigenfunction values are memoised per ``(model, x, lam)`` and
shared across times, orders and the Laplace oracle.  The integral is cut at
``lam_max`` with ``t Psi(lam_max) >= big_lambda`` and the neglected part is
bounded by ``(2/pi) t^-n Gamma(n; t Psi(lam_max))``.  Towards ``lam -> 0`` the
integrand decays geometrically in ``u``; chunks are added until the
geometric remainder is below tolerance, and that remainder is added.
"""

from __future__ import annotations

import math
import os
import threading
import weakref
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable, Iterable

import numpy as np

from .config import DEFAULT, Tolerances
from .eigenfunction import f as eigen_f
from .eigenfunction import potential_v
from .models import ExponentModel, ModelError
from .numerics import (
    NumericalError,
    QuadResult,
    find_root_bracketed,
    inc_gamma_lower,
    inc_gamma_upper,
    integrate_adaptive,
)
from .phase import PHASES


@dataclass(frozen=True)
class TailResult:
    n: int
    t: float
    x: float
    value: float
    quad_error: float
    lambda_max: float


@dataclass(frozen=True)
class BoundConstants:
    alpha: float
    n: int
    C1: float
    C2: float
    C3: float


@dataclass(frozen=True)
class BoundCertificate:
    kind: str
    n: int
    t: float
    x: float
    C1: float
    C2: float
    C3: float
    applicable: bool
    lower: float
    upper: float
    observed: float
    quad_error: float

    @property
    def holds(self) -> bool:
        return self.lower <= self.observed <= self.upper

    @property
    def violated(self) -> bool:
        """True when the envelope applies and the observed value leaves it."""
        return self.applicable and not self.holds


# ---------------------------------------------------------------------------
# eigenfunction memo shared by every lambda integral
# ---------------------------------------------------------------------------

class _EigenCache:
    def __init__(self):
        self._lock = threading.Lock()
        self._store: "weakref.WeakKeyDictionary[ExponentModel, dict]" = weakref.WeakKeyDictionary()

    def values(self, model: ExponentModel, x: float, lams: np.ndarray, tol: Tolerances):
        """Return ``(cos theta, F)`` arrays at ``lams``."""
        with self._lock:
            table = self._store.setdefault(model, {}).setdefault((x, tol), {})
        cos = np.empty(lams.size)
        fv = np.empty(lams.size)
        for i, lam in enumerate(lams.tolist()):
            hit = table.get(lam)
            if hit is None:
                s = eigen_f(model, lam, x, tol)
                hit = (s.theta.cos, s.f_value)
                with self._lock:
                    table.setdefault(lam, hit)
            cos[i], fv[i] = hit
        return cos, fv

    def clear(self):
        with self._lock:
            self._store.clear()


EIGEN_CACHE = _EigenCache()


def clear_caches() -> None:
    EIGEN_CACHE.clear()
    PHASES.clear()


# ---------------------------------------------------------------------------
# lattice integration in u = log(lambda)
# ---------------------------------------------------------------------------

_CHUNK_PANELS = 40
_U_FLOOR = -700.0


def _lattice_top(lam_max: float, width: float) -> float:
    return math.ceil(math.log(lam_max) / width) * width


def integrate_log_lattice(
    h: Callable[[np.ndarray], np.ndarray],
    u_top: float,
    tol: Tolerances,
    u_cut: float | None = None,
) -> QuadResult:
    """Integrate ``h(u)`` over ``(-inf, u_top]`` on the lattice of width ``lattice_width``.

    ``h`` must decay geometrically as ``u -> -inf``.  If ``u_cut`` is given
    the range is ``[u_cut, u_top]`` instead (no remainder).
    """
    w = tol.lattice_width
    chunk = _CHUNK_PANELS * w
    total = QuadResult(0.0, 0.0, 0)
    hi = u_top
    while True:
        lo = hi - chunk
        if u_cut is not None:
            lo = max(lo, u_cut)
        k_lo = math.ceil(lo / w - 1e-9)
        pts = [k * w for k in range(k_lo, int(round(hi / w)))]
        abs_tol = max(tol.tail_abs, 0.5 * tol.tail_rel * abs(total.value))
        piece = integrate_adaptive(h, lo, hi, abs_tol, tol.tail_rel, 8 * tol.quad_limit, points=pts)
        total = total + piece
        if u_cut is not None and lo <= u_cut:
            return total
        h2 = h(np.array([lo, lo + w]))
        a0, a1 = float(h2[0]), float(h2[1])
        target = max(tol.tail_abs, 0.1 * tol.tail_rel * abs(total.value))
        if a0 == 0.0:
            return total
        if a0 * a1 > 0 and abs(a1) > abs(a0):
            rate = math.log(abs(a1) / abs(a0)) / w
            rem = a0 / rate
            if abs(rem) <= target:
                # drift of the rate over one panel bounds the error of the extrapolation
                return total + QuadResult(rem, 0.5 * abs(rem), 2)
        if lo < _U_FLOOR:
            raise NumericalError(
                "lambda integral does not decay towards lambda -> 0 "
                f"(integrand {a0:.3g} at log lambda = {lo:.1f})"
            )
        hi = lo


def _check_inputs(model: ExponentModel, n: int, t: float, x: float, tol: Tolerances):
    model.require_certified()
    if int(n) != n or n < 0:
        raise ValueError(f"n must be a non-negative integer, got {n}")
    if n > tol.max_order:
        raise ValueError(f"n={n} exceeds the supported order {tol.max_order}")
    if not (t > 0 and math.isfinite(t)):
        raise ValueError(f"t must be positive and finite, got {t}")
    if not (x != 0 and math.isfinite(x)):
        raise ValueError(f"x must be finite and non-zero, got {x}")


def _truncation(model: ExponentModel, t: float, tol: Tolerances):
    lam_max = model.inverse(tol.big_lambda / t, tol)
    u_top = _lattice_top(lam_max, tol.lattice_width)
    return lam_max, u_top, math.exp(u_top)


def _tail_integrand(model, n, t, x, tol):
    def h(u):
        lam = np.exp(u)
        P, P1, _ = model.evaluate(lam)
        cos, fv = EIGEN_CACHE.values(model, x, lam, tol)
        with np.errstate(over="ignore", divide="ignore", invalid="ignore"):
            val = cos * np.exp(-t * P) * P1 * P ** (n - 1) * fv * lam / math.pi
        return np.where(np.isfinite(val), val, 0.0)

    return h


def tail(model: ExponentModel, n: int, t: float, x: float, tol: Tolerances = DEFAULT) -> TailResult:
    """``(-d/dt)^n P(tau_x > t)`` with an absolute error estimate."""
    _check_inputs(model, n, t, x, tol)
    ax = abs(float(x))
    n = int(n)
    _, u_top, lam_top = _truncation(model, t, tol)
    res = integrate_log_lattice(_tail_integrand(model, n, t, ax, tol), u_top, tol)
    trunc = 2.0 / math.pi * t ** (-n) * inc_gamma_upper(n, t * model.psi_scalar(lam_top))
    return TailResult(n, float(t), float(x), res.value, res.abs_error + trunc, lam_top)


def _threads() -> int:
    try:
        return max(1, int(os.environ.get("LEVYHIT_THREADS", "1")))
    except ValueError:
        return 1


def tail_grid(
    model: ExponentModel, n: int, points: Iterable[tuple[float, float]],
    tol: Tolerances = DEFAULT, threads: int | None = None,
) -> list[TailResult]:
    """Evaluate ``tail`` over ``(t, x)`` pairs; output order follows input order."""
    pts = list(points)
    k = threads or _threads()
    if k <= 1:
        return [tail(model, n, t, x, tol) for t, x in pts]
    with ThreadPoolExecutor(max_workers=k) as pool:
        return list(pool.map(lambda p: tail(model, n, p[0], p[1], tol), pts))


# ---------------------------------------------------------------------------
# constants and envelopes
# ---------------------------------------------------------------------------

def constants(alpha: float, n: int, tol: Tolerances = DEFAULT) -> BoundConstants:
    """Explicit constants ``C1, C2, C3`` of the two-sided estimate.

    ``C3`` is the smallest ``s >= 1`` beyond which
    ``(2/pi) s Gamma(n; (alpha-1)^2 s) <= C1``, times ``1 + c3_safety``.
    """
    if not 1.0 < alpha <= 2.0:
        raise ValueError(f"alpha must lie in (1, 2], got {alpha}")
    if int(n) != n or n < 0:
        raise ValueError(f"n must be a non-negative integer, got {n}")
    n = int(n)
    a1 = alpha - 1.0
    a2 = a1 * a1
    c1 = a2 * inc_gamma_lower(n + 0.5, a2) / (4.0 * math.pi ** 2)
    c2 = 60.0 * (inc_gamma_lower(n + 1.0 - 1.0 / alpha, 1.0) + inc_gamma_upper(n + 0.5, 1.0)) / (
        math.pi ** 2 * a1
    )

    def excess(logs: float) -> float:
        s = math.exp(logs)
        return 2.0 / math.pi * s * inc_gamma_upper(n, a2 * s) - c1

    grid = [k / 10.0 * math.log(10.0) for k in range(0, 141)]
    vals = [excess(v) for v in grid]
    above = [i for i, v in enumerate(vals) if v > 0]
    if not above:
        c3 = 1.0
    else:
        i = above[-1]
        if i == len(grid) - 1:
            raise NumericalError(f"C3 search did not terminate for alpha={alpha}, n={n}")
        c3 = math.exp(find_root_bracketed(excess, grid[i], grid[i + 1], rtol=1e-14))
    return BoundConstants(float(alpha), n, c1, c2, c3 * (1.0 + tol.c3_safety))


def tilde_constants(alpha: float, tol: Tolerances = DEFAULT) -> tuple[float, float]:
    """Constants of the all-time estimate of ``P(tau_x > t)``."""
    c = constants(alpha, 0, tol)
    return c.C1 / c.C3, 2.0 * c.C2 + 2.0 * c.C3


def envelope_scale(model: ExponentModel, n: int, t: float, x: float, tol: Tolerances = DEFAULT) -> float:
    """``t^(n+1) |x| Psi(1/|x|) Psi^-1(1/t)``."""
    ax = abs(x)
    return t ** (n + 1) * ax * model.psi_scalar(1.0 / ax) * model.inverse(1.0 / t, tol)


def bound_theorem(
    model: ExponentModel, n: int, t: float, x: float, alpha_star: float | None = None,
    tol: Tolerances = DEFAULT, observed: TailResult | None = None,
) -> BoundCertificate:
    """Two-sided power-type envelope, applicable when ``t Psi(1/|x|) >= C3``."""
    a = alpha_star if alpha_star is not None else model.require_certified()
    c = constants(a, n, tol)
    d = envelope_scale(model, n, t, x, tol)
    obs = observed or tail(model, n, t, x, tol)
    applicable = t * model.psi_scalar(1.0 / abs(x)) >= c.C3
    return BoundCertificate(
        "theorem", int(n), float(t), float(x), c.C1, c.C2, c.C3, applicable,
        c.C1 / d, c.C2 / d, obs.value, obs.quad_error,
    )


def bound_corollary(
    model: ExponentModel, t: float, x: float, alpha_star: float | None = None,
    tol: Tolerances = DEFAULT, observed: TailResult | None = None,
) -> BoundCertificate:
    """All-time envelope ``C~ / (1 + t|x|Psi(1/|x|)Psi^-1(1/t))`` of ``P(tau_x > t)``."""
    a = alpha_star if alpha_star is not None else model.require_certified()
    c = constants(a, 0, tol)
    k1, k2 = c.C1 / c.C3, 2.0 * c.C2 + 2.0 * c.C3
    d = 1.0 + envelope_scale(model, 0, t, x, tol)
    obs = observed or tail(model, 0, t, x, tol)
    return BoundCertificate(
        "corollary", 0, float(t), float(x), k1, k2, c.C3, True, k1 / d, k2 / d,
        obs.value, obs.quad_error,
    )


# ---------------------------------------------------------------------------
# asymptotics
# ---------------------------------------------------------------------------

def asymp_small_x(model: ExponentModel, gamma: float | None, n: int, t: float,
                  tol: Tolerances = DEFAULT) -> float:
    """Limit of ``|x| Psi(1/|x|) (-d/dt)^n P(tau_x > t)`` as ``x -> 0``."""
    g = gamma if gamma is not None else model.rv_index_infinity
    if g is None:
        raise ModelError(f"{model.name}: regular-variation index at infinity is not declared")
    if not 1.0 < g <= 2.0:
        raise ValueError(f"index at infinity must lie in (1, 2], got {g}")
    _check_inputs(model, n, t, 1.0, tol)
    pref = 1.0 / (2.0 * math.pi * math.gamma(g) * abs(math.cos(g * math.pi / 2.0)))
    _, u_top, lam_top = _truncation(model, t, tol)

    def h(u):
        lam = np.exp(u)
        P, P1, _ = model.evaluate(lam)
        cos = np.array([PHASES.get(model, v, tol).cos for v in lam.tolist()])
        with np.errstate(over="ignore", divide="ignore", invalid="ignore"):
            val = cos * cos * np.exp(-t * P) * P1 * P1 * P ** (n - 1) * lam
        return np.where(np.isfinite(val), val, 0.0)

    res = integrate_log_lattice(h, u_top, tol)
    return pref * res.value


def asymp_large_t(model: ExponentModel, delta: float | None, n: int, x: float,
                  tol: Tolerances = DEFAULT) -> float:
    """Limit of ``t^(n+1) Psi^-1(1/t) (-d/dt)^n P(tau_x > t)`` as ``t -> inf``."""
    d = delta if delta is not None else model.rv_index_zero
    if d is None:
        raise ModelError(f"{model.name}: regular-variation index at zero is not declared")
    if not 1.0 < d <= 2.0:
        raise ValueError(f"index at zero must lie in (1, 2], got {d}")
    if int(n) != n or n < 0:
        raise ValueError(f"n must be a non-negative integer, got {n}")
    v = potential_v(model, x, tol).value
    return d * math.gamma(n + 1.0 - 1.0 / d) * math.sin(math.pi / d) ** 2 / math.pi * v


# ---------------------------------------------------------------------------
# proof diagnostic: split of the lambda integral at a = (pi - pi/alpha)/|x|
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SplitDiagnostic:
    a: float
    I: float
    J: float
    applicable: bool

    @property
    def holds(self) -> bool:
        return abs(self.I) <= 0.5 * self.J


def ij_split(model: ExponentModel, n: int, t: float, x: float, alpha_star: float | None = None,
             tol: Tolerances = DEFAULT) -> SplitDiagnostic:
    """High-frequency part ``I`` (``lam > a``) and low-frequency part ``J`` of the tail."""
    a_star = alpha_star if alpha_star is not None else model.require_certified()
    _check_inputs(model, n, t, x, tol)
    ax = abs(float(x))
    a = (math.pi - math.pi / a_star) / ax
    total = tail(model, n, t, x, tol)
    _, u_top, _ = _truncation(model, t, tol)
    h = _tail_integrand(model, int(n), t, ax, tol)
    ua = math.log(a)
    if ua >= u_top:
        i_val = 0.0
    else:
        w = tol.lattice_width
        pts = [k * w for k in range(math.ceil(ua / w), int(round(u_top / w)))]
        i_val = integrate_adaptive(h, ua, u_top, tol.tail_abs, tol.tail_rel,
                                   8 * tol.quad_limit, points=pts).value
    c3 = constants(a_star, n, tol).C3
    return SplitDiagnostic(a, i_val, total.value - i_val, t * model.psi_scalar(1.0 / ax) >= c3)
