"""Phase shift of the generalised eigenfunctions.

    theta(lam) = arctan( (2/pi) int_0^inf k_lam(lam s) ds )

where ``k_lam`` is the transform kernel.  The integral is split at
``s = 1/2, 1, 2``; beyond ``s = 2`` it is integrated decade by decade in
``log s`` until ``xi = lam s`` reaches ``tail_scale`` and the remainder is
extrapolated from the measured power-law decay of the kernel.
"""

from __future__ import annotations

import math
import os
import threading
import weakref
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .config import DEFAULT, Tolerances
from .models import ExponentModel
from .numerics import integrate_adaptive, integrate_power_tail
from .transforms import KernelEvaluator


class PhaseBracketError(ArithmeticError):
    """The computed phase left its certified bracket by more than its error."""


@dataclass(frozen=True)
class PhaseResult:
    lam: float
    theta: float
    quad_error: float
    bracket: tuple[float, float]
    kernel_integral: float

    @property
    def cos(self) -> float:
        return math.cos(self.theta)

    @property
    def sin(self) -> float:
        return math.sin(self.theta)


def phase_bracket(model: ExponentModel) -> tuple[float, float]:
    a = model.alpha_star
    upper = math.pi / a - math.pi / 2 if a is not None else math.pi / 2
    return 0.0, upper


def kernel_integral(model: ExponentModel, lam: float, tol: Tolerances = DEFAULT):
    """``int_0^inf k_lam(lam s) ds`` as a QuadResult."""
    ev = KernelEvaluator(model, lam, tol)
    f = ev.scaled
    head = integrate_adaptive(
        f, 0.0, 2.0, 0.5 * tol.theta_abs, tol.theta_rel, tol.quad_limit, points=[0.5, 1.0]
    )
    tail = integrate_power_tail(
        f, 2.0, 0.5 * tol.theta_abs, tol.theta_rel,
        min_upper=max(2e4, tol.tail_scale / lam), limit=tol.quad_limit,
    )
    return head + tail


def theta(model: ExponentModel, lam: float, tol: Tolerances = DEFAULT) -> PhaseResult:
    """Phase shift ``theta_lam`` with an absolute error estimate.

    Raises :class:`PhaseBracketError` if the result leaves
    ``[0, pi/alpha_star - pi/2]`` by more than ten error estimates.
    """
    lam = float(lam)
    if not (lam > 0 and math.isfinite(lam)):
        raise ValueError(f"lambda must be positive and finite, got {lam}")
    res = kernel_integral(model, lam, tol)
    z = 2.0 / math.pi * res.value
    th = math.atan(z)
    err = 2.0 / math.pi * res.abs_error / (1.0 + z * z)
    lo, hi = phase_bracket(model)
    slack = 10.0 * err + 1e-13
    if th < lo - slack or th > hi + slack:
        raise PhaseBracketError(
            f"theta({lam:.6g}) = {th:.15g} outside [{lo:.15g}, {hi:.15g}] "
            f"(error estimate {err:.3g}) for {model.name}"
        )
    return PhaseResult(lam, th, err, (lo, hi), res.value)


def _threads() -> int:
    try:
        return max(1, int(os.environ.get("LEVYHIT_THREADS", "1")))
    except ValueError:
        return 1


def theta_grid(
    model: ExponentModel, lambdas: Iterable[float], tol: Tolerances = DEFAULT,
    threads: int | None = None,
) -> list[PhaseResult]:
    """Batch evaluation; results come back in input order regardless of threading."""
    lams = [float(v) for v in lambdas]
    n = threads or _threads()
    if n <= 1 or len(lams) < 2:
        return [theta(model, v, tol) for v in lams]
    with ThreadPoolExecutor(max_workers=n) as pool:
        return list(pool.map(lambda v: theta(model, v, tol), lams))


class PhaseCache:
    """Thread-safe memo of ``theta`` keyed by ``(model, lam)``.

    Models hash by identity, so entries disappear with the model.
    """

    def __init__(self):
        self._lock = threading.Lock()
        self._store: "weakref.WeakKeyDictionary[ExponentModel, dict]" = weakref.WeakKeyDictionary()

    def get(self, model: ExponentModel, lam: float, tol: Tolerances = DEFAULT) -> PhaseResult:
        key = (lam, tol)
        with self._lock:
            table = self._store.setdefault(model, {})
            hit = table.get(key)
        if hit is not None:
            return hit
        res = theta(model, lam, tol)
        with self._lock:
            table.setdefault(key, res)
        return res

    def many(self, model: ExponentModel, lams: Sequence[float], tol: Tolerances = DEFAULT):
        return [self.get(model, float(v), tol) for v in lams]

    def clear(self) -> None:
        with self._lock:
            self._store.clear()


PHASES = PhaseCache()
