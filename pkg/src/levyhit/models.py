"""Symmetric Lévy exponents with completely monotone jumps.

An exponent is stored in two coordinate systems: ``Psi(xi)`` on the real
line and ``psi(u) = Psi(sqrt(u))``.  Built-in families supply closed forms in
both, so second derivatives of ``psi`` never suffer cancellation.  Custom
models may supply only ``Psi``; ``psi`` derivatives are then derived.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Mapping

import numpy as np
from scipy import optimize

from .config import DEFAULT, Tolerances
from .numerics import find_root_bracketed

Triple = tuple[np.ndarray, np.ndarray, np.ndarray]
TripleEval = Callable[[np.ndarray], Triple]

FAMILIES = ("stable", "mixed_stable", "relativistic", "log_corrected", "wiener_poisson", "custom")

# positional parameter names per family
PARAM_NAMES = {
    "stable": ("alpha",),
    "mixed_stable": ("alpha", "beta"),
    "relativistic": ("alpha", "beta"),
    "log_corrected": (),
    "wiener_poisson": ("c",),
}


class ModelError(ValueError):
    """Invalid model parameters or a model violating the exponent axioms."""


@dataclass(frozen=True)
class ScalingReport:
    passes: bool
    alpha_star: float
    argmin: float
    grid_points: int
    margin: float

    def describe(self) -> str:
        verdict = "passes" if self.passes else "fails"
        return (
            f"scaling check {verdict}: alpha_star = {self.alpha_star:.12g} "
            f"(minimum of 1 + xi Psi''/Psi' at xi = {self.argmin:.6g}; "
            f"grid-based certification on {self.grid_points} points, not a proof)"
        )


@dataclass(frozen=True, eq=False)
class ExponentModel:
    """A symmetric exponent ``Psi`` with analytic first and second derivatives.

    Instances hash by identity so they can key caches; they are immutable and
    safe to share between threads.
    """

    name: str
    family: str
    params: Mapping[str, float]
    psi_eval: TripleEval
    small_psi_eval: TripleEval | None = None
    alpha_star: float | None = None
    beta_star: float = 2.0
    rv_index_zero: float | None = None
    rv_index_infinity: float | None = None
    scaling: ScalingReport | None = field(default=None, repr=False)

    # -- Psi coordinates -------------------------------------------------
    def evaluate(self, xi) -> Triple:
        """Return ``(Psi, Psi', Psi'')`` at ``xi`` (array or scalar, ``xi >= 0``)."""
        x = np.abs(np.asarray(xi, dtype=float))
        return self.psi_eval(x)

    def Psi(self, xi) -> np.ndarray:
        return self.evaluate(xi)[0]

    def dPsi(self, xi) -> np.ndarray:
        return self.evaluate(xi)[1]

    def d2Psi(self, xi) -> np.ndarray:
        return self.evaluate(xi)[2]

    def psi_scalar(self, xi: float) -> float:
        return float(self.evaluate(np.array([abs(xi)]))[0][0])

    # -- psi coordinates (u = xi^2) ---------------------------------------
    def evaluate_small(self, u) -> Triple:
        """Return ``(psi, psi', psi'')`` at ``u = xi^2``."""
        u = np.asarray(u, dtype=float)
        if self.small_psi_eval is not None:
            return self.small_psi_eval(u)
        r = np.sqrt(u)
        P, P1, P2 = self.psi_eval(r)
        d1 = P1 / (2.0 * r)
        d2 = (P2 - P1 / r) / (4.0 * u)
        return P, d1, d2

    @property
    def certified(self) -> bool:
        return self.alpha_star is not None

    def require_certified(self) -> float:
        if self.alpha_star is None:
            raise ModelError(
                f"model {self.name!r} does not pass the scaling check; "
                "hitting-time formulas are not valid for it"
            )
        return self.alpha_star

    def inverse(self, v: float, tol: Tolerances = DEFAULT) -> float:
        return psi_inverse(self, v, tol.inverse_rtol)

    def to_spec(self) -> dict:
        return {"family": self.family, "params": dict(self.params)}

    def __repr__(self) -> str:
        return f"ExponentModel({self.name!r})"


# ---------------------------------------------------------------------------
# Built-in families
# ---------------------------------------------------------------------------

def _stable(alpha: float):
    a = alpha

    def big(x):
        with np.errstate(divide="ignore", invalid="ignore"):
            p = x ** a
            p1 = a * x ** (a - 1)
            p2 = a * (a - 1) * x ** (a - 2)
        return p, p1, p2

    h = 0.5 * a

    def small(u):
        with np.errstate(divide="ignore", invalid="ignore"):
            return u ** h, h * u ** (h - 1), h * (h - 1) * u ** (h - 2)

    return big, small


def _mixed(alpha: float, beta: float):
    b1, s1 = _stable(alpha)
    b2, s2 = _stable(beta)

    def big(x):
        p, q = b1(x), b2(x)
        return p[0] + q[0], p[1] + q[1], p[2] + q[2]

    def small(u):
        p, q = s1(u), s2(u)
        return p[0] + q[0], p[1] + q[1], p[2] + q[2]

    return big, small


def _relativistic(alpha: float, beta: float):
    a, b = alpha, beta
    r = a / b

    def big(x):
        xb = x ** b
        base = 1.0 + xb
        p = np.expm1(r * np.log1p(xb))
        with np.errstate(divide="ignore", invalid="ignore"):
            p1 = a * x ** (b - 1) * base ** (r - 1)
            p2 = a * x ** (b - 2) * base ** (r - 2) * ((b - 1) + (a - 1) * xb)
        return p, p1, p2

    h = 0.5 * b

    def small(u):
        # psi(u) = (1 + u^h)^r - 1 with h = beta/2
        uh = u ** h
        base = 1.0 + uh
        p = np.expm1(r * np.log1p(uh))
        with np.errstate(divide="ignore", invalid="ignore"):
            d1 = r * h * u ** (h - 1) * base ** (r - 1)
            d2 = r * h * u ** (h - 2) * base ** (r - 2) * ((h - 1) + (r * h - 1) * uh)
        return p, d1, d2

    return big, small


# Taylor coefficients of u / log(1 + u) - 1 (Gregory coefficients with signs)
_GREGORY = np.array([
    1 / 2, -1 / 12, 1 / 24, -19 / 720, 3 / 160, -863 / 60480, 275 / 24192,
    -33953 / 3628800, 8183 / 1036800, -3250433 / 479001600, 4671 / 788480,
])


def _log_corrected_small(u):
    u = np.asarray(u, dtype=float)
    p = np.empty_like(u)
    d1 = np.empty_like(u)
    d2 = np.empty_like(u)
    lo = u < 0.1
    if np.any(lo):
        v = u[lo]
        k = np.arange(1, _GREGORY.size + 1)
        powv = v[:, None] ** (k[None, :] - 1)
        p[lo] = v * (powv @ _GREGORY)
        d1[lo] = powv @ (_GREGORY * k)
        c2 = (_GREGORY * k * (k - 1))[1:]
        d2[lo] = powv[:, :-1] @ c2
    hi = ~lo
    if np.any(hi):
        v = u[hi]
        L = np.log1p(v)
        w = 1.0 + v
        p[hi] = v / L - 1.0
        d1[hi] = 1.0 / L - v / (w * L * L)
        d2[hi] = -1.0 / (w * L * L) - 1.0 / (w * w * L * L) + 2.0 * v / (w * w * L ** 3)
    return p, d1, d2


def _log_corrected_big(x):
    x = np.asarray(x, dtype=float)
    u = x * x
    p, d1, d2 = _log_corrected_small(u)
    return p, 2.0 * x * d1, 2.0 * d1 + 4.0 * u * d2


def _wiener_poisson(c: float):
    def big(x):
        q = 1.0 + x * x
        p = 0.5 * x * x + c * x * x / q
        p1 = x + 2.0 * c * x / (q * q)
        p2 = 1.0 + 2.0 * c * (1.0 - 3.0 * x * x) / q ** 3
        return p, p1, p2

    def small(u):
        q = 1.0 + u
        return 0.5 * u + c * u / q, 0.5 + c / (q * q), -2.0 * c / q ** 3

    return big, small


def _coerce_params(family: str, params) -> dict:
    names = PARAM_NAMES[family]
    if params is None:
        params = {}
    if isinstance(params, Mapping):
        out = {k: float(v) for k, v in params.items()}
        unknown = set(out) - set(names)
        if unknown:
            raise ModelError(f"{family}: unknown parameters {sorted(unknown)}; expected {list(names)}")
    else:
        vals = list(params)
        if len(vals) != len(names):
            raise ModelError(f"{family}: expected {len(names)} parameters {list(names)}, got {len(vals)}")
        out = {k: float(v) for k, v in zip(names, vals)}
    missing = [k for k in names if k not in out]
    if missing:
        raise ModelError(f"{family}: missing parameters {missing}")
    for k, v in out.items():
        if not math.isfinite(v):
            raise ModelError(f"{family}: parameter {k} must be finite")
    return out


def make_model(
    family: str,
    params=None,
    *,
    psi_eval: TripleEval | None = None,
    small_psi_eval: TripleEval | None = None,
    rv_index_zero: float | None = None,
    rv_index_infinity: float | None = None,
    name: str | None = None,
    certify: bool = True,
    tol: Tolerances = DEFAULT,
) -> ExponentModel:
    """Build an exponent model and run the scaling certification.

    Built-in families take parameters as a list or a mapping:

    * ``stable``: ``alpha`` in (1, 2]; ``Psi = xi^alpha``.
    * ``mixed_stable``: ``1 < alpha < beta <= 2``; ``Psi = xi^alpha + xi^beta``.
    * ``relativistic``: ``1 < alpha < beta <= 2``;
      ``Psi = (1 + xi^beta)^(alpha/beta) - 1``.
    * ``log_corrected``: no parameters; ``Psi = xi^2 / log(1 + xi^2) - 1``.
    * ``wiener_poisson``: ``c >= 0``; ``Psi = xi^2/2 + c xi^2 / (1 + xi^2)``.
    * ``custom``: pass ``psi_eval`` returning ``(Psi, Psi', Psi'')`` on arrays,
      and declare regular-variation indices if they are known.
    """
    if family not in FAMILIES:
        raise ModelError(f"unknown family {family!r}; choose one of {FAMILIES}")
    if family == "custom":
        if psi_eval is None:
            raise ModelError("custom: psi_eval is required")
        p = dict(params or {})
        model = ExponentModel(
            name=name or "custom",
            family="custom",
            params=p,
            psi_eval=psi_eval,
            small_psi_eval=small_psi_eval,
            rv_index_zero=rv_index_zero,
            rv_index_infinity=rv_index_infinity,
        )
        return _certify(model, tol) if certify else model

    p = _coerce_params(family, params)
    if family == "stable":
        a = p["alpha"]
        if not 1.0 < a <= 2.0:
            raise ModelError(f"stable: need 1 < alpha <= 2, got alpha={a}")
        big, small = _stable(a)
        rv0 = rvi = a
        label = f"stable(alpha={a:g})"
    elif family in ("mixed_stable", "relativistic"):
        a, b = p["alpha"], p["beta"]
        if not 1.0 < a < b <= 2.0:
            raise ModelError(f"{family}: need 1 < alpha < beta <= 2, got alpha={a}, beta={b}")
        if family == "mixed_stable":
            big, small = _mixed(a, b)
            rv0, rvi = a, b
        else:
            big, small = _relativistic(a, b)
            rv0, rvi = b, a
        label = f"{family}(alpha={a:g}, beta={b:g})"
    elif family == "log_corrected":
        big, small = _log_corrected_big, _log_corrected_small
        rv0 = rvi = 2.0
        label = "log_corrected"
    else:
        c = p["c"]
        if c < 0:
            raise ModelError(f"wiener_poisson: need c >= 0, got c={c}")
        big, small = _wiener_poisson(c)
        rv0 = rvi = 2.0
        label = f"wiener_poisson(c={c:g})"

    # built-in families have a provable infimum of 1 + xi Psi''/Psi'
    known_inf = {"stable": p.get("alpha"), "mixed_stable": p.get("alpha"),
                 "relativistic": p.get("alpha")}.get(family)
    if family == "wiener_poisson" and p["c"] == 0:
        known_inf = 2.0
    model = ExponentModel(
        name=name or label,
        family=family,
        params=p,
        psi_eval=big,
        small_psi_eval=small,
        rv_index_zero=rv0 if rv_index_zero is None else rv_index_zero,
        rv_index_infinity=rvi if rv_index_infinity is None else rv_index_infinity,
    )
    return _certify(model, tol, known_inf) if certify else model


def brownian() -> ExponentModel:
    """``Psi(xi) = xi^2`` (Brownian motion run at twice the standard speed)."""
    return make_model("stable", [2.0])


def _certify(model: ExponentModel, tol: Tolerances, known_inf: float | None = None) -> ExponentModel:
    report = scaling_check(model, margin=tol.scaling_margin)
    if known_inf is not None and report.passes:
        # the grid only sees [1e-6, 1e6]; an analytic infimum attained at 0 or
        # infinity is smaller than anything sampled
        a = known_inf if report.alpha_star >= known_inf - 1e-12 else report.alpha_star
        report = ScalingReport(True, a, report.argmin,
                               report.grid_points, report.margin)
    return ExponentModel(
        name=model.name,
        family=model.family,
        params=model.params,
        psi_eval=model.psi_eval,
        small_psi_eval=model.small_psi_eval,
        alpha_star=min(report.alpha_star, 2.0) if report.passes else None,
        beta_star=2.0,
        rv_index_zero=model.rv_index_zero,
        rv_index_infinity=model.rv_index_infinity,
        scaling=report,
    )


def load_model(path: str | Path, tol: Tolerances = DEFAULT, **overrides) -> ExponentModel:
    """Load ``{"family": ..., "params": {...}}`` from a JSON file."""
    data = json.loads(Path(path).read_text())
    return model_from_spec(data, tol, **overrides)


def model_from_spec(data: Mapping, tol: Tolerances = DEFAULT, **overrides) -> ExponentModel:
    if not isinstance(data, Mapping) or "family" not in data:
        raise ModelError('model specification must be an object with a "family" key')
    family = data["family"]
    if family == "custom":
        raise ModelError("custom models are code-level only and cannot be loaded from JSON")
    params = dict(data.get("params") or {})
    params.update({k: v for k, v in overrides.items() if v is not None})
    return make_model(family, params, name=data.get("name"), tol=tol)


# ---------------------------------------------------------------------------
# Inverse and scaling certification
# ---------------------------------------------------------------------------

def psi_inverse(model: ExponentModel, v: float, rtol: float = 1e-13) -> float:
    """Return ``xi > 0`` with ``Psi(xi) = v``.

    The starting bracket comes from the power bounds
    ``(xi2/xi1)^alpha_star <= Psi(xi2)/Psi(xi1) <= (xi2/xi1)^2`` anchored at
    ``xi = 1``; it is widened geometrically if the model is uncertified or
    the bounds are violated.
    """
    v = float(v)
    if not (math.isfinite(v) and v > 0):
        raise ValueError(f"psi_inverse needs a finite positive value, got {v}")
    v1 = model.psi_scalar(1.0)
    ratio = v / v1
    a = model.alpha_star or 1.0
    e1, e2 = 0.5, 1.0 / a
    lo, hi = sorted((ratio ** e1, ratio ** e2))
    lo *= 0.99
    hi *= 1.01

    def g(logxi: float) -> float:
        return model.psi_scalar(math.exp(logxi)) / v - 1.0

    llo, lhi = math.log(lo), math.log(hi)
    for _ in range(200):
        if g(llo) < 0:
            break
        llo -= max(1.0, lhi - llo)
    for _ in range(200):
        if g(lhi) > 0:
            break
        lhi += max(1.0, lhi - llo)
    if not (g(llo) < 0 < g(lhi)):
        raise ValueError(f"could not bracket Psi^-1({v}); model is not increasing")
    # log-space root to rtol/2, then polish in xi to hit |Psi - v| <= rtol v
    root = math.exp(find_root_bracketed(g, llo, lhi, rtol=1e-15))
    lo_x, hi_x = root * (1 - 1e-12), root * (1 + 1e-12)
    if g(math.log(lo_x)) < 0 < g(math.log(hi_x)):
        root = find_root_bracketed(
            lambda z: model.psi_scalar(z) / v - 1.0, lo_x, hi_x, rtol=max(rtol * 1e-3, 1e-16)
        )
    return root


def scaling_ratio(model: ExponentModel, xi) -> np.ndarray:
    """``xi Psi''(xi) / Psi'(xi)``."""
    x = np.asarray(xi, dtype=float)
    _, p1, p2 = model.evaluate(x)
    return x * p2 / p1


def scaling_check(
    model: ExponentModel,
    grid: np.ndarray | None = None,
    margin: float = 1e-9,
) -> ScalingReport:
    """Grid certification of ``xi Psi''/Psi' >= alpha - 1``.

    ``alpha_star = 1 + min ratio`` over a log grid (default 401 points on
    ``[1e-6, 1e6]``), refined by bounded Brent minimisation in ``log xi``
    around each sampled local minimum.
    """
    if grid is None:
        grid = np.logspace(-6, 6, 401)
    grid = np.asarray(grid, dtype=float)
    if grid.size < 200 or grid.min() > 1e-6 * (1 + 1e-12) or grid.max() < 1e6 * (1 - 1e-12):
        raise ValueError("scaling grid must span [1e-6, 1e6] with at least 200 points")
    P, P1, P2 = model.evaluate(grid)
    if not (np.all(np.isfinite(P1)) and np.all(np.isfinite(P2))):
        raise ModelError(f"{model.name}: non-finite derivative on the scaling grid")
    if np.any(P1 <= 0) or np.any(P <= 0):
        bad = grid[(P1 <= 0) | (P <= 0)][0]
        raise ModelError(f"{model.name}: Psi or Psi' is not positive at xi={bad:.6g}")
    r = grid * P2 / P1
    logs = np.log(grid)
    best_i = int(np.argmin(r))
    best_val, best_x = float(r[best_i]), float(grid[best_i])
    n = r.size
    cand = [i for i in range(n) if (i == 0 or r[i] <= r[i - 1]) and (i == n - 1 or r[i] <= r[i + 1])]
    for i in cand:
        a, b = logs[max(i - 1, 0)], logs[min(i + 1, n - 1)]
        if a == b:
            continue
        res = optimize.minimize_scalar(
            lambda s: float(scaling_ratio(model, np.array([math.exp(s)]))[0]),
            bounds=(a, b),
            method="bounded",
            options={"xatol": 1e-10},
        )
        if res.fun < best_val:
            best_val, best_x = float(res.fun), float(math.exp(res.x))
    alpha_star = 1.0 + best_val
    return ScalingReport(
        passes=alpha_star > 1.0 + margin,
        alpha_star=alpha_star,
        argmin=best_x,
        grid_points=n,
        margin=margin,
    )
