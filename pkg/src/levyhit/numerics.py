"""Shared numerical substrate.

Vectorised adaptive Gauss-Kronrod quadrature, power-law tail integration,
half-period oscillatory summation with iterated Aitken acceleration,
incomplete gamma functions and a bracketed root finder.

All integrands passed to these routines must accept a 1-D ``numpy`` array
and return an array of the same shape.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np
from scipy import optimize

Vectorized = Callable[[np.ndarray], np.ndarray]

EPS = np.finfo(float).eps
EULER_GAMMA = 0.57721566490153286060651209008240243


class NumericalError(RuntimeError):
    """Raised when a numerical routine cannot reach its contract."""


class IntegrationError(NumericalError):
    pass


@dataclass(frozen=True)
class QuadResult:
    value: float
    abs_error: float
    evaluations: int = 0

    def __add__(self, other: "QuadResult") -> "QuadResult":
        return QuadResult(
            self.value + other.value,
            self.abs_error + other.abs_error,
            self.evaluations + other.evaluations,
        )

    def __neg__(self) -> "QuadResult":
        return QuadResult(-self.value, self.abs_error, self.evaluations)

    def __sub__(self, other: "QuadResult") -> "QuadResult":
        return self + (-other)

    def scaled(self, c: float) -> "QuadResult":
        return QuadResult(c * self.value, abs(c) * self.abs_error, self.evaluations)


# ---------------------------------------------------------------------------
# Gauss-Kronrod 7-15
# ---------------------------------------------------------------------------

_XK = np.array([
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
])
_WK = np.array([
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
])
_WK0 = 0.209482141084727828012999174891714
_WG = np.array([
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
])
_WG0 = 0.417959183673469387755102040816327

NODES = np.concatenate([-_XK, [0.0], _XK[::-1]])
W_KRONROD = np.concatenate([_WK, [_WK0], _WK[::-1]])
W_GAUSS = np.zeros(15)
W_GAUSS[[1, 3, 5]] = _WG
W_GAUSS[7] = _WG0
W_GAUSS[[13, 11, 9]] = _WG


def gk15(f: Vectorized, a: np.ndarray, b: np.ndarray):
    """Apply the 7-15 Gauss-Kronrod pair to every interval ``[a_i, b_i]``.

    Returns ``(integral, error, roundoff_floor)`` arrays.  The error estimate
    is the QUADPACK heuristic built from ``|K15 - G7|``.
    """
    a = np.atleast_1d(np.asarray(a, dtype=float))
    b = np.atleast_1d(np.asarray(b, dtype=float))
    centre = 0.5 * (a + b)
    half = 0.5 * (b - a)
    x = centre[:, None] + half[:, None] * NODES[None, :]
    fx = np.asarray(f(x.ravel()), dtype=float).reshape(x.shape)
    if not np.all(np.isfinite(fx)):
        bad = x[~np.isfinite(fx)][0]
        raise IntegrationError(f"integrand is not finite at {bad!r}")
    resk = fx @ W_KRONROD
    resg = fx @ W_GAUSS
    mean = 0.5 * resk
    resabs = np.abs(fx) @ W_KRONROD
    resasc = np.abs(fx - mean[:, None]) @ W_KRONROD
    ah = np.abs(half)
    err = np.abs(resk - resg) * ah
    resasc = resasc * ah
    resabs = resabs * ah
    with np.errstate(divide="ignore", invalid="ignore"):
        scale = np.where(
            (resasc > 0) & (err > 0),
            np.minimum(1.0, (200.0 * err / np.where(resasc > 0, resasc, 1.0)) ** 1.5),
            1.0,
        )
    err = np.where((resasc > 0) & (err > 0), resasc * scale, err)
    floor = 50.0 * EPS * resabs
    err = np.maximum(err, floor)
    return resk * half, err, floor


def integrate_adaptive(
    f: Vectorized,
    a: float,
    b: float,
    abs_tol: float = 1e-10,
    rel_tol: float = 1e-8,
    limit: int = 2000,
    points: Sequence[float] | None = None,
) -> QuadResult:
    """Globally adaptive Gauss-Kronrod quadrature of ``f`` over ``[a, b]``.

    ``b`` may be ``inf``; the half line is mapped by ``x = a + u/(1-u)``.
    ``points`` are extra breakpoints.  Intervals are bisected deterministically,
    so the set of abscissae depends only on the breakpoints and on which
    intervals get refined.
    """
    if not a < b:
        raise ValueError(f"need a < b, got a={a}, b={b}")
    if math.isinf(b):
        if points:
            raise ValueError("breakpoints are not supported on a semi-infinite range")

        def g(u):
            w = 1.0 - u
            return f(a + u / w) / (w * w)

        return integrate_adaptive(g, 0.0, 1.0, abs_tol, rel_tol, limit)

    edges = [a]
    if points is not None:
        edges.extend(sorted(p for p in points if a < p < b))
    edges.append(b)
    lo = np.array(edges[:-1], dtype=float)
    hi = np.array(edges[1:], dtype=float)
    val, err, floor = gk15(f, lo, hi)
    evals = 15 * lo.size
    limit = max(limit, 4 * lo.size)
    while True:
        total = float(np.sum(val))
        total_err = float(np.sum(err))
        tol = max(abs_tol, rel_tol * abs(total))
        if total_err <= tol:
            break
        if np.all(err <= 2.0 * floor):
            # rounding dominates every estimate; nothing left to refine
            break
        if lo.size >= limit:
            raise IntegrationError(
                f"subdivision limit {limit} reached on [{a}, {b}]: "
                f"value {total:.6g}, error {total_err:.3g} > tol {tol:.3g}"
            )
        split = (err > tol / lo.size) & (err > 2.0 * floor)
        if not np.any(split):
            split = err == err.max()
        mid = 0.5 * (lo[split] + hi[split])
        new_lo = np.concatenate([lo[split], mid])
        new_hi = np.concatenate([mid, hi[split]])
        v2, e2, f2 = gk15(f, new_lo, new_hi)
        evals += 15 * new_lo.size
        keep = ~split
        lo = np.concatenate([lo[keep], new_lo])
        hi = np.concatenate([hi[keep], new_hi])
        val = np.concatenate([val[keep], v2])
        err = np.concatenate([err[keep], e2])
        floor = np.concatenate([floor[keep], f2])
    return QuadResult(total, total_err, evals)


# ---------------------------------------------------------------------------
# Semi-infinite integrals with power-law decay
# ---------------------------------------------------------------------------

def local_decay_exponent(f: Vectorized, s: float, h: float = 0.01) -> float:
    """Return ``-d log f / d log s`` at ``s`` by a symmetric difference."""
    vals = f(np.array([s * math.exp(-h), s * math.exp(h)]))
    if vals[0] <= 0 or vals[1] <= 0:
        return math.nan
    return -(math.log(vals[1]) - math.log(vals[0])) / (2 * h)


def integrate_power_tail(
    f: Vectorized,
    a: float,
    abs_tol: float = 1e-12,
    rel_tol: float = 1e-10,
    min_upper: float | None = None,
    max_upper: float = 1e200,
    limit: int = 2000,
) -> QuadResult:
    """Integrate a non-negative, eventually power-law decaying ``f`` on ``[a, inf)``.

    The range ``[a, S]`` is integrated in ``log s`` decade by decade; the
    remainder beyond ``S`` is extrapolated as ``f(S) S / (p - 1)`` with ``p``
    the measured local decay exponent.  ``S`` grows until the extrapolation
    is stable (change in ``p`` over the last decade times the remainder is
    below tolerance).  ``min_upper`` forces integration at least that far,
    which is how callers skip over known regime changes.
    """
    if a <= 0:
        raise ValueError("integrate_power_tail needs a > 0")

    def g(u):
        s = np.exp(u)
        return f(s) * s

    ln10 = math.log(10.0)
    u = math.log(a)
    target = math.log(max(min_upper or a * 1e4, a * 1e4))
    n_dec = max(1, math.ceil((target - u) / ln10))
    u_end = u + n_dec * ln10
    res = integrate_adaptive(
        g, u, u_end, abs_tol, rel_tol, limit,
        points=[u + k * ln10 for k in range(1, n_dec)],
    )
    p_prev = local_decay_exponent(f, math.exp(u_end - ln10))
    while True:
        s_end = math.exp(u_end)
        f_end = float(f(np.array([s_end]))[0])
        tol = max(abs_tol, rel_tol * abs(res.value))
        if f_end == 0.0:
            return res
        p = local_decay_exponent(f, s_end)
        if f_end < 0 or not math.isfinite(p):
            if abs(f_end) * s_end <= tol:
                return QuadResult(res.value, res.abs_error + abs(f_end) * s_end, res.evaluations)
            raise IntegrationError(f"integrand changes sign in the tail near s={s_end:.3g}")
        if p > 1.0:
            rem = f_end * s_end / (p - 1.0)
            drift = abs(p - p_prev) if math.isfinite(p_prev) else abs(p)
            rem_err = rem * drift / (p - 1.0) + 1e-3 * rem * EPS ** 0.5
            if rem_err <= 0.1 * tol or (rem <= 0.01 * tol):
                return QuadResult(res.value + rem, res.abs_error + rem_err, res.evaluations + 4)
        if s_end * 10 > max_upper:
            if p > 1.0:
                return QuadResult(res.value + rem, res.abs_error + rem_err, res.evaluations + 4)
            raise IntegrationError(
                f"integrand does not decay faster than 1/s (local exponent {p:.4g})"
            )
        piece = integrate_adaptive(g, u_end, u_end + ln10, abs_tol * 0.1, rel_tol, limit)
        res = res + piece
        u_end += ln10
        p_prev = p


# ---------------------------------------------------------------------------
# Oscillatory integrals
# ---------------------------------------------------------------------------

def aitken_iterated(partial_sums: Sequence[float]) -> tuple[float, float]:
    """Iterated Aitken delta-squared extrapolation of a sequence of partial sums.

    Returns ``(limit estimate, error estimate)``; the error is the change
    between the last two extrapolation columns.
    """
    s = np.asarray(partial_sums, dtype=float)
    if s.size < 3:
        return float(s[-1]), float(abs(s[-1] - s[-2])) if s.size > 1 else math.inf
    prev_last = float(s[-1])
    while s.size >= 3:
        d1 = s[1:-1] - s[:-2]
        d2 = s[2:] - s[1:-1]
        den = d2 - d1
        with np.errstate(divide="ignore", invalid="ignore"):
            nxt = np.where(den != 0, s[2:] - d2 * d2 / den, s[2:])
        if not np.all(np.isfinite(nxt)):
            break
        prev_last, s = float(s[-1]), nxt
    return float(s[-1]), abs(float(s[-1]) - prev_last)


def integrate_oscillatory(
    f_amp: Vectorized,
    freq: float,
    start: float,
    abs_tol: float = 1e-12,
    rel_tol: float = 0.0,
    split: float | None = None,
    n_terms: int = 12,
    max_terms: int = 400,
    limit: int = 4000,
) -> QuadResult:
    """Compute ``int_start^inf f_amp(s) cos(freq s) ds``.

    The range up to the first zero of the cosine beyond ``split`` is handled
    by adaptive quadrature with every zero used as a breakpoint.  The rest is
    cut at successive zeros (half periods); the resulting alternating series
    of panel integrals is summed with iterated Aitken extrapolation.
    ``f_amp`` should be positive and slowly varying beyond ``split``.
    """
    if freq < 0:
        raise ValueError("freq must be non-negative")
    if freq == 0.0:
        # no oscillation: smooth head, then the power-law tail
        a = max(start, 1.0, split or 0.0)
        head = QuadResult(0.0, 0.0, 0)
        if a > start:
            head = integrate_adaptive(f_amp, start, a, 0.5 * abs_tol, rel_tol, limit)
        return head + integrate_power_tail(f_amp, a, 0.5 * abs_tol, rel_tol, limit=limit)

    def g(s):
        return f_amp(s) * np.cos(freq * s)

    half = math.pi / freq
    k0 = math.ceil((freq * start - 0.5 * math.pi) / math.pi)
    z0 = (0.5 * math.pi + k0 * math.pi) / freq
    if z0 < start:
        z0 += half
    split = start if split is None else max(split, start)
    m = max(0, math.ceil((split - z0) / half))
    zeros = [(0.5 * math.pi + (k0 + j) * math.pi) / freq for j in range(m + 1)]
    z_end = zeros[-1]
    if z_end > start:
        head = integrate_adaptive(
            g, start, z_end, abs_tol * 0.25, rel_tol, max(limit, 8 * (m + 1)),
            points=zeros[:-1],
        )
    else:
        head = QuadResult(0.0, 0.0, 0)

    k_first = k0 + m
    n = max(n_terms, 4)
    panels = np.empty(0)
    panel_err = np.empty(0)
    evals = head.evaluations
    while True:
        need = n - panels.size
        if need > 0:
            ks = np.arange(k_first + panels.size, k_first + n)
            lo = (0.5 * math.pi + ks * math.pi) / freq
            hi = lo + half
            val, err, _ = gk15(g, lo, hi)
            evals += 15 * lo.size
            loose = err > 1e-3 * abs_tol + 1e-13 * np.abs(val)
            for i in np.flatnonzero(loose):
                r = integrate_adaptive(g, lo[i], hi[i], 1e-3 * abs_tol, 1e-13, limit)
                val[i], err[i] = r.value, r.abs_error
                evals += r.evaluations
            panels = np.concatenate([panels, val])
            panel_err = np.concatenate([panel_err, err])
        signs = np.sign(panels[panels != 0])
        if signs.size > 2 and np.any(signs[1:] == signs[:-1]):
            raise IntegrationError(
                f"panel integrals do not alternate (freq={freq:.4g}, start={start:.4g})"
            )
        sums = np.cumsum(panels)
        est, acc_err = aitken_iterated(sums)
        est2, _ = aitken_iterated(sums[:-2])
        acc_err = max(acc_err, abs(est - est2))
        tol = max(abs_tol, rel_tol * abs(head.value + est))
        if acc_err <= 0.5 * tol or n >= max_terms:
            if acc_err > 0.5 * tol and acc_err > 10 * tol:
                raise IntegrationError(
                    f"oscillatory tail acceleration did not converge: "
                    f"estimate {est:.6g}, last partial sums {sums[-3:]}"
                )
            break
        n = min(2 * n, max_terms)
    tail = QuadResult(est, acc_err + float(panel_err.sum()), evals - head.evaluations)
    return head + tail


def cosine_difference_integral(
    f_amp: Vectorized,
    freq: float,
    split: float,
    abs_tol: float = 1e-12,
    rel_tol: float = 1e-10,
    min_upper: float | None = None,
    n_terms: int = 12,
    max_terms: int = 400,
    inner_points: Sequence[float] = (),
) -> QuadResult:
    """Compute ``int_0^inf (1 - cos(freq s)) f_amp(s) ds`` without cancellation.

    On ``[0, s_c]`` with ``s_c = max(split, 2/freq)`` the integrand is formed
    as ``2 sin^2(freq s / 2) f_amp(s)``; beyond ``s_c`` it is the monotone
    tail of ``f_amp`` minus an accelerated oscillatory tail.
    """
    if freq <= 0:
        return QuadResult(0.0, 0.0, 0)
    s_c = max(split, 2.0 / freq)

    def g(s):
        h = np.sin(0.5 * freq * s)
        return 2.0 * h * h * f_amp(s)

    # geometric breakpoints resolve both the s -> 0 region and small splits
    n_geo = 48
    pts = [s_c * 2.0 ** (-k) for k in range(1, n_geo)]
    pts.extend(p for p in inner_points if 0 < p < s_c)
    head = integrate_adaptive(g, 0.0, s_c, abs_tol * 0.25, rel_tol, 4000, points=pts)
    mono = integrate_power_tail(f_amp, s_c, abs_tol * 0.25, rel_tol, min_upper=min_upper)
    osc = integrate_oscillatory(
        f_amp, freq, s_c, abs_tol * 0.25, rel_tol, n_terms=n_terms, max_terms=max_terms,
    )
    return head + mono - osc


# ---------------------------------------------------------------------------
# Incomplete gamma functions
# ---------------------------------------------------------------------------

def _gamma_series(s: float, z: float) -> float:
    """Regularisation-free series ``gamma(s, z) = z^s e^{-z} sum z^k / (s)_{k+1}``."""
    term = 1.0 / s
    total = term
    k = 0
    while True:
        k += 1
        term *= z / (s + k)
        total += term
        if abs(term) < abs(total) * 1e-17:
            break
        if k > 10000:
            raise NumericalError("incomplete gamma series did not converge")
    return total * math.exp(-z + s * math.log(z))


def _gamma_cf(s: float, z: float) -> float:
    """Continued fraction (modified Lentz) for ``Gamma(s, z)``, valid for ``z > s + 1``."""
    tiny = 1e-300
    b = z + 1.0 - s
    c = 1.0 / tiny
    d = 1.0 / b
    h = d
    for i in range(1, 10000):
        an = -i * (i - s)
        b += 2.0
        d = an * d + b
        if abs(d) < tiny:
            d = tiny
        c = b + an / c
        if abs(c) < tiny:
            c = tiny
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < 1e-16:
            return h * math.exp(-z + s * math.log(z))
    raise NumericalError("incomplete gamma continued fraction did not converge")


def _expint_e1(z: float) -> float:
    if z < 1.0:
        total = -EULER_GAMMA - math.log(z)
        term = 1.0
        k = 0
        while True:
            k += 1
            term *= -z / k
            contrib = -term / k
            total += contrib
            if abs(contrib) < 1e-17 * abs(total):
                return total
    tiny = 1e-300
    b = z + 1.0
    c = 1.0 / tiny
    d = 1.0 / b
    h = d
    for i in range(1, 10000):
        an = -float(i * i)
        b += 2.0
        d = 1.0 / (an * d + b)
        c = b + an / c
        delta = c * d
        h *= delta
        if abs(delta - 1.0) < 1e-16:
            return h * math.exp(-z)
    raise NumericalError("E1 continued fraction did not converge")


def _upper_small_s(s: float, z: float) -> float:
    # Gamma(s, z) = (Gamma(s+1) - z^s)/s - z^s sum_{k>=1} (-z)^k / (k! (s+k))
    lead = (math.expm1(math.lgamma(1.0 + s)) - math.expm1(s * math.log(z))) / s
    term = 1.0
    acc = 0.0
    k = 0
    while True:
        k += 1
        term *= -z / k
        contrib = term / (s + k)
        acc += contrib
        if abs(contrib) < 1e-17 * max(abs(acc), 1e-300):
            break
    return lead - math.exp(s * math.log(z)) * acc


def inc_gamma_lower(s: float, z: float) -> float:
    """Lower incomplete gamma function ``gamma(s; z) = int_0^z t^{s-1} e^{-t} dt``."""
    if not (s > 0 and math.isfinite(s)):
        raise ValueError(f"lower incomplete gamma needs s > 0, got {s}")
    if not (z >= 0):
        raise ValueError(f"lower incomplete gamma needs z >= 0, got {z}")
    if z == 0:
        return 0.0
    if math.isinf(z):
        return math.gamma(s)
    if z < s + 1.0:
        return _gamma_series(s, z)
    return math.gamma(s) - _gamma_cf(s, z)


def inc_gamma_upper(s: float, z: float) -> float:
    """Upper incomplete gamma function ``Gamma(s; z) = int_z^inf t^{s-1} e^{-t} dt``.

    ``s = 0`` gives the exponential integral ``E_1(z)``.
    """
    if not (s >= 0 and math.isfinite(s)):
        raise ValueError(f"upper incomplete gamma needs s >= 0, got {s}")
    if not (z > 0):
        raise ValueError(f"upper incomplete gamma needs z > 0, got {z}")
    if math.isinf(z):
        return 0.0
    if s == 0:
        return _expint_e1(z)
    if z >= s + 1.0:
        return _gamma_cf(s, z)
    if s < 0.1 and z < 1.0:
        return _upper_small_s(s, z)
    return math.gamma(s) - _gamma_series(s, z)


# ---------------------------------------------------------------------------
# Root finding
# ---------------------------------------------------------------------------

def find_root_bracketed(
    f: Callable[[float], float], lo: float, hi: float, rtol: float = 1e-13
) -> float:
    """Brent root of ``f`` on ``[lo, hi]``; raises ``ValueError`` if not bracketed."""
    flo, fhi = f(lo), f(hi)
    if not (math.isfinite(flo) and math.isfinite(fhi)):
        raise ValueError(f"non-finite function value at bracket ends: f({lo})={flo}, f({hi})={fhi}")
    if flo == 0:
        return lo
    if fhi == 0:
        return hi
    if flo * fhi > 0:
        raise ValueError(f"root not bracketed: f({lo})={flo:.6g}, f({hi})={fhi:.6g}")
    return optimize.brentq(f, lo, hi, xtol=1e-300, rtol=max(rtol, 4 * EPS), maxiter=500)
