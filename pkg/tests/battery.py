"""Known-value quadrature battery shared by the numerics and acceptance tests."""

import math

import numpy as np

from levyhit.numerics import (
    cosine_difference_integral,
    integrate_adaptive,
    integrate_oscillatory,
    integrate_power_tail,
)

TOL = 1e-10


def _adaptive(f, a, b, **kw):
    return lambda: integrate_adaptive(f, a, b, abs_tol=1e-13, rel_tol=1e-12, **kw)


QUADRATURE = [
    ("x^2 on [0,1]", _adaptive(lambda x: x * x, 0.0, 1.0), 1.0 / 3.0),
    ("sin on [0,pi]", _adaptive(np.sin, 0.0, math.pi), 2.0),
    ("exp(-x^2) on [0,inf)", _adaptive(lambda x: np.exp(-x * x), 0.0, math.inf), math.sqrt(math.pi) / 2),
    ("log x on [0,1]", _adaptive(np.log, 0.0, 1.0), -1.0),
    ("x^-1/2 on [0,1]", _adaptive(lambda x: 1.0 / np.sqrt(x), 0.0, 1.0), 2.0),
    ("1/(1+x^2) on [0,inf)", _adaptive(lambda x: 1.0 / (1.0 + x * x), 0.0, math.inf), math.pi / 2),
    ("4/(1+x^2) on [0,1]", _adaptive(lambda x: 4.0 / (1.0 + x * x), 0.0, 1.0), math.pi),
    ("x^3/(e^x-1) on [0,inf)",
     _adaptive(lambda x: np.where(x > 0, x ** 3 * np.exp(-x) / -np.expm1(-np.maximum(x, 1e-300)), 0.0),
               0.0, math.inf),
     math.pi ** 4 / 15),
    ("exp(-x) cos x on [0,inf)", _adaptive(lambda x: np.exp(-x) * np.cos(x), 0.0, math.inf), 0.5),
    ("cos x/(1+x^2) on [0,inf)",
     lambda: integrate_oscillatory(lambda x: 1.0 / (1.0 + x * x), 1.0, 0.0, abs_tol=1e-13, rel_tol=1e-12),
     math.pi / (2 * math.e)),
    ("(1-cos x)/x^2 on [0,inf)",
     lambda: cosine_difference_integral(lambda x: 1.0 / (x * x), 1.0, 2.0, abs_tol=1e-13, rel_tol=1e-12),
     math.pi / 2),
    ("x^-3/2 on [1,inf)",
     lambda: integrate_power_tail(lambda x: x ** -1.5, 1.0, abs_tol=1e-14, rel_tol=1e-12),
     2.0),
]


def run_quadrature():
    """Yield ``(name, value, reported_error, exact)`` for every battery entry."""
    for name, fn, exact in QUADRATURE:
        r = fn()
        yield name, r.value, r.abs_error, exact
