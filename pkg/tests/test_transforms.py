import math

import mpmath as mp
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from levyhit.models import brownian, make_model
from levyhit.transforms import KernelEvaluator, kernel

STABLE = make_model("stable", {"alpha": 1.5})
REL = make_model("relativistic", {"alpha": 1.5, "beta": 2.0})
MIXED = make_model("mixed_stable", {"alpha": 1.5, "beta": 2.0})


def mp_kernel(psi, lam, xi, dps=60):
    """Direct formula in high precision; psi acts on u = xi^2."""
    mp.mp.dps = dps
    s0, u = mp.mpf(lam) ** 2, mp.mpf(xi) ** 2
    d1 = mp.diff(psi, s0)
    return float(s0 * d1 / (psi(u) - psi(s0)) - s0 / (u - s0))


PSI_SMALL = {
    "stable": lambda u: u ** mp.mpf(0.75),
    "relativistic": lambda u: (1 + u) ** mp.mpf(0.75) - 1,
    "mixed": lambda u: u ** mp.mpf(0.75) + u,
}
MODELS = {"stable": STABLE, "relativistic": REL, "mixed": MIXED}


def test_stable_example_value():
    v = kernel(STABLE, 1.0, 2.0)
    assert v == pytest.approx(mp_kernel(PSI_SMALL["stable"], 1.0, 2.0), rel=1e-13)
    assert v == pytest.approx(0.07685528717518703, rel=1e-13)


@pytest.mark.parametrize("name", list(MODELS))
@settings(max_examples=30, deadline=None)
@given(lam=st.floats(1e-3, 1e3), ratio=st.floats(1e-3, 1e3))
def test_kernel_matches_high_precision(name, lam, ratio):
    if abs(ratio - 1.0) < 1e-4:
        ratio = 1.0 + 1e-4
    v = kernel(MODELS[name], lam, lam * ratio)
    ref = mp_kernel(PSI_SMALL[name], lam, lam * ratio)
    assert v == pytest.approx(ref, rel=1e-9, abs=1e-13)


@pytest.mark.parametrize("model", [STABLE, REL, MIXED])
@pytest.mark.parametrize("lam", [1e-3, 0.3, 1.0, 7.0, 1e3])
def test_removable_singularity(model, lam):
    ev = KernelEvaluator(model, lam)
    assert ev(lam) == pytest.approx(ev.k_lambda, rel=1e-13)
    assert ev(lam * (1 + 1e-9)) == pytest.approx(ev.k_lambda, rel=1e-8)
    assert ev.k_lambda == pytest.approx(-lam ** 2 * ev.d2psi0 / (2 * ev.dpsi0))


@pytest.mark.parametrize("model", [STABLE, REL, MIXED])
@pytest.mark.parametrize("lam", [1e-2, 1.0, 1e2])
def test_continuous_across_window_edges(model, lam):
    ev = KernelEvaluator(model, lam)
    for edge in (1 - ev.window, 1 + ev.window):
        xi = lam * math.sqrt(edge)
        lo, hi = ev(xi * (1 - 1e-12)), ev(xi * (1 + 1e-12))
        assert lo == pytest.approx(hi, rel=1e-10)


@pytest.mark.parametrize("model", [STABLE, REL, MIXED])
def test_boundary_value(model):
    ev = KernelEvaluator(model, 0.8)
    assert ev(0.8e-7) == pytest.approx(ev.boundary_value, rel=1e-6)
    assert ev.boundary_value == pytest.approx(1 - 0.64 * ev.dpsi0 / ev.psi0)


def test_brownian_kernel_vanishes():
    xi = np.logspace(-3, 3, 50)
    assert np.all(np.abs(kernel(brownian(), 1.3, xi)) < 1e-14)


@settings(max_examples=50, deadline=None)
@given(lam=st.floats(1e-2, 1e2), s=st.floats(1e-3, 1e3))
def test_stable_kernel_depends_only_on_ratio(lam, s):
    assert kernel(STABLE, lam, lam * s) == pytest.approx(kernel(STABLE, 1.0, s), rel=1e-11, abs=1e-15)


def test_vector_and_scalar_agree():
    xi = np.array([0.1, 0.9, 1.0, 1.2, 5.0])
    vec = kernel(REL, 1.0, xi)
    assert np.allclose(vec, [kernel(REL, 1.0, v) for v in xi], rtol=1e-14, atol=0)


def test_bad_lambda():
    with pytest.raises(ValueError):
        KernelEvaluator(STABLE, 0.0)


@pytest.mark.parametrize("model", [STABLE, REL, MIXED, make_model("log_corrected"), make_model("wiener_poisson", {"c": 1.0})])
@pytest.mark.parametrize("lam", [1e-2, 1.0, 1e2])
def test_nonnegative_nonincreasing(model, lam):
    v = kernel(model, lam, lam * np.logspace(-4, 4, 801))
    assert np.all(v >= -1e-15)
    # the direct formula subtracts O(1) terms, so allow rounding-level wiggles
    assert np.all(np.diff(v) <= 1e-13 * np.abs(v[:-1]) + 1e-15)


@pytest.mark.parametrize("model", [REL, MIXED, make_model("wiener_poisson", {"c": 1.0})])
@pytest.mark.parametrize("lam", [1e-2, 1.0, 1e2])
def test_dominated_by_stable_reference(model, lam):
    ref = make_model("stable", {"alpha": model.alpha_star})
    xi = lam * np.logspace(-4, 4, 401)
    assert np.all(kernel(model, lam, xi) <= kernel(ref, lam, xi) * (1 + 1e-10) + 1e-15)
