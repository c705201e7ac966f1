import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from levyhit.config import DEFAULT
from levyhit.eigenfunction import envelope, f, g, g_hat, potential_v
from levyhit.models import brownian, make_model
from levyhit.phase import theta
from levyhit.transforms import kernel

STABLE = make_model("stable", {"alpha": 1.5})
REL = make_model("relativistic", {"alpha": 1.5, "beta": 2.0})
MIXED = make_model("mixed_stable", {"alpha": 1.5, "beta": 2.0})
ALL = [STABLE, REL, MIXED]


def stable_v(alpha, x):
    # closed-form compensated potential of the symmetric alpha-stable process
    return abs(x) ** (alpha - 1) / (2 * math.gamma(alpha) * abs(math.cos(math.pi * alpha / 2)))


def dpsi(model, lam):
    """lam psi'(lam^2) = Psi'(lam)/2."""
    return 0.5 * float(model.dPsi(np.array([lam]))[0])


@pytest.mark.parametrize("model", ALL)
def test_origin_is_exact(model):
    s = f(model, 0.7, 0.0)
    assert s.f_value == 0.0
    assert s.g_value == s.theta.sin


def test_brownian_is_pure_sine():
    for lam, x in [(0.3, 0.1), (1.0, 2.0), (5.0, -0.7)]:
        assert f(brownian(), lam, x).f_value == pytest.approx(math.sin(lam * abs(x)), abs=1e-15)


@settings(max_examples=25, deadline=None)
@given(lam=st.floats(1e-2, 1e2), w=st.floats(1e-3, 30.0))
def test_stable_depends_on_product(lam, w):
    assert f(STABLE, lam, w / lam).f_value == pytest.approx(f(STABLE, 1.0, w).f_value, abs=1e-9)


@pytest.mark.parametrize("model", ALL)
@settings(max_examples=15, deadline=None)
@given(lam=st.floats(1e-2, 1e2), x=st.floats(1e-3, 1e2))
def test_bounded_and_symmetric(model, lam, x):
    s = f(model, lam, x)
    assert abs(s.f_value) <= 2.0
    assert abs(s.g_value) <= s.theta.sin + 1e-9
    assert f(model, lam, -x).f_value == s.f_value


@pytest.mark.parametrize("model", ALL)
@pytest.mark.parametrize("lam", [0.1, 1.0, 10.0])
def test_switch_between_forms_is_continuous(model, lam):
    w = DEFAULT.diff_switch
    below = f(model, lam, w * (1 - 1e-10) / lam).f_value
    above = f(model, lam, w * (1 + 1e-10) / lam).f_value
    assert below == pytest.approx(above, abs=1e-9)


@pytest.mark.parametrize("model", ALL)
def test_g_hat_is_scaled_kernel(model):
    th = theta(model, 2.0)
    xi = np.array([0.5, 2.0, 9.0])
    np.testing.assert_allclose(g_hat(model, 2.0, xi), 2 * th.cos / 2.0 * kernel(model, 2.0, xi), rtol=1e-15)
    assert g(model, 2.0, 0.3) == f(model, 2.0, 0.3).g_value


@pytest.mark.parametrize("x", [0.1, 1.0, 4.0])
def test_potential_closed_forms(x):
    assert potential_v(STABLE, x).value == pytest.approx(stable_v(1.5, x), rel=1e-8)
    assert potential_v(brownian(), x).value == pytest.approx(abs(x) / 2, rel=1e-8)
    assert potential_v(make_model("stable", {"alpha": 1.2}), x).value == pytest.approx(stable_v(1.2, x), rel=1e-7)


def test_potential_example():
    assert potential_v(STABLE, 1.0).value == pytest.approx(math.sqrt(2 / math.pi), rel=1e-9)


@pytest.mark.parametrize("model", ALL)
@pytest.mark.parametrize("lam", [1e-2, 1e-3])
def test_small_lambda_limit(model, lam):
    s = f(model, lam, 1.0)
    ratio = s.f_value / (2 * dpsi(model, lam) * s.theta.cos) / potential_v(model, 1.0).value
    assert ratio == pytest.approx(1.0, rel=1e-2)


@pytest.mark.parametrize("model", ALL)
def test_small_x_limit(model):
    lam, gam = 1.0, model.rv_index_infinity
    th = theta(model, lam)
    limit = dpsi(model, lam) * th.cos / (math.gamma(gam) * abs(math.cos(gam * math.pi / 2)))
    gaps = [abs(x * model.psi_scalar(1 / x) * f(model, lam, x).f_value / limit - 1) for x in (1e-2, 1e-3, 1e-4)]
    assert gaps[-1] < 1e-3
    assert gaps[-1] < gaps[0]


@pytest.mark.parametrize("model", [STABLE, REL])
def test_sandwich_on_grid(model):
    bad = []
    for lam in np.logspace(-2, 2, 8):
        for x in np.logspace(-2, 2, 8):
            lo, hi, ok = envelope(model, lam, x)
            if ok:
                v = f(model, lam, x).f_value
                if not lo <= v <= hi:
                    bad.append((lam, x, v, lo, hi))
    assert bad == []


def test_envelope_example():
    lo, hi, ok = envelope(STABLE, 1.0, 0.1)
    v = f(STABLE, 1.0, 0.1).f_value
    assert ok and lo <= v <= hi
    scale = 0.75 / (0.1 * 10 ** 1.5)
    assert lo == pytest.approx(0.5 / math.pi * scale)
    assert hi == pytest.approx(80 / math.pi * scale)


def test_phase_mismatch_rejected():
    with pytest.raises(ValueError):
        f(STABLE, 1.0, 0.5, phase=theta(STABLE, 2.0))


@pytest.mark.parametrize("model", [STABLE, REL])
@pytest.mark.parametrize("lam", [0.1, 1.0, 10.0])
def test_modulus_of_continuity_diagnostic(model, lam):
    from scipy.integrate import quad

    for x1, x2 in [(0.1, 0.2), (0.5, 0.55), (1.0, 3.0), (0.01, 0.02)]:
        dx, sx = abs(x1 - x2), abs(x1 + x2)

        def integrand(xi):
            return min(xi * dx, 2.0) * min(xi * sx, 2.0) / model.psi_scalar(xi)

        pts = sorted({2.0 / dx, 2.0 / sx})
        head, _ = quad(integrand, 2 * lam, max(pts[-1], 2 * lam) * 10, points=[p for p in pts if p > 2 * lam], limit=500)
        tail_, _ = quad(integrand, max(pts[-1], 2 * lam) * 10, np.inf)
        bound = 3 * lam * dx + 2 * dpsi(model, lam) / math.pi * (head + tail_)
        assert abs(f(model, lam, x1).f_value - f(model, lam, x2).f_value) <= bound
