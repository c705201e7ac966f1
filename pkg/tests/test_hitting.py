import math

import mpmath as mp
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from levyhit.hitting import (
    asymp_large_t,
    asymp_small_x,
    bound_corollary,
    bound_theorem,
    constants,
    ij_split,
    tail,
    tail_grid,
    tilde_constants,
)
from levyhit.models import ModelError, brownian, make_model
from levyhit.oracle import brownian_tail

STABLE = make_model("stable", {"alpha": 1.5})
REL = make_model("relativistic", {"alpha": 1.5, "beta": 2.0})
BM = brownian()


def mp_brownian(n, t, x):
    mp.mp.dps = 30
    return float((-1) ** n * mp.diff(lambda s: mp.erf(abs(x) / (2 * mp.sqrt(s))), mp.mpf(t), n))


@settings(max_examples=40, deadline=None)
@given(t=st.floats(1e-2, 1e3), x=st.floats(1e-2, 10.0))
def test_brownian_reflection(t, x):
    assert tail(BM, 0, t, x).value == pytest.approx(brownian_tail(t, x), rel=1e-9)


@pytest.mark.parametrize("n", [1, 2, 3])
@pytest.mark.parametrize("t,x", [(0.5, 0.3), (2.0, 1.0), (30.0, 4.0)])
def test_brownian_derivatives(n, t, x):
    assert tail(BM, n, t, x).value == pytest.approx(mp_brownian(n, t, x), rel=1e-8)


@settings(max_examples=10, deadline=None)
@given(t=st.floats(0.05, 50.0), x=st.floats(0.05, 5.0), c=st.floats(0.2, 5.0))
def test_stable_self_similarity(t, x, c):
    a = tail(STABLE, 0, t, x).value
    b = tail(STABLE, 0, t * c ** 1.5, x * c).value
    assert a == pytest.approx(b, rel=1e-8)


def test_monotone_and_in_unit_interval():
    ts = [0.01, 0.1, 1.0, 10.0, 100.0]
    vals = [tail(REL, 0, t, 0.5).value for t in ts]
    assert all(0.0 < v < 1.0 for v in vals)
    assert all(a > b for a, b in zip(vals, vals[1:]))
    xs = [0.05, 0.2, 1.0, 3.0]
    vals = [tail(REL, 0, 1.0, x).value for x in xs]
    assert all(a < b for a, b in zip(vals, vals[1:]))
    assert tail(REL, 0, 1.0, -0.2).value == tail(REL, 0, 1.0, 0.2).value


def test_threaded_grid_is_deterministic():
    pts = [(t, x) for t in (0.3, 3.0) for x in (0.2, 1.5)]
    serial = [r.value for r in tail_grid(STABLE, 0, pts, threads=1)]
    parallel = [r.value for r in tail_grid(STABLE, 0, pts, threads=3)]
    assert serial == parallel


def mp_constants(alpha, n):
    mp.mp.dps = 30
    a1 = mp.mpf(alpha) - 1
    a2 = a1 ** 2
    low = lambda s, z: mp.gammainc(s, 0, z)  # noqa: E731
    up = lambda s, z: mp.gammainc(s, z, mp.inf)  # noqa: E731
    c1 = a2 * low(n + mp.mpf(0.5), a2) / (4 * mp.pi ** 2)
    c2 = 60 * (low(n + 1 - 1 / mp.mpf(alpha), 1) + up(n + mp.mpf(0.5), 1)) / (mp.pi ** 2 * a1)
    excess = lambda s: 2 / mp.pi * s * up(n, a2 * s) - c1  # noqa: E731
    hi = mp.mpf(10)
    while excess(hi) > 0:
        hi *= 10
    lo = hi / 10
    assert excess(lo) > 0
    for _ in range(200):
        mid = mp.sqrt(lo * hi)
        lo, hi = (mid, hi) if excess(mid) > 0 else (lo, mid)
    c3 = hi
    return float(c1), float(c2), float(c3)


@pytest.mark.parametrize("alpha", [1.2, 1.5, 1.8, 2.0])
@pytest.mark.parametrize("n", [0, 1, 2])
def test_constants_match_mpmath(alpha, n):
    c = constants(alpha, n)
    c1, c2, c3 = mp_constants(alpha, n)
    assert c.C1 == pytest.approx(c1, rel=1e-12)
    assert c.C2 == pytest.approx(c2, rel=1e-12)
    assert c.C3 == pytest.approx(c3 * (1 + 1e-6), rel=1e-10)


def test_constants_frozen():
    c = constants(1.5, 0)
    assert (c.C1, c.C2, c.C3) == pytest.approx((0.0058421921951841175, 32.84434538918113, 23.755009505730452), rel=1e-13)
    c = constants(2.0, 0)
    assert (c.C1, c.C2, c.C3) == pytest.approx((0.0378345525546088, 10.775227327509993, 2.551084821022753), rel=1e-13)
    assert tilde_constants(1.5) == pytest.approx((0.0002459351655394959, 113.19870978982317), rel=1e-13)


def test_constants_domain():
    with pytest.raises(ValueError):
        constants(1.0, 0)
    with pytest.raises(ValueError):
        constants(1.5, -1)


@pytest.mark.parametrize("n", [0, 1])
def test_theorem_certificate(n):
    c = bound_theorem(STABLE, n, 100.0, 0.1)
    assert c.applicable and c.holds and not c.violated
    early = bound_theorem(STABLE, n, 1.0, 1.0)
    assert not early.applicable and not early.violated


def test_corollary_certificate():
    for t in (0.01, 1.0, 1e3):
        c = bound_corollary(REL, t, 0.5)
        assert c.applicable and c.holds


def test_brownian_asymptotic_constants():
    assert asymp_large_t(BM, None, 0, 1.3) == pytest.approx(1.3 / math.sqrt(math.pi), rel=1e-8)
    assert asymp_small_x(BM, None, 0, 1.0) == pytest.approx(1 / math.sqrt(math.pi), rel=1e-8)


def test_asymptotic_frozen_values():
    assert asymp_large_t(STABLE, None, 0, 1.0) == pytest.approx(0.76542996605824, rel=1e-9)
    assert asymp_large_t(REL, None, 0, 1.0) == pytest.approx(1.12493597355, rel=1e-9)
    assert asymp_small_x(REL, None, 0, 1.0) == pytest.approx(0.67161336549, rel=1e-9)


def test_asymptotic_index_checks():
    with pytest.raises(ValueError):
        asymp_large_t(STABLE, 0.9, 0, 1.0)
    with pytest.raises(ValueError):
        asymp_small_x(STABLE, 2.5, 0, 1.0)


@pytest.mark.parametrize("t,x", [(100.0, 0.1), (1e3, 0.5)])
def test_high_low_frequency_split(t, x):
    d = ij_split(STABLE, 0, t, x)
    assert d.applicable and d.holds and d.J > 0


def test_refuses_uncertified_model():
    with pytest.raises(ModelError):
        tail(make_model("wiener_poisson", {"c": 2.0}), 0, 1.0, 1.0)


@pytest.mark.parametrize("args", [(0, 0.0, 1.0), (0, 1.0, 0.0), (-1, 1.0, 1.0), (99, 1.0, 1.0), (0.5, 1.0, 1.0)])
def test_input_validation(args):
    with pytest.raises(ValueError):
        tail(STABLE, *args)
