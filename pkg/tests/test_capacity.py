import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy.integrate import quad

from eulervortex import make_domain
from eulervortex.capacity import (CapacitySpec, capacity_numeric, capacity_segment_ray,
                                  check_capacity_bounds, elliptic_K, halfplane_window_check,
                                  segment_ray_numeric)
from eulervortex.errors import GapUnderResolved, InvalidGeometry, ModulusOutOfRange, NonPositiveS

# frozen from the AGM and cross-checked by quadrature below
K_SQRT_HALF = 1.8540746773013719
SEGMENT_RAY_S3 = 1.5634019226961113


def _K_quad(g):
    val, _ = quad(lambda t: 1 / math.sqrt(1 - (g * math.sin(t)) ** 2), 0, math.pi / 2,
                  epsabs=1e-13, epsrel=1e-12)
    return val


def test_elliptic_K_reference_values():
    assert elliptic_K(0.0) == pytest.approx(math.pi / 2, abs=1e-15)
    assert elliptic_K(math.sqrt(0.5)) == pytest.approx(K_SQRT_HALF, abs=1e-14)


@given(st.floats(0.0, 0.99))
def test_elliptic_K_matches_quadrature(g):
    assert elliptic_K(g) == pytest.approx(_K_quad(g), abs=1e-10)


@given(st.floats(0.0, 0.98), st.floats(0.001, 0.01))
def test_elliptic_K_increases_with_modulus(g, d):
    assert elliptic_K(g + d) > elliptic_K(g)


@pytest.mark.parametrize("g", [-0.1, 1.0, 1.5, float("nan")])
def test_elliptic_K_rejects_bad_modulus(g):
    with pytest.raises(ModulusOutOfRange):
        elliptic_K(g)


def test_segment_ray_closed_form():
    r = capacity_segment_ray(1.0)
    assert r.capa == pytest.approx(2.0, abs=1e-14)
    assert r.bound_ok
    assert r.lhs == pytest.approx(math.pi, abs=1e-13)
    r3 = capacity_segment_ray(3.0)
    assert r3.capa == pytest.approx(SEGMENT_RAY_S3, abs=1e-13)
    # the closed form is insensitive to the AGM tolerance
    g1, g2 = math.sqrt(1 / 4), math.sqrt(3 / 4)
    assert 2 * elliptic_K(g1, 1e-8) / elliptic_K(g2, 1e-8) == pytest.approx(r3.capa, abs=1e-10)


@given(st.floats(0.01, 100.0), st.floats(1.01, 2.0))
def test_segment_ray_properties(s, f):
    a, b = capacity_segment_ray(s), capacity_segment_ray(s * f)
    assert b.capa < a.capa
    assert a.bound_ok


@pytest.mark.parametrize("s", [0.0, -1.0, float("inf")])
def test_segment_ray_rejects_bad_gap(s):
    with pytest.raises(NonPositiveS):
        capacity_segment_ray(s)


@pytest.mark.parametrize("s", [0.5, 1.0, 2.0])
def test_segment_ray_numeric_agrees(s):
    val, frames = segment_ray_numeric(s)
    assert val == pytest.approx(capacity_segment_ray(s).capa, rel=0.05)
    assert len(frames) == 2


def test_disc_condenser_matches_log_formula():
    dom = make_domain("disc", R=1.0)
    spec = CapacitySpec(dom, lambda x1, x2: np.hypot(x1, x2) <= 0.5, h=0.01)
    assert capacity_numeric(spec) == pytest.approx(2 * math.pi / math.log(2), rel=0.03)


def test_capacity_is_monotone_in_K_and_Omega():
    small = make_domain("disc", R=1.0)
    big = make_domain("disc", R=1.5)

    def k(r):
        return lambda x1, x2: np.hypot(x1, x2) <= r
    c_small = capacity_numeric(CapacitySpec(small, k(0.3), h=0.02))
    c_bigK = capacity_numeric(CapacitySpec(small, k(0.45), h=0.02))
    c_bigO = capacity_numeric(CapacitySpec(big, k(0.3), h=0.02))
    assert c_bigK > c_small > c_bigO


def test_cg_and_direct_agree():
    spec = CapacitySpec(make_domain("disc", R=1.0), lambda x1, x2: np.hypot(x1, x2) <= 0.3, h=0.02)
    assert capacity_numeric(spec, "cg") == pytest.approx(capacity_numeric(spec), rel=1e-6)


def test_condenser_validation():
    dom = make_domain("disc", R=1.0)
    with pytest.raises(GapUnderResolved):
        CapacitySpec(dom, lambda x1, x2: np.hypot(x1, x2) <= 0.98, h=0.01).validate()
    with pytest.raises(InvalidGeometry):
        CapacitySpec(dom, lambda x1, x2: np.hypot(x1, x2) > 5, h=0.05).validate()
    with pytest.raises(InvalidGeometry):
        CapacitySpec(dom, np.ones(3, bool), h=0.05).validate()


@pytest.mark.slow
def test_bounds_suite_holds_at_two_resolutions():
    checks = check_capacity_bounds(h=0.01, resolutions=(1, 2))
    assert len(checks) == 16
    assert [c.name for c in checks if not c.ok] == []
    assert {c.h for c in checks} == {0.01, 0.005}


def test_halfplane_window_is_consistent_with_conformal_map():
    win = halfplane_window_check()
    conf = next(c for c in check_capacity_bounds(h=0.02, resolutions=(1,)) if c.name == "half-plane disc")
    assert win.ok
    # the window is a subset of the half-plane, so its capacity is larger
    assert win.capa >= conf.capa * 0.98
