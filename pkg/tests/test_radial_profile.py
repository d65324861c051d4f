import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy.integrate import quad, solve_ivp

from eulervortex import limit_constant, profile_for_kappa, solve_unit_profile
from eulervortex.errors import NonPositiveKappa, UnsupportedExponent
from eulervortex.radial_profile import ball_term, limit_constant_scaled

# frozen from the shooting solver (dr=1e-4) and checked below against an
# adaptive ODE integrator and a half-step rerun
V0_P3 = 3.5739009819275442
GAMMA_P3 = 16.61979905846226
GAMMA_P2 = 49.6187605593212
C_P3_2PI = 4.626678895387171
C_P3_GAMMA = 10.990353906482678


@pytest.fixture(scope="module")
def prof3():
    return solve_unit_profile(3)


def test_central_value_golden(prof3):
    assert prof3.v0 == pytest.approx(V0_P3, rel=1e-12)


def test_central_value_hits_zero_with_independent_integrator(prof3):
    a = prof3.v0
    r0 = 1e-6

    def rhs(r, y):
        return [y[1], -y[1] / r - max(y[0], 0.0) ** 3]

    sol = solve_ivp(rhs, [r0, 1.0], [a - a ** 3 * r0 ** 2 / 4, -a ** 3 * r0 / 2],
                    method="DOP853", rtol=1e-13, atol=1e-14)
    assert abs(sol.y[0, -1]) < 1e-9
    assert sol.y[1, -1] == pytest.approx(prof3.slope, rel=1e-8)


def test_profile_positive_and_decreasing(prof3):
    assert prof3.v0 > 0
    assert np.all(np.diff(prof3.v) < 0)
    assert prof3.v[-1] == pytest.approx(0.0, abs=1e-12)
    # residual uses a second-order difference of the sampled slope, O(dr^2)
    assert prof3.residual() < 1e-5


def test_flux_equals_mass(prof3):
    assert abs(2 * np.pi * abs(prof3.slope) - prof3.gamma) < 1e-8
    assert prof3.gamma == pytest.approx(GAMMA_P3, rel=1e-10)


def test_exponent_two_golden_and_half_step():
    p2 = solve_unit_profile(2)
    p2b = solve_unit_profile(2, dr=5e-5)
    assert p2.gamma == pytest.approx(GAMMA_P2, rel=1e-10)
    assert abs(p2.gamma - p2b.gamma) / p2.gamma < 1e-6


@pytest.mark.parametrize("p", [1.0, 0.5, -2.0, float("nan")])
def test_exponent_at_most_one_is_rejected(p):
    with pytest.raises(UnsupportedExponent):
        solve_unit_profile(p)


@pytest.mark.parametrize("kappa", [0.0, -1.0])
def test_nonpositive_kappa(prof3, kappa):
    with pytest.raises(NonPositiveKappa):
        profile_for_kappa(prof3, kappa)


def test_core_radius_scaling(prof3):
    assert profile_for_kappa(prof3, prof3.gamma).rho == pytest.approx(1.0, rel=1e-14)
    assert profile_for_kappa(prof3, 4 * prof3.gamma).rho == pytest.approx(0.25, rel=1e-14)


@given(st.floats(min_value=0.5, max_value=40.0), st.sampled_from([2.0, 3.0, 5.0]))
def test_profile_matching_and_mass(kappa, p):
    prof = solve_unit_profile(p)
    pk = profile_for_kappa(prof, kappa)
    rho = pk.rho
    # C^0 and C^1 matching at the core edge
    assert abs(pk.radial(rho * (1 - 1e-12))) < 1e-6 * kappa
    assert abs(pk.radial(rho * (1 + 1e-12))) < 1e-6 * kappa
    inner = pk.amplitude / rho * prof.slope
    outer = -kappa / (2 * np.pi * rho)
    assert abs(inner - outer) < 1e-6 * kappa
    assert abs(pk.mass() - kappa) < 1e-6 * kappa


def test_logarithmic_tail(prof3):
    pk = profile_for_kappa(prof3, 2 * np.pi)
    r = np.array([1.5, 3.0, 10.0]) * pk.rho
    assert np.allclose(pk.radial(r), np.log(pk.rho / r), rtol=1e-14)


def test_ball_term_equals_integration_by_parts(prof3):
    # with rho = 1 the core integral is (1/2 - 1/(p+1)) int V^(p+1)
    pk = profile_for_kappa(prof3, prof3.gamma)
    expected = (0.5 - 0.25) * prof3.int_vp1
    assert ball_term(pk) == pytest.approx(expected, rel=1e-7)
    assert ball_term(pk) > 0


def test_ball_term_against_adaptive_quadrature(prof3):
    pk = profile_for_kappa(prof3, 2 * np.pi)

    def integrand(r):
        u = float(pk.radial(r))
        du = float(pk.radial_derivative(r))
        return 2 * np.pi * r * (0.5 * du * du - max(u, 0.0) ** 4 / 4)

    val, _ = quad(integrand, 0.0, pk.rho, epsabs=1e-12, epsrel=1e-12, limit=200)
    assert ball_term(pk) == pytest.approx(val, rel=1e-6)


def test_limit_constant_golden_and_scaling(prof3):
    pk = profile_for_kappa(prof3, 2 * np.pi)
    assert limit_constant(pk) == pytest.approx(C_P3_2PI, rel=1e-10)
    assert limit_constant(profile_for_kappa(prof3, prof3.gamma)) == pytest.approx(C_P3_GAMMA,
                                                                                  rel=1e-10)
    for kappa in (prof3.gamma, 4 * prof3.gamma):
        pk = profile_for_kappa(prof3, kappa)
        assert abs(limit_constant(pk) - limit_constant_scaled(pk)) < 1e-6


def test_limit_constant_two_resolutions():
    a = limit_constant(profile_for_kappa(solve_unit_profile(3), 2 * np.pi))
    b = limit_constant(profile_for_kappa(solve_unit_profile(3, dr=5e-5), 2 * np.pi))
    assert abs(a - b) < 1e-6
