import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from eulervortex import (boundary_h_expansion, discretize, green_eval, koebe_assemble,
                         make_domain, make_evaluator, robin, star_flux_check)
from eulervortex.errors import CoincidentPoints, OutsideDomain

TWO_PI = 2 * np.pi


def image_green_disc(x, y, R=1.0, c=(0.0, 0.0)):
    """Method-of-images oracle for the disc of radius R centred at c."""
    x = np.asarray(x, float) - c
    y = np.asarray(y, float) - c
    ry = np.hypot(*y)
    if ry == 0:
        return np.log(R / np.hypot(*x)) / TWO_PI
    ystar = y * R * R / ry ** 2
    return (np.log(1 / np.hypot(*(x - y))) - np.log(R / (ry * np.hypot(*(x - ystar))))) / TWO_PI


@pytest.fixture(scope="module")
def disc_ge():
    return make_evaluator(make_domain("disc", R=1.0))


@pytest.fixture(scope="module")
def hp_ge():
    return make_evaluator(make_domain("halfplane_window", a0=0.0, width=4.0, height=8.0))


@pytest.fixture(scope="module")
def tk_ge():
    return make_evaluator(make_domain("disc_complement_window", R_obs=1.0, width=6.0,
                                      height=6.0))


@pytest.fixture(scope="module")
def koebe(annulus_grid):
    return koebe_assemble(annulus_grid.domain, grid=annulus_grid)


def test_closed_form_values(disc_ge, hp_ge, tk_ge):
    assert green_eval(disc_ge, (0, 0), (0.5, 0)) == pytest.approx(np.log(2) / TWO_PI, rel=1e-14)
    assert green_eval(hp_ge, (1, 0), (1, 1)) == pytest.approx(np.log(5) / (4 * np.pi), rel=1e-14)
    assert green_eval(tk_ge, (2, 0), (3, 0)) == pytest.approx(np.log(625 / 49) / (4 * np.pi),
                                                              rel=1e-14)
    assert robin(hp_ge, (0.5, 0.0)) == pytest.approx(0.0, abs=1e-15)
    assert robin(disc_ge, (0.0, 0.0)) == pytest.approx(0.0, abs=1e-15)


@given(st.floats(0.0, 0.95), st.floats(0, 2 * np.pi), st.floats(0.0, 0.95), st.floats(0, 2 * np.pi))
def test_disc_green_matches_images_and_is_symmetric(r1, t1, r2, t2):
    ge = make_evaluator(make_domain("disc", R=2.0, center=(0.5, -1.0)))
    c = np.array([0.5, -1.0])
    x = c + 2 * r1 * np.array([np.cos(t1), np.sin(t1)])
    y = c + 2 * r2 * np.array([np.cos(t2), np.sin(t2)])
    if np.hypot(*(x - y)) < 1e-6:
        return
    g = ge.green(x, y)
    assert g == pytest.approx(image_green_disc(x, y, 2.0, c), rel=1e-10, abs=1e-12)
    assert g == pytest.approx(ge.green(y, x), rel=1e-10, abs=1e-12)
    assert g > 0


@given(st.floats(0, 2 * np.pi), st.floats(0.0, 0.9), st.floats(0, 2 * np.pi))
def test_disc_green_vanishes_on_the_circle(t, r, s):
    ge = make_evaluator(make_domain("disc", R=1.0))
    y = r * np.array([np.cos(s), np.sin(s)])
    xb = (1 - 1e-12) * np.array([np.cos(t), np.sin(t)])
    assert abs(ge.green(xb, y)) < 1e-9


@given(st.floats(0.05, 3.0), st.floats(-3, 3), st.floats(0.05, 3.0), st.floats(-3, 3))
def test_halfplane_green_against_images(x1, x2, y1, y2):
    ge = make_evaluator(make_domain("halfplane_window", a0=0.0, width=4.0, height=8.0))
    x, y = np.array([x1, x2]), np.array([y1, y2])
    if np.hypot(*(x - y)) < 1e-6:
        return
    ybar = np.array([-y1, y2])
    expected = (np.log(np.hypot(*(x - ybar))) - np.log(np.hypot(*(x - y)))) / TWO_PI
    assert ge.green(x, y) == pytest.approx(expected, rel=1e-10, abs=1e-13)


def test_singular_and_outside_points(disc_ge):
    with pytest.raises(CoincidentPoints):
        disc_ge.green((0.1, 0.1), (0.1, 0.1))
    with pytest.raises(OutsideDomain):
        disc_ge.robin((1.5, 0.0))


def test_numeric_robin_agrees_with_closed_form(disc_grid_100, disc_ge):
    ge = make_evaluator(disc_grid_100.domain, "numeric", grid=disc_grid_100)
    x = (0.3, 0.2)
    assert abs(ge.robin(x) - disc_ge.robin(x)) < 5e-3
    assert abs(ge.green((0.1, -0.4), x) - disc_ge.green((0.1, -0.4), x)) < 5e-3


def test_discrete_green_function_is_symmetric(disc_grid_64):
    ge = make_evaluator(disc_grid_64.domain, "numeric", grid=disc_grid_64)
    pts = [(0.1, 0.2), (-0.5, 0.3), (0.6, -0.6), (0.0, -0.1)]
    for i, x in enumerate(pts):
        for y in pts[i + 1:]:
            assert ge.green_discrete(x, y) == pytest.approx(ge.green_discrete(y, x), abs=1e-12)


def test_regular_part_is_bounded_near_the_diagonal(disc_ge):
    x = np.array([0.4, 0.1])
    for d in (1e-2, 1e-4, 1e-6):
        assert disc_ge.regular(x, x + d) == pytest.approx(disc_ge.robin(x), abs=2 * d)


@given(st.floats(0.0, 0.8), st.floats(0, 2 * np.pi))
def test_robin_gradient_matches_finite_differences(r, t):
    ge = make_evaluator(make_domain("disc", R=1.0))
    x = r * np.array([np.cos(t), np.sin(t)])
    step = 1e-6
    fd = np.array([(ge.robin(x + step * e) - ge.robin(x - step * e)) / (2 * step)
                   for e in np.eye(2)])
    assert np.allclose(ge.robin_grad(x), fd, atol=1e-6)


def test_annulus_harmonic_measure_and_period(koebe):
    x = (0.75, 0.0)
    z1 = koebe._z_at(np.array(x))[0]
    assert abs(z1 - np.log(0.75) / np.log(0.5)) < 5e-3
    assert koebe.omega[0, 0] == pytest.approx(TWO_PI / np.log(2), rel=0.03)


def test_period_matrix_symmetric_positive_definite():
    d = make_domain("disc", R=1.0, obstacles=[((0.4, 0.0), 0.15), ((-0.4, 0.1), 0.2)])
    ge = koebe_assemble(d, h=1 / 64)
    assert np.array_equal(ge.omega, ge.omega.T)
    assert np.all(np.linalg.eigvalsh(ge.omega) > 0)


def test_modified_green_function_has_no_obstacle_flux(koebe):
    fl = star_flux_check(koebe, (0.0, 0.7))
    assert np.max(np.abs(fl)) < 1e-6


def test_modified_green_function_vanishes_on_outer_boundary(koebe):
    y = (0.0, 0.7)
    for t in np.linspace(0, 2 * np.pi, 5, endpoint=False):
        xb = 0.999 * np.array([np.cos(t), np.sin(t)])
        assert abs(koebe.green(xb, y)) < 1e-2


def test_boundary_expansion_on_the_disc(disc_ge):
    rep = boundary_h_expansion(disc_ge, (1.0, 0.0), (1.0, 0.0), [1e-3])
    assert rep.expected == pytest.approx(-1 / (4 * np.pi), rel=1e-14)
    assert rep.rel_error < 0.01
    rep = boundary_h_expansion(disc_ge, (1.0, 0.0), (1.0, 1.0), [2e-3, 1e-3])
    assert rep.expected == pytest.approx(-1 / TWO_PI, rel=1e-14)
    assert rep.rel_error < 0.02


def test_boundary_expansion_on_a_flat_wall(hp_ge):
    for x in [(1.0, 0.0), (0.5, 2.0)]:
        rep = boundary_h_expansion(hp_ge, (0.0, 0.3), x, [1e-3])
        assert rep.expected == 0.0
        assert abs(rep.limit) < 1e-12


def test_boundary_expansion_needs_an_inward_probe(disc_ge):
    with pytest.raises(OutsideDomain):
        boundary_h_expansion(disc_ge, (1.0, 0.0), (-1.0, 0.0), [1e-3])


def test_numeric_boundary_expansion_cross_check():
    # numeric Robin function of a disc at moderate eps, compared with the analytic expansion
    g = discretize(make_domain("disc", R=1.0), 1 / 256)
    ge = make_evaluator(g.domain, "numeric", grid=g)
    an = make_evaluator(g.domain)
    rep_n = boundary_h_expansion(ge, (1.0, 0.0), (1.0, 0.0), [0.1])
    rep_a = boundary_h_expansion(an, (1.0, 0.0), (1.0, 0.0), [0.1])
    assert rep_n.ratios[0] == pytest.approx(rep_a.ratios[0], abs=0.02)
