import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from eulervortex import discretize, make_domain, solve_dirichlet
from eulervortex.errors import DimensionMismatch
from eulervortex.green import GreenEvaluator
from eulervortex.poisson import (apply_laplacian, assemble, dirichlet_energy, discrete_delta,
                                 energy_product)


@pytest.fixture(scope="module")
def square():
    return discretize(make_domain("rectangle", a=0, b=1, c=0, d=1), 1 / 32)


def test_operator_is_the_symmetric_five_point_stencil(square):
    A = assemble(square).A
    h2 = square.h ** 2
    assert np.allclose(A.diagonal(), 4 / h2)
    vals = set(np.round(A.data * h2, 12)) - {4.0}
    assert vals == {-1.0}
    assert abs(A - A.T).max() == 0


def test_linear_data_is_reproduced_exactly(square):
    lin = lambda x1, x2: x1  # noqa: E731
    u = solve_dirichlet(square, None, lin)
    assert np.max(np.abs(u - square.points[:, 0])) < 1e-12
    assert dirichlet_energy(square, u, lin) == pytest.approx(1.0, abs=1e-12)


def test_zero_field_has_zero_energy(square):
    assert dirichlet_energy(square, np.zeros(square.n_interior), 0.0) == 0.0


def test_torsion_function_of_the_disc():
    g = discretize(make_domain("disc", R=1.0), 0.02)
    u = solve_dirichlet(g, np.ones(g.n_interior), 0.0)
    assert abs(u[g.nearest_node(0.0, 0.0)] - 0.25) < 2e-3


def test_second_order_convergence():
    errs = []
    for h in (1 / 16, 1 / 32, 1 / 64):
        g = discretize(make_domain("rectangle", a=0, b=1, c=0, d=1), h)
        x1, x2 = g.points.T
        exact = np.sin(np.pi * x1) * np.sin(2 * np.pi * x2)
        u = solve_dirichlet(g, 5 * np.pi ** 2 * exact, 0.0)
        errs.append(np.max(np.abs(u - exact)))
    ratios = np.array(errs[:-1]) / np.array(errs[1:])
    assert np.all(ratios > 3.6) and np.all(ratios < 4.4)


def test_discrete_delta_solution_is_the_discrete_green_function(disc_grid_64):
    g = disc_grid_64
    y = (0.3, -0.2)
    u = solve_dirichlet(g, discrete_delta(g, y), 0.0)
    ge = GreenEvaluator(g.domain, "numeric", g)
    for x in [(0.0, 0.0), (-0.5, 0.4), (0.7, 0.1)]:
        assert ge.green_discrete(x, y) == pytest.approx(u[g.nearest_node(*x)], abs=1e-12)


def test_annulus_capacitor_energy():
    g = discretize(make_domain("disc", R=np.e), 0.01)
    # capacitor between r=1 (held at one) and r=e
    r = np.hypot(*g.points.T)
    inner = r <= 1.0
    u = solve_dirichlet(g, None, 0.0, fixed=inner, fixed_values=inner.astype(float))
    assert dirichlet_energy(g, u, 0.0) == pytest.approx(2 * np.pi, rel=0.03)


def test_conjugate_gradients_agree_with_direct(disc_grid_64, rng):
    g = disc_grid_64
    rhs = rng.standard_normal(g.n_interior)
    a = solve_dirichlet(g, rhs, 0.0)
    b = solve_dirichlet(g, rhs, 0.0, method="cg", tol=1e-12)
    assert np.max(np.abs(a - b)) < 1e-8 * np.max(np.abs(a))


def test_dimension_checks(square):
    with pytest.raises(DimensionMismatch):
        solve_dirichlet(square, np.ones(3))
    with pytest.raises(DimensionMismatch):
        dirichlet_energy(square, np.ones(3))


@given(st.integers(min_value=0, max_value=2 ** 32 - 1))
def test_discrete_maximum_principle(seed):
    g = discretize(make_domain("disc", R=1.0), 1 / 16)
    c = np.random.default_rng(seed).standard_normal(6)

    def bdata(x1, x2):
        t = np.arctan2(x2, x1)
        return c[0] + c[1] * np.cos(t) + c[2] * np.sin(2 * t) + c[3] * np.cos(3 * t) \
            + c[4] * np.sin(t) + c[5] * np.cos(5 * t)

    bv = g.boundary_values(bdata)
    u = solve_dirichlet(g, None, bv)
    assert u.max() <= bv.max() + 1e-12
    assert u.min() >= bv.min() - 1e-12
    # discrete harmonic: the Laplacian vanishes at interior nodes
    assert np.max(np.abs(apply_laplacian(g, u, bv))) < 1e-8 / g.h ** 2


@given(st.integers(min_value=0, max_value=2 ** 32 - 1))
def test_energy_product_is_symmetric_bilinear(seed):
    g = discretize(make_domain("rectangle", a=0, b=1, c=0, d=2), 1 / 8)
    r = np.random.default_rng(seed)
    u, v = r.standard_normal((2, g.n_interior))
    bu, bv = r.standard_normal((2, g.n_boundary))
    e = energy_product(g, u, bu, v, bv)
    assert e == pytest.approx(energy_product(g, v, bv, u, bu), rel=1e-12, abs=1e-12)
    quad = dirichlet_energy(g, u + v, bu + bv)
    assert quad == pytest.approx(dirichlet_energy(g, u, bu) + 2 * e + dirichlet_energy(g, v, bv),
                                 rel=1e-10)


def test_green_identity_energy_equals_source_pairing(disc_grid_64, rng):
    # for zero boundary data, E(u) = h^2 u . (A u)
    g = disc_grid_64
    f = rng.standard_normal(g.n_interior)
    u = solve_dirichlet(g, f, 0.0)
    assert dirichlet_energy(g, u, 0.0) == pytest.approx(g.h ** 2 * u @ f, rel=1e-10)
