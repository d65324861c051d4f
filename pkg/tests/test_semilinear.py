import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from eulervortex import (BackgroundField, ProblemSpec, cutoff_lift, diagnostics, discretize,
                         epsilon_sweep, hat_function, make_domain, solve_pair, solve_single)
from eulervortex.errors import (EmptyVorticity, GridTooCoarseForCore, InsufficientPoints,
                                InvalidSpec, NoPositivePart, NotNonnegative)
from eulervortex.semilinear import (aitken, energy, nehari_residual, nehari_scale,
                                    nodal_residuals, nodal_scale, pair_hat, reduced_center)


@pytest.fixture(scope="module")
def grid64():
    return discretize(make_domain("disc", R=1.0), 1 / 64)


@pytest.fixture(scope="module")
def grid256():
    return discretize(make_domain("disc", R=1.0), 1 / 256)


@pytest.fixture(scope="module")
def spec64(grid64):
    return ProblemSpec(grid64, 3, 2 * np.pi, 0.1)


@pytest.fixture(scope="module")
def single64(spec64):
    return solve_single(spec64)


@pytest.fixture(scope="module")
def pair64(grid64):
    spec = ProblemSpec(grid64, 3, 2 * np.pi, 0.1, mode="pair", kappa_minus=-2 * np.pi)
    return spec, solve_pair(spec)


def test_core_resolution_guard(grid64):
    with pytest.raises(GridTooCoarseForCore):
        ProblemSpec(grid64, 3, 2 * np.pi, 0.01)


def test_negative_shifted_background_is_rejected(grid64):
    bg = BackgroundField(fn=lambda x1, x2: -10.0 + 0 * x1)
    with pytest.raises(InvalidSpec):
        ProblemSpec(grid64, 3, 2 * np.pi, 0.1, background=bg)


def test_pair_needs_opposite_signs(grid64):
    with pytest.raises(InvalidSpec):
        ProblemSpec(grid64, 3, 2 * np.pi, 0.1, mode="pair", kappa_minus=2 * np.pi)


def test_nehari_scaling_without_positive_part(spec64):
    w = np.full(spec64.grid.n_interior, 1e-3)
    with pytest.raises(NoPositivePart):
        nehari_scale(w, spec64, cap=10.0)
    with pytest.raises(NotNonnegative):
        nehari_scale(-w, spec64)


def test_scaled_field_lies_on_the_nehari_set(spec64):
    w = hat_function(spec64, (0.1, -0.2))
    t, tw = nehari_scale(w, spec64)
    assert abs(nehari_residual(spec64, tw)) < 1e-10


@given(st.floats(0.05, 50.0))
def test_nehari_scaling_is_homogeneous(c):
    g = discretize(make_domain("disc", R=1.0), 1 / 32)
    spec = ProblemSpec(g, 3, 2 * np.pi, 0.2, min_core_nodes=4)
    w = np.clip(1.5 - np.hypot(*g.points.T) * 3, 0, None) * 4
    t1, f1 = nehari_scale(w, spec)
    t2, f2 = nehari_scale(c * w, spec)
    assert np.allclose(f1, f2, rtol=1e-9, atol=1e-12)
    assert t2 * c == pytest.approx(t1, rel=1e-9)


def test_hat_function_is_nearly_on_the_nehari_set(grid256):
    # the unscaled hat function needs a scaling close to one, improving as eps decreases
    ts = []
    for eps in (0.05, 0.02):
        spec = ProblemSpec(grid256, 3, 2 * np.pi, eps)
        ts.append(nehari_scale(hat_function(spec, (0.0, 0.0)), spec)[0])
    assert all(abs(t - 1) < 0.2 for t in ts)
    assert abs(ts[1] - 1) < abs(ts[0] - 1)


def test_single_vortex_solution(spec64, single64):
    res = single64
    assert res.converged
    assert np.all(res.u >= 0)
    assert abs(res.nehari[0]) < 1e-8
    assert res.pde_residual < 1e-5
    d = diagnostics(res.u, spec64)
    assert d.components == 1
    assert np.hypot(*d.center) < 2 * spec64.grid.h
    assert d.r_bar <= d.r_ring


def test_solution_energy_below_hat_function(spec64, single64):
    hat = nehari_scale(hat_function(spec64, (0.0, 0.0)), spec64)[1]
    assert single64.energy <= energy(spec64, hat)


def test_core_radius_follows_the_measured_circulation(spec64, single64):
    # the vorticity set is the rescaled profile for the circulation actually carried
    d = diagnostics(single64.u, spec64)
    rho_eff = spec64.profile.gamma / d.kappa_eps
    assert d.diameter / (2 * spec64.eps) == pytest.approx(rho_eff, rel=0.05)


def test_single_vortex_at_eps_005_on_fine_grid(grid256):
    spec = ProblemSpec(grid256, 3, 2 * np.pi, 0.05)
    res = solve_single(spec)
    d = diagnostics(res.u, spec)
    assert res.converged and np.all(res.u >= 0)
    assert d.components == 1
    assert np.hypot(*d.center) < 2 * grid256.h
    assert abs(res.nehari[0]) < 1e-8


def test_pair_solution_is_mirror_symmetric(pair64):
    spec, res = pair64
    assert res.converged
    d = diagnostics(res.u, spec)
    xp, xm = d.center, d.center_minus
    assert np.hypot(xp[0] - xm[0], xp[1] + xm[1]) < 2 * spec.grid.h
    assert max(abs(r) for r in nodal_residuals(spec, res.v)) < 1e-8
    assert d.kappa_eps == pytest.approx(-d.kappa_minus_eps, rel=1e-6)
    assert d.components == 2


def test_nodal_scaling_satisfies_both_conditions(grid64):
    spec = ProblemSpec(grid64, 3, 2 * np.pi, 0.1, mode="pair", kappa_minus=-2 * np.pi)
    w = pair_hat(spec, (0.0, 0.45), (0.0, -0.45))
    tp, tm, f = nodal_scale(np.clip(w, 0, None), np.clip(-w, 0, None), spec)
    assert tp > 0 and tm > 0
    assert max(abs(r) for r in nodal_residuals(spec, f)) < 1e-10


def test_diagnostics_of_trivial_and_synthetic_fields(spec64):
    g = spec64.grid
    d = diagnostics(np.zeros(g.n_interior), spec64)
    assert d.kappa_eps == 0 and d.components == 0
    with pytest.raises(EmptyVorticity):
        d.center
    q = spec64.qeps
    x1, x2 = g.points.T
    bumps = q + np.clip(0.3 - np.hypot(x1 - 0.5, x2), 0, None) \
        + np.clip(0.3 - np.hypot(x1 + 0.5, x2), 0, None)
    assert diagnostics(bumps, spec64).components == 2


def test_hat_function_diagnostics(grid256):
    spec = ProblemSpec(grid256, 3, 2 * np.pi, 0.05)
    xhat = np.array([0.2, -0.1])
    d = diagnostics(hat_function(spec, xhat), spec)
    assert np.hypot(*(d.center - xhat)) < grid256.h
    pts = grid256.points[d.mask]
    assert np.max(np.hypot(*(pts - xhat).T)) < 4 * spec.eps


def test_reduced_centre_of_the_symmetric_disc(spec64):
    c = reduced_center(spec64, [[0.05, 0.02]])
    assert np.hypot(*c[0]) < 0.5 * spec64.grid.h


def test_cutoff_lift():
    base = BackgroundField.rotation(1.0)
    lifted = cutoff_lift(base, (0.5, 0.0), 0.1, 0.3, 2.0)
    assert lifted(0.55, 0.0) == pytest.approx(base(0.55, 0.0))
    assert lifted(-0.5, 0.0) == pytest.approx(base(-0.5, 0.0) + 2.0)
    mid = lifted(0.7, 0.0) - base(0.7, 0.0)
    assert 0 < mid < 2.0
    with pytest.raises(InvalidSpec):
        cutoff_lift(base, (0, 0), 0.3, 0.1, 1.0)


@given(st.floats(-5, 5), st.floats(0.1, 5), st.floats(0.1, 0.9))
def test_aitken_is_exact_on_geometric_sequences(L, c, r):
    seq = [L + c * r ** n for n in range(3)]
    assert aitken(seq) == pytest.approx(L, abs=1e-9 * max(1, c))


def test_sweep_argument_checks(spec64):
    with pytest.raises(InsufficientPoints):
        epsilon_sweep(spec64, [0.2, 0.1])
    with pytest.raises(InvalidSpec):
        epsilon_sweep(spec64, [0.1, 0.2, 0.15])


def test_rotating_centre_follows_the_measured_circulation():
    # the centre sits at the equilibrium radius for the circulation actually carried
    g = discretize(make_domain("disc", R=1.0), 1 / 128)
    spec = ProblemSpec(g, 3, np.pi, 0.1, background=BackgroundField.rotation(1.0))
    c = reduced_center(spec, [[0.7, 0.0]])[0]
    d = diagnostics(solve_single(spec, init=hat_function(spec, c)).u, spec)
    r_eff = np.sqrt(1 - d.kappa_eps / (2 * np.pi))
    assert np.hypot(*d.center) == pytest.approx(r_eff, rel=0.02)
