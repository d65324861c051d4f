import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from eulervortex import curvature_at, discretize, make_domain
from eulervortex.domain import ARTIFICIAL, DEFAULT_INSET, PHYSICAL
from eulervortex.errors import (InvalidGeometry, MeshTooCoarse, NotOnBoundary,
                                UnsupportedKind)


def test_disc_area_is_pi(unit_disc):
    assert unit_disc.area == pytest.approx(np.pi, rel=1e-12)


def test_annulus_with_inverted_radii_is_rejected():
    with pytest.raises(InvalidGeometry):
        make_domain("annulus", rho_in=2.0, R_out=1.0)


@pytest.mark.parametrize("params", [dict(R=0.0), dict(R=-1.0), dict(R=float("nan"))])
def test_nonpositive_lengths_are_rejected(params):
    with pytest.raises(InvalidGeometry):
        make_domain("disc", **params)


def test_unknown_kind():
    with pytest.raises(UnsupportedKind):
        make_domain("ellipse", a=1.0)


def test_disc_complement_window_masks_obstacle_and_tags_window():
    # half-plane x1 > 0 with a half-disc obstacle on the wall, truncated to a window
    d = make_domain("disc_complement_window", R_obs=1.0, width=6.0, height=6.0)
    assert not d.contains(0.5, 0.0)
    assert not d.contains(0.3, -0.9)
    assert d.contains(1.5, 0.0)
    assert d.contains(0.2, 2.0)
    for loop in d.loops:
        for piece in loop.pieces:
            on_wall = hasattr(piece, "start") and piece.start[0] == 0.0 and piece.end[0] == 0.0
            expected = PHYSICAL if (hasattr(piece, "radius") or on_wall) else ARTIFICIAL
            assert piece.tag == expected


def test_halfplane_window_tags_only_truncation_edges():
    d = make_domain("halfplane_window", a0=0.0, width=4.0, height=8.0)
    g = discretize(d, 0.25)
    wall = np.isclose(g.boundary_proj[:, 0], 0.0)
    assert np.all(g.boundary_tag[wall & (np.abs(g.boundary_proj[:, 1]) < 3.9)] == PHYSICAL)
    assert np.all(g.boundary_tag[~wall] == ARTIFICIAL)


def test_unit_square_quarter_mesh_has_nine_interior_nodes():
    g = discretize(make_domain("rectangle", a=0, b=1, c=0, d=1), 0.25)
    assert g.n_interior == 9
    assert g.n_boundary == 16


def test_disc_interior_count_matches_enumeration(unit_disc):
    h = 0.05
    g = discretize(unit_disc, h)
    # independent enumeration of lattice points at least inset*h inside the circle
    i = np.arange(-30, 31)
    I, J = np.meshgrid(i, i)
    expected = int(np.sum(np.hypot(I * h, J * h) <= 1.0 - DEFAULT_INSET * h))
    assert expected == 1209
    assert g.n_interior == expected
    assert abs(g.n_interior - np.pi / h ** 2) / (np.pi / h ** 2) < 0.05


def test_mesh_coarser_than_domain_fails(unit_disc):
    with pytest.raises(MeshTooCoarse):
        discretize(unit_disc, 3.0)


@given(st.floats(min_value=0.02, max_value=0.3))
def test_disc_mask_is_symmetric_and_consistent(h):
    g = discretize(make_domain("disc", R=1.0), h)
    # the disc is anchored at its centre, so the masks are invariant under reflections
    assert np.array_equal(g.interior, g.interior[::-1, :])
    assert np.array_equal(g.interior, g.interior[:, ::-1])
    assert np.array_equal(g.interior, g.interior.T)
    # every interior node has four neighbours that are interior or boundary nodes
    ii, jj = g.interior_ij
    for di, dj in ((1, 0), (-1, 0), (0, 1), (0, -1)):
        assert np.all(g.interior[ii + di, jj + dj] | g.boundary[ii + di, jj + dj])
    assert np.all(np.hypot(*g.points.T) <= 1.0)


@given(st.sampled_from([0.1, 0.05, 0.025, 0.0125]))
def test_interior_area_converges_to_pi(h):
    g = discretize(make_domain("disc", R=1.0), h)
    assert abs(g.n_interior * h * h - np.pi) < 3.0 * h


def test_boundary_projections_lie_on_the_circle(disc_grid_64):
    r = np.hypot(*disc_grid_64.boundary_proj.T)
    assert np.allclose(r, 1.0, atol=1e-12)


def test_annulus_boundary_has_two_loops(annulus_grid):
    loops = annulus_grid.boundary_loop
    r = np.hypot(*annulus_grid.boundary_proj.T)
    assert np.allclose(r[loops == 0], 1.0)
    assert np.allclose(r[loops == 1], 0.5)


@pytest.mark.parametrize("R,expected", [(1.0, 1.0), (2.0, 0.5)])
def test_circle_curvature(R, expected):
    d = make_domain("disc", R=R)
    for t in np.linspace(0, 2 * np.pi, 7):
        assert curvature_at(d, (R * np.cos(t), R * np.sin(t))) == pytest.approx(expected)


def test_wall_curvature_is_zero_and_obstacle_is_concave():
    hp = make_domain("halfplane_window", a0=0.0, width=4.0, height=8.0)
    assert curvature_at(hp, (0.0, 1.0)) == 0.0
    tk = make_domain("disc_complement_window", R_obs=1.0, width=6.0, height=6.0)
    assert curvature_at(tk, (np.sqrt(0.5), np.sqrt(0.5))) == pytest.approx(-1.0)


def test_curvature_on_truncation_edge_is_refused():
    hp = make_domain("halfplane_window", a0=0.0, width=4.0, height=8.0)
    with pytest.raises(NotOnBoundary):
        curvature_at(hp, (4.0, 0.0))


def test_interpolation_reproduces_linear_functions(disc_grid_64, rng):
    g = disc_grid_64
    u = g.sample(lambda x1, x2: 2 * x1 - x2 + 0.5)
    full = g.to_lattice(u, lambda x1, x2: 2 * x1 - x2 + 0.5)
    pts = rng.uniform(-0.6, 0.6, size=(50, 2))
    got = g.interpolate(full, pts[:, 0], pts[:, 1])
    assert np.allclose(got, 2 * pts[:, 0] - pts[:, 1] + 0.5, atol=1e-12)
