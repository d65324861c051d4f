"""Planar domains and their uniform node-centred grids.

A :class:`Domain` carries the analytic geometry (a kind string plus its
parameters) and a description of every boundary loop as a chain of
straight segments and circular arcs.  Each piece is tagged ``physical``
or ``artificial``; artificial pieces are the edges of the finite windows
used to truncate unbounded domains.

A :class:`Grid` samples a domain on the lattice ``anchor + h * (i, j)``.
Interior nodes lie strictly inside the domain.  Boundary nodes are the
lattice nodes lying on the boundary or outside it but 4-adjacent to an
interior node; their Dirichlet value is taken at the nearest boundary
point (first-order clipping, no Shortley-Weller correction).
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from .errors import InvalidGeometry, MeshTooCoarse, NotOnBoundary, UnsupportedKind

PHYSICAL = "physical"
ARTIFICIAL = "artificial"

KINDS = ("disc", "rectangle", "annulus", "halfplane_window", "disc_complement_window")


@dataclass(frozen=True)
class Segment:
    start: tuple[float, float]
    end: tuple[float, float]
    tag: str = PHYSICAL

    curvature = 0.0

    @property
    def length(self) -> float:
        return float(np.hypot(self.end[0] - self.start[0], self.end[1] - self.start[1]))

    def point(self, t):
        t = np.asarray(t, dtype=float)
        a, b = np.asarray(self.start), np.asarray(self.end)
        return a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1])

    def tangent(self, t):
        d = np.subtract(self.end, self.start) / self.length
        t = np.asarray(t, dtype=float)
        return np.full_like(t, d[0]), np.full_like(t, d[1])

    def project(self, x1, x2):
        """Return (p1, p2, distance, t) of the nearest point on the segment."""
        a, b = np.asarray(self.start), np.asarray(self.end)
        d = b - a
        t = ((x1 - a[0]) * d[0] + (x2 - a[1]) * d[1]) / (d @ d)
        t = np.clip(t, 0.0, 1.0)
        p1, p2 = a[0] + t * d[0], a[1] + t * d[1]
        return p1, p2, np.hypot(x1 - p1, x2 - p2), t


@dataclass(frozen=True)
class Arc:
    center: tuple[float, float]
    radius: float
    theta0: float
    theta1: float
    tag: str = PHYSICAL
    # +1 when the domain lies on the concave side (inside the circle)
    side: int = 1

    @property
    def curvature(self) -> float:
        return self.side / self.radius

    @property
    def length(self) -> float:
        return abs(self.theta1 - self.theta0) * self.radius

    def point(self, t):
        th = self.theta0 + np.asarray(t, dtype=float) * (self.theta1 - self.theta0)
        return (self.center[0] + self.radius * np.cos(th),
                self.center[1] + self.radius * np.sin(th))

    def tangent(self, t):
        th = self.theta0 + np.asarray(t, dtype=float) * (self.theta1 - self.theta0)
        s = np.sign(self.theta1 - self.theta0)
        return -s * np.sin(th), s * np.cos(th)

    def project(self, x1, x2):
        c1, c2 = self.center
        phi = np.arctan2(x2 - c2, x1 - c1)
        lo, hi = min(self.theta0, self.theta1), max(self.theta0, self.theta1)
        full = hi - lo >= 2 * np.pi - 1e-14
        phi = lo + np.mod(phi - lo, 2 * np.pi)
        if not full:
            beyond = phi > hi
            # past the end of the arc: snap to whichever endpoint is angularly closer
            to_hi = phi - hi
            to_lo = lo + 2 * np.pi - phi
            phi = np.where(beyond, np.where(to_hi <= to_lo, hi, lo), phi)
        p1 = c1 + self.radius * np.cos(phi)
        p2 = c2 + self.radius * np.sin(phi)
        t = (phi - self.theta0) / (self.theta1 - self.theta0)
        if full:
            t = np.mod(t, 1.0)
        return p1, p2, np.hypot(x1 - p1, x2 - p2), t


@dataclass(frozen=True)
class Loop:
    """A closed boundary curve, traversed counterclockwise about its own interior.

    ``domain_on_left`` is True for the outer loop and False for obstacle
    loops (the fluid is outside an obstacle).
    """

    pieces: tuple
    hole: int = 0
    domain_on_left: bool = True

    @cached_property
    def offsets(self) -> np.ndarray:
        return np.concatenate([[0.0], np.cumsum([p.length for p in self.pieces])])

    @property
    def length(self) -> float:
        return float(self.offsets[-1])

    def project(self, x1, x2):
        """Nearest point over all pieces: (p1, p2, dist, piece index, arclength)."""
        x1 = np.asarray(x1, dtype=float)
        x2 = np.asarray(x2, dtype=float)
        best = None
        for k, piece in enumerate(self.pieces):
            p1, p2, d, t = piece.project(x1, x2)
            s = self.offsets[k] + t * piece.length
            if best is None:
                best = [p1, p2, d, np.full(d.shape, k), s]
                continue
            better = d < best[2]
            for slot, val in zip(range(5), (p1, p2, d, np.full(d.shape, k), s)):
                best[slot] = np.where(better, val, best[slot])
        return tuple(best)

    def point_at(self, s):
        """Point and unit tangent at arclength ``s`` (vectorised)."""
        s = np.mod(np.asarray(s, dtype=float), self.length)
        k = np.clip(np.searchsorted(self.offsets, s, side="right") - 1, 0, len(self.pieces) - 1)
        p1 = np.empty_like(s)
        p2 = np.empty_like(s)
        t1 = np.empty_like(s)
        t2 = np.empty_like(s)
        for i, piece in enumerate(self.pieces):
            sel = k == i
            if not np.any(sel):
                continue
            t = (s[sel] - self.offsets[i]) / piece.length
            p1[sel], p2[sel] = piece.point(t)
            t1[sel], t2[sel] = piece.tangent(t)
        return p1, p2, t1, t2


def _circle_loop(center, radius, hole, tag=PHYSICAL):
    side = 1 if hole == 0 else -1
    arc = Arc(tuple(center), float(radius), 0.0, 2 * np.pi, tag=tag, side=side)
    return Loop((arc,), hole=hole, domain_on_left=(hole == 0))


def _polygon_loop(corners, tags):
    pieces = tuple(Segment(tuple(corners[k]), tuple(corners[(k + 1) % len(corners)]), tag)
                   for k, tag in enumerate(tags))
    return Loop(pieces, hole=0, domain_on_left=True)


@dataclass(frozen=True, eq=False)
class Domain:
    kind: str
    params: dict
    loops: tuple
    obstacles: tuple = ()
    anchor: tuple = (0.0, 0.0)

    # -- geometry -----------------------------------------------------------
    def contains(self, x1, x2, tol: float = 0.0):
        """Strict interior test; ``tol`` shrinks the domain by that margin."""
        x1 = np.asarray(x1, dtype=float)
        x2 = np.asarray(x2, dtype=float)
        p = self.params
        if self.kind == "disc":
            c = p["center"]
            inside = np.hypot(x1 - c[0], x2 - c[1]) < p["R"] - tol
        elif self.kind == "rectangle":
            inside = ((x1 > p["a"] + tol) & (x1 < p["b"] - tol)
                      & (x2 > p["c"] + tol) & (x2 < p["d"] - tol))
        elif self.kind == "annulus":
            inside = np.hypot(x1, x2) < p["R_out"] - tol
        elif self.kind == "halfplane_window":
            a0, w, hgt = p["a0"], p["width"], p["height"]
            inside = ((x1 > a0 + tol) & (x1 < a0 + w - tol)
                      & (np.abs(x2) < hgt / 2 - tol))
        else:  # disc_complement_window
            w, hgt = p["width"], p["height"]
            inside = ((x1 > tol) & (x1 < w - tol) & (np.abs(x2) < hgt / 2 - tol)
                      & (np.hypot(x1, x2) > p["R_obs"] + tol))
        for (c, r) in self.obstacles:
            inside = inside & (np.hypot(x1 - c[0], x2 - c[1]) > r + tol)
        return inside

    @property
    def bbox(self) -> tuple[float, float, float, float]:
        p = self.params
        if self.kind == "disc":
            c, R = p["center"], p["R"]
            return (c[0] - R, c[0] + R, c[1] - R, c[1] + R)
        if self.kind == "rectangle":
            return (p["a"], p["b"], p["c"], p["d"])
        if self.kind == "annulus":
            R = p["R_out"]
            return (-R, R, -R, R)
        if self.kind == "halfplane_window":
            return (p["a0"], p["a0"] + p["width"], -p["height"] / 2, p["height"] / 2)
        return (0.0, p["width"], -p["height"] / 2, p["height"] / 2)

    @property
    def diameter(self) -> float:
        b = self.bbox
        return float(np.hypot(b[1] - b[0], b[3] - b[2]))

    @property
    def area(self) -> float:
        p = self.params
        holes = sum(np.pi * r * r for _, r in self.obstacles)
        if self.kind == "disc":
            a = np.pi * p["R"] ** 2
        elif self.kind == "rectangle":
            a = (p["b"] - p["a"]) * (p["d"] - p["c"])
        elif self.kind == "annulus":
            a = np.pi * p["R_out"] ** 2
        elif self.kind == "halfplane_window":
            a = p["width"] * p["height"]
        else:
            a = p["width"] * p["height"] - 0.5 * np.pi * p["R_obs"] ** 2
        return float(a - holes)

    @property
    def boundary_length(self) -> float:
        return float(sum(loop.length for loop in self.loops))

    @property
    def feature_size(self) -> float:
        p = self.params
        if self.kind == "disc":
            sizes = [p["R"]]
        elif self.kind == "rectangle":
            sizes = [p["b"] - p["a"], p["d"] - p["c"]]
        elif self.kind == "annulus":
            sizes = [p["R_out"]]
        elif self.kind == "halfplane_window":
            sizes = [p["width"], p["height"]]
        else:
            sizes = [p["width"], p["height"], p["R_obs"],
                     p["width"] - p["R_obs"], p["height"] / 2 - p["R_obs"]]
        for (c, r) in self.obstacles:
            sizes.append(r)
            # gap between the obstacle and the outer boundary
            _, _, gap, _, _ = self.loops[0].project(np.array([c[0]]), np.array([c[1]]))
            sizes.append(float(gap[0]) - r)
        return float(min(sizes))

    @property
    def has_artificial_boundary(self) -> bool:
        return any(pc.tag == ARTIFICIAL for loop in self.loops for pc in loop.pieces)

    @property
    def center(self) -> tuple[float, float]:
        if self.kind == "disc":
            return tuple(self.params["center"])
        b = self.bbox
        return ((b[0] + b[1]) / 2, (b[2] + b[3]) / 2)

    def nearest_boundary(self, x1, x2):
        """Nearest boundary point over all loops.

        Returns (p1, p2, dist, loop index, piece index, arclength).
        """
        x1 = np.atleast_1d(np.asarray(x1, dtype=float))
        x2 = np.atleast_1d(np.asarray(x2, dtype=float))
        best = None
        for li, loop in enumerate(self.loops):
            p1, p2, d, k, s = loop.project(x1, x2)
            cand = [p1, p2, d, np.full(d.shape, li), k, s]
            if best is None:
                best = cand
                continue
            better = d < best[2]
            best = [np.where(better, c, b) for c, b in zip(cand, best)]
        return tuple(best)

    def piece_at(self, x1: float, x2: float, tol: float = 1e-9):
        """(loop, piece) that the boundary point ``(x1, x2)`` lies on."""
        p1, p2, d, li, k, s = self.nearest_boundary(x1, x2)
        if d[0] > tol * max(1.0, self.diameter):
            raise NotOnBoundary(f"({x1}, {x2}) is at distance {d[0]:.3g} from the boundary")
        loop = self.loops[int(li[0])]
        return loop, loop.pieces[int(k[0])], float(s[0])

    def inward_normal(self, x1: float, x2: float) -> np.ndarray:
        loop, piece, s = self.piece_at(x1, x2)
        _, _, t1, t2 = loop.point_at(np.array([s]))
        n = np.array([-t2[0], t1[0]])
        return n if loop.domain_on_left else -n


def _positive(**kw):
    for name, val in kw.items():
        if not np.isfinite(val) or val <= 0:
            raise InvalidGeometry(f"{name} must be a positive length, got {val!r}")


def make_domain(kind: str, obstacles=(), **params) -> Domain:
    """Build and validate a :class:`Domain`.

    Parameters
    ----------
    kind : str
        One of ``disc`` (``R``, optional ``center``), ``rectangle``
        (``a, b, c, d``), ``annulus`` (``rho_in, R_out``),
        ``halfplane_window`` (``a0, width, height``; the half-plane is
        ``x1 > a0`` and the window is centred on ``x2 = 0``) or
        ``disc_complement_window`` (``R_obs, width, height``; the window
        ``0 < x1 < width, |x2| < height/2`` of the half-plane with the disc
        ``|x| <= R_obs`` removed).
    obstacles : sequence of ((cx, cy), r)
        Extra circular holes for ``disc`` and ``rectangle`` domains.
    """
    kind = kind.lower().replace("-", "_")
    obstacles = tuple((tuple(map(float, c)), float(r)) for c, r in obstacles)
    if kind == "disc":
        R = float(params["R"])
        _positive(R=R)
        center = tuple(map(float, params.get("center", (0.0, 0.0))))
        p = {"R": R, "center": center}
        loops = [_circle_loop(center, R, 0)]
    elif kind == "rectangle":
        a, b, c, d = (float(params[k]) for k in "abcd")
        _positive(width=b - a, height=d - c)
        p = {"a": a, "b": b, "c": c, "d": d}
        loops = [_polygon_loop([(a, c), (b, c), (b, d), (a, d)], [PHYSICAL] * 4)]
    elif kind == "annulus":
        rho, R = float(params["rho_in"]), float(params["R_out"])
        _positive(rho_in=rho, R_out=R)
        if rho >= R:
            raise InvalidGeometry(f"annulus needs rho_in < R_out, got {rho} >= {R}")
        if obstacles:
            raise InvalidGeometry("annulus takes no extra obstacles")
        p = {"rho_in": rho, "R_out": R}
        obstacles = (((0.0, 0.0), rho),)
        loops = [_circle_loop((0.0, 0.0), R, 0)]
    elif kind == "halfplane_window":
        a0 = float(params.get("a0", 0.0))
        w, hgt = float(params["width"]), float(params["height"])
        _positive(width=w, height=hgt)
        if obstacles:
            raise InvalidGeometry("half-plane windows take no extra obstacles")
        p = {"a0": a0, "width": w, "height": hgt}
        corners = [(a0, -hgt / 2), (a0 + w, -hgt / 2), (a0 + w, hgt / 2), (a0, hgt / 2)]
        loops = [_polygon_loop(corners, [ARTIFICIAL, ARTIFICIAL, ARTIFICIAL, PHYSICAL])]
    elif kind == "disc_complement_window":
        R = float(params["R_obs"])
        w, hgt = float(params["width"]), float(params["height"])
        _positive(R_obs=R, width=w, height=hgt)
        if R >= w or R >= hgt / 2:
            raise InvalidGeometry("the obstacle disc must fit strictly inside the window")
        if obstacles:
            raise InvalidGeometry("disc-complement windows take no extra obstacles")
        p = {"R_obs": R, "width": w, "height": hgt}
        pieces = (
            Segment((0.0, -hgt / 2), (w, -hgt / 2), ARTIFICIAL),
            Segment((w, -hgt / 2), (w, hgt / 2), ARTIFICIAL),
            Segment((w, hgt / 2), (0.0, hgt / 2), ARTIFICIAL),
            Segment((0.0, hgt / 2), (0.0, R), PHYSICAL),
            Arc((0.0, 0.0), R, np.pi / 2, -np.pi / 2, PHYSICAL, side=-1),
            Segment((0.0, -R), (0.0, -hgt / 2), PHYSICAL),
        )
        loops = [Loop(pieces, hole=0, domain_on_left=True)]
    else:
        raise UnsupportedKind(f"unknown domain kind {kind!r}; expected one of {KINDS}")

    if obstacles and kind in ("disc", "rectangle"):
        tmp = Domain(kind, p, tuple(loops))
        for c, r in obstacles:
            _positive(obstacle_radius=r)
            ring = np.linspace(0, 2 * np.pi, 64, endpoint=False)
            ok = tmp.contains(c[0] + r * np.cos(ring), c[1] + r * np.sin(ring))
            if not (np.all(ok) and tmp.contains(c[0], c[1])):
                raise InvalidGeometry(f"obstacle {c}, r={r} is not strictly inside the domain")
    for k, (c, r) in enumerate(obstacles):
        if kind != "annulus":
            for c2, r2 in obstacles[k + 1:]:
                if np.hypot(c[0] - c2[0], c[1] - c2[1]) <= r + r2:
                    raise InvalidGeometry("obstacles overlap")
        loops.append(_circle_loop(c, r, k + 1))

    anchor = {"rectangle": (p.get("a", 0.0), p.get("c", 0.0)),
              "halfplane_window": (p.get("a0", 0.0), 0.0)}.get(kind, (0.0, 0.0))
    if kind == "disc":
        anchor = p["center"]
    return Domain(kind, p, tuple(loops), obstacles, anchor)


@dataclass(frozen=True, eq=False)
class Grid:
    """Uniform lattice discretisation of a :class:`Domain`.

    Fields on the grid are plain 1-D arrays over interior nodes (length
    ``n_interior``); boundary data are 1-D arrays over boundary nodes.
    """

    domain: Domain
    h: float
    x1: np.ndarray          # lattice abscissae, shape (ni,)
    x2: np.ndarray          # lattice ordinates, shape (nj,)
    interior: np.ndarray    # bool (ni, nj)
    boundary: np.ndarray    # bool (ni, nj)
    index: np.ndarray       # int (ni, nj): interior index or -1
    bindex: np.ndarray      # int (ni, nj): boundary index or -1
    boundary_proj: np.ndarray   # (M, 2) nearest boundary point
    boundary_loop: np.ndarray   # (M,) loop index
    boundary_piece: np.ndarray  # (M,) piece index inside its loop
    boundary_s: np.ndarray      # (M,) arclength of the projection along its loop
    boundary_tag: np.ndarray    # (M,) 'physical' | 'artificial'
    _cache: dict = field(default_factory=dict, repr=False)

    @property
    def n_interior(self) -> int:
        return int(self.interior.sum())

    @property
    def n_boundary(self) -> int:
        return int(self.boundary.sum())

    @cached_property
    def interior_ij(self) -> tuple[np.ndarray, np.ndarray]:
        return np.nonzero(self.interior)

    @cached_property
    def boundary_ij(self) -> tuple[np.ndarray, np.ndarray]:
        return np.nonzero(self.boundary)

    @cached_property
    def points(self) -> np.ndarray:
        """Interior node coordinates, shape (N, 2)."""
        i, j = self.interior_ij
        return np.column_stack([self.x1[i], self.x2[j]])

    @cached_property
    def boundary_points(self) -> np.ndarray:
        i, j = self.boundary_ij
        return np.column_stack([self.x1[i], self.x2[j]])

    @cached_property
    def edges(self):
        """All lattice edges carrying Dirichlet energy.

        Returns (a_kind, a_idx, b_kind, b_idx, weight) where kinds are 0 for
        interior and 1 for boundary nodes.  Edges touching an interior node
        have weight 1; edges between two boundary nodes get weight 1/2 when
        they run along the boundary (so that straight edges are integrated
        by the trapezoidal rule), 0 otherwise.
        """
        closed = self.interior | self.boundary
        kinds, idxs, wts = [[], []], [[], []], []
        for di, dj in ((1, 0), (0, 1)):
            a = closed[: closed.shape[0] - di, : closed.shape[1] - dj]
            b = closed[di:, dj:]
            ia, ja = np.nonzero(a & b)
            ib, jb = ia + di, ja + dj
            int_a = self.interior[ia, ja]
            int_b = self.interior[ib, jb]
            w = np.where(int_a | int_b, 1.0, 0.0)
            both_bd = ~(int_a | int_b)
            if np.any(both_bd):
                m1 = 0.5 * (self.x1[ia[both_bd]] + self.x1[ib[both_bd]])
                m2 = 0.5 * (self.x2[ja[both_bd]] + self.x2[jb[both_bd]])
                d = self.domain.nearest_boundary(m1, m2)[2]
                w[both_bd] = np.where(d < 1e-9 * self.h, 0.5, 0.0)
            keep = w > 0
            for slot, (ii, jj, isint) in enumerate(((ia, ja, int_a), (ib, jb, int_b))):
                ii, jj, isint = ii[keep], jj[keep], isint[keep]
                kinds[slot].append(np.where(isint, 0, 1))
                idxs[slot].append(np.where(isint, self.index[ii, jj], self.bindex[ii, jj]))
            wts.append(w[keep])
        return (np.concatenate(kinds[0]), np.concatenate(idxs[0]),
                np.concatenate(kinds[1]), np.concatenate(idxs[1]), np.concatenate(wts))

    def boundary_values(self, data) -> np.ndarray:
        """Resolve Dirichlet data to one value per boundary node.

        ``data`` may be None (zero), a scalar, an array over boundary nodes,
        or a callable ``g(x1, x2)`` evaluated at the nearest boundary point.
        """
        m = self.n_boundary
        if data is None:
            return np.zeros(m)
        if callable(data):
            return np.asarray(data(self.boundary_proj[:, 0], self.boundary_proj[:, 1]),
                              dtype=float) * np.ones(m)
        arr = np.asarray(data, dtype=float)
        if arr.ndim == 0:
            return np.full(m, float(arr))
        if arr.shape != (m,):
            from .errors import DimensionMismatch
            raise DimensionMismatch(f"boundary data has shape {arr.shape}, expected ({m},)")
        return arr

    def sample(self, func) -> np.ndarray:
        """Evaluate ``func(x1, x2)`` at interior nodes."""
        p = self.points
        return np.asarray(func(p[:, 0], p[:, 1]), dtype=float) * np.ones(len(p))

    def to_lattice(self, u, bvals=None) -> np.ndarray:
        """Scatter interior values (and boundary values) onto the lattice; NaN elsewhere."""
        full = np.full(self.interior.shape, np.nan)
        full[self.interior_ij] = u
        full[self.boundary_ij] = self.boundary_values(bvals)
        return full

    def nearest_node(self, x1: float, x2: float) -> int:
        """Index of the interior node closest to ``(x1, x2)``."""
        p = self.points
        return int(np.argmin((p[:, 0] - x1) ** 2 + (p[:, 1] - x2) ** 2))

    def interpolate(self, full: np.ndarray, x1, x2):
        """Bilinear interpolation of a lattice array, ignoring NaN corners."""
        x1 = np.atleast_1d(np.asarray(x1, dtype=float))
        x2 = np.atleast_1d(np.asarray(x2, dtype=float))
        fi = (x1 - self.x1[0]) / self.h
        fj = (x2 - self.x2[0]) / self.h
        i0 = np.clip(np.floor(fi).astype(int), 0, len(self.x1) - 2)
        j0 = np.clip(np.floor(fj).astype(int), 0, len(self.x2) - 2)
        tx = fi - i0
        ty = fj - j0
        num = np.zeros_like(x1)
        den = np.zeros_like(x1)
        for di, dj, w in ((0, 0, (1 - tx) * (1 - ty)), (1, 0, tx * (1 - ty)),
                          (0, 1, (1 - tx) * ty), (1, 1, tx * ty)):
            v = full[i0 + di, j0 + dj]
            ok = np.isfinite(v)
            num += np.where(ok, w * np.where(ok, v, 0.0), 0.0)
            den += np.where(ok, w, 0.0)
        with np.errstate(invalid="ignore", divide="ignore"):
            return np.where(den > 0, num / den, np.nan)


DEFAULT_INSET = 0.35


def discretize(d: Domain, h: float, inset: float = DEFAULT_INSET) -> Grid:
    """Sample ``d`` on the uniform lattice of mesh width ``h``.

    A lattice node counts as interior when it lies at least ``inset * h``
    inside the domain; nodes closer to the boundary (or outside it but next
    to an interior node) become boundary nodes.  Lattice-aligned straight
    edges are unaffected by ``inset < 1``.  On curved boundaries the value
    0.35 balances the inward and outward clipping offsets, which removes
    most of the O(h) error of plain clipping (see the disc torsion test).
    """
    h = float(h)
    if not np.isfinite(h) or h <= 0:
        raise MeshTooCoarse(f"mesh width must be positive, got {h!r}")
    if h >= d.feature_size:
        raise MeshTooCoarse(f"h={h} is not below the smallest feature size {d.feature_size:.4g}")
    xmin, xmax, ymin, ymax = d.bbox
    ax, ay = d.anchor
    i_lo = int(np.floor((xmin - ax) / h)) - 1
    i_hi = int(np.ceil((xmax - ax) / h)) + 1
    j_lo = int(np.floor((ymin - ay) / h)) - 1
    j_hi = int(np.ceil((ymax - ay) / h)) + 1
    x1 = ax + h * np.arange(i_lo, i_hi + 1)
    x2 = ay + h * np.arange(j_lo, j_hi + 1)
    X1, X2 = np.meshgrid(x1, x2, indexing="ij")
    tol = 1e-9 * h
    interior = d.contains(X1, X2, tol=max(tol, inset * h))
    if not interior.any():
        raise MeshTooCoarse(f"h={h} leaves no interior node")

    adj = np.zeros_like(interior)
    adj[1:, :] |= interior[:-1, :]
    adj[:-1, :] |= interior[1:, :]
    adj[:, 1:] |= interior[:, :-1]
    adj[:, :-1] |= interior[:, 1:]
    cand = ~interior & (adj | d.contains(X1, X2, tol=-tol))
    ci, cj = np.nonzero(cand)
    p1, p2, dist, li, pk, s = d.nearest_boundary(x1[ci], x2[cj])
    # lattice nodes outside the closed domain qualify only through adjacency
    onb = dist <= tol
    keep = adj[ci, cj] | onb
    ci, cj = ci[keep], cj[keep]
    p1, p2, li, pk, s = p1[keep], p2[keep], li[keep], pk[keep], s[keep]
    boundary = np.zeros_like(interior)
    boundary[ci, cj] = True
    # np.nonzero order is row-major, reorder projections to match
    order = np.lexsort((cj, ci))
    ci, cj, p1, p2, li, pk, s = (a[order] for a in (ci, cj, p1, p2, li, pk, s))

    index = -np.ones(interior.shape, dtype=np.int64)
    index[interior] = np.arange(int(interior.sum()))
    bindex = -np.ones(interior.shape, dtype=np.int64)
    bindex[ci, cj] = np.arange(len(ci))
    tags = np.array([d.loops[int(l)].pieces[int(k)].tag for l, k in zip(li, pk)], dtype=object)

    for li_req in range(len(d.loops)):
        if not np.any(li == li_req):
            raise MeshTooCoarse(f"boundary loop {li_req} captures no grid node at h={h}")

    return Grid(domain=d, h=h, x1=x1, x2=x2, interior=interior, boundary=boundary,
                index=index, bindex=bindex,
                boundary_proj=np.column_stack([p1, p2]), boundary_loop=li.astype(int),
                boundary_piece=pk.astype(int), boundary_s=s, boundary_tag=tags)


def curvature_at(d: Domain, xbar) -> float:
    """Signed curvature of the physical boundary at ``xbar``.

    Convex from inside is positive: a disc of radius R gives 1/R, a
    straight edge 0, an obstacle circle -1/r.
    """
    loop, piece, _ = d.piece_at(float(xbar[0]), float(xbar[1]))
    if piece.tag != PHYSICAL:
        raise NotOnBoundary(f"{tuple(xbar)} lies on an artificial truncation edge")
    return float(piece.curvature)
