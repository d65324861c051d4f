"""Condenser capacity on grids, the segment-ray closed form and bound checks.

The capacity of a compact set ``K`` relative to an open set ``Omega`` is the
Dirichlet energy of the potential equal to one on ``K`` and zero on the
boundary of ``Omega``.  Numerically ``K`` is a set of interior grid nodes
held at one; further nodes may be held at zero (slits, rays).
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.spatial import cKDTree

from .domain import Domain, Grid, discretize, make_domain
from .errors import GapUnderResolved, InvalidGeometry, ModulusOutOfRange, NonPositiveS
from .poisson import dirichlet_energy, solve_dirichlet

MIN_GAP_NODES = 4
BOUND_SLACK = 0.02


# -- elliptic integral and the segment-ray condenser ----------------------------

def elliptic_K(gamma: float, tol: float = 1e-15) -> float:
    """Complete elliptic integral of the first kind by the arithmetic-geometric mean.

    ``K(gamma) = pi / (2 AGM(1, sqrt(1 - gamma**2)))`` for the modulus
    ``0 <= gamma < 1``.
    """
    gamma = float(gamma)
    if not np.isfinite(gamma) or gamma < 0 or gamma >= 1:
        raise ModulusOutOfRange(f"modulus must lie in [0, 1), got {gamma}")
    a, b = 1.0, math.sqrt((1.0 - gamma) * (1.0 + gamma))
    for _ in range(100):
        if abs(a - b) <= tol * a:
            break
        a, b = 0.5 * (a + b), math.sqrt(a * b)
    return math.pi / (a + b)


@dataclass(frozen=True)
class SegmentRayCapacity:
    """Capacity of ``[-1, 0]`` relative to the plane slit along ``[s, inf)``."""

    s: float
    capa: float
    bound: float       # log 16(1+s), an upper bound for 2 pi / capa
    bound_ok: bool

    @property
    def lhs(self) -> float:
        return 2 * math.pi / self.capa


def capacity_segment_ray(s: float) -> SegmentRayCapacity:
    """Closed form ``2 K(sqrt(1/(1+s))) / K(sqrt(s/(1+s)))`` and its logarithmic bound."""
    s = float(s)
    if not np.isfinite(s) or s <= 0:
        raise NonPositiveS(f"gap parameter must be positive, got {s}")
    capa = 2 * elliptic_K(math.sqrt(1 / (1 + s))) / elliptic_K(math.sqrt(s / (1 + s)))
    bound = math.log(16 * (1 + s))
    return SegmentRayCapacity(s, capa, bound, bool(2 * math.pi / capa <= bound))


# -- numeric condensers ----------------------------------------------------------

@dataclass
class CapacitySpec:
    """Condenser ``(K, Omega)`` on a grid.

    Parameters
    ----------
    domain : Domain
        The open set ``Omega``; its boundary is held at zero.
    K : callable or bool array
        Predicate ``K(x1, x2) -> bool`` on node coordinates, or a mask over
        interior nodes.  Selected nodes are held at one.
    h : float
        Mesh width (ignored when ``grid`` is given).
    zero_set : callable or bool array, optional
        Interior nodes additionally held at zero (for slits inside Omega).
    """

    domain: Domain
    K: object
    h: float = 0.01
    zero_set: object = None
    grid: Grid | None = None
    min_gap_nodes: float = MIN_GAP_NODES
    _masks: tuple | None = field(default=None, repr=False)

    def get_grid(self) -> Grid:
        if self.grid is None:
            self.grid = discretize(self.domain, self.h)
        return self.grid

    def _mask(self, sel, g):
        if sel is None:
            return np.zeros(g.n_interior, bool)
        if callable(sel):
            return np.asarray(sel(g.points[:, 0], g.points[:, 1]), dtype=bool)
        sel = np.asarray(sel, dtype=bool)
        if sel.shape != (g.n_interior,):
            raise InvalidGeometry(f"node mask has shape {sel.shape}, expected ({g.n_interior},)")
        return sel

    def masks(self):
        if self._masks is None:
            g = self.get_grid()
            self._masks = (self._mask(self.K, g), self._mask(self.zero_set, g))
        return self._masks

    def validate(self):
        g = self.get_grid()
        k, z = self.masks()
        if not k.any():
            raise InvalidGeometry("K contains no interior grid node")
        if (k & z).any():
            raise InvalidGeometry("K intersects the zero set")
        pk = g.points[k]
        targets = [g.boundary_proj] + ([g.points[z]] if z.any() else [])
        gap = min(cKDTree(t).query(pk)[0].min() for t in targets)
        if gap < self.min_gap_nodes * g.h * (1 - 1e-9):
            raise GapUnderResolved(
                f"gap between K and the zero set is {gap:.4g} < {self.min_gap_nodes:g} h = "
                f"{self.min_gap_nodes * g.h:.4g}")
        return gap


def capacity_numeric(spec: CapacitySpec, method: str = "direct") -> float:
    """Dirichlet energy of the discrete condenser potential."""
    spec.validate()
    g = spec.get_grid()
    k, z = spec.masks()
    u = solve_dirichlet(g, None, 0.0, fixed=k | z, fixed_values=k.astype(float), method=method)
    return dirichlet_energy(g, u, 0.0)


def _slit_grid(L: float, h: float) -> Grid:
    n = int(round(L / h))
    L = n * h
    return discretize(make_domain("rectangle", a=-L, b=L, c=-L, d=L), h)


def segment_ray_numeric(s: float, h: float = 0.05, L: float = 8.0, extrapolate: bool = True):
    """Lattice slit condenser for ``[-1, 0]`` against the ray ``[s, inf)``.

    The segment and the ray are the nodes on the line ``x2 = 0``; the plane
    is truncated to the square ``[-L, L]^2`` (the ray then runs to the
    frame).  With ``extrapolate`` the value at ``L`` and ``2L`` is
    extrapolated linearly in ``1/L``.

    Returns
    -------
    capa : float
        Extrapolated (or single-frame) capacity.
    values : dict
        Capacity for each frame size used.
    """
    s = float(s)
    if not np.isfinite(s) or s <= 0:
        raise NonPositiveS(f"gap parameter must be positive, got {s}")
    if s < MIN_GAP_NODES * h:
        raise GapUnderResolved(f"gap s={s} is below {MIN_GAP_NODES} h = {MIN_GAP_NODES * h}")
    out = {}
    for LL in ((L, 2 * L) if extrapolate else (L,)):
        g = _slit_grid(LL, h)
        tol = 1e-9 * h
        spec = CapacitySpec(g.domain,
                            lambda x1, x2: (np.abs(x2) < tol) & (x1 > -1 - tol) & (x1 < tol),
                            h=h, zero_set=lambda x1, x2: (np.abs(x2) < tol) & (x1 > s - tol),
                            grid=g)
        out[LL] = capacity_numeric(spec)
    if not extrapolate:
        return out[L], out
    c1, c2 = out[L], out[2 * L]
    return 2 * c2 - c1, out


# -- inequality suite --------------------------------------------------------------

@dataclass(frozen=True)
class BoundCheck:
    name: str
    kind: str          # which inequality: area, halfplane, ball, measure
    h: float
    capa: float
    lhs: float         # 4 pi / capa or 2 pi / capa (capacity side, with slack)
    rhs: float

    @property
    def slack(self) -> float:
        return self.rhs - self.lhs

    @property
    def ok(self) -> bool:
        return self.slack >= 0

    def as_dict(self) -> dict:
        return {"name": self.name, "kind": self.kind, "h": self.h, "capa": self.capa,
                "lhs": self.lhs, "bound": self.rhs, "slack": self.slack, "ok": self.ok}


def _disc_pred(c, r):
    return lambda x1, x2: (x1 - c[0]) ** 2 + (x2 - c[1]) ** 2 <= r * r


def _rect_pred(x0, x1_, y0, y1):
    return lambda a, b: (a >= x0) & (a <= x1_) & (b >= y0) & (b <= y1)


def _unit_disc():
    return make_domain("disc", R=1.0)


def _pullback(pred, inv):
    """Predicate for the image set ``f(K)`` given ``f^{-1}`` on complex numbers."""
    def out(w1, w2):
        with np.errstate(all="ignore"):
            z = inv(np.asarray(w1) + 1j * np.asarray(w2))
            return pred(z.real, z.imag)
    return out


def _shapes():
    """(name, kind, builder) triples; builders return (domain, K predicate, rhs)."""
    shapes = []
    # area bound: 4 pi / capa <= log(|Omega| / |K|)
    shapes.append(("concentric discs 1/2", "area",
                   lambda: (_unit_disc(), _disc_pred((0, 0), 0.5), math.log(4.0))))
    shapes.append(("off-centre disc", "area",
                   lambda: (_unit_disc(), _disc_pred((0.3, 0.1), 0.25),
                            math.log(1.0 / 0.25 ** 2))))
    shapes.append(("thin rectangle in square", "area",
                   lambda: (make_domain("rectangle", a=-1, b=1, c=-1, d=1),
                            _rect_pred(-0.4, 0.4, -0.05, 0.05), math.log(4.0 / (0.8 * 0.1)))))

    # half-plane bound via psi(z) = (z - a)/(z + a), which maps Re z > 0 onto the unit disc
    def halfplane(pred, sup2, area, a=1.0):
        inv = lambda w: a * (1 + w) / (1 - w)  # noqa: E731
        return _unit_disc(), _pullback(pred, inv), math.log(8 * math.pi * sup2 / area)

    c, r = (1.0, 0.3), 0.3
    sup2_disc = (math.hypot(*c) + r) ** 2
    shapes.append(("half-plane disc", "halfplane",
                   lambda: halfplane(_disc_pred(c, r), sup2_disc, math.pi * r * r)))
    shapes.append(("half-plane thin rectangle", "halfplane",
                   lambda: halfplane(_rect_pred(0.5, 1.5, -0.05, 0.05), 1.5 ** 2 + 0.05 ** 2, 0.1)))

    # exterior of the ball B(0, rho) via the inversion w = rho / z onto the punctured unit disc
    rho, dist, length, thick = 1.0, 0.3, 1.0, 0.1
    diam = math.hypot(length, thick)
    pred = _rect_pred(rho + dist, rho + dist + length, -thick / 2, thick / 2)
    inv = lambda w: rho / np.where(w == 0, 1e-300, w)  # noqa: E731  (w = 0 is infinity)
    rhs_ball = math.log(16 * (1 + dist / (2 * rho)) * (1 + 2 * dist / diam))
    # complement B(0, rho): measure pi rho^2, diameter 2 rho
    rhs_measure = math.log(16 * (1 + math.pi * dist * 2 * rho / (2 * math.pi * rho ** 2))
                           * (1 + 2 * dist / diam))
    shapes.append(("segment outside ball", "ball",
                   lambda: (_unit_disc(), _pullback(pred, inv), rhs_ball)))
    shapes.append(("segment outside ball", "measure",
                   lambda: (_unit_disc(), _pullback(pred, inv), rhs_measure)))
    dc, dr = 1.6, 0.2
    rhs_ball_d = math.log(16 * (1 + (dc - dr - rho) / (2 * rho)) * (1 + 2 * (dc - dr - rho) / (2 * dr)))
    shapes.append(("disc outside ball", "ball",
                   lambda: (_unit_disc(), _pullback(_disc_pred((dc, 0), dr), inv), rhs_ball_d)))
    return shapes


def check_capacity_bounds(h: float = 0.01, slack: float = BOUND_SLACK, resolutions=(1, 2)):
    """Evaluate the capacity inequalities on a fixed suite of condensers.

    Each entry compares the capacity side (``4 pi / capa`` for the area and
    half-plane bounds, ``2 pi / capa`` for the diameter bounds) with the
    closed-form right-hand side.  The numeric capacity is enlarged by the
    factor ``1 + slack`` before comparing, to absorb discretisation error.
    The suite runs at ``h / k`` for each ``k`` in ``resolutions``.

    Half-plane and ball-exterior condensers are mapped conformally onto
    the unit disc (capacity is conformally invariant), so no truncation is
    involved.

    Returns
    -------
    list of BoundCheck
    """
    out = []
    grids = {}
    for k in resolutions:
        hk = h / k
        for name, kind, build in _shapes():
            dom, pred, rhs = build()
            key = (dom.kind, tuple(sorted(dom.params.items())), hk)
            g = grids.get(key)
            if g is None:
                g = grids[key] = discretize(dom, hk)
            spec = CapacitySpec(dom, pred, h=hk, grid=g)
            capa = capacity_numeric(spec)
            num = 4 * math.pi if kind in ("area", "halfplane") else 2 * math.pi
            out.append(BoundCheck(name, kind, hk, capa, num / (capa * (1 + slack)), rhs))
    return out


def halfplane_window_check(h: float = 0.02, width: float = 6.0, height: float = 12.0) -> BoundCheck:
    """Half-plane bound evaluated directly on a truncated window.

    The window is a subset of the half-plane, so its capacity exceeds the
    half-plane capacity and the check is implied by (weaker than) the
    conformal one; it exercises the window geometry.
    """
    dom = make_domain("halfplane_window", a0=0.0, width=width, height=height)
    c, r = (1.0, 0.3), 0.3
    spec = CapacitySpec(dom, _disc_pred(c, r), h=h)
    capa = capacity_numeric(spec)
    rhs = math.log(8 * math.pi * (math.hypot(*c) + r) ** 2 / (math.pi * r * r))
    return BoundCheck("half-plane window disc", "halfplane", h, capa,
                      4 * math.pi / (capa * (1 + BOUND_SLACK)), rhs)
