"""Dirichlet Green functions, their regular parts and Robin functions.

Three analytic kernels are available: the disc (method of images), the
half-plane ``x1 > a0`` (single image) and the half-plane with a half-disc
removed (Turkington's kernel, obtained from the half-plane kernel by a
Kelvin inversion).  Everything else falls back to finite differences:

* ``G(., y)`` is the discrete Green function, i.e. the Poisson solve with a
  unit point mass at the node nearest ``y``;
* ``H(., y)`` is the discrete harmonic extension of the boundary trace of
  ``(1/2pi) log |z - y|``, so ``H(x, x)`` needs no limit process and works at
  off-node points.

For domains with obstacles, :func:`koebe_assemble` builds the modified
Green function ``G_*`` whose flux through every obstacle vanishes.
"""
from __future__ import annotations

import threading
from dataclasses import dataclass, field

import numpy as np

from . import poisson
from .domain import Domain, Grid, discretize
from .errors import (CoincidentPoints, OutsideDomain, SingularOmegaMatrix,
                     UnsupportedKind, VortexError)

TWO_PI = 2.0 * np.pi
FOUR_PI = 4.0 * np.pi


def fundamental(x, y):
    """(1/2pi) log(1/|x - y|)."""
    return -np.log(np.hypot(x[0] - y[0], x[1] - y[1])) / TWO_PI


# ---------------------------------------------------------------------------
# closed-form kernels; points are (x1, x2) pairs of floats or arrays


def disc_green(x, y, R=1.0, c=(0.0, 0.0)):
    x1, x2 = x[0] - c[0], x[1] - c[1]
    y1, y2 = y[0] - c[0], y[1] - c[1]
    nx, ny = x1 * x1 + x2 * x2, y1 * y1 + y2 * y2
    num = nx * ny - 2 * R * R * (x1 * y1 + x2 * y2) + R ** 4
    den = R * R * ((x1 - y1) ** 2 + (x2 - y2) ** 2)
    return np.log(num / den) / FOUR_PI


def disc_regular(x, y, R=1.0, c=(0.0, 0.0)):
    x1, x2 = x[0] - c[0], x[1] - c[1]
    y1, y2 = y[0] - c[0], y[1] - c[1]
    num = (x1 * x1 + x2 * x2) * (y1 * y1 + y2 * y2) - 2 * R * R * (x1 * y1 + x2 * y2) + R ** 4
    return np.log(num / (R * R)) / FOUR_PI


def disc_robin(x, R=1.0, c=(0.0, 0.0)):
    r2 = (x[0] - c[0]) ** 2 + (x[1] - c[1]) ** 2
    return np.log((R * R - r2) / R) / TWO_PI


def disc_robin_grad(x, R=1.0, c=(0.0, 0.0)):
    x1, x2 = x[0] - c[0], x[1] - c[1]
    den = np.pi * (R * R - x1 * x1 - x2 * x2)
    return np.array([-x1 / den, -x2 / den])


def disc_green_grad(x, y, R=1.0, c=(0.0, 0.0)):
    """Gradient of G(x, y) in x."""
    x1, x2 = x[0] - c[0], x[1] - c[1]
    y1, y2 = y[0] - c[0], y[1] - c[1]
    nx, ny = x1 * x1 + x2 * x2, y1 * y1 + y2 * y2
    num = nx * ny - 2 * R * R * (x1 * y1 + x2 * y2) + R ** 4
    d1, d2 = x1 - y1, x2 - y2
    dd = d1 * d1 + d2 * d2
    g1 = (2 * x1 * ny - 2 * R * R * y1) / num - 2 * d1 / dd
    g2 = (2 * x2 * ny - 2 * R * R * y2) / num - 2 * d2 / dd
    return np.array([g1, g2]) / FOUR_PI


def halfplane_green(x, y, a0=0.0):
    x1, y1 = x[0] - a0, y[0] - a0
    dd = (x1 - y1) ** 2 + (x[1] - y[1]) ** 2
    return np.log((dd + 4 * x1 * y1) / dd) / FOUR_PI


def halfplane_regular(x, y, a0=0.0):
    x1, y1 = x[0] - a0, y[0] - a0
    dd = (x1 - y1) ** 2 + (x[1] - y[1]) ** 2
    return np.log(dd + 4 * x1 * y1) / FOUR_PI


def halfplane_robin(x, a0=0.0):
    return np.log(2 * (x[0] - a0)) / TWO_PI


def halfplane_robin_grad(x, a0=0.0):
    return np.array([1.0 / (TWO_PI * (x[0] - a0)), 0.0])


def halfplane_green_grad(x, y, a0=0.0):
    x1, y1 = x[0] - a0, y[0] - a0
    d1, d2 = x1 - y1, x[1] - y[1]
    dd = d1 * d1 + d2 * d2
    s = dd + 4 * x1 * y1
    return np.array([(2 * d1 + 4 * y1) / s - 2 * d1 / dd, 2 * d2 / s - 2 * d2 / dd]) / FOUR_PI


def turkington_green(x, y, R=1.0):
    """Green function of {x1 > 0} minus the closed disc of radius R."""
    x1, x2 = x
    y1, y2 = y
    dd = (x1 - y1) ** 2 + (x2 - y2) ** 2
    num = 1 + 4 * x1 * y1 / dd
    den = 1 + 4 * R * R * x1 * y1 / ((x1 * y1 + x2 * y2 - R * R) ** 2 + (x2 * y1 - x1 * y2) ** 2)
    return np.log(num / den) / FOUR_PI


def _kelvin(y, R):
    s = R * R / (y[0] ** 2 + y[1] ** 2)
    return (y[0] * s, y[1] * s)


def turkington_regular(x, y, R=1.0):
    return halfplane_regular(x, y) - halfplane_green(x, _kelvin(y, R))


def turkington_robin(x, R=1.0):
    return halfplane_robin(x) - halfplane_green(x, _kelvin(x, R))


# ---------------------------------------------------------------------------


def _pt(x):
    a = np.asarray(x, dtype=float).reshape(-1)
    if a.shape != (2,):
        from .errors import DimensionMismatch
        raise DimensionMismatch(f"expected a planar point, got shape {np.shape(x)}")
    return a


@dataclass(eq=False)
class GreenEvaluator:
    """Evaluate ``G``, ``H`` and the Robin function of a domain.

    Parameters
    ----------
    domain : Domain or None
        ``None`` together with ``mode='free'`` means the whole plane.
    mode : {'analytic', 'numeric', 'star', 'free'}
    grid : Grid, optional
        Required for the numeric and star modes.
    """

    domain: Domain | None
    mode: str = "analytic"
    grid: Grid | None = None
    Z: np.ndarray | None = None        # (m, N) interior values of Z_k
    Zb: np.ndarray | None = None       # (m, M) boundary values of Z_k
    omega: np.ndarray | None = None
    omega_inv: np.ndarray | None = None
    _src: dict = field(default_factory=dict, repr=False)
    _reg: dict = field(default_factory=dict, repr=False)
    _lock: threading.Lock = field(default_factory=threading.Lock, repr=False)

    # -- helpers ---------------------------------------------------------------
    def _analytic_kind(self):
        if self.domain is None:
            return "free"
        k = self.domain.kind
        if self.domain.obstacles and k != "disc_complement_window":
            return None
        if k == "disc":
            return "disc"
        if k == "halfplane_window":
            return "halfplane"
        if k == "disc_complement_window":
            return "turkington"
        return None

    def contains(self, x) -> bool:
        """Membership in the (untruncated) domain the kernel lives on."""
        x = _pt(x)
        if self.mode == "free":
            return True
        if self.mode == "analytic":
            kind = self._analytic_kind()
            p = self.domain.params
            if kind == "disc":
                return bool(self.domain.contains(x[0], x[1]))
            if kind == "halfplane":
                return bool(x[0] > p["a0"])
            if kind == "turkington":
                return bool(x[0] > 0 and np.hypot(x[0], x[1]) > p["R_obs"])
        return bool(self.domain.contains(x[0], x[1]))

    def _check(self, *pts):
        for x in pts:
            if not self.contains(x):
                raise OutsideDomain(f"{tuple(np.round(x, 12))} is not inside the domain")

    @property
    def _disc(self):
        p = self.domain.params
        return p["R"], p["center"]

    # -- numeric building blocks -------------------------------------------------
    def source_field(self, y) -> np.ndarray:
        """Discrete Green function with its pole at the node nearest ``y`` (interior values)."""
        g = self.grid
        k = g.nearest_node(*_pt(y))
        with self._lock:
            hit = self._src.get(k)
        if hit is None:
            rhs = np.zeros(g.n_interior)
            rhs[k] = 1.0 / g.h ** 2
            hit = poisson.solve_dirichlet(g, rhs)
            with self._lock:
                self._src[k] = hit
        return hit

    def regular_field(self, y) -> np.ndarray:
        """Harmonic extension of the trace of (1/2pi) log|z - y| (interior values)."""
        g = self.grid
        y = _pt(y)
        key = (float(y[0]), float(y[1]))
        with self._lock:
            hit = self._reg.get(key)
        if hit is None:
            bp = g.boundary_proj
            bv = -fundamental((bp[:, 0], bp[:, 1]), y)
            u = poisson.solve_dirichlet(g, None, bv)
            hit = g.to_lattice(u, bv)
            with self._lock:
                if len(self._reg) > 4096:
                    zf = self._reg.get("Zfull")
                    self._reg.clear()
                    if zf is not None:
                        self._reg["Zfull"] = zf
                self._reg[key] = hit
        return hit

    def _interp(self, full, x):
        return float(self.grid.interpolate(full, x[0], x[1])[0])

    def _z_at(self, x) -> np.ndarray:
        g = self.grid
        if "Zfull" not in self._reg:
            self._reg["Zfull"] = [g.to_lattice(z, zb) for z, zb in zip(self.Z, self.Zb)]
        return np.array([float(g.interpolate(f, x[0], x[1])[0]) for f in self._reg["Zfull"]])

    # -- public evaluation -------------------------------------------------------
    def green(self, x, y) -> float:
        x, y = _pt(x), _pt(y)
        if np.allclose(x, y, rtol=0, atol=1e-14):
            raise CoincidentPoints("G(x, y) is singular at x = y")
        if self.mode == "free":
            return float(fundamental(x, y))
        self._check(x, y)
        if self.mode == "analytic":
            kind = self._analytic_kind()
            if kind == "disc":
                R, c = self._disc
                return float(disc_green(x, y, R, c))
            if kind == "halfplane":
                return float(halfplane_green(x, y, self.domain.params["a0"]))
            if kind == "turkington":
                return float(turkington_green(x, y, self.domain.params["R_obs"]))
            raise UnsupportedKind(f"no closed-form Green function for {self.domain.kind}")
        # numeric and star: regular part plus the exact singularity
        val = float(fundamental(x, y)) + self._interp(self.regular_field(y), x)
        if self.mode == "star":
            val += float(self._z_at(x) @ self.omega_inv @ self._z_at(y))
        return val

    def green_discrete(self, x, y) -> float:
        """Node-to-node discrete Green function (numeric/star modes)."""
        g = self.grid
        u = self.source_field(y)
        val = float(u[g.nearest_node(*_pt(x))])
        if self.mode == "star":
            i, j = g.nearest_node(*_pt(x)), g.nearest_node(*_pt(y))
            val += float(self.Z[:, i] @ self.omega_inv @ self.Z[:, j])
        return val

    def regular(self, x, y) -> float:
        """H(x, y) = G(x, y) - (1/2pi) log(1/|x - y|); finite at x = y."""
        x, y = _pt(x), _pt(y)
        if self.mode == "free":
            return 0.0
        self._check(x, y)
        if self.mode == "analytic":
            kind = self._analytic_kind()
            if kind == "disc":
                R, c = self._disc
                return float(disc_regular(x, y, R, c))
            if kind == "halfplane":
                return float(halfplane_regular(x, y, self.domain.params["a0"]))
            if kind == "turkington":
                return float(turkington_regular(x, y, self.domain.params["R_obs"]))
            raise UnsupportedKind(f"no closed-form Green function for {self.domain.kind}")
        val = self._interp(self.regular_field(y), x)
        if self.mode == "star":
            val += float(self._z_at(x) @ self.omega_inv @ self._z_at(y))
        return val

    def robin(self, x) -> float:
        x = _pt(x)
        if self.mode == "free":
            raise UnsupportedKind("the whole plane has no Robin function")
        self._check(x)
        if self.mode == "analytic":
            kind = self._analytic_kind()
            if kind == "disc":
                R, c = self._disc
                return float(disc_robin(x, R, c))
            if kind == "halfplane":
                return float(halfplane_robin(x, self.domain.params["a0"]))
            if kind == "turkington":
                return float(turkington_robin(x, self.domain.params["R_obs"]))
            raise UnsupportedKind(f"no closed-form Robin function for {self.domain.kind}")
        return self.regular(x, x)

    def _fd_step(self) -> float:
        if self.domain is None:
            return 1e-5
        return 1e-5 * self.domain.diameter

    def robin_grad(self, x) -> np.ndarray:
        """Gradient of x -> H(x, x); analytic for disc and half-plane, else central differences."""
        x = _pt(x)
        if self.mode == "analytic":
            kind = self._analytic_kind()
            if kind == "disc":
                R, c = self._disc
                return disc_robin_grad(x, R, c)
            if kind == "halfplane":
                return halfplane_robin_grad(x, self.domain.params["a0"])
        return _central(self.robin, x, self._fd_step())

    def green_grad(self, x, y) -> np.ndarray:
        """Gradient of G(x, y) with respect to x."""
        x, y = _pt(x), _pt(y)
        if self.mode == "free":
            d = x - y
            return -d / (TWO_PI * (d @ d))
        if self.mode == "analytic":
            kind = self._analytic_kind()
            if kind == "disc":
                R, c = self._disc
                return disc_green_grad(x, y, R, c)
            if kind == "halfplane":
                return halfplane_green_grad(x, y, self.domain.params["a0"])
        return _central(lambda z: self.green(z, y), x, self._fd_step())


def _central(f, x, step) -> np.ndarray:
    out = np.empty(2)
    for k in range(2):
        e = np.zeros(2)
        e[k] = step
        out[k] = (f(x + e) - f(x - e)) / (2 * step)
    return out


def make_evaluator(d: Domain | None, mode: str = "auto", h: float | None = None,
                   grid: Grid | None = None) -> GreenEvaluator:
    """Pick an evaluator: closed form when the domain has one, else numeric.

    ``mode='auto'`` selects ``analytic`` when possible, ``star`` for
    domains with obstacles and ``numeric`` otherwise.
    """
    if d is None:
        return GreenEvaluator(None, "free")
    ge = GreenEvaluator(d, "analytic")
    if mode == "auto":
        if ge._analytic_kind() is not None:
            return ge
        mode = "star" if d.obstacles else "numeric"
    if mode == "analytic":
        if ge._analytic_kind() is None:
            raise UnsupportedKind(f"no closed-form Green function for {d.kind}")
        return ge
    if grid is None:
        if h is None:
            raise VortexError("numeric Green functions need a mesh width h or a grid")
        grid = discretize(d, h)
    if mode == "star":
        return koebe_assemble(d, grid=grid)
    if mode != "numeric":
        raise UnsupportedKind(f"unknown Green mode {mode!r}")
    return GreenEvaluator(d, "numeric", grid)


def green_eval(ge: GreenEvaluator, x, y) -> float:
    return ge.green(x, y)


def robin(ge: GreenEvaluator, x) -> float:
    return ge.robin(x)


def harmonic_measures(g: Grid):
    """Z_k for every obstacle k: harmonic, 1 on obstacle k, 0 on the other boundaries."""
    m = len(g.domain.loops) - 1
    Z = np.empty((m, g.n_interior))
    Zb = np.empty((m, g.n_boundary))
    for k in range(m):
        Zb[k] = (g.boundary_loop == k + 1).astype(float)
        Z[k] = poisson.solve_dirichlet(g, None, Zb[k])
    return Z, Zb


def koebe_assemble(d: Domain, h: float | None = None, grid: Grid | None = None,
                   cond_cap: float = 1e12) -> GreenEvaluator:
    """Modified Green function with zero flux through every obstacle.

    ``omega[k, l]`` is the Dirichlet-energy cross term of ``Z_k`` and ``Z_l``.
    """
    if not d.obstacles:
        raise VortexError("the Koebe construction needs at least one obstacle")
    if grid is None:
        if h is None:
            raise VortexError("koebe_assemble needs a mesh width h or a grid")
        grid = discretize(d, h)
    Z, Zb = harmonic_measures(grid)
    m = len(Z)
    omega = np.empty((m, m))
    for k in range(m):
        for l in range(k, m):
            omega[k, l] = omega[l, k] = poisson.energy_product(grid, Z[k], Zb[k], Z[l], Zb[l])
    cond = np.linalg.cond(omega)
    if not np.isfinite(cond) or cond > cond_cap:
        raise SingularOmegaMatrix(f"omega has condition number {cond:.3g}")
    return GreenEvaluator(d, "star", grid, Z=Z, Zb=Zb, omega=omega, omega_inv=np.linalg.inv(omega))


def flux(g: Grid, u, bu, Zk, Zbk) -> float:
    """Discrete flux of ``u`` through the boundary where ``Zk`` equals 1.

    Defined as E(u, Z_k) - h^2 sum Z_k (-Delta_h u); by summation by parts
    this is the discrete analogue of the outward normal derivative of ``u``
    integrated over that boundary component.
    """
    lap = poisson.apply_laplacian(g, u, bu)
    return poisson.energy_product(g, u, bu, Zk, Zbk) - g.h ** 2 * float(Zk @ lap)


def star_flux_check(ge: GreenEvaluator, y) -> np.ndarray:
    """Flux of the discrete G_*(., y) through each obstacle (should vanish)."""
    g = ge.grid
    j = g.nearest_node(*_pt(y))
    c = ge.omega_inv @ ge.Z[:, j]
    u = ge.source_field(y) + c @ ge.Z
    bu = c @ ge.Zb
    return np.array([flux(g, u, bu, ge.Z[k], ge.Zb[k]) for k in range(len(ge.Z))])


@dataclass(frozen=True)
class ExpansionReport:
    epsilons: tuple
    ratios: tuple
    limit: float
    expected: float
    curvature: float

    @property
    def rel_error(self) -> float:
        if self.expected == 0:
            return abs(self.limit)
        return abs(self.limit - self.expected) / abs(self.expected)


def boundary_h_expansion(ge: GreenEvaluator, xbar, x, eps_list) -> ExpansionReport:
    """First-order boundary expansion of the Robin function.

    With ``x = (x1, x2)`` in local coordinates (``x1`` along the inward
    normal at ``xbar``, ``x2`` along the tangent), computes for each ``eps``

        r(eps) = [H(p, p) - (1/2pi) log(2 eps x1)] / eps,  p = xbar + eps x,

    which tends to ``-K |x|^2 / (4 pi x1)`` where ``K`` is the boundary
    curvature.  ``limit`` is the value at the smallest ``eps`` (or a linear
    extrapolation in ``eps`` when several values are given).
    """
    from .domain import curvature_at

    xbar, x = _pt(xbar), _pt(x)
    if x[0] <= 0:
        raise OutsideDomain("the probe direction must point into the domain (x1 > 0)")
    K = curvature_at(ge.domain, xbar)
    n = ge.domain.inward_normal(*xbar)
    t = np.array([n[1], -n[0]])
    eps = np.sort(np.asarray(eps_list, dtype=float))[::-1]
    ratios = []
    for e in eps:
        p = xbar + e * (x[0] * n + x[1] * t)
        ratios.append((ge.robin(p) - np.log(2 * e * x[0]) / TWO_PI) / e)
    ratios = np.array(ratios)
    if len(eps) >= 2:
        e1, e2 = eps[-2], eps[-1]
        r1, r2 = ratios[-2], ratios[-1]
        limit = (e1 * r2 - e2 * r1) / (e1 - e2)
    else:
        limit = ratios[-1]
    expected = -K * float(x @ x) / (FOUR_PI * x[0])
    return ExpansionReport(tuple(eps.tolist()), tuple(ratios.tolist()), float(limit), expected, K)
