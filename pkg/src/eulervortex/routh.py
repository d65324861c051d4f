"""Background stream data and Kirchhoff-Routh functions.

The Kirchhoff-Routh function of vortices ``x_i`` with strengths
``kappa_i`` is

    W = sum_i kappa_i^2/2 H(x_i, x_i) + sum_{i<j} kappa_i kappa_j G(x_i, x_j)
        - sum_i kappa_i q(x_i),

and the vortices move by ``kappa_i dx_i/dt = (grad_i W)^perp`` with
``(a, b)^perp = (b, -a)``.
"""
from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Callable

import numpy as np
from scipy.integrate import trapezoid
from scipy.optimize import minimize

from . import poisson
from .domain import Domain, Grid, discretize
from .errors import (BoundaryEscape, CoincidentPoints, DimensionMismatch, FluxImbalance,
                     InvalidSpec, NoInteriorMaximum, NonPositiveKappa, OutsideDomain,
                     SingularCirculationSystem, UnsupportedKind, VortexCollision)
from .green import GreenEvaluator, flux, harmonic_measures, make_evaluator


def perp(v):
    """(a, b) -> (b, -a)."""
    v = np.asarray(v, dtype=float)
    return np.stack([v[..., 1], -v[..., 0]], axis=-1)


@dataclass(eq=False)
class BackgroundField:
    """Stream data ``q`` entering the shifted nonlinearity.

    ``q`` is available either in closed form (``fn`` and optionally
    ``grad``) or as lattice values on ``grid`` (interior ``values`` plus
    boundary ``bvalues``), or as the sum of both.
    """

    fn: Callable | None = None
    grad: Callable | None = None
    grid: Grid | None = None
    values: np.ndarray | None = None
    bvalues: np.ndarray | None = None
    alpha: float = 0.0
    circulations: tuple = ()
    vn: Callable | None = None

    @classmethod
    def zero(cls) -> "BackgroundField":
        return cls(fn=lambda x1, x2: np.zeros(np.broadcast(x1, x2).shape),
                   grad=lambda x1, x2: (np.zeros(np.broadcast(x1, x2).shape),) * 2)

    @classmethod
    def rotation(cls, alpha: float) -> "BackgroundField":
        """q = -alpha |x|^2 / 2."""
        a = float(alpha)
        return cls(fn=lambda x1, x2: -0.5 * a * (x1 * x1 + x2 * x2),
                   grad=lambda x1, x2: (-a * np.asarray(x1, float), -a * np.asarray(x2, float)),
                   alpha=a)

    @classmethod
    def uniform_stream(cls, w_inf: float, a0: float = 0.0) -> "BackgroundField":
        """q = w_inf (x1 - a0): uniform flow past the wall x1 = a0."""
        w = float(w_inf)
        return cls(fn=lambda x1, x2: w * (np.asarray(x1, float) - a0) + 0 * np.asarray(x2, float),
                   grad=lambda x1, x2: (w + 0 * np.asarray(x1, float), 0 * np.asarray(x2, float)))

    @property
    def _lattice(self):
        if self.values is None:
            return None
        lat = self.__dict__.get("_lat")
        if lat is None:
            lat = self.grid.to_lattice(self.values, self.bvalues)
            self.__dict__["_lat"] = lat
        return lat

    def __call__(self, x1, x2):
        x1 = np.asarray(x1, dtype=float)
        x2 = np.asarray(x2, dtype=float)
        out = np.zeros(np.broadcast(x1, x2).shape)
        if self.fn is not None:
            out = out + self.fn(x1, x2)
        if self.values is not None:
            out = out + self.grid.interpolate(self._lattice, x1.ravel(), x2.ravel()).reshape(out.shape)
        return out

    def gradient(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        g = np.zeros(2)
        if self.fn is not None:
            if self.grad is not None:
                g += np.array([float(c) for c in self.grad(x[0], x[1])])
            else:
                g += _fd(lambda z: float(self.fn(z[0], z[1])), x, 1e-6)
        if self.values is not None:
            g += _fd(lambda z: float(self.grid.interpolate(self._lattice, z[0], z[1])[0]),
                     x, 1e-3 * self.grid.h)
        return g

    def on_grid(self, g: Grid) -> np.ndarray:
        """q at the interior nodes of ``g``."""
        if self.values is not None and g is self.grid:
            base = self.values.copy()
            if self.fn is not None:
                base += g.sample(self.fn)
            return base
        return self(g.points[:, 0], g.points[:, 1])

    def is_zero(self) -> bool:
        if self.values is not None and np.any(self.values != 0):
            return False
        if self.fn is None:
            return True
        return bool(np.all(self.fn(np.linspace(-1, 1, 7), np.linspace(-1, 1, 7)[::-1]) == 0))


def _fd(f, x, step):
    out = np.empty(2)
    for k in range(2):
        e = np.zeros(2)
        e[k] = step
        out[k] = (f(x + e) - f(x - e)) / (2 * step)
    return out


def build_stream_q(d: Domain, v_n=None, gammas=None, alpha: float = 0.0,
                   h: float | None = None, grid: Grid | None = None,
                   flux_tol: float = 1e-8, n_quad: int = 8192) -> BackgroundField:
    """Assemble ``q = -psi0 - alpha |x|^2/2`` from boundary flux and circulations.

    Parameters
    ----------
    d : Domain
    v_n : callable ``v_n(x1, x2)``, optional
        Normal velocity on the physical boundary.  Its integral over each
        boundary loop must vanish.
    gammas : sequence of float, optional
        Prescribed flux of ``grad psi0`` through each obstacle boundary.
    alpha : float
        Rotation rate.
    h, grid
        Needed whenever ``v_n`` or ``gammas`` is non-trivial.

    Notes
    -----
    On every loop ``psi0 = -int v_n ds`` along the loop's own
    counterclockwise parametrisation, starting from zero at the loop's
    first vertex.  The obstacle constants are then fixed by adding
    ``sum c_k Z_k`` so that the discrete fluxes match ``gammas``.
    """
    n_obs = len(d.loops) - 1
    gammas = np.zeros(n_obs) if gammas is None else np.asarray(gammas, dtype=float).reshape(-1)
    if gammas.shape != (n_obs,):
        raise DimensionMismatch(f"{len(gammas)} circulations for {n_obs} obstacles")
    rot = BackgroundField.rotation(alpha)
    if v_n is None and not np.any(gammas):
        return rot
    if grid is None:
        if h is None:
            raise InvalidSpec("boundary flux data needs a mesh width h or a grid")
        grid = discretize(d, h)

    bpsi = np.zeros(grid.n_boundary)
    if v_n is not None:
        for li, loop in enumerate(d.loops):
            s = np.linspace(0.0, loop.length, n_quad + 1)
            p1, p2, _, _ = loop.point_at(s[:-1])
            p1 = np.append(p1, p1[0])
            p2 = np.append(p2, p2[0])
            vals = np.asarray(v_n(p1, p2), dtype=float) * np.ones_like(s)
            tags = _tags_along(loop, s)
            vals = np.where(tags, vals, 0.0)
            cum = np.concatenate([[0.0], np.cumsum(0.5 * (vals[1:] + vals[:-1]) * np.diff(s))])
            scale = trapezoid(np.abs(vals), s)
            if abs(cum[-1]) > flux_tol * max(1.0, scale):
                raise FluxImbalance(f"boundary flux through loop {li} is {cum[-1]:.3e}, not zero")
            sel = grid.boundary_loop == li
            bpsi[sel] = -np.interp(grid.boundary_s[sel], s, cum)
    psi = poisson.solve_dirichlet(grid, None, bpsi)
    if n_obs:
        Z, Zb = harmonic_measures(grid)
        omega = np.array([[poisson.energy_product(grid, Z[k], Zb[k], Z[l], Zb[l])
                           for l in range(n_obs)] for k in range(n_obs)])
        current = np.array([flux(grid, psi, bpsi, Z[k], Zb[k]) for k in range(n_obs)])
        try:
            if np.linalg.cond(omega) > 1e12:
                raise np.linalg.LinAlgError
            c = np.linalg.solve(omega, gammas - current)
        except np.linalg.LinAlgError as exc:
            raise SingularCirculationSystem("obstacle circulation system is singular") from exc
        psi = psi + c @ Z
        bpsi = bpsi + c @ Zb
    return BackgroundField(fn=rot.fn, grad=rot.grad, grid=grid, values=-psi, bvalues=-bpsi,
                           alpha=float(alpha), circulations=tuple(gammas.tolist()), vn=v_n)


def _tags_along(loop, s):
    """True where arclength ``s`` lies on a physical piece of ``loop``."""
    k = np.clip(np.searchsorted(loop.offsets, np.mod(s, loop.length), side="right") - 1,
                0, len(loop.pieces) - 1)
    phys = np.array([pc.tag == "physical" for pc in loop.pieces])
    return phys[k]


# ---------------------------------------------------------------------------

MODES = ("single", "pair", "star", "rotating", "freestream", "free")


@dataclass(eq=False)
class RouthConfig:
    """Which Kirchhoff-Routh function to evaluate.

    ``mode`` is one of ``single``, ``pair``, ``star``, ``rotating``,
    ``freestream`` or ``free`` (point vortices in the whole plane with
    arbitrary strengths ``kappas``).
    """

    mode: str
    green: GreenEvaluator
    background: BackgroundField = field(default_factory=BackgroundField.zero)
    kappa: float = 1.0
    kappa_minus: float = -1.0
    alpha: float = 0.0
    w_inf: float = 0.0
    kappas: tuple = ()

    def __post_init__(self):
        if self.mode not in MODES:
            raise UnsupportedKind(f"unknown Routh mode {self.mode!r}")
        if self.mode in ("single", "star", "rotating", "freestream") and self.kappa <= 0:
            raise NonPositiveKappa(f"{self.mode} mode needs kappa > 0")
        if self.mode == "pair" and not (self.kappa > 0 > self.kappa_minus):
            raise InvalidSpec("pair mode needs kappa_plus > 0 > kappa_minus")
        if self.mode == "freestream" and self.w_inf <= 0:
            raise InvalidSpec("free-stream mode needs w_inf > 0")
        if self.mode == "free" and len(self.kappas) < 2:
            raise UnsupportedKind("a single vortex in the whole plane has no Kirchhoff-Routh function")
        if self.mode == "star" and self.green.mode != "star":
            raise InvalidSpec("star mode needs a Koebe (star) Green evaluator")

    @property
    def strengths(self) -> np.ndarray:
        if self.mode == "pair":
            return np.array([self.kappa, self.kappa_minus])
        if self.mode == "free":
            return np.asarray(self.kappas, dtype=float)
        return np.array([self.kappa])

    @property
    def domain(self) -> Domain | None:
        return self.green.domain


def routh_config(mode: str, domain: Domain | None, *, kappa=1.0, kappa_minus=-1.0, alpha=0.0,
                 w_inf=0.0, kappas=(), background: BackgroundField | None = None,
                 green: GreenEvaluator | None = None, h: float | None = None) -> RouthConfig:
    """Convenience constructor picking the background and Green evaluator for a mode."""
    if green is None:
        gmode = "star" if mode == "star" else "auto"
        if mode == "free":
            domain = None
        green = make_evaluator(domain, gmode, h=h)
    if background is None:
        if mode == "rotating":
            background = BackgroundField.rotation(alpha)
        elif mode == "freestream":
            a0 = domain.params.get("a0", 0.0) if domain is not None else 0.0
            background = BackgroundField.uniform_stream(w_inf, a0)
        else:
            background = BackgroundField.zero()
    return RouthConfig(mode, green, background, float(kappa), float(kappa_minus), float(alpha),
                       float(w_inf), tuple(kappas))


def _points(cfg: RouthConfig, xs) -> np.ndarray:
    xs = np.asarray(xs, dtype=float)
    if xs.ndim == 1:
        xs = xs.reshape(1, 2)
    n = len(cfg.strengths)
    if xs.shape != (n, 2):
        raise DimensionMismatch(f"{cfg.mode} mode takes {n} point(s), got shape {xs.shape}")
    return xs


def routh_eval(cfg: RouthConfig, xs) -> float:
    """Kirchhoff-Routh function at one point (or two for pair mode)."""
    xs = _points(cfg, xs)
    k = cfg.strengths
    ge = cfg.green
    for x in xs:
        if not ge.contains(x):
            raise OutsideDomain(f"{tuple(x)} is not inside the domain")
    w = 0.0
    for i in range(len(xs)):
        if ge.mode != "free":
            w += 0.5 * k[i] ** 2 * ge.robin(xs[i])
        w -= k[i] * float(cfg.background(xs[i][0], xs[i][1]))
        for j in range(i + 1, len(xs)):
            if np.allclose(xs[i], xs[j], rtol=0, atol=1e-14):
                raise CoincidentPoints("two vortices share a position")
            w += k[i] * k[j] * ge.green(xs[i], xs[j])
    return float(w)


def routh_grad(cfg: RouthConfig, xs) -> np.ndarray:
    """Gradient of W with respect to every vortex position, shape (n, 2)."""
    xs = _points(cfg, xs)
    k = cfg.strengths
    ge = cfg.green
    out = np.zeros_like(xs)
    for i in range(len(xs)):
        if ge.mode != "free":
            out[i] += 0.5 * k[i] ** 2 * ge.robin_grad(xs[i])
        out[i] -= k[i] * cfg.background.gradient(xs[i])
        for j in range(len(xs)):
            if j != i:
                out[i] += k[i] * k[j] * ge.green_grad(xs[i], xs[j])
    return out


def velocities(cfg: RouthConfig, xs) -> np.ndarray:
    """Kirchhoff's law: dx_i/dt = (grad_i W)^perp / kappa_i."""
    g = routh_grad(cfg, xs)
    return perp(g) / cfg.strengths[:, None]


# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class RouthMax:
    points: np.ndarray
    value: float
    near_boundary: bool
    scan_best: np.ndarray


def _scan_nodes(cfg: RouthConfig, n: int):
    d = cfg.domain
    x0, x1, y0, y1 = d.bbox
    xs = np.linspace(x0, x1, n + 1)
    ys = np.linspace(y0, y1, n + 1)
    X, Y = np.meshgrid(xs, ys, indexing="ij")
    return X.ravel(), Y.ravel(), max((x1 - x0) / n, (y1 - y0) / n)


def _safe_eval(cfg, xs, barrier):
    try:
        if cfg.mode == "pair" and np.hypot(*(xs[0] - xs[1])) < barrier:
            return -np.inf
        if not all(cfg.domain.contains(x[0], x[1]) and cfg.green.contains(x) for x in xs):
            return -np.inf
        return routh_eval(cfg, xs)
    except (OutsideDomain, CoincidentPoints, FloatingPointError):
        return -np.inf


def routh_maximize(cfg: RouthConfig, n: int = 64, starts: int = 4,
                   symmetric: bool = False) -> RouthMax:
    """Coarse scan over the bounding box followed by Nelder-Mead polishing.

    Parameters
    ----------
    cfg : RouthConfig
    n : int
        The scan uses the ``(n+1)**2`` vertices of an ``n``-by-``n`` grid of
        cells covering the bounding box.
    starts : int
        Number of best scan points used as Nelder-Mead starts.
    symmetric : bool
        Pair mode only: restrict to ``x_minus = (x_plus1, -x_plus2)``.

    Ties in the scan are broken toward the centre of the bounding box.
    """
    d = cfg.domain
    if d is None:
        raise UnsupportedKind("cannot maximise over the whole plane")
    X, Y, cell = _scan_nodes(cfg, n)
    diam = d.diameter
    barrier = max(cell / 4, 1e-6 * diam)
    inside = d.contains(X, Y) & np.array([cfg.green.contains((a, b)) for a, b in zip(X, Y)])
    cx, cy = d.center

    if cfg.mode == "pair" and not symmetric:
        # two-stage scan: coarse product grid on a sub-lattice
        sub = np.nonzero(inside)[0][:: max(1, int(np.sum(inside)) // 256)]
        cand = []
        for a in sub:
            for b in sub:
                if a == b:
                    continue
                xs = np.array([[X[a], Y[a]], [X[b], Y[b]]])
                cand.append((_safe_eval(cfg, xs, barrier), xs))
        cand.sort(key=lambda t: -t[0])
        seeds = [c[1].ravel() for c in cand[:starts] if np.isfinite(c[0])]
        unpack = lambda z: z.reshape(2, 2)  # noqa: E731
    else:
        if cfg.mode == "pair":
            unpack = lambda z: np.array([[z[0], z[1]], [z[0], -z[1]]])  # noqa: E731
        else:
            unpack = lambda z: np.asarray(z, dtype=float).reshape(1, 2)  # noqa: E731
        vals = np.full(X.shape, -np.inf)
        for idx in np.nonzero(inside)[0]:
            vals[idx] = _safe_eval(cfg, unpack(np.array([X[idx], Y[idx]])), barrier)
        dist = np.hypot(X - cx, Y - cy)
        order = np.lexsort((dist, -np.round(vals, 12)))
        seeds = [np.array([X[i], Y[i]]) for i in order[:starts] if np.isfinite(vals[i])]
    if not seeds:
        raise NoInteriorMaximum("the Kirchhoff-Routh function is -inf on every scan point")

    best = None
    for z0 in seeds:
        simplex = np.vstack([z0] + [z0 + 0.5 * cell * e for e in np.eye(len(z0))])
        res = minimize(lambda z: -_safe_eval(cfg, unpack(z), barrier), z0, method="Nelder-Mead",
                       options={"xatol": 1e-6 * diam, "fatol": 1e-12, "maxiter": 4000,
                                "initial_simplex": simplex})
        val = -res.fun
        key = (round(val, 10), -np.hypot(*(res.x[:2] - (cx, cy))))
        if best is None or key > best[0]:
            best = (key, res.x, val)
    pts = unpack(best[1])
    if not np.isfinite(best[2]):
        raise NoInteriorMaximum("Nelder-Mead did not find a finite maximum")
    near = False
    for x in pts:
        dist = float(d.nearest_boundary(x[0], x[1])[2][0])
        near |= dist < cell
    return RouthMax(pts, float(best[2]), bool(near), unpack(seeds[0]))


# ---------------------------------------------------------------------------


@dataclass
class VortexState:
    positions: np.ndarray
    kappas: np.ndarray
    t: float = 0.0

    def __post_init__(self):
        self.positions = np.atleast_2d(np.asarray(self.positions, dtype=float))
        self.kappas = np.atleast_1d(np.asarray(self.kappas, dtype=float))
        if self.positions.shape != (len(self.kappas), 2):
            raise DimensionMismatch("one strength per vortex position is required")


@dataclass(frozen=True)
class Trajectory:
    t: np.ndarray          # (n+1,)
    x: np.ndarray          # (n+1, nv, 2)
    W: np.ndarray          # (n+1,)

    def rows(self):
        """Rows (t, x_11, x_12, x_21, ..., W) for CSV output."""
        flat = self.x.reshape(len(self.t), -1)
        return np.column_stack([self.t, flat, self.W])


def integrate_dynamics(state: VortexState, cfg: RouthConfig, dt: float, T: float,
                       record_every: int = 1) -> Trajectory:
    """Classical RK4 for Kirchhoff's law.

    Raises
    ------
    VortexCollision
        Two vortices come closer than ``10 * dt * max speed``.
    BoundaryEscape
        A vortex leaves the domain.
    """
    if dt <= 0 or T < 0:
        raise InvalidSpec("dt must be positive and T non-negative")
    if len(state.kappas) != len(cfg.strengths) or not np.allclose(state.kappas, cfg.strengths):
        cfg = replace(cfg, kappas=tuple(state.kappas)) if cfg.mode == "free" else cfg
        if not np.allclose(state.kappas, cfg.strengths):
            raise InvalidSpec("state strengths differ from the configuration")
    nsteps = int(round(T / dt))
    x = state.positions.copy()
    ge = cfg.green

    def check(x, v):
        for p in x:
            if ge.mode != "free" and not (ge.contains(p) and cfg.domain.contains(p[0], p[1])):
                raise BoundaryEscape(f"vortex left the domain at {tuple(p)}")
        if len(x) > 1:
            vmax = float(np.max(np.hypot(v[:, 0], v[:, 1])))
            for i in range(len(x)):
                for j in range(i + 1, len(x)):
                    if np.hypot(*(x[i] - x[j])) < 10 * dt * vmax:
                        raise VortexCollision(f"vortices {i} and {j} collided")

    ts, xs, ws = [state.t], [x.copy()], [routh_eval(cfg, x)]
    for k in range(nsteps):
        k1 = velocities(cfg, x)
        check(x, k1)
        k2 = velocities(cfg, x + 0.5 * dt * k1)
        k3 = velocities(cfg, x + 0.5 * dt * k2)
        k4 = velocities(cfg, x + dt * k3)
        x = x + dt * (k1 + 2 * k2 + 2 * k3 + k4) / 6
        if (k + 1) % record_every == 0 or k + 1 == nsteps:
            ts.append(state.t + (k + 1) * dt)
            xs.append(x.copy())
            ws.append(routh_eval(cfg, x))
    return Trajectory(np.array(ts), np.array(xs), np.array(ws))
