"""Vortex-core solutions of ``-Delta u = eps^-2 (u - q_eps)_+^p``.

Single vortices are computed by a damped Picard iteration in which each
iterate is rescaled onto the Nehari set; vortex pairs use the same loop
with a two-parameter (nodal) rescaling.  Quantities such as the total
vorticity, its centre and the core radius are extracted by
:func:`diagnostics`, and :func:`epsilon_sweep` fits their small-``eps``
behaviour.

All integrals are ``h**2``-weighted nodal sums, and the Dirichlet energy of
an interior field with zero boundary values is ``h**2 * u @ A @ u``.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field, replace

import numpy as np
from scipy import ndimage
from scipy.optimize import brentq, minimize
from scipy.spatial import ConvexHull, QhullError

from . import poisson
from .domain import Grid
from .errors import (EmptyVorticity, GridTooCoarseForCore, InsufficientPoints, InvalidSpec,
                     NoConvergence, NoPositivePart, NoSignChange, NotNonnegative,
                     TrivialCollapse, UnsupportedExponent)
from .green import GreenEvaluator, make_evaluator
from .radial_profile import limit_constant, profile_for_kappa, solve_unit_profile
from .routh import BackgroundField, RouthConfig, routh_eval, routh_maximize

log = logging.getLogger(__name__)

TWO_PI = 2.0 * np.pi


@dataclass(eq=False)
class ProblemSpec:
    """Everything that defines one semilinear problem on a grid.

    Parameters
    ----------
    grid : Grid
    p : float
        Exponent of ``f(s) = s_+^p``.
    kappa, eps : float
        Circulation and core scale (the positive vortex in pair mode).
    background : BackgroundField
        The stream data ``q``.
    mode : {'single', 'pair'}
    kappa_minus, eps_minus : float, optional
        The negative vortex in pair mode (``eps_minus`` defaults to ``eps``).
    bdata : boundary data for ``u``, optional
        Used on artificial truncation edges; the problem is solved for
        ``u - g`` where ``g`` is the harmonic extension of ``bdata``.
    green : GreenEvaluator, optional
        Used to build hat functions; defaults to the closed form when the
        domain has one and to a numeric evaluator on ``grid`` otherwise.
    min_core_nodes : float
        Core-resolution guard: ``eps * rho_kappa >= min_core_nodes * h``.
    """

    grid: Grid
    p: float
    kappa: float
    eps: float
    background: BackgroundField = field(default_factory=BackgroundField.zero)
    mode: str = "single"
    kappa_minus: float | None = None
    eps_minus: float | None = None
    bdata: object = None
    green: GreenEvaluator | None = None
    min_core_nodes: float = 6.0

    def __post_init__(self):
        self.validate()

    # -- validation --------------------------------------------------------------
    def validate(self):
        if not np.isfinite(self.p) or self.p <= 1:
            raise UnsupportedExponent(f"exponent must satisfy p > 1, got {self.p}")
        if self.mode not in ("single", "pair"):
            raise InvalidSpec(f"unknown mode {self.mode!r}")
        if not (self.eps > 0):
            raise InvalidSpec("eps must be positive")
        if self.mode == "single":
            if not (self.kappa > 0):
                raise InvalidSpec("single mode needs kappa > 0")
            if np.min(self.qeps) < 0:
                raise InvalidSpec("q_eps is negative somewhere: kappa is too small for this eps and q")
        else:
            if self.kappa_minus is None or not (self.kappa > 0 > self.kappa_minus):
                raise InvalidSpec("pair mode needs kappa_plus > 0 > kappa_minus")
            if not (self.eps_m > 0):
                raise InvalidSpec("eps_minus must be positive")
            ratio = math.log(self.eps) / math.log(self.eps_m)
            if not (0.2 < ratio < 5.0):
                raise InvalidSpec("log eps_plus / log eps_minus must stay bounded (0.2, 5)")
            if np.min(self.qeps) < 0 or np.max(self.qeps_minus) > 0:
                raise InvalidSpec("pair mode needs q_eps_plus >= 0 >= q_eps_minus")
        for kap, eps in self._vortices():
            rho = profile_for_kappa(self.profile, abs(kap)).rho
            if eps * rho < self.min_core_nodes * self.grid.h:
                raise GridTooCoarseForCore(
                    f"core radius eps*rho = {eps * rho:.4g} is below {self.min_core_nodes:g} h "
                    f"= {self.min_core_nodes * self.grid.h:.4g}")

    def _vortices(self):
        if self.mode == "single":
            return [(self.kappa, self.eps)]
        return [(self.kappa, self.eps), (self.kappa_minus, self.eps_m)]

    # -- derived data -------------------------------------------------------------
    @property
    def eps_m(self) -> float:
        return self.eps if self.eps_minus is None else self.eps_minus

    @property
    def profile(self):
        return solve_unit_profile(self.p)

    @property
    def q(self) -> np.ndarray:
        c = self.__dict__.get("_q")
        if c is None:
            c = self.background.on_grid(self.grid)
            self.__dict__["_q"] = c
        return c

    @property
    def lift(self) -> np.ndarray:
        """Harmonic extension of the boundary data (zero by default)."""
        c = self.__dict__.get("_lift")
        if c is None:
            if self.bdata is None:
                c = np.zeros(self.grid.n_interior)
            else:
                c = poisson.solve_dirichlet(self.grid, None, self.bdata)
            self.__dict__["_lift"] = c
        return c

    @property
    def qeps(self) -> np.ndarray:
        """q + (kappa/2pi) log(1/eps) at interior nodes."""
        return self.q + self.kappa / TWO_PI * math.log(1.0 / self.eps)

    @property
    def qeps_minus(self) -> np.ndarray:
        return self.q + self.kappa_minus / TWO_PI * math.log(1.0 / self.eps_m)

    @property
    def evaluator(self) -> GreenEvaluator:
        if self.green is None:
            self.green = make_evaluator(self.grid.domain, "auto", grid=self.grid)
        return self.green

    def routh(self) -> RouthConfig:
        if self.mode == "pair":
            return RouthConfig("pair", self.evaluator, self.background, self.kappa,
                               self.kappa_minus)
        mode = "star" if self.evaluator.mode == "star" else "single"
        return RouthConfig(mode, self.evaluator, self.background, self.kappa)

    def with_eps(self, eps, eps_minus=None) -> "ProblemSpec":
        new = replace(self, eps=float(eps),
                      eps_minus=None if eps_minus is None else float(eps_minus))
        # the lift and q only depend on the grid and the background
        for k in ("_q", "_lift"):
            if k in self.__dict__:
                new.__dict__[k] = self.__dict__[k]
        return new


# ---------------------------------------------------------------------------
# discrete functionals


def _A(spec):
    return poisson.assemble(spec.grid).A


def grad_norm2(spec: ProblemSpec, u, v=None) -> float:
    """h^2 u.A.v (the Dirichlet product for zero boundary values)."""
    A = _A(spec)
    v = u if v is None else v
    return float(spec.grid.h ** 2 * (u @ (A @ v)))


def vorticity(spec: ProblemSpec, v) -> np.ndarray:
    """eps^-2 f(v - q_eff), including the negative vortex in pair mode."""
    qe = spec.qeps - spec.lift
    w = np.clip(v - qe, 0, None) ** spec.p / spec.eps ** 2
    if spec.mode == "pair":
        qm = spec.qeps_minus - spec.lift
        w = w - np.clip(qm - v, 0, None) ** spec.p / spec.eps_m ** 2
    return w


def energy(spec: ProblemSpec, v) -> float:
    """(1/2) int |grad v|^2 - int F(v), F the primitive of the nonlinearity."""
    p = spec.p
    h2 = spec.grid.h ** 2
    qe = spec.qeps - spec.lift
    pot = np.sum(np.clip(v - qe, 0, None) ** (p + 1)) / ((p + 1) * spec.eps ** 2)
    if spec.mode == "pair":
        qm = spec.qeps_minus - spec.lift
        pot += np.sum(np.clip(qm - v, 0, None) ** (p + 1)) / ((p + 1) * spec.eps_m ** 2)
    return 0.5 * grad_norm2(spec, v) - h2 * float(pot)


def nehari_residual(spec: ProblemSpec, v) -> float:
    """<dE(v), v> relative to int |grad v|^2."""
    a = grad_norm2(spec, v)
    return (a - spec.grid.h ** 2 * float(vorticity(spec, v) @ v)) / a


def nodal_residuals(spec: ProblemSpec, v):
    """<dE(v), v_+> and <dE(v), v_-> relative to the gradient norms of v_+ and v_-."""
    h2 = spec.grid.h ** 2
    A = _A(spec)
    Av = A @ v
    om = vorticity(spec, v)
    out = []
    for part in (np.clip(v, 0, None), np.clip(v, None, 0)):
        num = h2 * float(part @ Av) - h2 * float(om @ part)
        out.append(num / grad_norm2(spec, part))
    return tuple(out)


def pde_residual(spec: ProblemSpec, v) -> float:
    """||-Delta_h v - omega||_2 / ||omega||_2."""
    om = vorticity(spec, v)
    r = _A(spec) @ v - om
    return float(np.linalg.norm(r) / max(np.linalg.norm(om), 1e-300))


# ---------------------------------------------------------------------------
# Nehari rescaling


def _scale_root(a, w, q, inv_eps2, p, h2, cap=1e6):
    """Root in t of t a = inv_eps2 h2 sum (t w - q)_+^p w, unique for q >= 0."""
    act = w > 0
    w = w[act]
    q = q[act]
    if w.size == 0:
        raise NoPositivePart("the field has no positive values")

    def phi(t):
        return inv_eps2 * h2 * float(np.sum(np.clip(t * w - q, 0, None) ** p * w)) / t - a

    lo = float(np.min(np.where(q > 0, q, 0.0) / w))
    lo = max(lo, 1e-300)
    if lo >= cap:
        raise NoPositivePart(f"no Nehari scaling below t = {cap:g}")
    hi = max(2 * lo, 1e-12)
    while phi(hi) <= 0:
        hi *= 2
        if hi > cap:
            raise NoPositivePart(f"no Nehari scaling below t = {cap:g}")
    if lo <= 0 or phi(lo) >= 0:
        lo = hi
        while phi(lo) >= 0:
            lo /= 2
            if lo < 1e-300:
                raise NoPositivePart("Nehari scaling bracket collapsed")
    return brentq(phi, lo, hi, xtol=1e-15, rtol=4 * np.finfo(float).eps, maxiter=300)


def nehari_scale(w, spec: ProblemSpec, cap: float = 1e6):
    """Return ``(t, t*w)`` with ``t*w`` on the Nehari set of ``spec``.

    Raises
    ------
    NotNonnegative
        If ``w`` has negative entries.
    NoPositivePart
        If ``t*w`` never exceeds ``q_eps`` for ``t`` up to ``cap``.
    """
    w = np.asarray(w, dtype=float)
    if np.min(w) < 0:
        raise NotNonnegative("Nehari rescaling needs a non-negative field")
    a = grad_norm2(spec, w)
    if a <= 0:
        raise NoPositivePart("the field vanishes")
    t = _scale_root(a, w, spec.qeps - spec.lift, spec.eps ** -2, spec.p, spec.grid.h ** 2, cap)
    return t, t * w


def nodal_scale(wp, wm, spec: ProblemSpec, cap: float = 1e6):
    """Find ``(t+, t-)`` so that ``t+ wp - t- wm`` satisfies both nodal conditions.

    For fixed ``t-`` the first condition has a unique root ``t+(t-)``,
    increasing in ``t-``; the second condition is then solved along that
    curve by bracketing, which locates the zero guaranteed by the
    Poincare-Miranda argument on a rectangle where both residuals change sign.
    """
    h2 = spec.grid.h ** 2
    A = _A(spec)
    app = h2 * float(wp @ (A @ wp))
    amm = h2 * float(wm @ (A @ wm))
    apm = h2 * float(wp @ (A @ wm))      # <= 0 for disjoint supports
    qp = spec.qeps - spec.lift
    qm = -(spec.qeps_minus - spec.lift)  # >= 0
    p = spec.p
    ip, im = spec.eps ** -2, spec.eps_m ** -2
    sp_ = wp > 0
    sm_ = wm > 0
    wp_, qp_ = wp[sp_], qp[sp_]
    wm_, qm_ = wm[sm_], qm[sm_]
    if wp_.size == 0 or wm_.size == 0:
        raise NoSignChange("the field lacks a positive or a negative part")

    def tplus(tm):
        # t+ a++ - t- a+- = ip h2 sum (t+ w+ - q+)_+^p w+ ; the cross term acts as extra mass
        extra = -tm * apm
        def g(t):
            return ip * h2 * float(np.sum(np.clip(t * wp_ - qp_, 0, None) ** p * wp_)) - t * app - extra
        lo, hi = 1e-12, 1.0
        while g(hi) <= 0:
            hi *= 2
            if hi > cap:
                raise NoSignChange("positive part never activates")
        return brentq(g, lo if g(lo) < 0 else lo / 2, hi, xtol=1e-15, rtol=1e-15, maxiter=300)

    def gm(tm):
        tp = tplus(tm)
        return (im * h2 * float(np.sum(np.clip(tm * wm_ - qm_, 0, None) ** p * wm_))
                - tm * amm + tp * apm), tp

    lo, hi = 1e-12, 1.0
    while gm(hi)[0] <= 0:
        hi *= 2
        if hi > cap:
            raise NoSignChange("nodal projection rectangle exhausted")
    if gm(lo)[0] >= 0:
        raise NoSignChange("nodal residual has no sign change near t- = 0")
    tm = brentq(lambda t: gm(t)[0], lo, hi, xtol=1e-15, rtol=1e-15, maxiter=300)
    tp = tplus(tm)
    return tp, tm, tp * wp - tm * wm


# ---------------------------------------------------------------------------
# hat functions


def hat_kappa(spec: ProblemSpec, xhat, kappa=None, eps=None, q_at=None) -> float:
    """Leading-order circulation of the hat function centred at ``xhat``."""
    kappa = spec.kappa if kappa is None else kappa
    eps = spec.eps if eps is None else eps
    ge = spec.evaluator
    q0 = float(spec.background(xhat[0], xhat[1])) if q_at is None else q_at
    rho = profile_for_kappa(spec.profile, kappa).rho
    return kappa + TWO_PI / math.log(1 / eps) * (q0 - kappa * ge.robin(xhat)
                                                  + kappa / TWO_PI * math.log(rho))


def hat_function(spec: ProblemSpec, xhat, kappa_hat=None, kappa=None, eps=None,
                 q_sign: float = 1.0) -> np.ndarray:
    """Profile core plus harmonic tail, centred at ``xhat`` (interior values).

    ``U_k((x - xhat)/eps) + k((1/2pi) log(1/(eps rho_k)) + H(xhat, x))``
    with ``k = kappa_hat`` (default: :func:`hat_kappa`).  Outside the core
    this is ``k G(xhat, x)``.
    """
    kappa = spec.kappa if kappa is None else abs(kappa)
    eps = spec.eps if eps is None else eps
    xhat = np.asarray(xhat, dtype=float)
    if kappa_hat is None:
        q0 = q_sign * float(spec.background(xhat[0], xhat[1]))
        kappa_hat = hat_kappa(spec, xhat, kappa, eps, q_at=q0)
    pk = profile_for_kappa(spec.profile, kappa_hat)
    g = spec.grid
    P = g.points
    r = np.hypot(P[:, 0] - xhat[0], P[:, 1] - xhat[1]) / eps
    core = pk.radial(np.maximum(r, 1e-300))
    ge = spec.evaluator
    if ge.mode == "analytic":
        Hx = _analytic_H_many(ge, xhat, P)
    else:
        Hx = g.interpolate(ge.regular_field(xhat), P[:, 0], P[:, 1])
        if ge.mode == "star":
            Zx = ge.Z.T
            Hx = Hx + Zx @ (ge.omega_inv @ ge._z_at(xhat))
    u = core + kappa_hat * (math.log(1 / (eps * pk.rho)) / TWO_PI + Hx)
    return np.clip(u, 0, None) if spec.bdata is None else u - spec.lift


def _analytic_H_many(ge, xhat, P):
    from .green import disc_regular, halfplane_regular, turkington_regular

    kind = ge._analytic_kind()
    pts = (P[:, 0], P[:, 1])
    if kind == "disc":
        R, c = ge._disc
        return disc_regular(pts, xhat, R, c)
    if kind == "halfplane":
        return halfplane_regular(pts, xhat, ge.domain.params["a0"])
    return turkington_regular(pts, xhat, ge.domain.params["R_obs"])


def pair_hat(spec: ProblemSpec, xp, xm) -> np.ndarray:
    """Difference of two hat functions for the positive and negative vortex."""
    up = hat_function(spec, xp)
    um = hat_function(spec, xm, kappa=abs(spec.kappa_minus), eps=spec.eps_m, q_sign=-1.0)
    return up - um


# ---------------------------------------------------------------------------


@dataclass
class SolveResult:
    u: np.ndarray                # interior values of the full field (lift included)
    v: np.ndarray                # interior values with zero boundary data
    energy: float
    nehari: tuple
    iterations: int
    converged: bool
    pde_residual: float
    history: list = field(default_factory=list, repr=False)
    scales: tuple = ()


def _anderson(xs, fs, m):
    """Anderson mixing of the last ``m`` iterates ``x`` and their maps ``f(x)``."""
    r = [f - x for x, f in zip(xs[-m:], fs[-m:])]
    if len(r) < 2:
        return fs[-1]
    dR = np.column_stack([r[i + 1] - r[i] for i in range(len(r) - 1)])
    dF = np.column_stack([fs[-m:][i + 1] - fs[-m:][i] for i in range(len(r) - 1)])
    gamma, *_ = np.linalg.lstsq(dR, r[-1], rcond=None)
    return fs[-1] - dF @ gamma


def _picard(spec, v0, project, theta, tol, etol, maxiter, anderson):
    """Shared outer loop; ``project(z)`` maps a potential onto the constraint set."""
    lu = poisson.assemble(spec.grid).lu
    v = v0
    E = energy(spec, v)
    hist = [E]
    xs, fs = [], []
    th = theta
    it = 0
    for it in range(1, maxiter + 1):
        om = vorticity(spec, v)
        if not np.any(om):
            raise TrivialCollapse("vorticity vanished during the iteration")
        z = lu.solve(om)
        target = project(z)[-1]
        if anderson:
            xs.append(v)
            fs.append(target)
            xs, fs = xs[-anderson:], fs[-anderson:]
            cand = _anderson(xs, fs, anderson)
            if spec.mode == "single":
                cand = np.clip(cand, 0, None)
            new = (1 - th) * v + th * cand
        else:
            new = (1 - th) * v + th * target
        try:
            new = project_field(spec, new)
        except (NoPositivePart, NoSignChange):
            new = (1 - th) * v + th * target
            xs, fs = [], []
        En = energy(spec, new)
        if En > E + 1e-12 * abs(E) and th > 0.25 + 1e-12 and not anderson:
            th = 0.25
            log.info("energy increased at iteration %d, damping lowered to 0.25", it)
        dE = abs(En - E)
        v, E = new, En
        hist.append(E)
        res = pde_residual(spec, v)
        log.debug("iter %d  E=%.12g  res=%.3e", it, E, res)
        if res <= tol and dE <= etol * max(1.0, abs(E)):
            return v, it, True, hist
    return v, it, False, hist


def project_field(spec: ProblemSpec, v):
    """Rescale ``v`` onto the Nehari (or nodal Nehari) set."""
    if spec.mode == "single":
        return nehari_scale(np.clip(v, 0, None), spec)[1]
    return nodal_scale(np.clip(v, 0, None), np.clip(-v, 0, None), spec)[2]


def _finish(spec, v, it, ok, hist):
    v = project_field(spec, v)
    if spec.mode == "single":
        neh = (nehari_residual(spec, v),)
    else:
        neh = nodal_residuals(spec, v)
    return SolveResult(u=v + spec.lift, v=v, energy=energy(spec, v), nehari=neh, iterations=it,
                       converged=ok, pde_residual=pde_residual(spec, v), history=hist)


def default_center(spec: ProblemSpec):
    return routh_maximize(spec.routh(), symmetric=(spec.mode == "pair")).points


def hat_energy(spec: ProblemSpec, centers) -> float:
    """Energy of the hat function(s) at ``centers`` after rescaling onto the constraint set."""
    centers = np.atleast_2d(np.asarray(centers, dtype=float))
    d = spec.grid.domain
    for c in centers:
        if not (d.contains(c[0], c[1]) and spec.evaluator.contains(c)):
            return np.inf
    try:
        if spec.mode == "single":
            w = hat_function(spec, centers[0])
        else:
            if np.hypot(*(centers[0] - centers[1])) < 2 * spec.grid.h:
                return np.inf
            w = pair_hat(spec, centers[0], centers[1])
        return energy(spec, project_field(spec, w))
    except (NoPositivePart, NoSignChange):
        return np.inf


def reduced_center(spec: ProblemSpec, start, symmetric: bool = False) -> np.ndarray:
    """Minimise the hat-function energy over the vortex position(s).

    The hat functions form a finite-dimensional family of approximate
    solutions parametrised by the centre; minimising their (Nehari-rescaled)
    energy corrects the Kirchhoff-Routh maximiser for finite ``eps`` and
    leaves only a small translation error for the Picard iteration, whose
    convergence along translations is slow.
    """
    start = np.atleast_2d(np.asarray(start, dtype=float))
    if spec.mode == "single":
        unpack = lambda z: z.reshape(1, 2)  # noqa: E731
        z0 = start[0]
    elif symmetric:
        unpack = lambda z: np.array([[z[0], z[1]], [z[0], -z[1]]])  # noqa: E731
        z0 = start[0]
    else:
        unpack = lambda z: z.reshape(2, 2)  # noqa: E731
        z0 = start.ravel()
    step = 2 * spec.eps * max(profile_for_kappa(spec.profile, abs(k)).rho
                              for k, _ in spec._vortices())
    simplex = np.vstack([z0] + [z0 + step * e for e in np.eye(len(z0))])
    res = minimize(lambda z: hat_energy(spec, unpack(z)), z0, method="Nelder-Mead",
                   options={"initial_simplex": simplex, "xatol": 0.25 * spec.grid.h,
                            "fatol": 1e-10, "maxiter": 400})
    if not np.isfinite(res.fun) or hat_energy(spec, unpack(z0)) < res.fun:
        return unpack(z0)
    return unpack(res.x)


def solve_single(spec: ProblemSpec, init=None, *, theta: float = 0.5, tol: float = 1e-6,
                 etol: float = 1e-10, maxiter: int = 500, anderson: int = 5,
                 raise_on_fail: bool = True) -> SolveResult:
    """Nehari-constrained Picard iteration for one vortex.

    Parameters
    ----------
    spec : ProblemSpec
    init : array over interior nodes, optional
        Initial guess; defaults to the hat function centred at the maximiser
        of the Kirchhoff-Routh function.
    theta : float
        Damping of the Picard update.
    tol, etol : float
        Stop once the relative PDE residual is below ``tol`` and the energy
        changes by less than ``etol`` (relative).
    anderson : int
        Depth of Anderson mixing (0 disables it).
    """
    if spec.mode != "single":
        raise InvalidSpec("solve_single needs a single-mode spec")
    if init is None:
        xc = reduced_center(spec, default_center(spec))
        init = hat_function(spec, xc[0])
    v0 = project_field(spec, np.clip(np.asarray(init, dtype=float), 0, None))
    v, it, ok, hist = _picard(spec, v0, lambda z: nehari_scale(np.clip(z, 0, None), spec),
                              theta, tol, etol, maxiter, anderson)
    if not ok and raise_on_fail:
        raise NoConvergence(f"no convergence after {maxiter} iterations")
    return _finish(spec, v, it, ok, hist)


def solve_pair(spec: ProblemSpec, init=None, *, theta: float = 0.5, tol: float = 1e-6,
               etol: float = 1e-10, maxiter: int = 500, anderson: int = 5,
               raise_on_fail: bool = True, symmetric: bool = True) -> SolveResult:
    """Nodal-Nehari Picard iteration for a vortex pair.

    The default initial guess is a pair of hat functions at the (mirror
    symmetric when ``symmetric``) maximiser of the pair Kirchhoff-Routh
    function, moved to the minimiser of the hat-function energy.
    """
    if spec.mode != "pair":
        raise InvalidSpec("solve_pair needs a pair-mode spec")
    if init is None:
        pts = reduced_center(spec, default_center(spec), symmetric=symmetric)
        init = pair_hat(spec, pts[0], pts[1])
    v0 = project_field(spec, np.asarray(init, dtype=float))

    def proj(z):
        return nodal_scale(np.clip(z, 0, None), np.clip(-z, 0, None), spec)

    v, it, ok, hist = _picard(spec, v0, proj, theta, tol, etol, maxiter, anderson)
    if not ok and raise_on_fail:
        raise NoConvergence(f"no convergence after {maxiter} iterations")
    return _finish(spec, v, it, ok, hist)


# ---------------------------------------------------------------------------


@dataclass
class VortexDiagnostics:
    kappa_eps: float
    mask: np.ndarray               # bool over interior nodes: the vorticity set
    omega: np.ndarray
    energy: float
    components: int
    _center: np.ndarray | None = None
    r_bar: float = float("nan")
    r_ring: float = float("nan")
    diameter: float = float("nan")
    kappa_minus_eps: float = 0.0
    center_minus: np.ndarray | None = None

    @property
    def center(self) -> np.ndarray:
        if self._center is None:
            raise EmptyVorticity("the vorticity vanishes, its centre is undefined")
        return self._center

    def as_dict(self) -> dict:
        out = {"kappa_eps": self.kappa_eps, "energy": self.energy,
               "components": self.components, "r_bar": self.r_bar, "r_ring": self.r_ring,
               "diameter": self.diameter,
               "x_eps": None if self._center is None else [float(c) for c in self._center]}
        if self.center_minus is not None:
            out["kappa_minus_eps"] = self.kappa_minus_eps
            out["x_eps_minus"] = [float(c) for c in self.center_minus]
        return out


def _crossings(g: Grid, level):
    """Sub-cell points where ``level`` changes sign across a lattice edge."""
    full = np.full(g.interior.shape, -1.0)
    full[g.interior_ij] = level
    pts = []
    for di, dj in ((1, 0), (0, 1)):
        a = full[: full.shape[0] - di, : full.shape[1] - dj]
        b = full[di:, dj:]
        i, j = np.nonzero((a > 0) != (b > 0))
        fa, fb = a[i, j], b[i, j]
        s = fa / (fa - fb)
        pts.append(np.column_stack([g.x1[i] + s * di * g.h, g.x2[j] + s * dj * g.h]))
    return np.vstack(pts)


def _diameter(points):
    if len(points) < 2:
        return 0.0
    try:
        hull = points[ConvexHull(points).vertices]
    except (QhullError, ValueError):
        hull = points
    d = hull[:, None, :] - hull[None, :, :]
    return float(np.sqrt(np.max(np.sum(d * d, axis=-1))))


def diagnostics(u, spec: ProblemSpec) -> VortexDiagnostics:
    """Vorticity set, total vorticity, centre, core radii, component count and energy.

    ``u`` holds interior values of the full field.  The core radii and the
    diameter are measured on the sub-cell crossing points of the level set
    ``u = q_eps`` (linear interpolation along lattice edges).
    """
    g = spec.grid
    u = np.asarray(u, dtype=float)
    v = u - spec.lift
    om = vorticity(spec, v)
    h2 = g.h ** 2
    P = g.points
    qe = spec.qeps - spec.lift
    pos = om > 0
    mask = v > qe
    kap = h2 * float(np.sum(np.where(pos, om, 0.0)))
    lab = np.zeros(g.interior.shape, dtype=bool)
    lab[g.interior_ij] = mask
    _, ncomp = ndimage.label(lab)
    E = energy(spec, v)
    out = VortexDiagnostics(kappa_eps=kap, mask=mask, omega=om, energy=E, components=int(ncomp))
    if kap > 0:
        c = h2 * (np.where(pos, om, 0.0) @ P) / kap
        out._center = c
        # in pair mode v > q_eps only near the positive core, so these are its crossings
        cross = _crossings(g, v - qe)
        dist = np.hypot(cross[:, 0] - c[0], cross[:, 1] - c[1])
        if len(dist):
            out.r_bar = float(dist.min())
            out.r_ring = float(dist.max())
        out.diameter = _diameter(cross)
    if spec.mode == "pair":
        neg = om < 0
        km = h2 * float(np.sum(np.where(neg, om, 0.0)))
        out.kappa_minus_eps = km
        if km < 0:
            out.center_minus = h2 * (np.where(neg, om, 0.0) @ P) / km
        labm = np.zeros(g.interior.shape, dtype=bool)
        labm[g.interior_ij] = neg
        out.components += int(ndimage.label(labm)[1])
    return out


# ---------------------------------------------------------------------------


def cutoff_lift(background: BackgroundField, center, r0: float, r1: float,
                amount: float) -> BackgroundField:
    """Background raised by ``amount`` outside ``B(center, r1)``, unchanged inside ``B(center, r0)``.

    The blend uses the C^2 quintic smoothstep in ``|x - center|`` over the
    annulus ``r0 < |x - center| < r1``, so the result is strictly larger
    than ``q`` outside the inner ball when ``amount > 0``.
    """
    if not (0 < r0 < r1) or amount <= 0:
        raise InvalidSpec("need 0 < r0 < r1 and a positive lift")
    cx, cy = float(center[0]), float(center[1])

    def chi(x1, x2):
        s = np.clip((np.hypot(x1 - cx, x2 - cy) - r0) / (r1 - r0), 0.0, 1.0)
        return s ** 3 * (10 - 15 * s + 6 * s * s)

    base = background

    def fn(x1, x2):
        return base(x1, x2) + amount * chi(x1, x2)

    return BackgroundField(fn=fn, alpha=base.alpha)


# ---------------------------------------------------------------------------


@dataclass
class SweepReport:
    eps: list
    kappa_eps: list
    energy: list
    centers: list
    diameters: list
    components: list
    fit: dict
    energy_limit: dict
    core: dict
    location: dict
    hat_energy: list
    iterations: list
    converged: list

    def as_dict(self) -> dict:
        return {k: getattr(self, k) for k in self.__dataclass_fields__}


def aitken(seq) -> float:
    """Aitken delta-squared extrapolation of the last three terms."""
    x0, x1, x2 = (float(s) for s in seq[-3:])
    den = (x2 - x1) - (x1 - x0)
    if den == 0:
        return x2
    return x2 - (x2 - x1) ** 2 / den


def epsilon_sweep(template: ProblemSpec, eps_list, *, solve_kwargs=None,
                  routh_max=None) -> SweepReport:
    """Solve along decreasing ``eps`` and compare with the small-``eps`` expansions.

    Each solve starts from a hat function, centred at the minimiser of the
    hat-function energy found by a local search from the previous
    vorticity centre.  ``hat_energy`` in the report is the energy of the
    Nehari-rescaled hat function centred at the maximiser ``x*`` of ``W``.
    The report holds

    * a least-squares fit ``kappa_eps = c1 + c2 / log(1/eps)``;
    * ``E - (kappa^2/4pi) log(1/eps)``, its Aitken limit and the predicted
      value ``-W(x*) + C``;
    * ``diam(A)/(2 eps)`` against ``rho_kappa``;
    * the vorticity centres against the maximiser ``x*`` of ``W``.
    """
    eps = [float(e) for e in eps_list]
    if len(eps) < 3:
        raise InsufficientPoints("an epsilon sweep needs at least three values")
    if any(b >= a for a, b in zip(eps, eps[1:])):
        raise InvalidSpec("epsilon values must be strictly decreasing")
    if template.mode != "single":
        raise InvalidSpec("epsilon sweeps are implemented for single vortices")
    solve_kwargs = dict(solve_kwargs or {})
    specs = [template.with_eps(e) for e in eps]   # validates every eps up front
    cfg = template.routh()
    xstar = routh_max if routh_max is not None else routh_maximize(cfg).points[0]
    kappa = template.kappa
    pk = profile_for_kappa(template.profile, kappa)
    C = limit_constant(pk)

    kap, en, cen, dia, comp, hat_e, iters, conv = [], [], [], [], [], [], [], []
    center = np.asarray(xstar, dtype=float)
    for spec in specs:
        # reference hat function of the upper-bound construction, centred at x*
        hat = nehari_scale(np.clip(hat_function(spec, xstar), 0, None), spec)[1]
        center = reduced_center(spec, center)[0]
        res = solve_single(spec, init=hat_function(spec, center), **solve_kwargs)
        d = diagnostics(res.u, spec)
        center = d.center
        kap.append(d.kappa_eps)
        en.append(res.energy)
        cen.append([float(c) for c in d.center])
        dia.append(d.diameter)
        comp.append(d.components)
        hat_e.append(energy(spec, hat))
        iters.append(res.iterations)
        conv.append(bool(res.converged))
        log.info("eps=%g kappa_eps=%.6g E=%.8g iterations=%d", spec.eps, d.kappa_eps,
                 res.energy, res.iterations)

    L = np.log(1.0 / np.asarray(eps))
    M = np.column_stack([np.ones_like(L), 1.0 / L])
    coef, *_ = np.linalg.lstsq(M, np.asarray(kap), rcond=None)
    resid = float(np.linalg.norm(M @ coef - np.asarray(kap)))
    ge = cfg.green
    q_star = float(template.background(xstar[0], xstar[1]))
    c2_pred = TWO_PI * (q_star - kappa * ge.robin(xstar) - kappa / TWO_PI * math.log(1 / pk.rho))
    shifted = [e - kappa ** 2 / (4 * np.pi) * l for e, l in zip(en, L)]
    W_star = routh_eval(cfg, xstar)
    ratios = [d / (2 * e) for d, e in zip(dia, eps)]
    dist = [float(np.hypot(*(np.asarray(c) - xstar))) for c in cen]
    return SweepReport(
        eps=eps, kappa_eps=kap, energy=en, centers=cen, diameters=dia, components=comp,
        fit={"c1": float(coef[0]), "c2": float(coef[1]), "residual": resid,
             "c1_expected": kappa, "c2_expected": float(c2_pred)},
        energy_limit={"shifted": shifted, "aitken": aitken(shifted),
                      "expected": float(-W_star + C), "W_star": float(W_star), "C": float(C)},
        core={"ratios": ratios, "rho_kappa": pk.rho,
              "rel_errors": [abs(r - pk.rho) / pk.rho for r in ratios]},
        location={"x_star": [float(c) for c in xstar], "distances": dist,
                  "radii": [float(np.hypot(*c)) for c in cen]},
        hat_energy=hat_e, iterations=iters, converged=conv)
