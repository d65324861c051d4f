"""Radial ground state of the Lane-Emden problem on the unit disc.

The unit profile ``V`` solves ``V'' + V'/r + V**p = 0`` on ``[0, 1]`` with
``V'(0) = 0`` and ``V(1) = 0``.  Rescaling it to carry a prescribed mass
``kappa`` gives the entire function ``U_kappa``, which is the rescaled
profile inside the core of radius ``rho_kappa`` and a logarithmic tail
outside.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.integrate import simpson
from scipy.interpolate import CubicHermiteSpline
from scipy.optimize import brentq

from .errors import NoConvergence, NonPositiveKappa, UnsupportedExponent

DEFAULT_DR = 1e-4


def _shoot(a: float, p: float, dr: float, keep: bool = False):
    """Fixed-step RK4 from the series start; returns v(1) (and samples if ``keep``)."""
    n = int(round(1.0 / dr))
    # series v = a - a^p r^2/4 + p a^(2p-1) r^4/64 handles the r = 0 singularity
    r = dr
    ap = a ** p
    v = a - ap * r * r / 4 + p * a ** (2 * p - 1) * r ** 4 / 64
    w = -ap * r / 2 + p * a ** (2 * p - 1) * r ** 3 / 16
    if keep:
        vs = np.empty(n + 1)
        ws = np.empty(n + 1)
        vs[0], ws[0] = a, 0.0
        vs[1], ws[1] = v, w

    def acc(rr, vv, ww):
        return -ww / rr - (vv if vv > 0 else 0.0) ** p

    half = dr / 2
    for k in range(1, n):
        k1v, k1w = w, acc(r, v, w)
        k2v, k2w = w + half * k1w, acc(r + half, v + half * k1v, w + half * k1w)
        k3v, k3w = w + half * k2w, acc(r + half, v + half * k2v, w + half * k2w)
        k4v, k4w = w + dr * k3w, acc(r + dr, v + dr * k3v, w + dr * k3w)
        v += dr * (k1v + 2 * k2v + 2 * k3v + k4v) / 6
        w += dr * (k1w + 2 * k2w + 2 * k3w + k4w) / 6
        r = (k + 1) * dr
        if keep:
            vs[k + 1], ws[k + 1] = v, w
    if keep:
        return v, vs, ws
    return v


def _first_zero(a: float, p: float, dr: float, rmax: float = 50.0) -> float:
    """Radius of the first zero of the solution with v(0) = a (coarse RK4)."""
    r = dr
    v = a - a ** p * r * r / 4
    w = -a ** p * r / 2
    while r < rmax:
        def acc(rr, vv, ww):
            return -ww / rr - (vv if vv > 0 else 0.0) ** p
        h2 = dr / 2
        k1v, k1w = w, acc(r, v, w)
        k2v, k2w = w + h2 * k1w, acc(r + h2, v + h2 * k1v, w + h2 * k1w)
        k3v, k3w = w + h2 * k2w, acc(r + h2, v + h2 * k2v, w + h2 * k2w)
        k4v, k4w = w + dr * k3w, acc(r + dr, v + dr * k3v, w + dr * k3w)
        vn = v + dr * (k1v + 2 * k2v + 2 * k3v + k4v) / 6
        wn = w + dr * (k1w + 2 * k2w + 2 * k3w + k4w) / 6
        if vn <= 0:
            return r + dr * v / (v - vn)
        v, w, r = vn, wn, r + dr
    raise NoConvergence(f"no zero of the radial solution before r={rmax}")


@dataclass(frozen=True, eq=False)
class RadialProfile:
    """Unit-disc profile sampled on ``r = 0, dr, ..., 1``."""

    p: float
    dr: float
    r: np.ndarray
    v: np.ndarray
    dv: np.ndarray

    @property
    def v0(self) -> float:
        return float(self.v[0])

    @property
    def slope(self) -> float:
        """V'(1)."""
        return float(self.dv[-1])

    @property
    def gamma(self) -> float:
        """Mass 2*pi * int_0^1 V^p r dr (Simpson)."""
        return float(2 * np.pi * simpson(np.clip(self.v, 0, None) ** self.p * self.r, x=self.r))

    @property
    def int_vp1(self) -> float:
        """int_B V^(p+1)."""
        return float(2 * np.pi * simpson(np.clip(self.v, 0, None) ** (self.p + 1) * self.r, x=self.r))

    @property
    def int_grad2(self) -> float:
        """int_B |grad V|^2."""
        return float(2 * np.pi * simpson(self.dv ** 2 * self.r, x=self.r))

    def residual(self) -> float:
        """Max of |V'' + V'/r + V^p| using the sampled slope (interior points only)."""
        d2 = np.gradient(self.dv, self.dr)
        rr = self.r[2:-2]
        res = d2[2:-2] + self.dv[2:-2] / rr + np.clip(self.v[2:-2], 0, None) ** self.p
        return float(np.max(np.abs(res)))

    def __call__(self, s):
        """V at radii ``s`` in [0, 1] (cubic Hermite); zero beyond 1."""
        s = np.asarray(s, dtype=float)
        out = self._spline(np.clip(s, 0.0, 1.0))
        return np.where(s <= 1.0, out, 0.0)

    def derivative(self, s):
        s = np.asarray(s, dtype=float)
        return self._spline.derivative()(np.clip(s, 0.0, 1.0))

    @property
    def _spline(self):
        sp = self.__dict__.get("_sp")
        if sp is None:
            sp = CubicHermiteSpline(self.r, self.v, self.dv)
            object.__setattr__(self, "_sp", sp)
        return sp


@lru_cache(maxsize=16)
def _cached_profile(p: float, dr: float) -> RadialProfile:
    # scaling v_a(r) = a v_1(a^((p-1)/2) r) puts the root near r1^(2/(p-1))
    r1 = _first_zero(1.0, p, 1e-3)
    guess = r1 ** (2.0 / (p - 1.0))
    lo, hi = guess / 1.01, guess * 1.01
    f = lambda a: _shoot(a, p, dr)  # noqa: E731
    flo, fhi = f(lo), f(hi)
    grow = 0
    # grow geometrically until v(1) changes sign across the bracket
    while flo * fhi > 0:
        grow += 1
        if grow > 40:
            raise NoConvergence(f"shooting bracket for p={p} never changed sign")
        lo, hi = lo / 1.5, hi * 1.5
        flo, fhi = f(lo), f(hi)
    a = brentq(f, lo, hi, xtol=1e-15, rtol=4 * np.finfo(float).eps, maxiter=200)
    _, vs, ws = _shoot(a, p, dr, keep=True)
    n = len(vs) - 1
    r = np.linspace(0.0, 1.0, n + 1)
    return RadialProfile(p=p, dr=dr, r=r, v=vs, dv=ws)


def solve_unit_profile(p: float, dr: float = DEFAULT_DR) -> RadialProfile:
    """Shoot on V(0) for the unit-disc ground state of ``-Delta V = V^p``.

    Parameters
    ----------
    p : float
        Exponent, must exceed 1.
    dr : float
        RK4 step; ``1/dr`` must be an even integer for Simpson quadrature.
    """
    p = float(p)
    if not np.isfinite(p) or p <= 1.0:
        raise UnsupportedExponent(f"exponent must satisfy p > 1, got {p}")
    n = int(round(1.0 / dr))
    if n % 2:
        n += 1
    return _cached_profile(p, 1.0 / n)


@dataclass(frozen=True, eq=False)
class ProfileForKappa:
    """Profile rescaled so that its vorticity has total mass ``kappa``."""

    profile: RadialProfile
    kappa: float

    @property
    def p(self) -> float:
        return self.profile.p

    @property
    def rho(self) -> float:
        """Core radius (gamma / kappa)^((p-1)/2)."""
        return (self.profile.gamma / self.kappa) ** ((self.p - 1) / 2)

    @property
    def amplitude(self) -> float:
        return self.rho ** (-2.0 / (self.p - 1))

    def radial(self, r):
        """U_kappa as a function of |y|."""
        r = np.asarray(r, dtype=float)
        rho = self.rho
        inside = self.amplitude * self.profile(r / rho)
        with np.errstate(divide="ignore"):
            outside = self.kappa / (2 * np.pi) * np.log(rho / r)
        return np.where(r < rho, inside, outside)

    def radial_derivative(self, r):
        r = np.asarray(r, dtype=float)
        rho = self.rho
        inside = self.amplitude / rho * self.profile.derivative(r / rho)
        with np.errstate(divide="ignore"):
            outside = -self.kappa / (2 * np.pi * r)
        return np.where(r < rho, inside, outside)

    def __call__(self, y1, y2):
        return self.radial(np.hypot(y1, y2))

    def mass(self, n: int = 20001) -> float:
        """Quadrature of int (U_kappa)_+^p over the core."""
        r = np.linspace(0.0, self.rho, n)
        u = np.clip(self.radial(r), 0, None)
        return float(2 * np.pi * simpson(u ** self.p * r, x=r))


def profile_for_kappa(prof: RadialProfile, kappa: float) -> ProfileForKappa:
    kappa = float(kappa)
    if not np.isfinite(kappa) or kappa <= 0:
        raise NonPositiveKappa(f"kappa must be positive, got {kappa}")
    return ProfileForKappa(prof, kappa)


def ball_term(pk: ProfileForKappa, n: int | None = None) -> float:
    """int_{B(0, rho)} |grad U|^2/2 - U^(p+1)/(p+1) by direct radial quadrature.

    Uses the rescaled profile on its own radius grid (``n`` points, default
    matching the profile's resolution) rather than the scaling identity.
    """
    p = pk.p
    if n is None:
        n = len(pk.profile.r)
    r = np.linspace(0.0, pk.rho, n)
    u = np.clip(pk.radial(r), 0, None)
    du = pk.radial_derivative(r)
    du[-1] = pk.amplitude / pk.rho * pk.profile.slope
    integrand = (0.5 * du ** 2 - u ** (p + 1) / (p + 1)) * r
    return float(2 * np.pi * simpson(integrand, x=r))


def limit_constant(pk: ProfileForKappa) -> float:
    """Energy constant (kappa^2/4pi) log rho + the core integral."""
    return pk.kappa ** 2 / (4 * np.pi) * math.log(pk.rho) + ball_term(pk)


def limit_constant_scaled(pk: ProfileForKappa) -> float:
    """Same constant from the unit profile via rho^(-4/(p-1)) scaling."""
    p = pk.p
    unit = (0.5 - 1.0 / (p + 1)) * pk.profile.int_vp1
    return pk.kappa ** 2 / (4 * np.pi) * math.log(pk.rho) + pk.rho ** (-4.0 / (p - 1)) * unit
