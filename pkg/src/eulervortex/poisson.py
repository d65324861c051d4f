"""Five-point Dirichlet Laplacian on a :class:`~eulervortex.domain.Grid`.

The operator acts on interior unknowns only; boundary values enter the
right-hand side as an injection vector.  A sparse LU factorisation is
computed once per grid (and per fixed-node mask) and reused for every
subsequent solve, which is what makes Picard iterations and Green-function
caches cheap.
"""
from __future__ import annotations

import threading
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
from scipy.sparse.linalg import splu

from .domain import Grid
from .errors import DimensionMismatch, SolverDiverged

_lock = threading.Lock()


@dataclass(frozen=True, eq=False)
class LinearSystem:
    """``A u = rhs + inject(bdata)`` restricted to the free interior nodes.

    ``free`` maps free-unknown positions to interior indices; interior nodes
    outside ``free`` are held at caller-supplied values (used for condenser
    plates).  ``A`` is scaled by ``1/h**2``.
    """

    grid: Grid
    A: sp.csc_matrix
    free: np.ndarray
    fixed: np.ndarray | None
    # coupling of free unknowns to boundary nodes and to fixed interior nodes
    Bb: sp.csr_matrix
    Bf: sp.csr_matrix | None

    def inject(self, bvals, fixed_vals=None) -> np.ndarray:
        out = self.Bb @ bvals
        if self.Bf is not None and fixed_vals is not None:
            out = out + self.Bf @ fixed_vals
        return out

    @property
    def lu(self):
        cache = self.grid._cache
        key = ("lu", None if self.fixed is None else self.fixed.tobytes())
        with _lock:
            fac = cache.get(key)
            if fac is None:
                fac = splu(self.A, permc_spec="MMD_AT_PLUS_A")
                cache[key] = fac
        return fac


def assemble(g: Grid, fixed: np.ndarray | None = None) -> LinearSystem:
    """Build the 5-point operator over interior nodes.

    Parameters
    ----------
    g : Grid
    fixed : bool array over interior nodes, optional
        Nodes held at prescribed values (removed from the unknowns).
    """
    key = ("sys", None if fixed is None else np.asarray(fixed, bool).tobytes())
    hit = g._cache.get(key)
    if hit is not None:
        return hit
    n = g.n_interior
    if fixed is not None:
        fixed = np.asarray(fixed, dtype=bool)
        if fixed.shape != (n,):
            raise DimensionMismatch(f"fixed mask has shape {fixed.shape}, expected ({n},)")
        if fixed.all():
            raise DimensionMismatch("every interior node is fixed")
    is_free = np.ones(n, bool) if fixed is None else ~fixed
    free = np.nonzero(is_free)[0]
    pos = -np.ones(n, dtype=np.int64)
    pos[free] = np.arange(len(free))

    ii, jj = g.interior_ij
    me = g.index[ii, jj]
    h2 = g.h * g.h
    rows, cols, vals = [pos[me[is_free[me]]]], [pos[me[is_free[me]]]], [np.full(len(free), 4.0 / h2)]
    brow, bcol = [], []
    frow, fcol = [], []
    for di, dj in ((1, 0), (-1, 0), (0, 1), (0, -1)):
        ni, nj = ii + di, jj + dj
        nb_int = g.index[ni, nj]
        nb_bd = g.bindex[ni, nj]
        src = is_free[me]
        # neighbour is an interior unknown
        m = src & (nb_int >= 0)
        m_free = m.copy()
        m_free[m] = is_free[nb_int[m]]
        rows.append(pos[me[m_free]])
        cols.append(pos[nb_int[m_free]])
        vals.append(np.full(int(m_free.sum()), -1.0 / h2))
        m_fix = m & ~m_free
        frow.append(pos[me[m_fix]])
        fcol.append(nb_int[m_fix])
        mb = src & (nb_bd >= 0)
        brow.append(pos[me[mb]])
        bcol.append(nb_bd[mb])
    nf = len(free)
    A = sp.csc_matrix((np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
                      shape=(nf, nf))
    br = np.concatenate(brow)
    Bb = sp.csr_matrix((np.full(len(br), 1.0 / h2), (br, np.concatenate(bcol))),
                       shape=(nf, g.n_boundary))
    Bf = None
    if fixed is not None:
        fr = np.concatenate(frow)
        Bf = sp.csr_matrix((np.full(len(fr), 1.0 / h2), (fr, np.concatenate(fcol))), shape=(nf, n))
    out = LinearSystem(g, A, free, fixed, Bb, Bf)
    g._cache[key] = out
    return out


def _check_len(name, arr, n):
    if arr.shape != (n,):
        raise DimensionMismatch(f"{name} has shape {arr.shape}, expected ({n},)")


def solve_dirichlet(g: Grid, rhs=None, bdata=None, *, method: str = "direct",
                    fixed=None, fixed_values=None, tol: float = 1e-10,
                    maxiter: int | None = None) -> np.ndarray:
    """Solve ``-Delta_h u = rhs`` with ``u = bdata`` on boundary nodes.

    Parameters
    ----------
    g : Grid
    rhs : array over interior nodes, optional
        Zero when omitted.
    bdata : None, scalar, array over boundary nodes, or callable
        Dirichlet data, see :meth:`Grid.boundary_values`.
    method : {'direct', 'cg'}
        Cached sparse LU, or conjugate gradients preconditioned by
        smoothed-aggregation multigrid (needs ``pyamg``) with the relative
        tolerance ``tol`` and an iteration cap of ``50*sqrt(N)``.
    fixed, fixed_values : arrays over interior nodes, optional
        Interior nodes held at given values.

    Returns
    -------
    u : ndarray over interior nodes
    """
    n = g.n_interior
    rhs = np.zeros(n) if rhs is None else np.asarray(rhs, dtype=float)
    _check_len("rhs", rhs, n)
    bvals = g.boundary_values(bdata)
    sysm = assemble(g, fixed)
    fv = None
    if fixed is not None:
        fv = np.zeros(n) if fixed_values is None else np.broadcast_to(
            np.asarray(fixed_values, dtype=float), (n,)).copy()
    b = rhs[sysm.free] + sysm.inject(bvals, fv)
    if method == "direct":
        x = sysm.lu.solve(b)
    elif method == "cg":
        x = _solve_cg(sysm, b, tol, maxiter)
    else:
        raise ValueError(f"unknown method {method!r}")
    if fixed is None:
        return x
    u = fv.copy()
    u[sysm.free] = x
    return u


def _solve_cg(sysm: LinearSystem, b, tol, maxiter):
    from scipy.sparse.linalg import cg

    nf = sysm.A.shape[0]
    maxiter = maxiter or int(50 * np.sqrt(nf)) + 10
    key = ("amg", None if sysm.fixed is None else sysm.fixed.tobytes())
    M = sysm.grid._cache.get(key)
    if M is None:
        try:
            import pyamg
        except ImportError:  # Jacobi fallback
            d = sysm.A.diagonal()
            M = sp.diags(1.0 / d)
        else:
            M = pyamg.smoothed_aggregation_solver(sysm.A.tocsr()).aspreconditioner()
        sysm.grid._cache[key] = M
    x, info = cg(sysm.A, b, rtol=tol, atol=0.0, maxiter=maxiter, M=M)
    if info != 0:
        raise SolverDiverged(f"CG stopped after {maxiter} iterations without reaching rtol={tol}")
    return x


def apply_laplacian(g: Grid, u, bdata=None) -> np.ndarray:
    """``-Delta_h u`` at interior nodes, boundary values taken from ``bdata``."""
    sysm = assemble(g)
    u = np.asarray(u, dtype=float)
    _check_len("u", u, g.n_interior)
    return sysm.A @ u - sysm.inject(g.boundary_values(bdata))


def discrete_delta(g: Grid, y) -> np.ndarray:
    """Unit point mass at the interior node nearest ``y`` (value ``1/h**2``)."""
    rhs = np.zeros(g.n_interior)
    rhs[g.nearest_node(float(y[0]), float(y[1]))] = 1.0 / g.h ** 2
    return rhs


def edge_differences(g: Grid, u, bdata=None):
    """Differences ``u(b) - u(a)`` along every energy edge, plus edge weights."""
    u = np.asarray(u, dtype=float)
    _check_len("u", u, g.n_interior)
    bv = g.boundary_values(bdata)
    ka, ia, kb, ib, w = g.edges
    ua = np.where(ka == 0, u[np.where(ka == 0, ia, 0)], bv[np.where(ka == 1, ia, 0)] if len(bv) else 0)
    ub = np.where(kb == 0, u[np.where(kb == 0, ib, 0)], bv[np.where(kb == 1, ib, 0)] if len(bv) else 0)
    return ub - ua, w


def dirichlet_energy(g: Grid, u, bdata=None) -> float:
    """Discrete ``int |grad u|^2`` (no factor one half)."""
    d, w = edge_differences(g, u, bdata)
    return float(np.sum(w * d * d))


def energy_product(g: Grid, u, bu, v, bv) -> float:
    """Bilinear form associated with :func:`dirichlet_energy`."""
    du, w = edge_differences(g, u, bu)
    dv, _ = edge_differences(g, v, bv)
    return float(np.sum(w * du * dv))


def gradient(g: Grid, u, bdata=None):
    """Central-difference gradient at interior nodes (one-sided where a neighbour is missing)."""
    full = g.to_lattice(u, bdata)
    ii, jj = g.interior_ij
    h = g.h
    out = []
    for di, dj in ((1, 0), (0, 1)):
        fwd = full[ii + di, jj + dj]
        bwd = full[ii - di, jj - dj]
        mid = full[ii, jj]
        both = np.isfinite(fwd) & np.isfinite(bwd)
        gx = np.where(both, (fwd - bwd) / (2 * h),
                      np.where(np.isfinite(fwd), (fwd - mid) / h, (mid - bwd) / h))
        out.append(gx)
    return out[0], out[1]
