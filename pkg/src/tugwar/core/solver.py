"""Fixed-point solvers for the dynamic programming principle.

Three methods share one convergence target, ``max |T u - u| <= tol`` on the
interior:

``"jacobi"``
    Simultaneous sweeps ``u_{k+1} = T u_k``.  From the constant start
    ``inf F`` with ``f >= 0`` the iterates increase pointwise at every sweep.
``"gauss-seidel"``
    In-place sweeps in flat node order.  A pure Python loop; meant for small
    grids.
``"policy"``
    Semismooth Newton (policy iteration): freeze the maximizing and
    minimizing stencil targets of the current iterate, solve the resulting
    linear absorbing-chain system, repeat.  Small systems use sparse LU,
    larger ones GMRES preconditioned by smoothed-aggregation AMG.
    Terminates when the greedy policy of the new iterate reproduces it.  Falls back to Jacobi
    sweeps if the policies cycle.
"""
from typing import NamedTuple
import logging

import numpy as np
import scipy.sparse as sp
from scipy.sparse.linalg import gmres, splu
import pyamg

from ..errors import NonConvergence, ParameterError
from .domain import ScalarField
from .dpp import interior_update

log = logging.getLogger(__name__)

FROM_INF_F = "inf_f"

# interior unknowns up to which policy steps use a direct sparse LU
_DIRECT_LIMIT = 3000


class SolveResult(NamedTuple):
    field: ScalarField
    iterations: int
    residual: float


def default_tol(domain):
    F = domain.F.reshape(-1)[domain.strip]
    f = domain.f.reshape(-1)[domain.interior]
    return 1e-9 * (1.0 + float(np.abs(F).max()) + float(np.abs(f).max()))


def initial_values(domain, init=FROM_INF_F):
    """Flat value array for the requested initialization."""
    F = domain.F.reshape(-1)
    if isinstance(init, str):
        if init != FROM_INF_F:
            raise ParameterError(f"unknown init {init!r}")
        vals = np.full(domain.size, np.nan)
        vals[domain.interior] = F[domain.strip].min()
    else:
        src = init.flat if isinstance(init, ScalarField) else np.asarray(init, float).reshape(-1)
        vals = np.array(src, dtype=float, copy=True)
        if not np.all(np.isfinite(vals[domain.interior])):
            raise ParameterError("initial field must be finite on the interior")
    vals[domain.strip] = F[domain.strip]
    return vals


def _max_abs(a):
    return float(np.abs(a).max()) if a.size else 0.0


def _jacobi(domain, params, vals, tol, max_iter, monitor):
    inner = domain.interior
    new = vals.copy()
    for k in range(max_iter):
        upd = interior_update(vals, domain, params)
        res = _max_abs(upd - vals[inner])
        if res <= tol:
            return vals, k, res
        new[inner] = upd
        if monitor is not None:
            monitor(k + 1, vals, new)
        vals, new = new, vals
    upd = interior_update(vals, domain, params)
    return vals, max_iter, _max_abs(upd - vals[inner])


def _gauss_seidel(domain, params, vals, tol, max_iter, monitor):
    inner = domain.interior
    nbr = domain.neighbors
    f = domain.f.reshape(-1)[inner]
    a2, b, e2 = 0.5 * params.alpha, params.beta, params.epsilon ** 2
    for k in range(max_iter):
        res = _max_abs(interior_update(vals, domain, params) - vals[inner])
        if res <= tol:
            return vals, k, res
        old = vals.copy() if monitor is not None else None
        for row, node in enumerate(inner):
            g = vals[nbr[row]]
            vals[node] = a2 * (g.max() + g.min()) + b * g.mean() + e2 * f[row]
        if monitor is not None:
            monitor(k + 1, old, vals)
    return vals, max_iter, _max_abs(interior_update(vals, domain, params) - vals[inner])


class _PolicySystem:
    """Sparse pieces of ``(I - P_policy) u = b_policy`` on interior unknowns."""

    def __init__(self, domain, params):
        self.domain = domain
        self.params = params
        pos = domain.interior_position()
        nbr = domain.neighbors
        n_int, count = nbr.shape
        self.n_int = n_int
        self.col = pos[nbr]                     # -1 where the target is a strip node
        F = domain.F.reshape(-1)
        self.target_F = np.where(self.col < 0, F[nbr], 0.0)
        rows = np.repeat(np.arange(n_int), count)
        cols = self.col.reshape(-1)
        keep = cols >= 0
        w = params.beta / count
        self.mean_part = sp.csr_matrix(
            (np.full(keep.sum(), w), (rows[keep], cols[keep])), shape=(n_int, n_int))
        self.rhs_base = (params.epsilon ** 2 * domain.f.reshape(-1)[domain.interior]
                         + w * self.target_F.sum(axis=1))
        self.eye = sp.identity(n_int, format="csr")

    def solve(self, jmax, jmin, x0, tol):
        half = 0.5 * self.params.alpha
        r = np.arange(self.n_int)
        rhs = self.rhs_base.copy()
        rows, cols = [], []
        for j in (jmax, jmin):
            c = self.col[r, j]
            inside = c >= 0
            rows.append(r[inside])
            cols.append(c[inside])
            rhs[~inside] += half * self.target_F[r[~inside], j[~inside]]
        rows = np.concatenate(rows)
        cols = np.concatenate(cols)
        tug = sp.csr_matrix((np.full(len(rows), half), (rows, cols)),
                            shape=(self.n_int, self.n_int))
        A = (self.eye - self.mean_part - tug).tocsr()
        if self.n_int <= _DIRECT_LIMIT:
            return splu(A.tocsc(), permc_spec="COLAMD").solve(rhs)
        # pyamg draws spectral-radius start vectors from the global RNG
        state = np.random.get_state()
        np.random.seed(0)
        try:
            ml = pyamg.smoothed_aggregation_solver(A, symmetry="nonsymmetric")
            x, info = gmres(A, rhs, x0=x0, M=ml.aspreconditioner(), rtol=1e-14,
                            atol=1e-2 * tol, restart=50, maxiter=100)
        finally:
            np.random.set_state(state)
        if info != 0 or np.abs(A @ x - rhs).max() > 0.1 * tol:
            log.debug("AMG-GMRES did not converge (info=%d); using sparse LU", info)
            return splu(A.tocsc(), permc_spec="COLAMD").solve(rhs)
        return x


def _policy(domain, params, vals, tol, max_iter, monitor):
    inner = domain.interior
    nbr = domain.neighbors
    system = _PolicySystem(domain, params)
    seen = set()
    for k in range(max_iter):
        g = vals[nbr]
        upd = interior_update(vals, domain, params)
        res = _max_abs(upd - vals[inner])
        if res <= tol:
            return vals, k, res
        jmax, jmin = g.argmax(axis=1), g.argmin(axis=1)
        key = hash((jmax.tobytes(), jmin.tobytes()))
        new = vals.copy()
        if key in seen:
            # cycling policies: a few contracting sweeps break the tie pattern
            log.debug("policy cycle at iteration %d; taking Jacobi sweeps", k)
            for _ in range(10):
                new[inner] = interior_update(new, domain, params)
        else:
            seen.add(key)
            new[inner] = system.solve(jmax, jmin, vals[inner], tol)
        if monitor is not None:
            monitor(k + 1, vals, new)
        vals = new
    return vals, max_iter, _max_abs(interior_update(vals, domain, params) - vals[inner])


_METHODS = {"jacobi": _jacobi, "gauss-seidel": _gauss_seidel, "policy": _policy}


def solve_value(domain, params=None, tol=None, max_iter=10**6, init=FROM_INF_F,
                method="jacobi", monitor=None):
    """Solve ``u = T u`` on the interior with ``u = F`` on the strip.

    Parameters
    ----------
    domain : DiscreteDomain
    params : GameParams, optional
        Defaults to ``domain.params``.
    tol : float, optional
        Target for the sup-norm residual; see ``default_tol``.
    max_iter : int
        Sweep (or Newton step) budget.
    init : ``"inf_f"`` or ScalarField or array
        Starting field.  ``"inf_f"`` sets every interior node to ``min F``.
    method : {"jacobi", "gauss-seidel", "policy"}
    monitor : callable, optional
        Called as ``monitor(k, previous_values, new_values)`` after every
        update with flat value arrays.

    Returns
    -------
    SolveResult
        ``(field, iterations, residual)``.

    Raises
    ------
    NonConvergence
        If the residual still exceeds ``tol`` after ``max_iter`` updates.
    """
    if params is None:
        params = domain.params
    elif params.epsilon != domain.epsilon or params.n != domain.n:
        raise ParameterError("params disagree with the domain's epsilon or dimension")
    if tol is None:
        tol = default_tol(domain)
    if not tol > 0:
        raise ParameterError("tol must be positive")
    try:
        run = _METHODS[method]
    except KeyError:
        raise ParameterError(f"unknown method {method!r}") from None
    vals = initial_values(domain, init)
    vals, iterations, res = run(domain, params, vals, tol, max_iter, monitor)
    if res > tol:
        raise NonConvergence(
            f"residual {res:.3e} > tol {tol:.3e} after {iterations} iterations",
            iterations=iterations, residual=res)
    return SolveResult(ScalarField(vals, domain), iterations, res)
