"""Reduced random walks that control stopping times in the regularity proofs.

``walk_1d``
    Lazy walk on the lattice ``t0 + eps * Z``: up or down by ``eps`` with
    probability ``alpha/2`` each, stay with probability ``beta``, stopped on
    leaving ``(0, 1)``.  Its mean exit time is bounded by ``5 t0 / (alpha eps^2)``.
``cylinder_walk``
    Process in ``B_{2r}(0) x [0, 2r]`` started at ``(0, t)``: the height moves by
    ``+-eps`` with probability ``alpha/2`` each, otherwise the horizontal
    position jumps uniformly in the continuum ``eps``-ball.  We estimate the
    probability of leaving through the top or the side instead of the bottom.
"""
import numpy as np
from scipy.linalg import solve_banded

from ..errors import ParameterError
from .engine import mean_and_se
from .rng import BLOCK, StreamBank, as_rng


def _lattice(t0, eps):
    """Integer range ``[kmin, kmax]`` with ``0 < t0 + k eps < 1``."""
    ks = np.arange(-int(np.ceil(t0 / eps)) - 2, int(np.ceil((1 - t0) / eps)) + 3)
    t = t0 + ks * eps
    inside = ks[(t > 0) & (t < 1)]
    return int(inside.min()), int(inside.max())


def walk_1d_bound(t0, params):
    return 5.0 * t0 / (params.alpha * params.epsilon ** 2)


def walk_1d_exact(t0, params):
    """Exact mean exit time by solving the tridiagonal absorbing-chain system."""
    kmin, kmax = _lattice(t0, params.epsilon)
    m = kmax - kmin + 1
    a = params.alpha
    # (1 - beta) E_k - a/2 E_{k-1} - a/2 E_{k+1} = 1
    ab = np.zeros((3, m))
    ab[0, 1:] = -a / 2
    ab[1, :] = a
    ab[2, :-1] = -a / 2
    E = solve_banded((1, 1), ab, np.ones(m))
    return float(E[-kmin])


def walk_1d(t0, params, N, rng):
    """Monte Carlo mean of the exit time; returns ``(mean_tau_bar, std_error)``."""
    eps = params.epsilon
    if not 0 < eps < t0 < 1:
        raise ParameterError("need 0 < epsilon < t0 < 1")
    kmin, kmax = _lattice(t0, eps)
    bank = StreamBank(as_rng(rng), N)
    k = np.zeros(N, dtype=np.int64)
    tau = np.zeros(N, dtype=np.int64)
    ids = np.arange(N)
    half = 0.5 * params.alpha
    while len(ids):
        u = bank.uniforms(ids, 1)[:, :, 0]
        live = np.arange(len(ids))
        for s in range(BLOCK):
            g = ids[live]
            c = u[live, s]
            k[g] += np.where(c < half, 1, np.where(c < params.alpha, -1, 0))
            tau[g] += 1
            out = (k[g] < kmin) | (k[g] > kmax)
            if out.any():
                live = live[~out]
                if not len(live):
                    break
        bank.release(np.setdiff1d(ids, ids[live]))
        ids = ids[live]
    return mean_and_se(tau)


def cylinder_walk(t, r, params, N, rng):
    """Probability of not leaving the cylinder through its bottom.

    Returns ``(p_fail, std_error)``.  The horizontal dimension is ``params.n``.
    """
    eps, n = params.epsilon, params.n
    if not 0 <= t <= 2 * r:
        raise ParameterError("need 0 <= t <= 2r")
    if eps >= r:
        raise ParameterError("epsilon must be small compared with r")
    bank = StreamBank(as_rng(rng), N)
    x = np.zeros((N, n))
    k = np.zeros(N, dtype=np.int64)
    fail = np.zeros(N)
    ids = np.arange(N)
    half = 0.5 * params.alpha
    R2 = (2 * r) ** 2
    while len(ids):
        u = bank.uniforms(ids, 2)
        z = bank.normals(ids, n)
        live = np.arange(len(ids))
        for s in range(BLOCK):
            g = ids[live]
            c = u[live, s, 0]
            vert = np.where(c < half, -1, np.where(c < params.alpha, 1, 0))
            k[g] += vert
            horiz = vert == 0
            if horiz.any():
                zz = z[live[horiz], s]
                rad = eps * u[live[horiz], s, 1] ** (1.0 / n)
                x[g[horiz]] += zz * (rad / np.linalg.norm(zz, axis=1))[:, None]
            height = t + k[g] * eps
            bottom = height < 0
            other = (height > 2 * r) | ((x[g] ** 2).sum(axis=1) >= R2)
            fail[g[other & ~bottom]] = 1.0
            out = bottom | other
            if out.any():
                live = live[~out]
                if not len(live):
                    break
        bank.release(np.setdiff1d(ids, ids[live]))
        ids = ids[live]
    return mean_and_se(fail)
