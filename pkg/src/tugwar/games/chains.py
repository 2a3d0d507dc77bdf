"""Exact absorbing Markov chain computations, used as oracles for Monte Carlo.

With both players on fixed move tables the token is a Markov chain on the
grid, absorbed on the boundary strip.  Writing ``Q`` for the transient block
and ``R`` for the transient-to-absorbing block of the transition matrix,
expected quantities follow from one sparse solve each::

    (I - Q) v = eps^2 f + R F        expected total payoff
    (I - Q) t = 1                    expected stopping time
"""
import numpy as np
import scipy.sparse as sp
from scipy.sparse.linalg import spsolve

from ..core.domain import NodeClass


def transition_matrix(domain, params, move_I, move_II):
    """Sparse transition matrix from interior nodes to all nodes."""
    nbr = domain.neighbors
    n_int, count = nbr.shape
    rows = np.concatenate([np.repeat(np.arange(n_int), count),
                           np.arange(n_int), np.arange(n_int)])
    cols = np.concatenate([nbr.reshape(-1), move_I, move_II])
    w = np.concatenate([np.full(n_int * count, params.beta / count),
                        np.full(n_int, 0.5 * params.alpha), np.full(n_int, 0.5 * params.alpha)])
    # duplicates are summed on conversion
    return sp.csr_matrix((w, (rows, cols)), shape=(n_int, domain.size))


def absorbing_chain_expectations(domain, params, move_I, move_II):
    """Return ``(expected_payoff, expected_tau)`` per interior node."""
    P = transition_matrix(domain, params, move_I, move_II)
    absorbing = np.flatnonzero(domain.classes() == NodeClass.STRIP)
    Q = P[:, domain.interior]
    R = P[:, absorbing]
    A = (sp.identity(domain.n_interior, format="csr") - Q).tocsc()
    F = domain.F.reshape(-1)[absorbing]
    f = domain.f.reshape(-1)[domain.interior]
    payoff = spsolve(A, params.epsilon ** 2 * f + R @ F)
    tau = spsolve(A, np.ones(domain.n_interior))
    return np.atleast_1d(payoff), np.atleast_1d(tau)


def chain_oracle(domain, params, sI, sII, start):
    """Exact ``(expected_payoff, expected_tau)`` from ``start`` for two strategies."""
    payoff, tau = absorbing_chain_expectations(
        domain, params, sI.move_table(domain), sII.move_table(domain))
    row = domain.interior_position()[start]
    return float(payoff[row]), float(tau[row])
