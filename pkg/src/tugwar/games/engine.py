"""Simulation of tug-of-war with noise and running payoff.

At every step a uniform ``c`` decides the turn: ``c < alpha/2`` lets Max
(player I) move, ``alpha/2 <= c < alpha`` lets Minnie (player II) move, and
otherwise the token jumps to a uniformly drawn node of the discrete ball,
picked as ``floor(u * count)`` from a second uniform ``u``.  The game stops
the first time the token sits on the boundary strip (or in an optional
custom stopping set), paying ``F(x_tau) + eps^2 * sum_{j<tau} f(x_j)``.

Games are advanced in lockstep with numpy; each game reads its own stream
(see ``rng``), so results are independent of batch composition.
"""
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from enum import IntEnum

import numpy as np

from ..core.domain import NodeClass
from ..errors import StepLimitExceeded
from .rng import BLOCK, StreamBank, as_rng
from .strategies import GreedyMax, GreedyMin

DEFAULT_STEP_CAP = 10**9


class Coin(IntEnum):
    MAX_WIN = 0
    MIN_WIN = 1
    RANDOM = 2


def coin_outcome(c, alpha):
    """Map uniforms ``c`` to ``Coin`` codes: Max below ``alpha/2``, Minnie below ``alpha``."""
    return np.where(c < 0.5 * alpha, Coin.MAX_WIN,
                    np.where(c < alpha, Coin.MIN_WIN, Coin.RANDOM))


@dataclass
class GameTrace:
    positions: np.ndarray     # flat node indices x_0 .. x_tau
    coins: np.ndarray         # Coin codes, length tau
    tau: int
    running_sum: float
    total_payoff: float

    def resum(self, domain):
        """Recompute ``(running_sum, total_payoff)`` from the stored positions."""
        f = domain.f.reshape(-1)
        s = 0.0
        for x in self.positions[:-1]:
            s += f[x]
        final = domain.F.reshape(-1)[self.positions[-1]]
        return s, final + domain.epsilon ** 2 * s

    def lines(self, domain):
        """One text record per step: ``step coin position cumulative_running_sum``."""
        f = domain.f.reshape(-1)
        pts = domain.coords(self.positions)
        out = []
        s = 0.0
        for k in range(self.tau + 1):
            coin = Coin(self.coins[k - 1]).name if k else "START"
            pos = " ".join(repr(float(c)) for c in pts[k])
            out.append(f"{k} {coin} {pos} {s!r}")
            if k < self.tau:
                s += float(f[self.positions[k]])
        return out


@dataclass
class BatchResult:
    tau: np.ndarray
    final: np.ndarray          # flat index of x_tau
    running_sum: np.ndarray
    total_payoff: np.ndarray
    traces: list = None


def _tables(domain, strategy):
    table = np.asarray(strategy.move_table(domain), dtype=np.int64)
    if table.shape != (domain.n_interior,):
        raise ValueError("move table must have one entry per interior node")
    return table


def simulate_games(domain, params, move_I, move_II, starts, rng, *, first_stream=0,
                   stop_mask=None, record=False, step_cap=DEFAULT_STEP_CAP):
    """Run ``len(starts)`` games; game ``k`` uses stream ``first_stream + k``.

    ``move_I``/``move_II`` are move tables (see ``strategies``).  ``stop_mask``
    is an optional boolean array over all nodes marking extra stopping nodes.
    """
    starts = np.asarray(starts, dtype=np.int64)
    n_games = len(starts)
    cls = domain.classes()
    if np.any(cls[starts] == NodeClass.EXTERIOR):
        raise ValueError("games must start on interior (or strip) nodes")
    stop = cls != NodeClass.INTERIOR
    if stop_mask is not None:
        stop = stop | np.asarray(stop_mask, dtype=bool).reshape(-1)
    row_of = domain.interior_position()
    nbr = domain.neighbors
    count = nbr.shape[1]
    f = domain.f.reshape(-1)
    F = domain.F.reshape(-1)
    alpha = params.alpha

    bank = StreamBank(as_rng(rng), n_games)
    pos = starts.copy()
    tau = np.zeros(n_games, dtype=np.int64)
    run = np.zeros(n_games)
    ids = np.flatnonzero(~stop[pos])
    paths = [[int(s)] for s in starts] if record else None
    coins_rec = [[] for _ in starts] if record else None

    while len(ids):
        draws = bank.uniforms(ids + first_stream, 2)
        live = np.arange(len(ids))
        for s in range(BLOCK):
            g = ids[live]
            x = pos[g]
            row = row_of[x]
            c = draws[live, s, 0]
            pick = (draws[live, s, 1] * count).astype(np.int64)
            coin = coin_outcome(c, alpha)
            nxt = np.where(coin == Coin.MAX_WIN, move_I[row],
                           np.where(coin == Coin.MIN_WIN, move_II[row], nbr[row, pick]))
            run[g] += f[x]
            tau[g] += 1
            pos[g] = nxt
            if record:
                for k, gi in enumerate(g):
                    paths[gi].append(int(nxt[k]))
                    coins_rec[gi].append(int(coin[k]))
            done = stop[nxt]
            if np.any((tau[g] >= step_cap) & ~done):
                raise StepLimitExceeded(f"a game exceeded {step_cap} steps")
            if done.any():
                live = live[~done]
                if not len(live):
                    break
        finished = ids[np.isin(np.arange(len(ids)), live, invert=True)]
        bank.release(finished + first_stream)
        ids = ids[live] if len(live) else ids[:0]

    final = pos
    total = F[final] + params.epsilon ** 2 * run
    traces = None
    if record:
        traces = [GameTrace(np.array(paths[k]), np.array(coins_rec[k], dtype=np.int8),
                            int(tau[k]), float(run[k]), float(total[k]))
                  for k in range(n_games)]
    return BatchResult(tau, final, run, total, traces)


def play_game(domain, params, sI, sII, start, rng, stop_rule=None,
              step_cap=DEFAULT_STEP_CAP):
    """Play one game from ``start`` and return its full ``GameTrace``.

    ``rng`` is an ``RngSpec`` (or a bare seed meaning stream 0).
    ``stop_rule`` is an optional boolean mask of extra stopping nodes.
    """
    rng = as_rng(rng)
    if domain.classes()[start] != NodeClass.INTERIOR:
        raise ValueError("start must be an interior node")
    res = simulate_games(domain, params, _tables(domain, sI), _tables(domain, sII),
                         [start], rng, stop_mask=stop_rule, record=True, step_cap=step_cap)
    return res.traces[0]


def run_games(domain, params, sI, sII, start, N, rng, threads=1, stop_mask=None,
             step_cap=DEFAULT_STEP_CAP):
    rng = as_rng(rng)
    mI, mII = _tables(domain, sI), _tables(domain, sII)
    chunk = max(1, -(-N // max(1, threads)))
    bounds = [(s, min(N, s + chunk)) for s in range(0, N, chunk)]

    def work(b):
        lo, hi = b
        return simulate_games(domain, params, mI, mII, np.full(hi - lo, start), rng,
                              first_stream=lo, stop_mask=stop_mask, step_cap=step_cap)

    if threads > 1 and len(bounds) > 1:
        with ThreadPoolExecutor(threads) as ex:
            parts = list(ex.map(work, bounds))
    else:
        parts = [work(b) for b in bounds]
    # concatenated in stream order, so statistics do not depend on threading
    return BatchResult(*(np.concatenate([getattr(p, a) for p in parts])
                         for a in ("tau", "final", "running_sum", "total_payoff")))


def mean_and_se(x):
    x = np.asarray(x, dtype=float)
    if len(x) < 2:
        return float(x.mean()), float("nan")
    return float(x.mean()), float(x.std(ddof=1) / np.sqrt(len(x)))


def estimate_value_mc(domain, params, value_field, start, N, rng, threads=1):
    """Mean total payoff of greedy-vs-greedy play with respect to ``value_field``.

    Returns ``(mean, std_error)`` over ``N`` games.
    """
    if N < 100:
        raise ValueError("N must be at least 100")
    res = run_games(domain, params, GreedyMax(value_field), GreedyMin(value_field),
                   start, N, rng, threads)
    return mean_and_se(res.total_payoff)


def estimate_stopping_time(domain, params, sI, sII, start, N, rng, threads=1,
                           stop_mask=None):
    """Return ``(mean_tau, std_error)`` over ``N`` games."""
    res = run_games(domain, params, sI, sII, start, N, rng, threads, stop_mask=stop_mask)
    return mean_and_se(res.tau)
