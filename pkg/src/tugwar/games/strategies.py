"""Markov strategies, each compiled to a move table over interior nodes.

A move table ``m`` has one entry per interior node (in ``domain.interior``
order) holding the flat index of the node the player moves the token to when
winning the coin toss there.  All targets lie in the node's discrete ball.
Ties go to the lexicographically smallest stencil offset.
"""
from dataclasses import dataclass

import numpy as np

from ..core.domain import ScalarField

_CHUNK = 20000


class Strategy:
    def move_table(self, domain):
        raise NotImplementedError


def _check_field(field, domain):
    if field.domain is not domain and field.domain.extents != domain.extents:
        raise ValueError("strategy field lives on a different grid")


@dataclass
class GreedyMax(Strategy):
    """Step to the ball node where ``field`` is largest."""

    field: ScalarField

    def move_table(self, domain):
        _check_field(self.field, domain)
        g = self.field.flat[domain.neighbors]
        j = g.argmax(axis=1)
        return domain.neighbors[np.arange(len(j)), j]


@dataclass
class GreedyMin(Strategy):
    field: ScalarField

    def move_table(self, domain):
        _check_field(self.field, domain)
        g = self.field.flat[domain.neighbors]
        j = g.argmin(axis=1)
        return domain.neighbors[np.arange(len(j)), j]


@dataclass
class PullToward(Strategy):
    """Step to the ball node closest to ``target`` (landing on it when in reach).

    ``target`` is a flat node index or a point, which may lie outside the
    grid (for pulling toward a point beyond the boundary strip).
    """

    target: object

    def target_point(self, domain):
        if isinstance(self.target, (int, np.integer)):
            return domain.coords(int(self.target))
        return np.atleast_1d(np.asarray(self.target, dtype=float))

    def move_table(self, domain):
        z = self.target_point(domain)
        nbr = domain.neighbors
        out = np.empty(len(nbr), dtype=np.int64)
        for s in range(0, len(nbr), _CHUNK):
            block = nbr[s:s + _CHUNK]
            d2 = ((domain.coords(block) - z) ** 2).sum(axis=-1)
            j = d2.argmin(axis=1)
            out[s:s + _CHUNK] = block[np.arange(len(j)), j]
        return out


@dataclass
class StandStill(Strategy):
    def move_table(self, domain):
        return domain.interior.copy()
