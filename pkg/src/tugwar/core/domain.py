"""Uniform-grid discretization of ``Omega_eps = Omega u Gamma_eps``.

Nodes live on the lattice ``h * Z^n``.  The stored grid is the smallest box
that contains every interior node together with its discrete ball, so every
stencil lookup stays in range without padding.
"""
from dataclasses import dataclass, field
from enum import IntEnum
import itertools
import numbers

import numpy as np

from ..errors import DomainError, ParameterError
from .params import GameParams

# relative slack for the closed inequalities |delta| h <= eps and dist <= eps
_REL_TOL = 1e-9


class NodeClass(IntEnum):
    INTERIOR = 0
    STRIP = 1
    EXTERIOR = 2


@dataclass(frozen=True)
class BallStencil:
    """Integer offsets of the closed discrete ball ``|delta| h <= eps``.

    Offsets are sorted lexicographically, which fixes the tie-breaking order
    used by greedy strategies.
    """

    offsets: np.ndarray
    h: float
    epsilon: float

    @property
    def count(self):
        return len(self.offsets)

    @property
    def radius_cells(self):
        return int(np.abs(self.offsets).max()) if self.count else 0

    @property
    def center_position(self):
        """Row of the zero offset."""
        return int(np.flatnonzero(~self.offsets.any(axis=1))[0])


def ball_stencil(epsilon, h, n):
    m = int(np.floor(epsilon / h * (1 + _REL_TOL)))
    axis = range(-m, m + 1)
    lim = (epsilon / h) ** 2 * (1 + _REL_TOL)
    offsets = [d for d in itertools.product(axis, repeat=n)
               if sum(k * k for k in d) <= lim]
    return BallStencil(np.array(sorted(offsets), dtype=np.int64).reshape(-1, n), h, epsilon)


def _sampler(fn):
    """Accept constants or vectorized callables of points with shape (k, n)."""
    if isinstance(fn, numbers.Real):
        c = float(fn)
        return lambda x: np.full(len(x), c)
    return fn


@dataclass
class DiscreteDomain:
    shape: object
    params: GameParams
    h: float
    origin: np.ndarray
    extents: tuple
    node_class: np.ndarray
    F: np.ndarray
    f: np.ndarray
    stencil: BallStencil
    interior: np.ndarray = field(repr=False)
    strip: np.ndarray = field(repr=False)
    neighbors: np.ndarray = field(repr=False)

    @property
    def n(self):
        return self.params.n

    @property
    def epsilon(self):
        return self.params.epsilon

    @property
    def size(self):
        return int(np.prod(self.extents))

    @property
    def n_interior(self):
        return len(self.interior)

    def coords(self, flat=None):
        """Physical coordinates of flat node indices (all nodes by default)."""
        if flat is None:
            flat = np.arange(self.size)
        idx = np.stack(np.unravel_index(np.asarray(flat), self.extents), axis=-1)
        return self.origin + self.h * idx

    def index_of(self, point):
        """Flat index of the grid node nearest to ``point``."""
        point = np.atleast_1d(np.asarray(point, float))
        idx = np.rint((point - self.origin) / self.h).astype(np.int64)
        if np.any(idx < 0) or np.any(idx >= np.asarray(self.extents)):
            raise DomainError(f"point {point} lies outside the grid")
        return int(np.ravel_multi_index(tuple(idx), self.extents))

    def classes(self):
        return self.node_class.ravel()

    def interior_position(self):
        """Map from flat node index to row in ``interior`` (-1 elsewhere)."""
        pos = np.full(self.size, -1, dtype=np.int64)
        pos[self.interior] = np.arange(self.n_interior)
        return pos

    def nodes_within(self, center, radius):
        """Flat indices of non-exterior nodes in the closed ball around ``center``."""
        center = np.atleast_1d(np.asarray(center, float))
        lo = np.floor((center - radius - self.origin) / self.h).astype(np.int64)
        hi = np.ceil((center + radius - self.origin) / self.h).astype(np.int64)
        lo = np.clip(lo, 0, np.asarray(self.extents) - 1)
        hi = np.clip(hi, 0, np.asarray(self.extents) - 1)
        axes = [np.arange(a, b + 1) for a, b in zip(lo, hi)]
        grid = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, self.n)
        pts = self.origin + self.h * grid
        d2 = ((pts - center) ** 2).sum(axis=1)
        keep = d2 <= radius * radius * (1 + _REL_TOL) + 1e-24
        flat = np.ravel_multi_index(tuple(grid[keep].T), self.extents)
        flat = flat[self.classes()[flat] != NodeClass.EXTERIOR]
        return np.sort(flat)

    def validate(self):
        """Check the classification invariants; raises ``DomainError``."""
        cls = self.classes()
        if np.any(cls[self.neighbors] == NodeClass.EXTERIOR):
            raise DomainError("an interior stencil reaches an exterior node")
        d = self.shape.sdf(self.coords())
        tol = _REL_TOL * self.epsilon
        if np.any(d[cls == NodeClass.INTERIOR] >= 0):
            raise DomainError("interior node outside the open shape")
        strip = d[cls == NodeClass.STRIP]
        if np.any(strip < -tol) or np.any(strip > self.epsilon + tol):
            raise DomainError("strip node farther than epsilon from the boundary")
        if not np.all(np.isfinite(self.F.ravel()[self.strip])):
            raise DomainError("final payoff not finite on the strip")
        if not np.all(np.isfinite(self.f.ravel()[self.interior])):
            raise DomainError("running payoff not finite on the interior")


def build_domain(shape, params, h, F, f, *, allow_nonnegative_f=False,
                 check_resolution=True):
    """Discretize ``shape`` with spacing ``h`` and sample the payoffs.

    Parameters
    ----------
    shape : Shape
        Open bounded set ``Omega`` (box, ball or annulus).
    params : GameParams
    h : float
        Grid spacing; must satisfy ``h <= epsilon / 4`` unless
        ``check_resolution`` is False (reserved for hand-sized fixtures).
    F, f : callable or float
        Final payoff sampled on the strip, running payoff sampled on the
        interior.  Callables receive an array of points of shape ``(k, n)``.
    allow_nonnegative_f : bool
        Relax ``f > 0`` to ``f >= 0``.
    """
    eps = params.epsilon
    if shape.dim != params.n:
        raise ParameterError(f"shape dimension {shape.dim} != n = {params.n}")
    if not h > 0:
        raise ParameterError("h must be positive")
    if check_resolution and h > eps / 4 * (1 + _REL_TOL):
        raise ParameterError(f"h = {h} exceeds epsilon/4 = {eps / 4}")
    n = params.n
    stencil = ball_stencil(eps, h, n)
    m = stencil.radius_cells

    lo, hi = shape.bounds()
    ilo = np.ceil(np.asarray(lo) / h - _REL_TOL).astype(np.int64)
    ihi = np.floor(np.asarray(hi) / h + _REL_TOL).astype(np.int64)
    if np.any(ihi < ilo):
        raise DomainError("shape contains no grid node")
    axes = [np.arange(a, b + 1) for a, b in zip(ilo, ihi)]
    cand = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, n)
    inside = shape.sdf(cand * h) < -_REL_TOL * h
    if not inside.any():
        raise DomainError("shape interior contains no grid node")
    ilo = cand[inside].min(axis=0) - m
    ihi = cand[inside].max(axis=0) + m
    extents = tuple(int(e) for e in ihi - ilo + 1)
    origin = ilo.astype(float) * h

    axes = [np.arange(e) for e in extents]
    idx = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, n)
    pts = origin + h * idx
    d = shape.sdf(pts)
    cls = np.full(len(pts), NodeClass.EXTERIOR, dtype=np.int8)
    cls[d <= eps * (1 + _REL_TOL)] = NodeClass.STRIP
    cls[d < -_REL_TOL * h] = NodeClass.INTERIOR

    interior = np.flatnonzero(cls == NodeClass.INTERIOR)
    strip = np.flatnonzero(cls == NodeClass.STRIP)
    strides = np.array([int(np.prod(extents[k + 1:])) for k in range(n)], dtype=np.int64)
    neighbors = interior[:, None] + (stencil.offsets @ strides)[None, :]

    Fv = np.full(len(pts), np.nan)
    fv = np.full(len(pts), np.nan)
    Fv[strip] = np.asarray(_sampler(F)(pts[strip]), dtype=float)
    fv[interior] = np.asarray(_sampler(f)(pts[interior]), dtype=float)
    fin = fv[interior]
    if allow_nonnegative_f:
        if np.any(fin < 0):
            raise ParameterError("running payoff must be >= 0")
    elif np.any(fin <= 0):
        raise ParameterError("running payoff must be > 0 (pass allow_nonnegative_f to relax)")

    dom = DiscreteDomain(shape=shape, params=params, h=float(h), origin=origin,
                         extents=extents, node_class=cls.reshape(extents),
                         F=Fv.reshape(extents), f=fv.reshape(extents), stencil=stencil,
                         interior=interior, strip=strip, neighbors=neighbors)
    dom.validate()
    return dom


@dataclass
class ScalarField:
    """Grid-indexed values; exterior nodes hold NaN and are never read."""

    values: np.ndarray
    domain: DiscreteDomain

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float).reshape(self.domain.extents)

    @property
    def flat(self):
        return self.values.reshape(-1)

    def at(self, node):
        return float(self.flat[node])

    def interior_values(self):
        return self.flat[self.domain.interior]

    def copy(self):
        return ScalarField(self.values.copy(), self.domain)

    def __add__(self, c):
        return ScalarField(self.values + c, self.domain)

    def __mul__(self, c):
        return ScalarField(self.values * c, self.domain)

    __rmul__ = __mul__

    @classmethod
    def from_interior(cls, domain, interior_values, strip_values=None):
        v = np.full(domain.size, np.nan)
        v[domain.interior] = interior_values
        v[domain.strip] = domain.F.ravel()[domain.strip] if strip_values is None else strip_values
        return cls(v, domain)

    @classmethod
    def from_function(cls, domain, fn):
        """Evaluate ``fn`` on all non-exterior nodes."""
        v = np.full(domain.size, np.nan)
        live = np.flatnonzero(domain.classes() != NodeClass.EXTERIOR)
        v[live] = _sampler(fn)(domain.coords(live))
        return cls(v, domain)


def boundary_field(domain):
    """``F`` on the strip, NaN elsewhere."""
    return ScalarField(domain.F.copy(), domain)


def running_payoff_field(domain):
    return ScalarField(domain.f.copy(), domain)
