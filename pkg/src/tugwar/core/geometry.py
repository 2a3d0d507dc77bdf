"""Bounded open shapes described by signed distance functions.

Each shape reports a signed distance ``sdf(x)`` that is negative inside the
open set, zero on its boundary and equal to the Euclidean distance to the
boundary outside.  Grid classification and ball-containment checks are both
phrased through it.
"""
from dataclasses import dataclass

import numpy as np

from ..errors import DomainError


def _as_points(x, n):
    x = np.asarray(x, dtype=float)
    if x.ndim == 1 and n == 1 and x.shape[-1] != 1:
        x = x[:, None]
    if x.shape[-1] != n:
        raise ValueError(f"points must have trailing dimension {n}, got {x.shape}")
    return x


class Shape:
    dim: int

    def sdf(self, x):
        raise NotImplementedError

    def bounds(self):
        raise NotImplementedError

    def contains_ball(self, center, radius):
        """True if the open ball ``B_radius(center)`` lies inside the shape."""
        d = float(np.asarray(self.sdf(np.atleast_2d(np.asarray(center, float))))[0])
        return d <= -radius * (1 - 1e-12)

    def diameter(self):
        lo, hi = self.bounds()
        return float(np.linalg.norm(hi - lo))


@dataclass(frozen=True)
class Box(Shape):
    center: tuple
    half_widths: tuple

    def __post_init__(self):
        c = np.atleast_1d(np.asarray(self.center, float))
        w = np.atleast_1d(np.asarray(self.half_widths, float))
        if c.shape != w.shape:
            raise DomainError("box center and half_widths differ in length")
        if np.any(w <= 0):
            raise DomainError("box has zero volume")
        object.__setattr__(self, "center", tuple(c.tolist()))
        object.__setattr__(self, "half_widths", tuple(w.tolist()))

    @property
    def dim(self):
        return len(self.center)

    def sdf(self, x):
        x = _as_points(x, self.dim)
        q = np.abs(x - np.asarray(self.center)) - np.asarray(self.half_widths)
        outside = np.linalg.norm(np.maximum(q, 0.0), axis=-1)
        inside = np.minimum(q.max(axis=-1), 0.0)
        return outside + inside

    def bounds(self):
        c, w = np.asarray(self.center), np.asarray(self.half_widths)
        return c - w, c + w


@dataclass(frozen=True)
class Ball(Shape):
    center: tuple
    radius: float

    def __post_init__(self):
        c = np.atleast_1d(np.asarray(self.center, float))
        if not self.radius > 0:
            raise DomainError("ball has zero volume")
        object.__setattr__(self, "center", tuple(c.tolist()))
        object.__setattr__(self, "radius", float(self.radius))

    @property
    def dim(self):
        return len(self.center)

    def sdf(self, x):
        x = _as_points(x, self.dim)
        return np.linalg.norm(x - np.asarray(self.center), axis=-1) - self.radius

    def bounds(self):
        c = np.asarray(self.center)
        return c - self.radius, c + self.radius


@dataclass(frozen=True)
class Annulus(Shape):
    center: tuple
    inner_radius: float
    outer_radius: float

    def __post_init__(self):
        c = np.atleast_1d(np.asarray(self.center, float))
        if not (0 <= self.inner_radius < self.outer_radius):
            raise DomainError("annulus needs 0 <= inner_radius < outer_radius")
        object.__setattr__(self, "center", tuple(c.tolist()))
        object.__setattr__(self, "inner_radius", float(self.inner_radius))
        object.__setattr__(self, "outer_radius", float(self.outer_radius))

    @property
    def dim(self):
        return len(self.center)

    def sdf(self, x):
        x = _as_points(x, self.dim)
        rho = np.linalg.norm(x - np.asarray(self.center), axis=-1)
        return np.maximum(self.inner_radius - rho, rho - self.outer_radius)

    def bounds(self):
        c = np.asarray(self.center)
        return c - self.outer_radius, c + self.outer_radius


def interval(a, b):
    """The open interval ``(a, b)`` as a one-dimensional box."""
    return Box(((a + b) / 2.0,), ((b - a) / 2.0,))


def unit_disk():
    return Ball((0.0, 0.0), 1.0)


def shape_from_spec(spec):
    """Build a shape from a plain mapping such as ``{"kind": "ball", ...}``."""
    spec = dict(spec)
    kind = spec.pop("kind")
    if kind == "box":
        return Box(tuple(spec["center"]), tuple(spec["half_widths"]))
    if kind == "ball":
        return Ball(tuple(spec["center"]), float(spec["radius"]))
    if kind == "annulus":
        return Annulus(tuple(spec["center"]), float(spec["inner_radius"]),
                       float(spec["outer_radius"]))
    raise DomainError(f"unknown shape kind {kind!r}")
