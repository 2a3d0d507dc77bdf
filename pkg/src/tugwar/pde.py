"""Bridge between the game and the normalized p-Laplace equation.

The value functions with running payoff ``pβ f / (2(n+2))`` approximate the
solution of ``-Δ_p^N u = f`` as ``eps -> 0``, where

    Δ_p^N u = (1/p) [(p - 2) <D²u ĝ, ĝ> + Δu],    ĝ = ∇u / |∇u|.

This module provides the payoff scaling, a finite-difference evaluation of
``Δ_p^N``, a manufactured quadratic solution and the convergence study.
"""
from dataclasses import asdict, dataclass, field
from typing import Callable, List, Optional
import csv
import io
import itertools
import json
import time

import numpy as np
from scipy.interpolate import RegularGridInterpolator

from .core.domain import ScalarField, build_domain
from .core.params import GameParams
from .core.solver import solve_value
from .errors import DegenerateGradient, ParameterError

SCHEMA_VERSION = 1


def scale_running_payoff(f_pde_value, params):
    """Running payoff whose game values approximate ``-Δ_p^N u = f_pde``."""
    return params.p * params.beta * f_pde_value / (2.0 * (params.n + 2))


def _field_sampler(field):
    dom = field.domain
    axes = [dom.origin[k] + dom.h * np.arange(e) for k, e in enumerate(dom.extents)]
    interp = RegularGridInterpolator(axes, field.values, bounds_error=True)
    return interp


def normalized_plaplacian_fd(u, x, h_fd, params, threshold=None, scale=1.0):
    """Second-order centered-difference value of ``Δ_p^N u`` at ``x``.

    ``u`` is a ScalarField (sampled by multilinear interpolation) or a
    callable mapping an ``(k, n)`` array of points to ``k`` values.  The
    gradient must exceed ``threshold``, by default
    ``1e-6 * (1 + sup|u| / scale)`` with ``scale`` the domain diameter.
    """
    x = np.atleast_1d(np.asarray(x, dtype=float))
    n = len(x)
    if n != params.n:
        raise ParameterError("point dimension does not match params.n")
    if not h_fd > 0:
        raise ParameterError("h_fd must be positive")
    if isinstance(u, ScalarField):
        sample = _field_sampler(u)
        scale = u.domain.shape.diameter()
        sup = float(np.nanmax(np.abs(u.flat)))
    else:
        sample = u
        sup = None
    E = np.eye(n) * h_fd
    pts = [x]
    for i in range(n):
        pts += [x + E[i], x - E[i]]
    pairs = list(itertools.combinations(range(n), 2))
    for i, j in pairs:
        pts += [x + E[i] + E[j], x + E[i] - E[j], x - E[i] + E[j], x - E[i] - E[j]]
    vals = np.asarray(sample(np.array(pts)), dtype=float)
    if not np.all(np.isfinite(vals)):
        raise ParameterError("finite-difference stencil leaves the sampled region")
    u0 = vals[0]
    plus, minus = vals[1:2 * n + 1:2], vals[2:2 * n + 1:2]
    grad = (plus - minus) / (2 * h_fd)
    H = np.diag((plus - 2 * u0 + minus) / h_fd ** 2)
    base = 2 * n + 1
    for k, (i, j) in enumerate(pairs):
        a, b, c, d = vals[base + 4 * k: base + 4 * k + 4]
        H[i, j] = H[j, i] = (a - b - c + d) / (4 * h_fd ** 2)
    if sup is None:
        sup = float(np.abs(vals).max())
    if threshold is None:
        threshold = 1e-6 * (1 + sup / scale)
    g = np.linalg.norm(grad)
    if g < threshold:
        raise DegenerateGradient(f"|grad u| = {g:.3e} below {threshold:.3e} at {x}")
    ghat = grad / g
    return float(((params.p - 2) * ghat @ H @ ghat + np.trace(H)) / params.p)


@dataclass
class ManufacturedSolution:
    u_star: Callable
    f_pde: Callable
    description: str
    A: float
    p: float
    n: int
    radius: float = 1.0

    def params(self, epsilon):
        return GameParams(self.p, self.n, epsilon)


def make_quadratic_solution(params, A=1.0, radius=1.0):
    """``u* = A - c|x|²`` with ``c = p / (2(n+p-2))`` solves ``-Δ_p^N u* = 1``.

    ``radius`` is the radius of the centered ball the solution must stay
    positive on.
    """
    p, n = params.p, params.n
    c = p / (2.0 * (n + p - 2))
    if A <= c * radius ** 2:
        raise ParameterError(f"A = {A} makes u* <= 0 on the ball of radius {radius}; "
                             f"need A > {c * radius ** 2}")

    def u_star(x):
        x = np.asarray(x, dtype=float)
        return A - c * (x ** 2).sum(axis=-1)

    def f_pde(x):
        return np.ones(np.asarray(x).shape[:-1])

    return ManufacturedSolution(u_star, f_pde, f"quadratic A={A!r} c={c!r}", float(A),
                                float(p), int(n), float(radius))


@dataclass
class ConvergenceRow:
    epsilon: float
    h: float
    sup_error: float
    iterations: int
    residual: float
    runtime_seconds: Optional[float] = None


TABLE_COLUMNS = ["epsilon", "h", "sup_error", "iterations", "residual", "runtime_seconds"]


@dataclass
class ConvergenceTable:
    rows: List[ConvergenceRow]
    scaled: bool
    description: str
    slack: float = 0.10
    fields: list = field(default_factory=list, repr=False)

    @property
    def errors(self):
        return np.array([r.sup_error for r in self.rows])

    @property
    def monotone(self):
        """Errors are non-increasing from coarse to fine, up to ``slack``."""
        e = self.errors
        return bool(np.all(e[1:] <= (1 + self.slack) * e[:-1]))

    def to_csv(self, fh=None):
        out = io.StringIO() if fh is None else fh
        w = csv.writer(out, lineterminator="\n")
        w.writerow(TABLE_COLUMNS)
        for r in self.rows:
            rt = "" if r.runtime_seconds is None else repr(r.runtime_seconds)
            w.writerow([repr(r.epsilon), repr(r.h), repr(r.sup_error), r.iterations,
                        repr(r.residual), rt])
        return out.getvalue() if fh is None else None

    def summary(self):
        return {"schema_version": SCHEMA_VERSION, "description": self.description,
                "scaled_running_payoff": self.scaled, "monotone": self.monotone,
                "slack": self.slack, "rows": [asdict(r) for r in self.rows]}

    def to_json(self):
        return json.dumps(self.summary(), indent=2, sort_keys=True) + "\n"


def convergence_study(solution, shape, eps_list, tol=None, scale=True, h_ratio=4.0,
                      method="policy", exclusion_radius=0.0, timing=True,
                      keep_fields=False):
    """Sup-norm error of the game value against ``u*`` along ``eps_list``.

    ``F = u*`` on each strip and the running payoff is ``f_pde`` scaled by
    ``scale_running_payoff`` (unscaled when ``scale`` is False, which is the
    negative control).  Errors are taken over interior nodes outside the
    ball of radius ``exclusion_radius`` around the origin.
    """
    rows, fields = [], []
    for eps in eps_list:
        params = solution.params(eps)
        factor = scale_running_payoff(1.0, params) if scale else 1.0
        dom = build_domain(shape, params, eps / h_ratio, solution.u_star,
                           lambda x, k=factor: k * solution.f_pde(x),
                           allow_nonnegative_f=True)
        t0 = time.perf_counter()
        res = solve_value(dom, tol=tol, method=method)
        elapsed = time.perf_counter() - t0
        pts = dom.coords(dom.interior)
        keep = np.linalg.norm(pts, axis=1) >= exclusion_radius
        err = np.abs(res.field.interior_values() - solution.u_star(pts))[keep]
        rows.append(ConvergenceRow(float(eps), dom.h, float(err.max()), int(res.iterations),
                                   float(res.residual), elapsed if timing else None))
        if keep_fields:
            fields.append(res.field)
    return ConvergenceTable(rows, bool(scale), solution.description, fields=fields)


def negative_control(solution, shape, eps_list, tol=None, **kw):
    """Convergence study with the running payoff left unscaled."""
    return convergence_study(solution, shape, eps_list, tol=tol, scale=False, **kw)


def annulus_probes(count, r_min, r_max, n, seed=0):
    """Deterministic points uniform in the shell ``r_min <= |x| <= r_max``."""
    rng = np.random.default_rng(seed)
    d = rng.standard_normal((count, n))
    d /= np.linalg.norm(d, axis=1, keepdims=True)
    r = (r_min ** n + rng.random(count) * (r_max ** n - r_min ** n)) ** (1.0 / n)
    return d * r[:, None]


def fd_consistency(field, points, h_fd, f_value=1.0):
    """Largest ``|Δ_p^N u_eps + f|`` over ``points``, with ``u_eps`` interpolated.

    A diagnostic only: it shrinks with ``eps`` but is not asserted.
    """
    params = field.domain.params
    vals = np.array([normalized_plaplacian_fd(field, x, h_fd, params) for x in points])
    return float(np.abs(vals + f_value).max()), vals
