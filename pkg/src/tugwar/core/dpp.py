"""The dynamic programming operator on a discrete domain.

At an interior node ``x`` with discrete ball ``B``::

    T u(x) = alpha/2 * (max_B u + min_B u) + beta * mean_B u + eps**2 * f(x)

and ``T u = F`` on the boundary strip.  All interior nodes are updated
simultaneously from the input values.
"""
import numpy as np

from ..errors import ParameterError
from .domain import NodeClass, ScalarField


def _resolve(field, domain, params):
    domain = field.domain if domain is None else domain
    if params is None:
        params = domain.params
    elif params.epsilon != domain.epsilon or params.n != domain.n:
        raise ParameterError("params disagree with the domain's epsilon or dimension")
    return domain, params


def _check_finite(values, domain):
    live = domain.classes() != NodeClass.EXTERIOR
    if not np.all(np.isfinite(values[live])):
        raise ValueError("field has NaN or inf on interior/strip nodes")


def ball_statistics(field, node, stencil=None):
    """``(sup, inf, mean)`` of ``field`` over the discrete ball at ``node``."""
    dom = field.domain
    if dom.classes()[node] != NodeClass.INTERIOR:
        raise ValueError(f"node {node} is not interior")
    if stencil is None:
        row = dom.interior_position()[node]
        targets = dom.neighbors[row]
    else:
        strides = np.array([int(np.prod(dom.extents[k + 1:])) for k in range(dom.n)])
        targets = node + stencil.offsets @ strides
    v = field.flat[targets]
    return float(v.max()), float(v.min()), float(v.mean())


def interior_update(values, domain, params, out=None):
    """Apply the operator to a flat value array; returns new interior values.

    The evaluation order is fixed so that the floating-point map is monotone:
    ``u <= v`` elementwise gives ``T u <= T v`` bit for bit.
    """
    g = values[domain.neighbors]
    half_alpha = 0.5 * params.alpha
    eps2 = params.epsilon ** 2
    res = half_alpha * (g.max(axis=1) + g.min(axis=1))
    res += params.beta * g.mean(axis=1)
    res += eps2 * domain.f.reshape(-1)[domain.interior]
    if out is not None:
        out[:] = res
        return out
    return res


def dpp_apply(field, domain=None, params=None):
    """One simultaneous sweep of the operator; strip values are copied."""
    domain, params = _resolve(field, domain, params)
    vals = field.flat
    _check_finite(vals, domain)
    new = vals.copy()
    new[domain.strip] = domain.F.reshape(-1)[domain.strip]
    new[domain.interior] = interior_update(vals, domain, params)
    return ScalarField(new, domain)


def residual(field, domain=None, params=None):
    """``max |T u - u|`` over interior nodes."""
    domain, params = _resolve(field, domain, params)
    vals = field.flat
    _check_finite(vals, domain)
    diff = interior_update(vals, domain, params) - vals[domain.interior]
    return float(np.abs(diff).max()) if len(diff) else 0.0
