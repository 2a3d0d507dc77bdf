"""Empirical regularity constants of solved value functions.

Every function here is a deterministic measurement on stored fields.  Balls
are closed and made of grid nodes (interior and strip), the same convention
as the stencil.  The theoretical constants are existential, so each report
carries the measured ratio and the check that matters at desk scale is its
stability across ``epsilon`` or radius families (see ``stability``).
"""
from dataclasses import asdict, dataclass, field
import csv
import io
import json
import math

import numpy as np

from .core.domain import NodeClass
from .errors import (DomainMismatch, EmptyBall, GeometryError, NonPositiveField,
                     ParameterError)

SCHEMA_VERSION = 1


@dataclass
class RegularityReport:
    estimate_name: str
    measured_constant: float
    witness: dict
    parameters: dict
    passed: bool
    diagnostics: dict = field(default_factory=dict)

    def as_row(self):
        return {
            "estimate": self.estimate_name,
            "measured_constant": repr(float(self.measured_constant)),
            "passed": str(bool(self.passed)).lower(),
            "p": repr(float(self.parameters.get("p", math.nan))),
            "n": self.parameters.get("n", ""),
            "epsilon": repr(float(self.parameters.get("epsilon", math.nan))),
            "domain": self.parameters.get("domain", ""),
            "witness": json.dumps(self.witness, sort_keys=True),
            "diagnostics": json.dumps(self.diagnostics, sort_keys=True),
        }


CSV_COLUMNS = ["estimate", "measured_constant", "passed", "p", "n", "epsilon",
               "domain", "witness", "diagnostics"]


def _point(domain, where):
    if isinstance(where, (int, np.integer)):
        return domain.coords(int(where))
    return np.atleast_1d(np.asarray(where, dtype=float))


def _node(domain, where):
    if isinstance(where, (int, np.integer)):
        return int(where)
    return domain.index_of(where)


def _params(domain, **extra):
    out = {"p": domain.params.p, "n": domain.n, "epsilon": domain.epsilon,
           "domain": repr(domain.shape)}
    out.update(extra)
    return out


def _ball_values(field, center, radius, finite_only=False):
    dom = field.domain
    nodes = dom.nodes_within(_point(dom, center), radius)
    vals = field.flat[nodes]
    if finite_only:
        keep = np.isfinite(vals)
        nodes, vals = nodes[keep], vals[keep]
    return nodes, vals


def oscillation(field, center, radius):
    """``max - min`` of the field over grid nodes within ``radius``."""
    nodes, vals = _ball_values(field, center, radius)
    if not len(nodes):
        raise EmptyBall(f"no grid node within {radius} of {center}")
    return float(vals.max() - vals.min())


def _osc_finite(field, center, radius):
    # running payoff is only defined on interior nodes
    _, vals = _ball_values(field, center, radius, finite_only=True)
    return float(vals.max() - vals.min()) if len(vals) else 0.0


def _contained(domain, center, radius, what):
    if not domain.shape.contains_ball(_point(domain, center), radius):
        raise GeometryError(f"{what}: ball of radius {radius} around "
                            f"{_point(domain, center)} leaves the domain")


def _interior_min(field):
    return float(field.interior_values().min())


def verify_lipschitz(field, f_field, a, r, R, ceiling=math.inf):
    """Measure ``osc(u, B_r) / ((r/R) [osc(u, B_6R) + osc(f, B_6R)])`` at ``a``.

    The variant with ``osc(f, B_6r)`` in the denominator is kept in the
    diagnostics.
    """
    dom = field.domain
    eps = dom.epsilon
    if not eps < r <= R:
        raise ParameterError(f"need epsilon < r <= R, got eps={eps}, r={r}, R={R}")
    _contained(dom, a, 6 * R, "lipschitz")
    nodes, vals = _ball_values(field, a, r)
    if not len(nodes):
        raise EmptyBall("empty probe ball")
    osc_r = float(vals.max() - vals.min())
    osc_big = oscillation(field, a, 6 * R)
    osc_f_big = _osc_finite(f_field, a, 6 * R)
    osc_f_small = _osc_finite(f_field, a, 6 * r)
    scale = r / R
    denom = scale * (osc_big + osc_f_big)
    degenerate = denom == 0
    if degenerate:
        measured = 0.0 if osc_r == 0 else math.inf
    else:
        measured = osc_r / denom
    denom_alt = scale * (osc_big + osc_f_small)
    alt = osc_r / denom_alt if denom_alt > 0 else (0.0 if osc_r == 0 else math.inf)
    witness = {
        "center": _point(dom, a).tolist(), "r": r, "R": R,
        "argmax": dom.coords(nodes[vals.argmax()]).tolist(),
        "argmin": dom.coords(nodes[vals.argmin()]).tolist(),
    }
    diag = {"osc_u_r": osc_r, "osc_u_6R": osc_big, "osc_f_6R": osc_f_big,
            "osc_f_6r": osc_f_small, "constant_with_osc_f_6r": alt,
            "degenerate": bool(degenerate)}
    return RegularityReport("lipschitz", measured, witness, _params(dom),
                            bool(measured <= ceiling), diag)


def verify_harnack(field, f_field, a, r, ceiling=math.inf):
    """Measure ``sup_{B_r} u / (inf_{B_r} u + sup f)`` at ``a``."""
    dom = field.domain
    _contained(dom, a, 30 * r, "harnack")
    if _interior_min(field) <= 0:
        raise NonPositiveField("harnack needs u > 0 on the interior")
    nodes, vals = _ball_values(field, a, r)
    if not len(nodes):
        raise EmptyBall("empty probe ball")
    sup_f = float(np.nanmax(f_field.flat[dom.interior]))
    measured = float(vals.max() / (vals.min() + sup_f))
    witness = {"center": _point(dom, a).tolist(), "r": r,
               "argmax": dom.coords(nodes[vals.argmax()]).tolist(),
               "argmin": dom.coords(nodes[vals.argmin()]).tolist()}
    diag = {"sup_u": float(vals.max()), "inf_u": float(vals.min()), "sup_f": sup_f}
    return RegularityReport("harnack", measured, witness, _params(dom),
                            bool(measured <= ceiling), diag)


def verify_local_comparison(field, params, pairs):
    """Smallest ratio ``u(x) / u(y)`` over pairs with ``|x - y| <= 10 eps``.

    Passes when the ratio is at least ``(alpha/2)**20``.
    """
    dom = field.domain
    if _interior_min(field) <= 0:
        raise NonPositiveField("local comparison needs u > 0")
    limit = 10 * params.epsilon * (1 + 1e-9)
    worst, witness = math.inf, {}
    for x, y in pairs:
        i, j = _node(dom, x), _node(dom, y)
        px, py = dom.coords(i), dom.coords(j)
        if np.linalg.norm(px - py) > limit:
            raise ParameterError(f"pair {px}, {py} is farther than 10 epsilon apart")
        ratio = field.flat[i] / field.flat[j]
        if ratio < worst:
            worst, witness = float(ratio), {"x": px.tolist(), "y": py.tolist()}
    bound = (params.alpha / 2) ** 20
    return RegularityReport("local_comparison", worst, witness, _params(dom),
                            bool(worst >= bound), {"bound": bound, "pairs": len(pairs)})


def random_admissible_pairs(domain, count, seed=0):
    """Interior node pairs within ``10 eps`` whose midpoint ball fits in the shape."""
    rng = np.random.default_rng(seed)
    eps = domain.epsilon
    inner = domain.interior
    pts = domain.coords(inner)
    pairs = []
    while len(pairs) < count:
        i = rng.integers(len(inner))
        near = np.flatnonzero(((pts - pts[i]) ** 2).sum(axis=1) <= (10 * eps) ** 2)
        j = near[rng.integers(len(near))]
        mid = 0.5 * (pts[i] + pts[j])
        if domain.shape.contains_ball(mid, 0.5 * np.linalg.norm(pts[i] - pts[j]) + domain.h):
            pairs.append((int(inner[i]), int(inner[j])))
    return pairs


def verify_global_bound(field, domain=None):
    """Measure ``sup u / (sup_strip F + sup f)``."""
    dom = field.domain if domain is None else domain
    sup_u = float(field.interior_values().max())
    sup_F = float(dom.F.reshape(-1)[dom.strip].max())
    sup_f = float(dom.f.reshape(-1)[dom.interior].max())
    denom = sup_F + sup_f
    if not denom > 0:
        raise ParameterError("need sup F + sup f > 0")
    measured = sup_u / denom
    witness = {"argmax": dom.coords(dom.interior[field.interior_values().argmax()]).tolist()}
    return RegularityReport("global_bound", measured, witness, _params(dom),
                            bool(np.isfinite(measured)),
                            {"sup_u": sup_u, "sup_F": sup_F, "sup_f": sup_f})


def _same_grid(a, b):
    return (a.extents == b.extents and a.h == b.h and np.array_equal(a.origin, b.origin)
            and np.array_equal(a.node_class, b.node_class))


def verify_payoff_monotonicity(u_field, v_field, tol=1e-9):
    """True iff ``v >= u - 10 tol`` on every interior and strip node."""
    du, dv = u_field.domain, v_field.domain
    if not _same_grid(du, dv):
        raise DomainMismatch("fields live on different grids")
    live = du.classes() != NodeClass.EXTERIOR
    return bool(np.all(v_field.flat[live] >= u_field.flat[live] - 10 * tol))


def verify_inf_decay(field, y, z, r, R):
    """Measure ``inf_{B_r(z)} u * r**n / u(y)``; the ``r**(2n)`` form is a diagnostic."""
    dom = field.domain
    eps = dom.epsilon
    if not 2 * eps < r < R:
        raise ParameterError(f"need 2 epsilon < r < R, got r={r}, R={R}")
    py, pz = _point(dom, y), _point(dom, z)
    if np.linalg.norm(pz - py) >= 2 * R:
        raise GeometryError("z must lie in B_2R(y)")
    _contained(dom, py, 30 * R, "inf decay")
    if _interior_min(field) <= 0:
        raise NonPositiveField("inf decay needs u > 0")
    nodes, vals = _ball_values(field, pz, r)
    if not len(nodes):
        raise EmptyBall("empty probe ball")
    uy = field.flat[_node(dom, y)]
    n = dom.n
    measured = float(vals.min() * r ** n / uy)
    witness = {"y": py.tolist(), "z": pz.tolist(), "r": r, "R": R,
               "argmin": dom.coords(nodes[vals.argmin()]).tolist()}
    diag = {"inf_u": float(vals.min()), "u_y": float(uy),
            "constant_2n": float(vals.min() * r ** (2 * n) / uy)}
    return RegularityReport("inf_decay", measured, witness, _params(dom), True, diag)


def stability(values, factor=2.0):
    """``(ok, spread)`` where ``spread = max / min`` and ``ok`` means ``spread < factor``."""
    v = np.asarray(values, dtype=float)
    if np.any(v <= 0) or not np.all(np.isfinite(v)):
        return False, math.inf
    spread = float(v.max() / v.min())
    return spread < factor, spread


def reports_to_csv(reports, fh=None):
    """Write one CSV row per report; returns the text when ``fh`` is None."""
    out = io.StringIO() if fh is None else fh
    w = csv.DictWriter(out, fieldnames=CSV_COLUMNS, lineterminator="\n")
    w.writeheader()
    for rep in reports:
        w.writerow(rep.as_row())
    if fh is None:
        return out.getvalue()
    return None


# for these estimates a smaller measured value is the worse case
_LOWER_IS_WORSE = {"local_comparison"}


def summarize(reports):
    """Per-estimate worst case, overall pass flag and witnesses."""
    groups = {}
    for rep in reports:
        groups.setdefault(rep.estimate_name, []).append(rep)
    summary = {}
    for name, reps in sorted(groups.items()):
        pick = min if name in _LOWER_IS_WORSE else max
        worst = pick(reps, key=lambda r: r.measured_constant)
        summary[name] = {
            "probes": len(reps),
            "worst_constant": worst.measured_constant,
            "passed": all(r.passed for r in reps),
            "witness": worst.witness,
            "parameters": worst.parameters,
        }
    return {"schema_version": SCHEMA_VERSION, "estimates": summary}


def report_dict(rep):
    return asdict(rep)
