"""Named payoff functions usable from configuration files.

A payoff spec is either a bare number (a constant) or a mapping with a
``kind`` key:

=============  ==========================================  =====================
kind           value at ``x``                              keys (defaults)
=============  ==========================================  =====================
``constant``   ``value``                                   value
``linear``     ``offset + <gradient, x>``                  gradient, offset (0)
``quadratic``  ``offset + coefficient |x - center|^2``     coefficient, offset
                                                           (0), center (origin)
``radial``     ``offset + coefficient |x - center|^power`` coefficient, power,
                                                           offset (0), center
=============  ==========================================  =====================
"""
from dataclasses import dataclass

import numpy as np

from .errors import ParameterError

KINDS = ("constant", "linear", "quadratic", "radial")


@dataclass(frozen=True)
class Payoff:
    kind: str
    params: tuple

    def spec(self):
        out = {"kind": self.kind}
        out.update({k: (list(v) if isinstance(v, tuple) else v) for k, v in self.params})
        return out

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        p = dict(self.params)
        if self.kind == "constant":
            return np.full(x.shape[:-1], p["value"])
        if self.kind == "linear":
            return p["offset"] + x @ np.asarray(p["gradient"])
        rho = np.linalg.norm(x - np.asarray(p["center"]), axis=-1)
        power = 2.0 if self.kind == "quadratic" else p["power"]
        return p["offset"] + p["coefficient"] * rho ** power


def _number(spec, key, default=None):
    if key not in spec:
        if default is None:
            raise ParameterError(f"payoff {spec.get('kind')!r} needs {key!r}")
        return default
    try:
        return float(spec[key])
    except (TypeError, ValueError):
        raise ParameterError(f"payoff field {key!r} must be a number") from None


def _vector(spec, key, n, default=None):
    v = spec.get(key, default)
    if v is None:
        raise ParameterError(f"payoff {spec.get('kind')!r} needs {key!r}")
    try:
        v = tuple(float(t) for t in np.atleast_1d(v))
    except (TypeError, ValueError):
        raise ParameterError(f"payoff field {key!r} must be a list of numbers") from None
    if len(v) != n:
        raise ParameterError(f"payoff field {key!r} must have length {n}")
    return v


def make_payoff(spec, n):
    """Build a ``Payoff`` for dimension ``n`` from a number or a mapping."""
    if isinstance(spec, (int, float)) and not isinstance(spec, bool):
        return Payoff("constant", (("value", float(spec)),))
    if not isinstance(spec, dict) or "kind" not in spec:
        raise ParameterError("payoff must be a number or a mapping with 'kind'")
    kind = spec["kind"]
    allowed = {"constant": {"value"}, "linear": {"gradient", "offset"},
               "quadratic": {"coefficient", "offset", "center"},
               "radial": {"coefficient", "power", "offset", "center"}}
    if kind not in allowed:
        raise ParameterError(f"unknown payoff kind {kind!r}; expected one of {KINDS}")
    extra = set(spec) - allowed[kind] - {"kind"}
    if extra:
        raise ParameterError(f"unexpected payoff fields {sorted(extra)}")
    if kind == "constant":
        params = (("value", _number(spec, "value")),)
    elif kind == "linear":
        params = (("gradient", _vector(spec, "gradient", n)),
                  ("offset", _number(spec, "offset", 0.0)))
    else:
        params = (("center", _vector(spec, "center", n, [0.0] * n)),
                  ("coefficient", _number(spec, "coefficient")),
                  ("offset", _number(spec, "offset", 0.0)))
        if kind == "radial":
            params += (("power", _number(spec, "power")),)
    return Payoff(kind, params)
