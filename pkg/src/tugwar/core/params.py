from dataclasses import dataclass, field

from ..errors import ParameterError


def derive_probabilities(p, n):
    """Return ``(alpha, beta)``, the tug and noise probabilities for exponent ``p``.

    ``alpha = (p - 2) / (n + p)`` is the chance that a fair coin is tossed and
    a player moves; ``beta = (n + 2) / (n + p)`` is the chance of a uniform
    random step.  Only ``p > 2`` is admissible.
    """
    if not p > 2:
        raise ParameterError(f"p must be > 2, got {p!r}")
    if int(n) != n or n < 1:
        raise ParameterError(f"dimension n must be an integer >= 1, got {n!r}")
    alpha = (p - 2.0) / (n + p)
    beta = (n + 2.0) / (n + p)
    return alpha, beta


@dataclass(frozen=True)
class GameParams:
    """Exponent ``p``, space dimension ``n`` and step radius ``epsilon``."""

    p: float
    n: int
    epsilon: float
    alpha: float = field(init=False)
    beta: float = field(init=False)

    def __post_init__(self):
        alpha, beta = derive_probabilities(self.p, self.n)
        if not self.epsilon > 0:
            raise ParameterError(f"epsilon must be > 0, got {self.epsilon!r}")
        object.__setattr__(self, "n", int(self.n))
        object.__setattr__(self, "alpha", alpha)
        object.__setattr__(self, "beta", beta)

    def with_epsilon(self, epsilon):
        return GameParams(self.p, self.n, epsilon)
