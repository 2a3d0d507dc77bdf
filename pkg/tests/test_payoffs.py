import numpy as np
import pytest

from tugwar.errors import ParameterError
from tugwar.payoffs import make_payoff

PTS = np.array([[0.0, 0.0], [0.3, -0.4], [1.0, 2.0]])


def test_number_is_constant():
    p = make_payoff(2.5, 2)
    assert np.all(p(PTS) == 2.5)
    assert p.spec() == {"kind": "constant", "value": 2.5}


def test_linear():
    p = make_payoff({"kind": "linear", "gradient": [1.0, -2.0], "offset": 0.5}, 2)
    assert np.allclose(p(PTS), 0.5 + PTS[:, 0] - 2 * PTS[:, 1])


def test_quadratic_defaults_to_origin():
    p = make_payoff({"kind": "quadratic", "coefficient": -0.5, "offset": 1}, 2)
    assert np.allclose(p(PTS), 1 - 0.5 * (PTS ** 2).sum(axis=1))
    assert p.spec()["center"] == [0.0, 0.0]


def test_radial():
    p = make_payoff({"kind": "radial", "coefficient": 2, "power": 1, "center": [1, 2]}, 2)
    assert np.allclose(p(PTS), 2 * np.linalg.norm(PTS - [1, 2], axis=1))


@pytest.mark.parametrize("spec", [
    "one", {"value": 1}, {"kind": "cubic"}, {"kind": "constant"},
    {"kind": "linear", "gradient": [1.0]}, {"kind": "constant", "value": 1, "slope": 2},
    {"kind": "radial", "coefficient": 1}, True,
])
def test_invalid_specs(spec):
    with pytest.raises(ParameterError):
        make_payoff(spec, 2)


def test_spec_round_trip():
    spec = {"kind": "radial", "coefficient": 2.0, "power": 3.0, "offset": 1.0,
            "center": [0.5, 0.0]}
    p = make_payoff(spec, 2)
    assert make_payoff(p.spec(), 2) == p
