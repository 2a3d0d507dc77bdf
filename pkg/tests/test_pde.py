import json

import numpy as np
import pytest
import sympy as sp
from hypothesis import given, strategies as st

from tugwar.core import GameParams, ScalarField, build_domain, unit_disk
from tugwar.errors import DegenerateGradient, ParameterError
from tugwar.pde import (TABLE_COLUMNS, ManufacturedSolution, annulus_probes,
                        convergence_study, fd_consistency, make_quadratic_solution,
                        negative_control, normalized_plaplacian_fd, scale_running_payoff)

P42 = GameParams(4, 2, 0.1)


def _symbolic_operator(expr, xs, p):
    """Exact normalized p-Laplacian of a sympy expression."""
    grad = sp.Matrix([sp.diff(expr, x) for x in xs])
    H = sp.hessian(expr, xs)
    g2 = (grad.T * grad)[0]
    inf_lap = (grad.T * H * grad)[0] / g2
    return sp.simplify(((p - 2) * inf_lap + H.trace()) / p)


def test_scale_planar_p4():
    assert scale_running_payoff(1.0, P42) == pytest.approx(1 / 3, abs=1e-15)


def test_scale_zero():
    assert scale_running_payoff(0.0, P42) == 0.0


@given(st.floats(-1e3, 1e3), st.floats(0.01, 100.0), st.floats(2.1, 20.0), st.integers(1, 5))
def test_scale_linear_and_positive(c, f, p, n):
    P = GameParams(p, n, 0.1)
    assert scale_running_payoff(c * f, P) == pytest.approx(c * scale_running_payoff(f, P),
                                                           rel=1e-12, abs=1e-12)
    assert scale_running_payoff(f, P) > 0


def test_quadratic_closed_form_symbolically():
    x, y = sp.symbols("x y", real=True)
    p = sp.Integer(4)
    u = 1 - (x ** 2 + y ** 2) * p / (2 * (2 + p - 2))
    assert _symbolic_operator(u, [x, y], p) == -1


def test_fd_constant_is_degenerate():
    with pytest.raises(DegenerateGradient):
        normalized_plaplacian_fd(lambda x: np.full(len(x), 2.0), [0.3, 0.1], 1e-3, P42)


@pytest.mark.parametrize("p,n", [(4, 2), (3, 3), (6, 1)])
def test_fd_quadratic_family(p, n):
    P = GameParams(p, n, 0.1)
    sol = make_quadratic_solution(P, A=5.0)
    x = np.linspace(0.2, 0.5, n)
    for h in (1e-2, 1e-3):
        assert normalized_plaplacian_fd(sol.u_star, x, h, P) == pytest.approx(-1.0, abs=1e-6)


def test_fd_linear_is_zero():
    g = np.array([0.7, -0.2])
    val = normalized_plaplacian_fd(lambda x: x @ g, [0.1, 0.4], 1e-2, P42)
    assert abs(val) < 1e-10


def test_fd_second_order_against_symbolic():
    x, y = sp.symbols("x y", real=True)
    expr = sp.exp(x) * sp.sin(1 + y) + x * y
    exact = float(_symbolic_operator(expr, [x, y], 4).subs({x: 0.3, y: 0.2}))
    fn = sp.lambdify((x, y), expr, "numpy")
    u = lambda pts: fn(pts[:, 0], pts[:, 1])  # noqa: E731
    errs = [abs(normalized_plaplacian_fd(u, [0.3, 0.2], h, P42) - exact)
            for h in (0.04, 0.02, 0.01)]
    assert errs[0] / errs[1] == pytest.approx(4, rel=0.15)
    assert errs[1] / errs[2] == pytest.approx(4, rel=0.15)


def test_fd_on_grid_field():
    d = build_domain(unit_disk(), P42, 0.025, 1.0, 1.0)
    sol = make_quadratic_solution(P42)
    u = ScalarField.from_function(d, sol.u_star)
    # grid-aligned spacing: multilinear sampling hits nodes exactly
    assert normalized_plaplacian_fd(u, [0.25, -0.5], 0.05, P42) == pytest.approx(-1, abs=1e-9)
    with pytest.raises(DegenerateGradient):
        normalized_plaplacian_fd(u, [0.0, 0.0], 0.05, P42)


def test_fd_argument_checks():
    with pytest.raises(ParameterError):
        normalized_plaplacian_fd(lambda x: x[:, 0], [0.1], 1e-2, P42)
    with pytest.raises(ParameterError):
        normalized_plaplacian_fd(lambda x: x[:, 0], [0.1, 0.1], 0.0, P42)


def test_quadratic_solution_planar_p4():
    sol = make_quadratic_solution(P42, A=1.0)
    pts = annulus_probes(200, 0.0, 1.0, 2, seed=4)
    vals = sol.u_star(pts)
    assert np.all((vals >= 0.5) & (vals <= 1.0))
    assert sol.u_star(np.array([[0.6, 0.8]]))[0] == pytest.approx(0.5)
    assert np.all(sol.f_pde(pts) == 1.0)
    with pytest.raises(DegenerateGradient):
        normalized_plaplacian_fd(sol.u_star, [0.0, 0.0], 1e-3, P42)


def test_quadratic_solution_rejects_small_offset():
    with pytest.raises(ParameterError):
        make_quadratic_solution(P42, A=0.5)
    with pytest.raises(ParameterError):
        make_quadratic_solution(P42, A=1.0, radius=1.5)


def test_annulus_probes_shell():
    pts = annulus_probes(500, 0.1, 0.9, 2, seed=0)
    r = np.linalg.norm(pts, axis=1)
    assert np.all((r >= 0.1 - 1e-12) & (r <= 0.9 + 1e-12))
    assert np.array_equal(pts, annulus_probes(500, 0.1, 0.9, 2, seed=0))


@pytest.fixture(scope="module")
def study():
    sol = make_quadratic_solution(P42, A=1.0)
    return sol, convergence_study(sol, unit_disk(), [0.2, 0.1, 0.05], keep_fields=True)


def test_convergence_study_improves(study):
    _, tab = study
    e = tab.errors
    assert e[2] < e[0]
    assert tab.monotone
    assert [r.h for r in tab.rows] == [0.05, 0.025, 0.0125]
    assert all(r.residual <= 1e-8 for r in tab.rows)


def test_convergence_table_outputs(study):
    _, tab = study
    lines = tab.to_csv().splitlines()
    assert lines[0] == ",".join(TABLE_COLUMNS)
    assert len(lines) == 4
    doc = json.loads(tab.to_json())
    assert doc["monotone"] is True and doc["schema_version"] == 1


def test_negative_control_stays_away(study):
    sol, tab = study
    neg = negative_control(sol, unit_disk(), [0.2, 0.1, 0.05])
    assert not neg.scaled
    assert neg.errors.min() > 10 * tab.errors.max()
    assert neg.errors[-1] > 0.5 * neg.errors[0]


def test_consistency_diagnostic(study):
    _, tab = study
    pts = annulus_probes(20, 0.2, 0.6, 2, seed=2)
    worst, vals = fd_consistency(tab.fields[1], pts, 0.1)
    assert np.isfinite(worst) and len(vals) == 20
    assert np.all(vals < 0)


def test_homogeneous_linear_data_is_exact():
    # linear data is a fixed point of the homogeneous operator on symmetric balls
    sol = ManufacturedSolution(lambda x: 2.0 + x[..., 0] - 0.5 * x[..., 1],
                               lambda x: np.zeros(np.asarray(x).shape[:-1]),
                               "linear", 2.0, 4.0, 2)
    tab = convergence_study(sol, unit_disk(), [0.2, 0.1], tol=1e-12, timing=False)
    assert np.all(tab.errors < 1e-9)
    assert all(r.runtime_seconds is None for r in tab.rows)
