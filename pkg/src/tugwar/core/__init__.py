from .params import GameParams, derive_probabilities
from .geometry import Annulus, Ball, Box, Shape, interval, shape_from_spec, unit_disk
from .domain import (BallStencil, DiscreteDomain, NodeClass, ScalarField, ball_stencil,
                     boundary_field, build_domain, running_payoff_field)
from .dpp import ball_statistics, dpp_apply, interior_update, residual
from .solver import FROM_INF_F, SolveResult, default_tol, solve_value
from .gridio import format_grid_dump, read_grid_dump, write_grid_dump
