import numpy as np
import pytest
from scipy import stats

from tugwar.core import Box, GameParams, NodeClass, ScalarField, build_domain, solve_value
from tugwar.errors import ParameterError, StepLimitExceeded
from tugwar.games import (BLOCK, Coin, GreedyMax, GreedyMin, PullToward, RngSpec, StandStill,
                          StreamBank, absorbing_chain_expectations, chain_oracle,
                          coin_outcome, cylinder_walk, estimate_stopping_time,
                          estimate_value_mc, play_game, run_games, simulate_games, walk_1d,
                          walk_1d_bound, walk_1d_exact)


@pytest.fixture(scope="module")
def chain_domain():
    """A 2-D box small enough for exact absorbing-chain oracles."""
    P = GameParams(4, 2, 0.2)
    d = build_domain(Box((0.0, 0.0), (0.35, 0.25)), P, 0.1,
                     lambda x: np.cos(2 * x[:, 0]) + x[:, 1], lambda x: 1 + x[:, 0] ** 2,
                     check_resolution=False)
    return d


def test_chain_domain_is_small(chain_domain):
    assert np.count_nonzero(chain_domain.classes() != NodeClass.EXTERIOR) <= 200


# --- random streams and coins ----------------------------------------------

def test_coin_law():
    alpha = GameParams(4, 2, 0.1).alpha
    c = RngSpec(99).generator().random(10**6)
    counts = np.bincount(coin_outcome(c, alpha), minlength=3)
    expect = np.array([alpha / 2, alpha / 2, 1 - alpha]) * 10**6
    sigma = np.sqrt(expect * (1 - expect / 10**6))
    assert np.all(np.abs(counts - expect) < 4 * sigma)


def test_stream_bank_blocks_match_generator():
    bank = StreamBank(RngSpec(5, stream_id=10), 3)
    a = bank.uniforms(np.array([0, 2]), 2)
    assert a.shape == (2, BLOCK, 2)
    assert np.array_equal(a[1], RngSpec(5, stream_id=12).generator().random((BLOCK, 2)))


def test_trace_reproducible(disk_domain, disk_value):
    P = disk_domain.params
    start = disk_domain.index_of([0.3, 0.2])
    s = (GreedyMax(disk_value), GreedyMin(disk_value))
    a = play_game(disk_domain, P, *s, start, RngSpec(4, 17))
    b = play_game(disk_domain, P, *s, start, RngSpec(4, 17))
    c = play_game(disk_domain, P, *s, start, RngSpec(4, 18))
    assert np.array_equal(a.positions, b.positions) and np.array_equal(a.coins, b.coins)
    assert a.total_payoff == b.total_payoff
    assert not np.array_equal(a.positions, c.positions)


def test_batch_matches_single_games(disk_domain, disk_value):
    P = disk_domain.params
    start = disk_domain.index_of([0.0, 0.5])
    sI, sII = GreedyMax(disk_value), GreedyMin(disk_value)
    batch = run_games(disk_domain, P, sI, sII, start, 40, RngSpec(8), threads=1)
    for k in (0, 13, 39):
        tr = play_game(disk_domain, P, sI, sII, start, RngSpec(8, k))
        assert tr.tau == batch.tau[k]
        assert tr.total_payoff == batch.total_payoff[k]


def test_thread_count_does_not_change_results(disk_domain, disk_value):
    P = disk_domain.params
    start = disk_domain.index_of([0.1, -0.2])
    args = (disk_domain, P, GreedyMax(disk_value), PullToward(np.array([0.0, -2.0])),
            start, 999, RngSpec(21))
    a = run_games(*args, threads=1)
    b = run_games(*args, threads=4)
    for name in ("tau", "final", "running_sum", "total_payoff"):
        assert np.array_equal(getattr(a, name), getattr(b, name))


def test_random_moves_uniform_over_stencil(disk_domain):
    P = disk_domain.params
    start = disk_domain.index_of([0.0, 0.0])
    stop = disk_domain.classes() != NodeClass.EXTERIOR
    stop[start] = False
    res = simulate_games(disk_domain, P, disk_domain.interior.copy(),
                         disk_domain.interior.copy(), np.full(20000, start), RngSpec(2),
                         stop_mask=stop)
    row = disk_domain.interior_position()[start]
    others = [t for t in disk_domain.neighbors[row] if t != start]
    counts = np.array([np.count_nonzero(res.final == t) for t in others])
    assert counts.sum() == 20000
    assert stats.chisquare(counts).pvalue > 1e-4


# --- traces ----------------------------------------------------------------

def test_trace_invariants_and_resum(disk_domain, disk_value):
    P = disk_domain.params
    start = disk_domain.index_of([-0.4, 0.1])
    cls = disk_domain.classes()
    for k in range(5):
        tr = play_game(disk_domain, P, GreedyMax(disk_value), GreedyMin(disk_value), start,
                       RngSpec(1, k))
        assert len(tr.positions) == tr.tau + 1 and len(tr.coins) == tr.tau
        assert np.all(cls[tr.positions[:-1]] == NodeClass.INTERIOR)
        assert cls[tr.positions[-1]] == NodeClass.STRIP
        assert tr.resum(disk_domain) == (tr.running_sum, tr.total_payoff)
        lines = tr.lines(disk_domain)
        assert len(lines) == tr.tau + 1 and lines[0].split()[1] == "START"


def test_fixture_game_outcomes(fixture_domain):
    P = fixture_domain.params
    for k in range(50):
        tr = play_game(fixture_domain, P, StandStill(), StandStill(), 1, RngSpec(0, k))
        assert tr.tau >= 1
        assert fixture_domain.coords(tr.positions[-1])[0] in (0.0, 1.0)
        run = 0.25 * tr.tau
        assert tr.total_payoff in (pytest.approx(run), pytest.approx(1 + run))


def test_standstill_games_terminate(fixture_domain):
    res = run_games(fixture_domain, fixture_domain.params, StandStill(), StandStill(), 1,
                    10**4, RngSpec(3))
    assert np.all(res.tau >= 1)


def test_step_cap_raises(disk_domain):
    start = disk_domain.index_of([0.0, 0.0])
    with pytest.raises(StepLimitExceeded):
        play_game(disk_domain, disk_domain.params, StandStill(), StandStill(), start,
                  RngSpec(0), step_cap=3)


def test_play_game_requires_interior_start(fixture_domain):
    with pytest.raises(ValueError):
        play_game(fixture_domain, fixture_domain.params, StandStill(), StandStill(), 0, 1)


# --- strategies ------------------------------------------------------------

def test_greedy_tie_break_is_first_offset(chain_domain):
    flat = ScalarField.from_function(chain_domain, lambda x: np.ones(len(x)))
    table = GreedyMax(flat).move_table(chain_domain)
    assert np.array_equal(table, chain_domain.neighbors[:, 0])
    assert np.array_equal(GreedyMin(flat).move_table(chain_domain), table)


def test_greedy_picks_extremes(disk_domain, disk_value):
    up = GreedyMax(disk_value).move_table(disk_domain)
    down = GreedyMin(disk_value).move_table(disk_domain)
    g = disk_value.flat[disk_domain.neighbors]
    assert np.array_equal(disk_value.flat[up], g.max(axis=1))
    assert np.array_equal(disk_value.flat[down], g.min(axis=1))


def test_pull_toward_node_and_point(disk_domain):
    target = disk_domain.index_of([0.5, 0.0])
    table = PullToward(target).move_table(disk_domain)
    pts = disk_domain.coords(disk_domain.interior)
    z = disk_domain.coords(target)
    d_before = np.linalg.norm(pts - z, axis=1)
    d_after = np.linalg.norm(disk_domain.coords(table) - z, axis=1)
    in_reach = d_before <= disk_domain.epsilon + 1e-12
    assert np.all(table[in_reach] == target)
    assert np.all(d_after[~in_reach] < d_before[~in_reach] - disk_domain.epsilon / 2)
    far = PullToward(np.array([3.0, 0.0])).move_table(disk_domain)
    assert np.all(disk_domain.coords(far)[:, 0] > pts[:, 0])


# --- estimators against oracles --------------------------------------------

def test_fixture_value_and_tau_against_chain(fixture_domain):
    P = fixture_domain.params
    u = solve_value(fixture_domain, tol=1e-14).field
    value, tau = chain_oracle(fixture_domain, P, GreedyMax(u), GreedyMin(u), 1)
    assert value == pytest.approx(0.8125, abs=1e-14)
    assert tau == pytest.approx(1.25, abs=1e-14)
    m, se = estimate_value_mc(fixture_domain, P, u, 1, 10**5, RngSpec(11))
    assert abs(m - 0.8125) < 4 * se
    mt, set_ = estimate_stopping_time(fixture_domain, P, GreedyMax(u), GreedyMin(u), 1,
                                      10**5, RngSpec(12))
    assert abs(mt - 1.25) < 4 * set_


def test_small_chain_fixed_strategies(chain_domain):
    P = chain_domain.params
    sI, sII = PullToward(np.array([1.0, 0.0])), PullToward(np.array([0.0, -1.0]))
    payoff, tau = absorbing_chain_expectations(chain_domain, P, sI.move_table(chain_domain),
                                               sII.move_table(chain_domain))
    start = chain_domain.index_of([0.0, 0.0])
    row = chain_domain.interior_position()[start]
    res = run_games(chain_domain, P, sI, sII, start, 50000, RngSpec(30))
    m, se = np.mean(res.total_payoff), np.std(res.total_payoff, ddof=1) / np.sqrt(50000)
    assert abs(m - payoff[row]) < 4 * se
    mt, st_ = np.mean(res.tau), np.std(res.tau, ddof=1) / np.sqrt(50000)
    assert abs(mt - tau[row]) < 4 * st_


def test_chain_oracle_greedy_matches_dpp(chain_domain):
    P = chain_domain.params
    u = solve_value(chain_domain, tol=1e-13).field
    payoff, _ = absorbing_chain_expectations(chain_domain, P,
                                             GreedyMax(u).move_table(chain_domain),
                                             GreedyMin(u).move_table(chain_domain))
    assert np.max(np.abs(payoff - u.interior_values())) < 1e-10


def test_constant_payoff_has_zero_spread():
    P = GameParams(4, 2, 0.2)
    d = build_domain(Box((0.0, 0.0), (0.5, 0.5)), P, 0.05, 2.0, 0.0,
                     allow_nonnegative_f=True)
    u = solve_value(d).field
    m, se = estimate_value_mc(d, P, u, d.index_of([0.0, 0.0]), 200, RngSpec(1))
    assert m == 2.0 and se == 0.0


def test_value_mc_requires_enough_games(fixture_domain):
    u = solve_value(fixture_domain).field
    with pytest.raises(ValueError):
        estimate_value_mc(fixture_domain, fixture_domain.params, u, 1, 99, RngSpec(0))


def test_standard_error_scales_with_sqrt_n(disk_domain, disk_value):
    P = disk_domain.params
    start = disk_domain.index_of([0.2, 0.2])
    ratios = []
    for seed in range(3):
        _, se1 = estimate_value_mc(disk_domain, P, disk_value, start, 2000, RngSpec(seed))
        _, se4 = estimate_value_mc(disk_domain, P, disk_value, start, 8000,
                                   RngSpec(seed + 100))
        ratios.append(se4 / se1)
    assert abs(np.mean(ratios) - 0.5) < 0.1


# --- auxiliary walks -------------------------------------------------------

def _dense_walk_oracle(t0, params):
    eps, a = params.epsilon, params.alpha
    ks = [k for k in range(-200, 201) if 0 < t0 + k * eps < 1]
    m = len(ks)
    Q = np.zeros((m, m))
    for i in range(m):
        Q[i, i] = params.beta
        if i > 0:
            Q[i, i - 1] = a / 2
        if i < m - 1:
            Q[i, i + 1] = a / 2
    E = np.linalg.solve(np.eye(m) - Q, np.ones(m))
    return E[ks.index(0)]


@pytest.mark.parametrize("t0,eps", [(0.5, 0.05), (0.3, 0.1), (0.72, 0.05)])
def test_walk_exact_oracle(t0, eps):
    P = GameParams(4, 1, eps)
    assert walk_1d_exact(t0, P) == pytest.approx(_dense_walk_oracle(t0, P), rel=1e-10)


def test_walk_bound_fixture():
    P = GameParams(4, 1, 0.05)
    assert walk_1d_bound(0.5, P) == pytest.approx(2500.0)
    m, se = walk_1d(0.5, P, 10**4, RngSpec(0))
    assert m <= 2500 + 3 * se
    assert abs(m - walk_1d_exact(0.5, P)) < 4 * se


def test_walk_mean_decreases_toward_edge():
    # starting points share the lattice eps * Z, so only the distance to 0 changes
    P = GameParams(4, 1, 0.05)
    t0s = [0.5, 0.3, 0.15, 0.1]
    means = [walk_1d(t0, P, 4000, RngSpec(5, 10**5 * i))[0] for i, t0 in enumerate(t0s)]
    assert means == sorted(means, reverse=True)
    exact = [walk_1d_exact(t0, P) for t0 in t0s]
    assert exact == sorted(exact, reverse=True)


def test_walk_precondition():
    with pytest.raises(ParameterError):
        walk_1d(0.05, GameParams(4, 1, 0.1), 100, RngSpec(0))


def test_cylinder_monotone_in_t():
    P = GameParams(4, 2, 0.05)
    ts = [0.0, 0.2, 0.4]
    out = [cylinder_walk(t, 0.5, P, 4000, RngSpec(6, 10**5 * i)) for i, t in enumerate(ts)]
    p = np.array([o[0] for o in out])
    se = np.array([o[1] for o in out])
    assert np.all(p[1:] >= p[:-1] - 3 * np.hypot(se[1:], se[:-1]))
    assert np.polyfit(np.array(ts) + 0.05, p, 1)[0] >= 0


def test_cylinder_bottom_start_shrinks_with_eps():
    coarse = cylinder_walk(0.0, 0.5, GameParams(4, 2, 0.1), 4000, RngSpec(7))
    fine = cylinder_walk(0.0, 0.5, GameParams(4, 2, 0.05), 4000, RngSpec(8))
    assert fine[0] <= coarse[0] + 3 * coarse[1]


def test_cylinder_preconditions():
    with pytest.raises(ParameterError):
        cylinder_walk(1.5, 0.5, GameParams(4, 2, 0.05), 10, RngSpec(0))
    with pytest.raises(ParameterError):
        cylinder_walk(0.1, 0.04, GameParams(4, 2, 0.05), 10, RngSpec(0))


def test_coin_codes():
    assert [c.name for c in Coin] == ["MAX_WIN", "MIN_WIN", "RANDOM"]
