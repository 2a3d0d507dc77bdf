from .rng import BLOCK, RngSpec, StreamBank
from .strategies import GreedyMax, GreedyMin, PullToward, StandStill, Strategy
from .engine import (BatchResult, Coin, GameTrace, coin_outcome, estimate_stopping_time,
                     estimate_value_mc, mean_and_se, play_game, run_games, simulate_games)
from .chains import absorbing_chain_expectations, chain_oracle, transition_matrix
from .walks import cylinder_walk, walk_1d, walk_1d_bound, walk_1d_exact
