import json
import math

import numpy as np
import pytest

from app.exceptions import IllegalActionError, InvalidParamsError
from app.models import Action, Decision, TxSetKind
from app.services.strategy_service import Strategy, StrategyProfile


class AlwaysTxs2(Strategy):
    """Mines txs2 regardless of the timelock."""

    name = "always-txs2"

    def decide(self, state, round_index, p1_created):
        return Action(state.longest().chain_id, Decision.CONTINUE, TxSetKind.TXS2)


@pytest.fixture
def bribe_and_fork(strategies, bundled_params):
    return strategies.profile(strategies.preset("bribe-and-fork", bundled_params), bundled_params)


def test_winner_frequencies_follow_power(simulation, make_params):
    params = make_params()
    winners = simulation.sample_winners(params, seed=11, trials=1_000, rounds=1_000)
    assert winners.shape == (1_000, 1_000)
    draws = winners.size
    frequencies = np.bincount(winners.ravel(), minlength=3) / draws
    for power, frequency in zip(params.lambdas, frequencies):
        assert abs(frequency - power) <= 4 * math.sqrt(power * (1 - power) / draws)


def test_same_seed_same_winner_stream(simulation, make_params):
    params = make_params()
    first = simulation.sample_winners(params, seed=29, trials=50, rounds=20)
    again = simulation.sample_winners(params, seed=29, trials=50, rounds=20)
    other = simulation.sample_winners(params, seed=30, trials=50, rounds=20)
    assert np.array_equal(first, again)
    assert not np.array_equal(first, other)


def test_trial_streams_are_independent_of_blocking(simulation, make_params):
    params = make_params()
    whole = simulation.sample_winners(params, seed=3, trials=10, rounds=5)
    tail = simulation.sample_winners(params, seed=3, trials=4, rounds=5, first_trial=6)
    assert np.array_equal(whole[6:], tail)


def test_bribe_and_fork_path(simulation, bribe_and_fork, bundled_params):
    trace = simulation.run_game(bribe_and_fork, bundled_params, seed=5)
    kinds = [entry.split("@")[0] for entry in trace.settlement.winning_chain]
    assert kinds == ["TxsP1", "Unrelated", "Unrelated", "Txs2", "TxsP2", "Unrelated"]
    assert trace.settlement.deposit_state.value == "Reclaimed"
    assert len(trace.records) == bundled_params.R


def test_trace_replays(simulation, bribe_and_fork, bundled_params):
    trace = simulation.run_game(bribe_and_fork, bundled_params, seed=9, trial=4)
    assert simulation.replay_trace(trace, bribe_and_fork, bundled_params)


def test_trace_jsonl(simulation, bribe_and_fork, bundled_params):
    lines = simulation.run_game(bribe_and_fork, bundled_params, seed=1).to_jsonl().splitlines()
    records = [json.loads(line) for line in lines]
    assert [r["type"] for r in records] == ["round"] * bundled_params.R + ["settlement"]
    assert records[0]["round"] == 1


def test_same_seed_same_estimate(simulation, strategies, make_params):
    params = make_params()
    profile = strategies.profile(["greedy"] * 3, params)
    first = simulation.estimate_utilities(profile, params, trials=500, seed=21)
    second = simulation.estimate_utilities(profile, params, trials=500, seed=21)
    assert first.mean == second.mean
    assert first.stderr == second.stderr


def test_estimate_independent_of_workers(simulation, bribe_and_fork, bundled_params):
    single = simulation.estimate_utilities(bribe_and_fork, bundled_params, trials=600, seed=13, workers=1)
    pooled = simulation.estimate_utilities(bribe_and_fork, bundled_params, trials=600, seed=13, workers=4)
    assert single.mean == pooled.mean
    assert single.stderr == pooled.stderr
    assert pooled.workers == 4


def test_single_trial_has_no_stderr(simulation, bribe_and_fork, bundled_params):
    estimate = simulation.estimate_utilities(bribe_and_fork, bundled_params, trials=1, seed=2)
    assert estimate.stderr == [0.0, 0.0, 0.0]
    assert not estimate.stderr_defined


def test_zero_trials_rejected(simulation, bribe_and_fork, bundled_params):
    with pytest.raises(InvalidParamsError):
        simulation.estimate_utilities(bribe_and_fork, bundled_params, trials=0, seed=2)


def test_illegal_strategy_detected(simulation, rules, make_params):
    params = make_params()
    profile = StrategyProfile([AlwaysTxs2(i, params, rules) for i in range(3)], params)
    with pytest.raises(IllegalActionError) as excinfo:
        simulation.run_game(profile, params, seed=1)
    assert excinfo.value.round_index == 1


def test_estimate_checks_actions_of_every_player(simulation, strategies, rules, make_params):
    params = make_params()
    players = [strategies.builtin("greedy", i, params) for i in range(2)] + [AlwaysTxs2(2, params, rules)]
    profile = StrategyProfile(players, params)
    with pytest.raises(IllegalActionError) as excinfo:
        simulation.estimate_utilities(profile, params, trials=1, seed=1)
    assert excinfo.value.player == 2
    assert excinfo.value.round_index == 1
    assert profile.memo_entries == 0


@pytest.mark.parametrize("overrides,names", [
    ({"R": 4, "T": 2}, ["greedy", "greedy", "greedy"]),
    ({"lambda": (0.6, 0.4), "R": 3, "T": 1, "f2": 15_050_000}, ["bribe-waiter", "greedy"]),
    (
        {
            "lambda": (0.45, 0.35, 0.2), "R": 4, "T": 2, "f2": 15_210_000, "p1_creator": 0,
            "penalty_P": 320_000_001, "f_bar_p1": 20_000, "f_bar_p2": 20_000,
        },
        ["feather-fork-threatener", "penalty-aware-waiter", "greedy"],
    ),
])
def test_monte_carlo_agrees_with_oracle(simulation, oracle, strategies, make_params, overrides, names):
    params = make_params(**overrides)
    profile = strategies.profile(names, params)
    exact = oracle.exact_utilities(profile, params)
    estimate = simulation.estimate_utilities(profile, params, trials=100_000, seed=17)
    for player in range(params.n):
        assert abs(estimate.mean[player] - exact[player]) <= 3 * estimate.stderr[player] + 1e-3


def test_estimate_leaves_no_decisions_behind(simulation, strategies, make_params):
    params = make_params(R=8, T=2)
    profile = strategies.profile(["greedy"] * 3, params)
    simulation.estimate_utilities(profile, params, trials=2_000, seed=6)
    assert profile.memo_entries == 0


def test_decision_memo_is_bounded(simulation, strategies, make_params):
    params = make_params(R=8, T=2)
    small = StrategyProfile([strategies.builtin("greedy", i, params) for i in range(3)], params, memo_size=4)
    for trial in range(20):
        simulation.run_game(small, params, seed=6, trial=trial)
        assert small.memo_entries <= 4

    large = strategies.profile(["greedy"] * 3, params)
    bounded = simulation.estimate_utilities(small, params, trials=1_000, seed=6)
    unbounded = simulation.estimate_utilities(large, params, trials=1_000, seed=6)
    assert bounded.mean == unbounded.mean


def test_greedy_floor_per_round(simulation, oracle, strategies, make_params):
    # f2 = f1: nothing to wait for, every block pays at least f + B
    params = make_params(R=7, T=2, f2=15_010_000)
    profile = strategies.profile(["greedy"] * 3, params)
    exact = oracle.exact_utilities(profile, params)
    estimate = simulation.estimate_utilities(profile, params, trials=2_000, seed=4)
    for player, power in enumerate(params.lambdas):
        floor = params.R * power * (params.f + params.B)
        assert exact[player] >= floor
        assert estimate.mean[player] >= 0.99 * floor - 4 * estimate.stderr[player]
