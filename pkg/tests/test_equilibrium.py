from fractions import Fraction

import pytest

from app.exceptions import DomainError, InstanceTooLargeError
from app.models import Action, Decision, TxSetKind
from app.services.equilibrium_service import EquilibriumService

U, T1, T2, P1, P2 = (
    TxSetKind.UNRELATED,
    TxSetKind.TXS1,
    TxSetKind.TXS2,
    TxSetKind.TXS_P1,
    TxSetKind.TXS_P2,
)

B = 625_000_000
F = 15_000_000


def profile_of(strategies, params, *names):
    return strategies.profile(list(names), params)


# enumeration


def test_single_round_closed_form(oracle, strategies, make_params):
    params = make_params(**{"lambda": (0.8, 0.2)}, R=1, T=0, f1=F, f2=F)
    profile = profile_of(strategies, params, "greedy", "greedy")
    assert oracle.expected_payoffs(profile, params) == (
        Fraction(4, 5) * (B + F),
        Fraction(1, 5) * (B + F),
    )


def test_two_round_waiters_by_hand(oracle, strategies, make_params):
    f2 = F + 400_000
    params = make_params(**{"lambda": (0.8, 0.2)}, R=2, T=1, f2=f2)
    profile = profile_of(strategies, params, "bribe-waiter", "bribe-waiter")
    # round 1 nothing is open yet, round 2 txs2 has passed its timelock
    expected = Fraction(4, 5) * (B + F) + Fraction(4, 5) * (B + f2)
    assert oracle.expected_payoffs(profile, params)[0] == expected


def test_distribution_sums_to_one_and_conserves_value(oracle, strategies, economics, bundled_params):
    profile = profile_of(strategies, bundled_params, "feather-fork-threatener", "greedy", "bribe-waiter")
    distribution = oracle.outcome_distribution(profile, bundled_params)
    assert sum(distribution.values()) == 1

    expected_total = Fraction(0)
    for state, probability in distribution.items():
        report = economics.settle(state, bundled_params)
        expected_total += probability * (report.block_reward_total + report.deposit_adjustment - report.fee_debits)
    assert sum(oracle.expected_payoffs(profile, bundled_params)) == expected_total


def test_threaded_enumeration_matches(oracle, strategies, bundled_params):
    profile = profile_of(strategies, bundled_params, "feather-fork-threatener", "greedy", "bribe-waiter")
    assert oracle.outcome_distribution(profile, bundled_params, workers=1) == oracle.outcome_distribution(
        profile, bundled_params, workers=3
    )


def test_node_budget(rules, strategies, cost, bundled_params):
    small = EquilibriumService(rules, strategies, cost, node_limit=10)
    profile = profile_of(strategies, bundled_params, "greedy", "greedy", "greedy")
    with pytest.raises(InstanceTooLargeError) as excinfo:
        small.expected_payoffs(profile, bundled_params)
    assert excinfo.value.required == 3 ** 6
    assert excinfo.value.limit == 10


def test_greedy_after_timelock_beats_txs1_first(oracle, strategies, make_params, make_state):
    params = make_params(R=4)
    state = make_state([(U, 0), (U, 1)], 3)
    greedy = profile_of(strategies, params, "greedy", "greedy", "greedy")
    base = oracle.exact_utilities(greedy, params, from_state=state)
    for player in range(params.n):
        deviation = greedy.with_strategy(player, strategies.builtin("mine-txs1-first", player, params))
        assert base[player] > oracle.exact_utilities(deviation, params, from_state=state)[player]


# dominating actions


def test_deposit_chain_prefers_txs2_then_reclaim(oracle, strategies, make_params, make_state):
    params = make_params(f_bar_p2=20_000)
    greedy = profile_of(strategies, params, "greedy", "greedy", "greedy")

    for player in range(params.n):
        report = oracle.dominating_action(make_state([(P1, 0), (U, 1)], 3), 3, player, params, greedy)
        assert report.action == "continue/Txs2@#0"
        assert report.margin > 0

        report = oracle.dominating_action(make_state([(P1, 0), (U, 1), (T2, 2)], 4), 4, player, params, greedy)
        assert report.action == "continue/TxsP2@#0"
        assert report.margin > 0

        state = make_state([(P1, 0), (U, 1), (T2, 2), (P2, 0)], 5)
        report = oracle.dominating_action(state, 5, player, params, greedy)
        assert report.action == "continue/Unrelated@#0"
        assert report.margin == float("inf")


def test_miner_of_txs1_does_not_fork_itself_below_threshold(oracle, strategies, make_params, make_state):
    base = make_params()
    threshold = base.f1 + base.B
    state = make_state([(U, 0), (U, 2), (T1, 1)], 4)

    at = make_params(f2=base.f + threshold)
    waiters = profile_of(strategies, at, "bribe-waiter", "bribe-waiter", "bribe-waiter")
    report = oracle.dominating_action(state, 4, 1, at, waiters)
    assert report.action == "continue/Unrelated@#0"
    assert "fork/Txs2@#0" in report.ties

    above = make_params(f2=base.f + threshold + 1)
    waiters = profile_of(strategies, above, "bribe-waiter", "bribe-waiter", "bribe-waiter")
    report = oracle.dominating_action(state, 4, 1, above, waiters)
    assert report.action == "fork/Txs2@#0"
    assert report.margin == pytest.approx(0.3)


def test_other_miner_forks_only_above_threshold(oracle, strategies, make_params, make_state):
    state = make_state([(U, 2), (T1, 1)], 3)
    # forking pays λ_0(f2 - f) and risks λ_1(f + B): the flip is at λ_1(f + B)/λ_0 = 384 000 000
    threshold = 192_000_000
    flip = 384_000_000

    for gap, expected in [
        (threshold - 1, "continue/Unrelated@#0"),
        (threshold, "continue/Unrelated@#0"),
        (threshold + 1, "continue/Unrelated@#0"),
        (flip, "continue/Unrelated@#0"),
        (flip + 1, "fork/Unrelated@#0"),
    ]:
        params = make_params(f2=F + gap)
        profile = profile_of(strategies, params, "bribe-waiter", "greedy", "bribe-waiter")
        report = oracle.dominating_action(state, 3, 0, params, profile)
        assert report.action == expected, gap
        if gap <= threshold:
            assert report.margin > 0, gap


def test_fork_value_below_threshold_never_beats_continue(oracle, strategies, make_params, make_state):
    state = make_state([(U, 2), (T1, 1)], 3)
    continue_action = Action(0, Decision.CONTINUE, U)
    fork_action = Action(0, Decision.FORK, U)
    for gap in (1_000_000, 96_000_000, 191_999_999, 192_000_000):
        params = make_params(f2=F + gap)
        profile = profile_of(strategies, params, "bribe-waiter", "greedy", "bribe-waiter")
        fork = oracle.action_value(state, 0, fork_action, params, profile)
        stay = oracle.action_value(state, 0, continue_action, params, profile)
        assert fork < stay, gap


def test_small_bribe_leaves_txs1_dominant(oracle, strategies, make_params):
    params = make_params(f2=F + 15_000)
    waiters = profile_of(strategies, params, "bribe-waiter", "bribe-waiter", "bribe-waiter")
    for player in range(params.n):
        report = oracle.dominating_action(oracle.rules.new_state(), 1, player, params, waiters)
        assert report.action == "continue/Txs1@#0"


def test_bribe_above_f1_gap_moves_strongest_first(oracle, strategies, make_params):
    # txs1 - wait = (f1 - f) - λ_i(f2 - f): negative only for λ_0 = 0.5 at f2 - f = 25 000
    params = make_params(f2=F + 25_000)
    waiters = profile_of(strategies, params, "bribe-waiter", "bribe-waiter", "bribe-waiter")
    actions = [
        oracle.dominating_action(oracle.rules.new_state(), 1, player, params, waiters).action
        for player in range(params.n)
    ]
    assert actions == ["continue/Unrelated@#0", "continue/Txs1@#0", "continue/Txs1@#0"]


@pytest.fixture
def deposit_params(make_params):
    return make_params(
        T=3, R=6, p1_creator=0, penalty_P=320_000_001,
        f_bar_p1=20_000, f_bar_p2=20_000, f2=F + 210_000,
    )


def test_deposit_suppresses_txs1(oracle, strategies, deposit_params, make_state):
    profile = profile_of(
        strategies, deposit_params, "feather-fork-threatener", "penalty-aware-waiter", "penalty-aware-waiter"
    )
    for state in (make_state([(P1, 0)], 2), make_state([(P1, 0), (U, 1)], 3)):
        for player in range(deposit_params.n):
            report = oracle.dominating_action(state, state.round, player, deposit_params, profile)
            assert report.txset != "Txs1"
            assert report.decision == "continue"


def test_depositor_forks_txs1(oracle, strategies, deposit_params, make_state):
    profile = profile_of(
        strategies, deposit_params, "feather-fork-threatener", "penalty-aware-waiter", "penalty-aware-waiter"
    )
    report = oracle.dominating_action(make_state([(P1, 0), (T1, 1)], 3), 3, 0, deposit_params, profile)
    assert report.action == "fork/Unrelated@#0"
    assert report.margin > 0


def test_dominating_action_after_last_round(oracle, strategies, make_params, make_state):
    params = make_params()
    profile = profile_of(strategies, params, "greedy", "greedy", "greedy")
    with pytest.raises(DomainError):
        oracle.dominating_action(make_state([], 1), params.R + 1, 0, params, profile)


def test_exact_value_function_keeps_depositor_fork(oracle, strategies, deposit_params, make_state):
    profile = profile_of(
        strategies, deposit_params, "feather-fork-threatener", "penalty-aware-waiter", "penalty-aware-waiter"
    )
    state = make_state([(P1, 0), (T1, 1)], 3)
    proposed = profile.action(0, state)
    kept = strategies.credible_threat_filter(
        0, proposed, state, 3, deposit_params, oracle.oracle_value_fn(profile), True
    )
    assert kept == proposed


# equilibrium


def test_bribe_and_fork_is_equilibrium(oracle, strategies, bundled_params):
    profile = strategies.profile(strategies.preset("bribe-and-fork", bundled_params), bundled_params)
    reports = oracle.nash_check(profile, bundled_params)
    assert [r.is_best_response for r in reports] == [True, True, True]


def test_small_bribe_breaks_equilibrium(oracle, strategies, bundled_params):
    params = bundled_params.updated(f2=bundled_params.f + 20_000)
    profile = strategies.profile(strategies.preset("bribe-and-fork", params), params)
    report = oracle.best_response_check(profile, 0, params)
    assert not report.is_best_response
    assert report.witness_strategy in ("greedy-default", "mine-txs1-first")
    # giving up the deposit saves 40 000 in fees and loses half of the 30 000 extra
    assert report.utility_gap == pytest.approx(25_000)


def test_equilibrium_margin_for_threatener(oracle, strategies, bundled_params):
    profile = strategies.profile(strategies.preset("bribe-and-fork", bundled_params), bundled_params)
    greedy = profile.with_strategy(0, strategies.builtin("greedy", 0, bundled_params))
    gap = oracle.exact_utilities(profile, bundled_params)[0] - oracle.exact_utilities(greedy, bundled_params)[0]
    assert gap == pytest.approx(115_000)


def test_full_space_finds_waiting_for_txs2(oracle, strategies, make_params):
    params = make_params(**{"lambda": (1.0,)}, R=2, T=1)
    greedy = profile_of(strategies, params, "greedy")

    full = oracle.best_response_check(greedy, 0, params, strategy_space="full")
    assert not full.is_best_response
    assert full.witness_strategy == "best-response"
    assert full.utility_gap == pytest.approx(params.f2 - params.f1)

    library = oracle.best_response_check(greedy, 0, params)
    assert library.witness_strategy == "bribe-waiter"
    assert library.utility_gap == pytest.approx(params.f2 - params.f1)


def test_single_round_single_player_greedy_is_optimal(oracle, strategies, make_params):
    params = make_params(**{"lambda": (1.0,)}, R=1, T=0)
    greedy = profile_of(strategies, params, "greedy")
    assert oracle.best_response_check(greedy, 0, params, strategy_space="full").is_best_response


def test_unknown_strategy_space(oracle, strategies, bundled_params):
    profile = strategies.profile(strategies.preset("greedy", bundled_params), bundled_params)
    with pytest.raises(DomainError):
        oracle.best_response_check(profile, 0, bundled_params, strategy_space="mixed")


def test_threatener_utility_rises_with_bribe(oracle, bundled_params, strategies):
    names = strategies.preset("bribe-and-fork", bundled_params)
    f = bundled_params.f
    curve = oracle.utility_curve(names, bundled_params, 0, [f + 50_000, f + 100_000, f + 200_000, f + 300_000])
    assert curve == sorted(curve)
    assert curve[0] < curve[-1]


# hypotheses


def test_bundled_instance_meets_every_hypothesis(oracle, bundled_params):
    report = oracle.theorem_conditions(bundled_params)
    assert report.equilibrium_conditions_hold
    failed = [name for name, check in report.checks.items() if check.passed is False]
    assert failed == []
    assert report.y == pytest.approx(0.015)
    assert report.checks["general_bound"].threshold == pytest.approx(132_744.65, abs=0.01)
    assert report.checks["simplified_bound"].threshold == pytest.approx(90_000)
    assert report.checks["txs1_pressure_factor"].value == pytest.approx(1 - 1.01 * 0.985 ** 3)


def test_per_player_fork_thresholds(oracle, bundled_params):
    report = oracle.theorem_conditions(bundled_params)
    for j, power in enumerate(bundled_params.lambdas):
        check = report.checks[f"fork_threshold_player_{j}"]
        assert check.threshold == pytest.approx(power * (bundled_params.f + bundled_params.B))
        assert check.passed


def test_simplified_bound_of_2022_numbers(oracle, make_params):
    params = make_params(
        **{"lambda": (0.2, 0.18, 0.17, 0.16, 0.15, 0.125, 0.015)}, R=111, T=110, f2=F + 300_000,
    )
    report = oracle.theorem_conditions(params)
    assert report.checks["simplified_bound"].threshold == pytest.approx(210_000)
    assert report.checks["general_bound"].threshold == pytest.approx(210_000, abs=1)


def test_tied_strongest_reported(oracle, make_params):
    report = oracle.theorem_conditions(make_params(**{"lambda": (0.5, 0.5)}))
    assert "STRONGEST_UNIQUE" in report.strict_violations
    assert not report.equilibrium_conditions_hold
    assert report.checks["general_bound"].threshold is not None


def test_small_deposit_fails_penalty_floor(oracle, bundled_params):
    report = oracle.theorem_conditions(bundled_params.updated(penalty_P=320_000_000))
    assert report.checks["penalty_floor"].passed is False
    assert not report.equilibrium_conditions_hold
