import pytest

from app.exceptions import UnknownStrategyError
from app.models import Action, Decision, TxSetKind
from app.services.strategy_service import (
    BribeWaiter,
    FeatherForkThreatener,
    GreedyDefault,
    MineTxs1First,
    PenaltyAwareWaiter,
    StrategyName,
)

U, T1, T2, P1, P2 = (
    TxSetKind.UNRELATED,
    TxSetKind.TXS1,
    TxSetKind.TXS2,
    TxSetKind.TXS_P1,
    TxSetKind.TXS_P2,
)


@pytest.fixture
def deposit_params(make_params):
    """Deposit instance: the strongest miner threatens, penalty above λ_s(f+B)."""
    return make_params(
        T=3, R=6, p1_creator=0, penalty_P=320_000_001,
        f_bar_p1=20_000, f_bar_p2=20_000, f2=15_000_000 + 210_000,
    )


def test_greedy_takes_highest_reward(rules, make_params):
    params = make_params()
    action = GreedyDefault(0, params, rules).decide(rules.new_state(), 1, True)
    assert action == Action(0, Decision.CONTINUE, T1)


def test_greedy_prefers_txs2_once_open(rules, make_params, make_state):
    params = make_params()
    state = make_state([(U, 0), (U, 1)], 3)
    assert GreedyDefault(1, params, rules).decide(state, 3, False).txset is T2


def test_mine_txs1_first(rules, make_params, make_state):
    params = make_params()
    state = make_state([(U, 0), (U, 1)], 3)
    assert MineTxs1First(0, params, rules).decide(state, 3, False).txset is T1


def test_bribe_waiter_sequence(rules, make_params, make_state):
    params = make_params()
    waiter = BribeWaiter(2, params, rules)
    assert waiter.decide(rules.new_state(), 1, True).txset is P1
    assert waiter.decide(rules.new_state(), 1, False).txset is U
    assert waiter.decide(make_state([(P1, 0)], 2), 2, True).txset is U
    assert waiter.decide(make_state([(P1, 0), (U, 1)], 3), 3, True).txset is T2
    assert waiter.decide(make_state([(P1, 0), (U, 1), (T2, 2)], 4), 4, True).txset is P2


def test_waiter_follows_chain_without_txs1(rules, make_params, make_state):
    params = make_params()
    state = make_state([(U, 0), (U, 2), (T1, 1)], 4)
    forked = rules.play_round(state, Action(0, Decision.FORK, T2), 0, params, False)
    action = BribeWaiter(1, params, rules).decide(forked, 5, False)
    assert action.target_chain_id == 1


def test_threatener_posts_deposit_and_forks_txs1(rules, deposit_params, make_state):
    threatener = FeatherForkThreatener(0, deposit_params, rules)
    assert threatener.creates_deposit
    assert threatener.decide(rules.new_state(), 1, True).txset is P1

    state = make_state([(P1, 0), (T1, 1)], 3)
    assert threatener.decide(state, 3, True) == Action(0, Decision.FORK, U)


def test_threatener_does_not_fork_without_deposit(rules, deposit_params, make_state):
    state = make_state([(U, 0), (T1, 1)], 3)
    action = FeatherForkThreatener(0, deposit_params, rules).decide(state, 3, False)
    assert action.decision is Decision.CONTINUE


def test_penalty_aware_waiter(rules, deposit_params, make_state):
    waiter = PenaltyAwareWaiter(1, deposit_params, rules)
    assert waiter.decide(rules.new_state(), 1, True).txset is P1
    assert waiter.decide(make_state([(P1, 0)], 2), 2, True).txset is U
    assert waiter.decide(rules.new_state(), 1, False).txset is T1
    assert waiter.decide(make_state([(U, 0)], 2), 2, False).txset is T1


def test_resolve_names_and_aliases(strategies):
    assert strategies.resolve_name("greedy") is StrategyName.GREEDY_DEFAULT
    assert strategies.resolve_name("PenaltyAwareWaiter") is StrategyName.PENALTY_AWARE_WAITER
    assert strategies.resolve_name("bribe_waiter") is StrategyName.BRIBE_WAITER
    with pytest.raises(UnknownStrategyError):
        strategies.resolve_name("selfish-miner")


def test_bribe_and_fork_preset(strategies, bundled_params):
    names = strategies.preset("bribe-and-fork", bundled_params)
    assert names == ["feather-fork-threatener", "penalty-aware-waiter", "penalty-aware-waiter"]
    profile = strategies.profile(names, bundled_params)
    assert profile.p1_created


def test_deposit_only_when_creator_threatens(strategies, bundled_params):
    names = ["penalty-aware-waiter", "feather-fork-threatener", "penalty-aware-waiter"]
    assert not strategies.profile(names, bundled_params).p1_created


def test_profile_size_must_match(strategies, bundled_params):
    with pytest.raises(UnknownStrategyError):
        strategies.profile(["greedy"], bundled_params)
    with pytest.raises(UnknownStrategyError):
        strategies.preset("everyone-forks", bundled_params)


def test_credible_filter_drops_unprofitable_fork(strategies, make_params, make_state):
    params = make_params()
    state = make_state([(U, 0), (T1, 1)], 3)
    fork = Action(0, Decision.FORK, U)

    def fork_loses(player, action, at_state, p1_created):
        return 0.0 if action.decision is Decision.FORK else 1.0

    def fork_wins(player, action, at_state, p1_created):
        return 2.0 if action.decision is Decision.FORK else 1.0

    kept = strategies.credible_threat_filter(2, fork, state, 3, params, fork_wins, False)
    dropped = strategies.credible_threat_filter(2, fork, state, 3, params, fork_loses, False)
    assert kept == fork
    assert dropped == Action(0, Decision.CONTINUE, U)


def test_lookahead_keeps_deposit_backed_fork(strategies, rules, deposit_params, make_state):
    state = make_state([(P1, 0), (T1, 1)], 3)
    value = strategies.lookahead_value_fn(deposit_params)
    fork = Action(0, Decision.FORK, U)
    assert strategies.credible_threat_filter(0, fork, state, 3, deposit_params, value, True) == fork


def test_lookahead_drops_fork_below_block_loss(strategies, make_params, make_state):
    # f2 - f = 5 000 cannot pay for the risk of orphaning a 640M block
    params = make_params(f1=15_000_000 + 1_000, f2=15_000_000 + 5_000)
    state = make_state([(U, 0), (T1, 1)], 3)
    value = strategies.lookahead_value_fn(params)
    fork = Action(0, Decision.FORK, U)
    result = strategies.credible_threat_filter(2, fork, state, 3, params, value, False)
    assert result.decision is Decision.CONTINUE


def test_with_credible_threats_wraps_every_player(strategies, bundled_params):
    profile = strategies.profile(strategies.preset("bribe-and-fork", bundled_params), bundled_params)
    wrapped = strategies.with_credible_threats(profile)
    assert wrapped.names[0] == "credible(feather-fork-threatener)"
    assert wrapped.p1_created
