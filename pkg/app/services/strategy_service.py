"""Service for player strategies: the built-in library, profiles and the credibility filter."""

import logging
from abc import ABC, abstractmethod
from enum import Enum
from functools import lru_cache
from typing import Callable, Dict, List, Optional, Sequence, Tuple

from app.core.config import get_settings
from app.exceptions import UnknownStrategyError
from app.models import Action, Chain, Decision, GlobalState, TxSetKind
from app.schemas.params import GameParams
from app.services.economics_service import EconomicsService
from app.services.game_rules_service import GameRulesService

logger = logging.getLogger(__name__)

# (player, action, state, p1_created) -> expected utility
ContinuationValueFn = Callable[[int, Action, GlobalState, bool], float]

_WAITER_ORDER = (TxSetKind.TXS_P1, TxSetKind.TXS2, TxSetKind.TXS_P2, TxSetKind.UNRELATED)


class StrategyName(str, Enum):
    GREEDY_DEFAULT = "greedy-default"
    MINE_TXS1_FIRST = "mine-txs1-first"
    BRIBE_WAITER = "bribe-waiter"
    FEATHER_FORK_THREATENER = "feather-fork-threatener"
    PENALTY_AWARE_WAITER = "penalty-aware-waiter"


class Strategy(ABC):
    """Deterministic map from (state, round) to an action, bound to one player."""

    name: str = "strategy"
    creates_deposit: bool = False

    def __init__(self, player: int, params: GameParams, rules: Optional[GameRulesService] = None):
        self.player = player
        self.params = params
        self.rules = rules or GameRulesService()

    @abstractmethod
    def decide(self, state: GlobalState, round_index: int, p1_created: bool) -> Action:
        """Pick an action from Ω(state, round)."""

    def __repr__(self) -> str:
        return f"{type(self).__name__}(player={self.player})"

    # helpers shared by the library

    def _feasible(self, chain: Chain, round_index: int, p1_created: bool):
        return self.rules.feasible_txsets(chain, round_index, self.params, p1_created)

    def _greedy_kind(self, kinds) -> TxSetKind:
        reward = self.rules.economics.reward_of
        return min(kinds, key=lambda k: (-reward(k, self.params), int(k)))

    def _bribe_compatible_chain(self, state: GlobalState) -> Chain:
        """Oldest longest chain without txs1, or the oldest longest chain if every one has it."""
        longest = max(len(c) for c in state.chains)
        candidates = [c for c in state.chains if len(c) == longest and not c.contains(TxSetKind.TXS1)]
        if not candidates:
            return state.longest()
        return min(candidates, key=lambda c: (c.created_round, c.chain_id))

    def _greedy_action(self, state: GlobalState, round_index: int, p1_created: bool) -> Action:
        chain = state.longest()
        kind = self._greedy_kind(self._feasible(chain, round_index, p1_created))
        return Action(chain.chain_id, Decision.CONTINUE, kind)

    def _txs1_first_action(self, state: GlobalState, round_index: int, p1_created: bool) -> Action:
        chain = state.longest()
        if TxSetKind.TXS1 in self._feasible(chain, round_index, p1_created):
            return Action(chain.chain_id, Decision.CONTINUE, TxSetKind.TXS1)
        return self._greedy_action(state, round_index, p1_created)

    def _waiter_action(self, state: GlobalState, round_index: int, p1_created: bool) -> Action:
        chain = self._bribe_compatible_chain(state)
        kinds = self._feasible(chain, round_index, p1_created)
        for kind in _WAITER_ORDER:
            if kind in kinds:
                return Action(chain.chain_id, Decision.CONTINUE, kind)
        return Action(chain.chain_id, Decision.CONTINUE, TxSetKind.UNRELATED)


class GreedyDefault(Strategy):
    """Continue the oldest longest chain with the highest-reward feasible set."""

    name = StrategyName.GREEDY_DEFAULT.value

    def decide(self, state: GlobalState, round_index: int, p1_created: bool) -> Action:
        return self._greedy_action(state, round_index, p1_created)


class MineTxs1First(Strategy):
    name = StrategyName.MINE_TXS1_FIRST.value

    def decide(self, state: GlobalState, round_index: int, p1_created: bool) -> Action:
        return self._txs1_first_action(state, round_index, p1_created)


class BribeWaiter(Strategy):
    """Never mines txs1; mines the deposit in round 1, then txs2 and txs_p2 as soon as they open."""

    name = StrategyName.BRIBE_WAITER.value

    def decide(self, state: GlobalState, round_index: int, p1_created: bool) -> Action:
        return self._waiter_action(state, round_index, p1_created)


class PenaltyAwareWaiter(Strategy):
    """Waits for the bribe while a deposit is on-chain; mines txs1 first otherwise."""

    name = StrategyName.PENALTY_AWARE_WAITER.value

    def decide(self, state: GlobalState, round_index: int, p1_created: bool) -> Action:
        chain = self._bribe_compatible_chain(state)
        if TxSetKind.TXS_P1 in self._feasible(chain, round_index, p1_created):
            return Action(chain.chain_id, Decision.CONTINUE, TxSetKind.TXS_P1)
        if chain.contains(TxSetKind.TXS_P1):
            return self._waiter_action(state, round_index, p1_created)
        return self._txs1_first_action(state, round_index, p1_created)


class FeatherForkThreatener(Strategy):
    """Posts the deposit, waits for the bribe and forks any txs1 block while the deposit is locked."""

    name = StrategyName.FEATHER_FORK_THREATENER.value
    creates_deposit = True

    def decide(self, state: GlobalState, round_index: int, p1_created: bool) -> Action:
        if len(state.chains) == 1:
            chain = state.chains[0]
            if self._should_fork(state, chain):
                kinds = self.rules.fork_txsets(state, chain, self.params, p1_created) - {TxSetKind.TXS1}
                for kind in _WAITER_ORDER:
                    if kind in kinds:
                        return Action(chain.chain_id, Decision.FORK, kind)
        return self._waiter_action(state, round_index, p1_created)

    def _should_fork(self, state: GlobalState, chain: Chain) -> bool:
        if len(chain) == 0 or chain.last.txset is not TxSetKind.TXS1:
            return False
        locked = chain.contains(TxSetKind.TXS_P1) and not chain.contains(TxSetKind.TXS_P2)
        return locked and self.rules.is_fork_legal(state, chain, self.params)


class TabularStrategy(Strategy):
    """Explicit state-to-action table with a fallback strategy for unlisted states."""

    name = "tabular"

    def __init__(self, fallback: Strategy, table: Dict[GlobalState, Action], name: str = "best-response"):
        super().__init__(fallback.player, fallback.params, fallback.rules)
        self.fallback = fallback
        self.table = table
        self.name = name
        self.creates_deposit = fallback.creates_deposit

    def decide(self, state: GlobalState, round_index: int, p1_created: bool) -> Action:
        action = self.table.get(state)
        if action is None:
            return self.fallback.decide(state, round_index, p1_created)
        return action


class CredibleThreatStrategy(Strategy):
    """Wraps a strategy so that only strictly profitable forks survive."""

    def __init__(self, base: Strategy, value_fn: ContinuationValueFn, filter_fn: Callable[..., Action]):
        super().__init__(base.player, base.params, base.rules)
        self.base = base
        self.value_fn = value_fn
        self.filter_fn = filter_fn
        self.name = f"credible({base.name})"
        self.creates_deposit = base.creates_deposit

    def decide(self, state: GlobalState, round_index: int, p1_created: bool) -> Action:
        proposed = self.base.decide(state, round_index, p1_created)
        return self.filter_fn(self.player, proposed, state, round_index, self.params, self.value_fn, p1_created)


_LIBRARY = {
    StrategyName.GREEDY_DEFAULT: GreedyDefault,
    StrategyName.MINE_TXS1_FIRST: MineTxs1First,
    StrategyName.BRIBE_WAITER: BribeWaiter,
    StrategyName.FEATHER_FORK_THREATENER: FeatherForkThreatener,
    StrategyName.PENALTY_AWARE_WAITER: PenaltyAwareWaiter,
}

_ALIASES = {
    "greedydefault": StrategyName.GREEDY_DEFAULT,
    "greedy": StrategyName.GREEDY_DEFAULT,
    "minetxs1first": StrategyName.MINE_TXS1_FIRST,
    "bribewaiter": StrategyName.BRIBE_WAITER,
    "featherforkthreatener": StrategyName.FEATHER_FORK_THREATENER,
    "penaltyawarewaiter": StrategyName.PENALTY_AWARE_WAITER,
}


class StrategyProfile:
    """One strategy per player, plus a bounded memo of their decisions (strategies are pure)."""

    def __init__(
        self,
        strategies: Sequence[Strategy],
        params: GameParams,
        p1_created: Optional[bool] = None,
        memo_size: Optional[int] = None,
    ):
        if len(strategies) != params.n:
            raise UnknownStrategyError(f"Profile has {len(strategies)} strategies for {params.n} players")
        self.strategies: Tuple[Strategy, ...] = tuple(strategies)
        self.params = params
        creator = params.p1_creator
        if p1_created is None:
            p1_created = creator is not None and self.strategies[creator].creates_deposit
        self.p1_created = p1_created
        self.memo_size = memo_size or get_settings().DECISION_CACHE_SIZE
        self._decide = lru_cache(maxsize=self.memo_size)(self._decide_uncached)

    def _decide_uncached(self, player: int, state: GlobalState) -> Action:
        return self.strategies[player].decide(state, state.round, self.p1_created)

    def action(self, player: int, state: GlobalState) -> Action:
        return self._decide(player, state)

    def actions(self, state: GlobalState) -> List[Action]:
        return [self.action(player, state) for player in range(self.params.n)]

    @property
    def memo_entries(self) -> int:
        return self._decide.cache_info().currsize

    def clear_memo(self) -> None:
        self._decide.cache_clear()

    def with_strategy(self, player: int, strategy: Strategy) -> "StrategyProfile":
        strategies = list(self.strategies)
        strategies[player] = strategy
        return StrategyProfile(strategies, self.params, memo_size=self.memo_size)

    @property
    def names(self) -> List[str]:
        return [s.name for s in self.strategies]


class StrategyService:
    """Builds strategies and profiles and filters non-credible fork threats."""

    def __init__(self, rules: Optional[GameRulesService] = None):
        self.rules = rules or GameRulesService()
        self.economics: EconomicsService = self.rules.economics

    def names(self) -> List[str]:
        return [name.value for name in StrategyName]

    def resolve_name(self, name: str) -> StrategyName:
        try:
            return StrategyName(name)
        except ValueError:
            key = name.replace("-", "").replace("_", "").lower()
            if key in _ALIASES:
                return _ALIASES[key]
        raise UnknownStrategyError(f"Unknown strategy '{name}'; choose from {', '.join(self.names())}")

    def builtin(self, name: str, player: int, params: GameParams) -> Strategy:
        """
        Instantiate a library strategy for one player.

        Raises:
            UnknownStrategyError: name is not in the library
        """
        return _LIBRARY[self.resolve_name(name)](player, params, self.rules)

    def library(self, player: int, params: GameParams) -> List[Strategy]:
        return [cls(player, params, self.rules) for cls in _LIBRARY.values()]

    def profile(self, names: Sequence[str], params: GameParams) -> StrategyProfile:
        if len(names) != params.n:
            raise UnknownStrategyError(f"Got {len(names)} strategy names for {params.n} players")
        return StrategyProfile([self.builtin(name, i, params) for i, name in enumerate(names)], params)

    def preset(self, name: str, params: GameParams) -> List[str]:
        """Strategy names for a named profile."""
        if name == "bribe-and-fork":
            threatener = params.p1_creator if params.p1_creator is not None else params.strongest
            return [
                StrategyName.FEATHER_FORK_THREATENER.value if i == threatener
                else StrategyName.PENALTY_AWARE_WAITER.value
                for i in range(params.n)
            ]
        if name in ("greedy", "waiters", "txs1-first"):
            single = {
                "greedy": StrategyName.GREEDY_DEFAULT,
                "waiters": StrategyName.BRIBE_WAITER,
                "txs1-first": StrategyName.MINE_TXS1_FIRST,
            }[name]
            return [single.value] * params.n
        raise UnknownStrategyError(f"Unknown profile preset '{name}'")

    def credible_threat_filter(
        self,
        player: int,
        proposed: Action,
        state: GlobalState,
        round_index: int,
        params: GameParams,
        value_fn: ContinuationValueFn,
        p1_created: bool = True,
    ) -> Action:
        """
        Keep a proposed fork only if it is strictly better than every continue.

        Args:
            player: Deciding player
            proposed: Action the strategy wants to play
            state: Current state
            round_index: Current round
            params: Game parameters
            value_fn: Expected utility of an action for the player
            p1_created: Whether the deposit exists in this game

        Returns:
            The proposed action or the best continue action
        """
        if proposed.decision is not Decision.FORK:
            return proposed
        continues = [
            a for a in self.rules.feasible_actions(state, params, p1_created)
            if a.decision is Decision.CONTINUE
        ]
        reward = self.economics.reward_of
        best = max(
            continues,
            key=lambda a: (value_fn(player, a, state, p1_created), reward(a.txset, params), -int(a.txset)),
        )
        if value_fn(player, proposed, state, p1_created) > value_fn(player, best, state, p1_created):
            return proposed
        logger.debug(f"Dropped non-credible fork {proposed.describe()} of player {player} at {state.describe()}")
        return best

    def lookahead_value_fn(self, params: GameParams) -> ContinuationValueFn:
        """
        One-step lookahead utility: the block's own reward, the fork's race risk
        and the reopened bribe, plus the per-round floor λᵢ(f+B) for the rest of the game.
        """
        reward = self.economics.reward_of
        base_block = params.f + params.B

        def value(player: int, action: Action, state: GlobalState, p1_created: bool) -> float:
            chain = state.chain(action.target_chain_id)
            floor = max(params.R - state.round, 0) * params.lambdas[player] * base_block
            own = float(reward(action.txset, params))
            if action.decision is Decision.CONTINUE:
                locked = chain.contains(TxSetKind.TXS_P1) and not chain.contains(TxSetKind.TXS_P2)
                kills_bribe = chain.contains(TxSetKind.TXS1) or action.txset is TxSetKind.TXS1
                if player == params.p1_creator and locked and kills_bribe:
                    own -= params.penalty_P
                return own + floor
            replaced = chain.last
            own -= params.lambdas[replaced.winner] * base_block
            if replaced.txset is TxSetKind.TXS1:
                own += params.f2 - params.f
            return own + floor

        return value

    def with_credible_threats(self, profile: StrategyProfile, value_fn: Optional[ContinuationValueFn] = None) -> StrategyProfile:
        """Wrap every strategy of a profile in the credibility filter."""
        value_fn = value_fn or self.lookahead_value_fn(profile.params)
        wrapped = [CredibleThreatStrategy(s, value_fn, self.credible_threat_filter) for s in profile.strategies]
        return StrategyProfile(wrapped, profile.params)
