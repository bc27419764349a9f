"""Service for exact game-tree evaluation, best responses and equilibrium hypotheses."""

import logging
import math
from collections import defaultdict
from concurrent.futures import ThreadPoolExecutor
from dataclasses import replace
from decimal import Decimal
from fractions import Fraction
from typing import Dict, List, Optional, Sequence, Tuple

from app.core.config import get_settings
from app.exceptions import DomainError, InstanceTooLargeError
from app.models import Action, Decision, GlobalState, TxSetKind
from app.schemas.oracle import (
    ActionValue,
    BestResponseReport,
    ConditionCheck,
    ConditionReport,
    DominatingActionReport,
)
from app.schemas.params import GameParams
from app.services.attack_cost_service import AttackCostService, exact, lock_weight
from app.services.game_rules_service import GameRulesService
from app.services.strategy_service import (
    ContinuationValueFn,
    StrategyProfile,
    StrategyService,
    TabularStrategy,
)

logger = logging.getLogger(__name__)

Utilities = Tuple[Fraction, ...]
OutcomeDistribution = Dict[GlobalState, Fraction]

EPSILON = 1e-6
STRATEGY_SPACES = ("library", "full")


class EquilibriumService:
    """Exact expected utilities by enumeration of every winner sequence."""

    def __init__(
        self,
        rules: Optional[GameRulesService] = None,
        strategies: Optional[StrategyService] = None,
        cost: Optional[AttackCostService] = None,
        node_limit: Optional[int] = None,
    ):
        self.rules = rules or GameRulesService()
        self.economics = self.rules.economics
        self.strategies = strategies or StrategyService(self.rules)
        self.cost = cost or AttackCostService()
        self.node_limit = node_limit or get_settings().ORACLE_NODE_LIMIT

    # enumeration

    @staticmethod
    def weights(params: GameParams) -> Tuple[Fraction, ...]:
        """Winner probabilities as exact rationals of the decimal λ values."""
        raw = [exact(x) for x in params.lambdas]
        total = sum(raw)
        return tuple(x / total for x in raw)

    def check_budget(self, params: GameParams, from_round: int) -> int:
        """
        Number of winner sequences from a round to the end of the game.

        Raises:
            InstanceTooLargeError: the count exceeds the node budget
        """
        remaining = max(params.R - from_round + 1, 0)
        required = params.n ** remaining
        if required > self.node_limit:
            raise InstanceTooLargeError(required=required, limit=self.node_limit)
        return required

    def _start(self, from_state: Optional[GlobalState], from_round: Optional[int]) -> GlobalState:
        state = from_state if from_state is not None else self.rules.new_state()
        if from_round is not None:
            state = replace(state, round=from_round)
        return state

    def _step(self, state: GlobalState, profile: StrategyProfile, winner: int, params: GameParams) -> GlobalState:
        return self.rules.play_round(state, profile.action(winner, state), winner, params, profile.p1_created)

    def _forward(
        self, start: OutcomeDistribution, profile: StrategyProfile, params: GameParams, weights: Tuple[Fraction, ...]
    ) -> OutcomeDistribution:
        dist = start
        while dist and next(iter(dist)).round <= params.R:
            following: Dict[GlobalState, Fraction] = defaultdict(Fraction)
            for state, probability in dist.items():
                for winner, weight in enumerate(weights):
                    following[self._step(state, profile, winner, params)] += probability * weight
            dist = following
        return dict(dist)

    def outcome_distribution(
        self,
        profile: StrategyProfile,
        params: GameParams,
        from_state: Optional[GlobalState] = None,
        from_round: Optional[int] = None,
        workers: Optional[int] = None,
    ) -> OutcomeDistribution:
        """
        Probability of every terminal state reachable under a deterministic profile.

        Args:
            profile: Strategy profile
            params: Game parameters
            from_state: Subgame start (empty state when omitted)
            from_round: Round of the subgame start (the state's own round when omitted)
            workers: Threads used over first-round winner branches

        Returns:
            Map from terminal state to exact probability
        """
        self.economics.ensure_valid(params)
        start = self._start(from_state, from_round)
        required = self.check_budget(params, start.round)
        weights = self.weights(params)
        workers = max(1, workers or get_settings().FORKGAME_THREADS)

        if start.round > params.R:
            return {start: Fraction(1)}
        if workers == 1:
            dist = self._forward({start: Fraction(1)}, profile, params, weights)
        else:
            branches = [{self._step(start, profile, w, params): weights[w]} for w in range(params.n)]
            with ThreadPoolExecutor(max_workers=workers) as pool:
                parts = list(pool.map(lambda b: self._forward(b, profile, params, weights), branches))
            dist = defaultdict(Fraction)
            for part in parts:
                for state, probability in part.items():
                    dist[state] += probability
            dist = dict(dist)
        logger.info(f"Enumerated {required} winner sequences into {len(dist)} terminal states")
        return dist

    def _value(
        self,
        state: GlobalState,
        profile: StrategyProfile,
        params: GameParams,
        weights: Tuple[Fraction, ...],
        memo: Dict[GlobalState, Utilities],
    ) -> Utilities:
        cached = memo.get(state)
        if cached is not None:
            return cached
        if state.round > params.R:
            result = tuple(Fraction(x) for x in self.economics.payoffs(state, params))
        else:
            totals = [Fraction(0)] * params.n
            for winner, weight in enumerate(weights):
                child = self._value(self._step(state, profile, winner, params), profile, params, weights, memo)
                for i in range(params.n):
                    totals[i] += weight * child[i]
            result = tuple(totals)
        memo[state] = result
        return result

    def expected_payoffs(
        self,
        profile: StrategyProfile,
        params: GameParams,
        from_state: Optional[GlobalState] = None,
        from_round: Optional[int] = None,
    ) -> Utilities:
        """Exact per-player expected utility as rationals."""
        self.economics.ensure_valid(params)
        start = self._start(from_state, from_round)
        self.check_budget(params, start.round)
        return self._value(start, profile, params, self.weights(params), {})

    def exact_utilities(
        self,
        profile: StrategyProfile,
        params: GameParams,
        from_state: Optional[GlobalState] = None,
        from_round: Optional[int] = None,
    ) -> List[float]:
        return [float(x) for x in self.expected_payoffs(profile, params, from_state, from_round)]

    # subgame queries

    def action_value(
        self,
        state: GlobalState,
        player: int,
        action: Action,
        params: GameParams,
        profile: StrategyProfile,
        memo: Optional[Dict[GlobalState, Utilities]] = None,
    ) -> Fraction:
        """
        Utility of playing one action in this round and following the profile afterwards.

        Opponents play their profile action this round; whoever wins applies theirs.
        """
        memo = {} if memo is None else memo
        weights = self.weights(params)
        total = Fraction(0)
        for winner, weight in enumerate(weights):
            chosen = action if winner == player else profile.action(winner, state)
            following = self.rules.play_round(state, chosen, winner, params, profile.p1_created)
            total += weight * self._value(following, profile, params, weights, memo)[player]
        return total

    def _tie_break_key(self, action: Action, params: GameParams) -> tuple:
        return (
            action.decision is Decision.FORK,
            -self.economics.reward_of(action.txset, params),
            int(action.txset),
            action.target_chain_id,
        )

    def dominating_action(
        self,
        state: GlobalState,
        round_index: Optional[int],
        player: int,
        params: GameParams,
        profile: StrategyProfile,
        epsilon: float = EPSILON,
    ) -> DominatingActionReport:
        """
        Feasible action maximizing the player's utility under one-shot substitution.

        Near-equal actions (within epsilon) are reported as ties and resolved
        Continue before Fork, then higher reward, then lower kind ordinal.

        Raises:
            InstanceTooLargeError: the subgame exceeds the node budget
        """
        self.economics.ensure_valid(params)
        state = self._start(state, round_index)
        if state.round > params.R:
            raise DomainError(f"Round {state.round} is past the end of the game (R={params.R})")
        self.check_budget(params, state.round)

        memo: Dict[GlobalState, Utilities] = {}
        actions = self.rules.feasible_actions(state, params, profile.p1_created)
        values = {a: self.action_value(state, player, a, params, profile, memo) for a in actions}
        best_value = max(values.values())
        tolerance = exact(epsilon)
        tied = [a for a in actions if best_value - values[a] <= tolerance]
        chosen = min(tied, key=lambda a: self._tie_break_key(a, params))
        others = [values[a] for a in actions if a != chosen]
        margin = float(values[chosen] - max(others)) if others else math.inf

        return DominatingActionReport(
            action=chosen.describe(),
            decision=chosen.decision.value,
            txset=chosen.txset.label,
            target_chain_id=chosen.target_chain_id,
            margin=margin,
            ties=[a.describe() for a in tied if a != chosen],
            values=[ActionValue(action=a.describe(), utility=float(values[a])) for a in actions],
        )

    def oracle_value_fn(self, profile: StrategyProfile) -> ContinuationValueFn:
        """Exact value function for the credibility filter; the profile must be the unwrapped one."""
        params = profile.params

        def value(player: int, action: Action, state: GlobalState, p1_created: bool) -> float:
            return float(self.action_value(state, player, action, params, profile))

        return value

    # equilibrium checks

    def _best_response_value(
        self,
        player: int,
        profile: StrategyProfile,
        params: GameParams,
        weights: Tuple[Fraction, ...],
    ) -> Tuple[Fraction, Dict[GlobalState, Action]]:
        """Backward induction over the player's own actions with opponents fixed."""
        memo: Dict[GlobalState, Fraction] = {}
        table: Dict[GlobalState, Action] = {}

        def solve(state: GlobalState) -> Fraction:
            cached = memo.get(state)
            if cached is not None:
                return cached
            if state.round > params.R:
                result = Fraction(self.economics.payoffs(state, params)[player])
            else:
                result = Fraction(0)
                for winner, weight in enumerate(weights):
                    if winner != player:
                        result += weight * solve(self._step(state, profile, winner, params))
                default = profile.action(player, state)
                best_action, best = default, None
                for action in self.rules.feasible_actions(state, params, profile.p1_created):
                    following = self.rules.play_round(state, action, player, params, profile.p1_created)
                    value = solve(following)
                    if best is None or value > best or (value == best and action == default):
                        best_action, best = action, value
                table[state] = best_action
                result += weights[player] * best
            memo[state] = result
            return result

        return solve(self.rules.new_state()), table

    def best_response_check(
        self,
        profile: StrategyProfile,
        player: int,
        params: GameParams,
        strategy_space: str = "library",
        epsilon: float = EPSILON,
    ) -> BestResponseReport:
        """
        Whether the player's strategy is a best response to the rest of the profile.

        Args:
            profile: Strategy profile under test
            player: Player index
            params: Game parameters
            strategy_space: "library" (built-in deviations) or "full" (every deterministic strategy)
            epsilon: Strictness tolerance in satoshi

        Returns:
            BestResponseReport with the most profitable deviation found
        """
        if strategy_space not in STRATEGY_SPACES:
            raise DomainError(f"Unknown strategy space '{strategy_space}'")
        if not 0 <= player < params.n:
            raise DomainError(f"Player {player} is not in the game")
        self.economics.ensure_valid(params)
        self.check_budget(params, 1)

        weights = self.weights(params)
        tolerance = exact(epsilon)
        current = profile.strategies[player]
        base = self._value(self.rules.new_state(), profile, params, weights, {})[player]
        best, witness = base, None

        if strategy_space == "library":
            for candidate in self.strategies.library(player, params):
                deviation = profile.with_strategy(player, candidate)
                value = self._value(self.rules.new_state(), deviation, params, weights, {})[player]
                if value > best + tolerance:
                    best, witness = value, candidate
        else:
            options = [profile.p1_created]
            if params.p1_creator == player:
                options = [False, True]
            for created in options:
                fixed = StrategyProfile(profile.strategies, params, p1_created=created)
                value, table = self._best_response_value(player, fixed, params, weights)
                if value > best + tolerance:
                    candidate = TabularStrategy(current, table)
                    candidate.creates_deposit = created
                    best, witness = value, candidate

        report = BestResponseReport(
            player=player,
            strategy=current.name,
            is_best_response=witness is None,
            utility=float(base),
            strategy_space=strategy_space,
        )
        if witness is not None:
            report.witness_strategy = witness.name
            report.witness_utility = float(best)
            report.utility_gap = float(best - base)
            logger.info(f"Player {player} improves by {report.utility_gap} with {witness.name}")
        return report

    def nash_check(
        self, profile: StrategyProfile, params: GameParams, strategy_space: str = "library"
    ) -> List[BestResponseReport]:
        """Best-response report for every player."""
        return [self.best_response_check(profile, i, params, strategy_space) for i in range(params.n)]

    def utility_curve(
        self, names: Sequence[str], params: GameParams, player: int, f2_values: Sequence[int]
    ) -> List[float]:
        """The player's exact utility as the bribe-carrying fee total f2 varies."""
        curve = []
        for f2 in f2_values:
            varied = params.updated(f2=f2)
            curve.append(self.exact_utilities(self.strategies.profile(names, varied), varied)[player])
        return curve

    # hypotheses of the bribe and fork results

    def theorem_conditions(self, params: GameParams) -> ConditionReport:
        """
        Evaluate every hypothesis of the bribe and fork results for one parameter set.

        Fee predicates are compared in exact arithmetic; reported values are floats.
        """
        checks: Dict[str, ConditionCheck] = {}

        def add(name: str, passed: Optional[bool], value=None, threshold=None, detail: str = "") -> None:
            checks[name] = ConditionCheck(
                name=name,
                value=None if value is None else float(value),
                threshold=None if threshold is None else float(threshold),
                passed=passed,
                detail=detail,
            )

        lam = [exact(x) for x in params.lambdas]
        lam_s = lam[params.strongest]
        f, f1, B, T = params.f, params.f1, params.B, params.T
        gap = params.f2 - f
        rewards = self.economics.reward_table(params)

        add(
            "reward_ordering",
            rewards[TxSetKind.TXS2] > rewards[TxSetKind.TXS1] > rewards[TxSetKind.UNRELATED]
            and rewards[TxSetKind.TXS_P2] > rewards[TxSetKind.UNRELATED],
            detail="reward(Txs2) > reward(Txs1) > reward(Unrelated) and reward(TxsP2) > reward(Unrelated)",
        )
        add("self_fork_threshold", gap < f1 + B, gap, f1 + B, "f2 - f < f1 + B")
        for j, lam_j in enumerate(lam):
            add(
                f"fork_threshold_player_{j}",
                gap < lam_j * (f + B),
                gap,
                lam_j * (f + B),
                f"f2 - f < λ_{j}(f + B)",
            )

        add("fee_gap_small", 100 * gap < f + B, gap, Fraction(f + B, 100), "f2 - f < (f + B)/100")
        add("f1_above_f", f1 > f, f1, f, "f1 > f")
        y = sum((x for x in lam if x > Fraction(1, 100) and gap * x < f1 - f), Fraction(0))
        factor = 1 - Fraction(101, 100) * (1 - y) ** T
        add("unreached_power", None, y, detail="total power of miners with λ > 1% whom the bribe does not reach")
        add("txs1_pressure_factor", factor > 0, factor, 0, "1 - 1.01(1 - Y)^T > 0")

        add(
            "bribe_above_strongest",
            gap * lam_s > f1 - f,
            gap,
            Fraction(f1 - f) / lam_s,
            "f2 - f > (f1 - f)/λ_s",
        )
        ratio = Fraction(f + B, f1 + B) if f1 + B else Fraction(0)
        add("reward_ratio", ratio > 1 - lam_s ** 2, ratio, 1 - lam_s ** 2, "(f + B)/(f1 + B) > 1 - λ_s²")
        add(
            "penalty_floor",
            params.penalty_P > lam_s * (f + B),
            params.penalty_P,
            lam_s * (f + B),
            "P > λ_s(f + B)",
        )

        weight = lock_weight(T)
        try:
            general = self.cost.bf_bribe_bound_general_raw(
                params.f_bar, f1, f, params.lambda_s, T,
                params.c_p1, params.c_p2, params.f_bar_p1, params.f_bar_p2,
            )
            add("general_bound", Decimal(gap) > general, gap, general, "general bribe bound")
        except DomainError as e:
            add("general_bound", False, gap, None, e.message)
        simplified = Fraction(2 * params.f_bar + 2 * (f1 - f)) / lam_s + params.f_bar
        add("simplified_bound", gap > simplified, gap, simplified, "(2f̄ + 2(f1 - f))/λ_s + f̄")
        add("fp2_above_f", params.f_p2 > f, params.f_p2, f, "f_p2 > f")
        add(
            "lambda_min_floor",
            Decimal(str(params.lambda_min)) > weight,
            params.lambda_min,
            weight,
            "λ_min > 0.05^(T/2)",
        )
        window = [
            j for j, x in enumerate(lam)
            if Fraction(1, 100) < x < Fraction(2, 100) and gap * x < f1 - f
        ]
        add(
            "feasibility_window",
            bool(window),
            detail=f"miners with 1% < λ < 2% still preferring txs1: {window}",
        )

        issues = self.economics.distribution_issues(params.lambdas)
        add("strict_distribution", not issues, detail="; ".join(m for _, m in issues))

        required = (
            "general_bound", "fp2_above_f", "lambda_min_floor", "f1_above_f",
            "fee_gap_small", "txs1_pressure_factor", "reward_ratio", "penalty_floor", "strict_distribution",
        )
        return ConditionReport(
            checks=checks,
            y=float(y),
            equilibrium_conditions_hold=all(checks[name].passed for name in required),
            strict_violations=[code for code, _ in issues],
        )
