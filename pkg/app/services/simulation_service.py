"""Service for Monte Carlo play of the mining game."""

import hashlib
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from functools import lru_cache
from typing import List, Optional, Tuple

import numpy as np

from app.core.config import get_settings
from app.exceptions import IllegalActionError, InvalidParamsError
from app.models import Action, GlobalState
from app.schemas.params import GameParams
from app.schemas.simulation import GameTrace, RoundRecord, UtilityEstimate
from app.services.economics_service import EconomicsService
from app.services.game_rules_service import GameRulesService
from app.services.strategy_service import StrategyProfile

logger = logging.getLogger(__name__)

_TRIAL_WORD = 3  # trial index lives in the top word of the 256-bit Philox counter


class SimulationService:
    """Runs games round by round and estimates expected utilities."""

    def __init__(self, rules: Optional[GameRulesService] = None):
        self.rules = rules or GameRulesService()
        self.economics: EconomicsService = self.rules.economics

    def trial_uniforms(self, seed: int, trial: int, rounds: int) -> np.ndarray:
        """Uniform draws of one trial from a counter-based stream keyed by the seed."""
        counter = np.zeros(4, dtype=np.uint64)
        counter[_TRIAL_WORD] = trial
        generator = np.random.Generator(np.random.Philox(key=seed % (1 << 128), counter=counter))
        return generator.random(rounds)

    def sample_winners(
        self, params: GameParams, seed: int, trials: int, rounds: int, first_trial: int = 0
    ) -> np.ndarray:
        """
        Winner of every round of a block of trials, by inverse CDF over λ.

        Args:
            params: Game parameters (λ)
            seed: Run seed
            trials: Number of trials in the block
            rounds: Rounds per trial
            first_trial: Index of the first trial of the block

        Returns:
            Integer array of shape (trials, rounds)
        """
        cdf = np.cumsum(np.asarray(params.lambdas, dtype=np.float64))
        cdf[-1] = 1.0
        uniforms = np.empty((trials, rounds), dtype=np.float64)
        for k in range(trials):
            uniforms[k] = self.trial_uniforms(seed, first_trial + k, rounds)
        winners = np.searchsorted(cdf, uniforms, side="right")
        return np.minimum(winners, params.n - 1)

    @staticmethod
    def state_hash(state: GlobalState) -> str:
        return hashlib.sha256(state.describe().encode()).hexdigest()[:16]

    def checked_actions(self, profile: StrategyProfile, state: GlobalState, params: GameParams) -> Tuple[Action, ...]:
        """
        Every player's action at a state, winners or not.

        Raises:
            IllegalActionError: a player's strategy returned an action outside Ω
        """
        actions = profile.actions(state)
        for player, action in enumerate(actions):
            if not self.rules.is_feasible(state, action, params, profile.p1_created):
                raise IllegalActionError(
                    f"Strategy {profile.strategies[player].name} chose {action.describe()}",
                    player=player,
                    round_index=state.round,
                )
        return tuple(actions)

    def run_game(self, profile: StrategyProfile, params: GameParams, seed: int, trial: int = 0) -> GameTrace:
        """Play one full game and record every round."""
        self.economics.ensure_valid(params)
        winners = self.sample_winners(params, seed, 1, params.R, first_trial=trial)[0].tolist()
        state = self.rules.new_state()
        records: List[RoundRecord] = []

        for round_index in range(1, params.R + 1):
            actions = self.checked_actions(profile, state, params)
            winner = int(winners[round_index - 1])
            records.append(RoundRecord(
                round=round_index,
                state_hash=self.state_hash(state),
                actions=[a.describe() for a in actions],
                winner=winner,
                applied=actions[winner].describe(),
            ))
            state = self.rules.play_round(state, actions[winner], winner, params, profile.p1_created)
            logger.debug(f"Round {round_index}: player {winner} played {actions[winner].describe()}")

        return GameTrace(
            seed=seed,
            trial=trial,
            strategies=profile.names,
            records=records,
            settlement=self.economics.settle(state, params),
        )

    def replay_trace(self, trace: GameTrace, profile: StrategyProfile, params: GameParams) -> bool:
        """Re-run a traced game and compare it record by record."""
        return self.run_game(profile, params, trace.seed, trace.trial) == trace

    def estimate_utilities(
        self,
        profile: StrategyProfile,
        params: GameParams,
        trials: int,
        seed: int,
        workers: Optional[int] = None,
    ) -> UtilityEstimate:
        """
        Mean and standard error of every player's settled reward.

        Trials are split into contiguous blocks run on a thread pool; results are
        gathered in trial order, so the estimate does not depend on the worker count.
        Actions of all players are checked the first time a state is reached. The
        state caches hold at most `profile.memo_size` entries each and the profile's
        decision memo is cleared on return.
        """
        if trials < 1:
            raise InvalidParamsError(f"trials must be at least 1, got {trials}")
        self.economics.ensure_valid(params)
        workers = max(1, workers or get_settings().FORKGAME_THREADS)
        start = self.rules.new_state()

        @lru_cache(maxsize=profile.memo_size)
        def actions_at(state: GlobalState) -> Tuple[Action, ...]:
            return self.checked_actions(profile, state, params)

        @lru_cache(maxsize=profile.memo_size)
        def advance(state: GlobalState, winner: int) -> GlobalState:
            return self.rules.play_round(state, actions_at(state)[winner], winner, params, profile.p1_created)

        @lru_cache(maxsize=profile.memo_size)
        def payoff_of(state: GlobalState) -> Tuple[int, ...]:
            return self.economics.payoffs(state, params)

        def run_block(bounds: Tuple[int, int]) -> np.ndarray:
            first, stop = bounds
            winners = self.sample_winners(params, seed, stop - first, params.R, first_trial=first)
            out = np.empty((stop - first, params.n), dtype=np.float64)
            for k, row in enumerate(winners.tolist()):
                state = start
                for winner in row:
                    state = advance(state, winner)
                out[k] = payoff_of(state)
            return out

        block = max(1, math.ceil(trials / (workers * 4)))
        blocks = [(first, min(first + block, trials)) for first in range(0, trials, block)]
        logger.info(f"Estimating utilities: {trials} trials, {workers} workers, seed {seed}")
        try:
            if workers == 1:
                results = [run_block(b) for b in blocks]
            else:
                with ThreadPoolExecutor(max_workers=workers) as pool:
                    results = list(pool.map(run_block, blocks))
        finally:
            profile.clear_memo()

        samples = np.concatenate(results, axis=0)
        mean = samples.mean(axis=0)
        if trials > 1:
            stderr = samples.std(axis=0, ddof=1) / math.sqrt(trials)
        else:
            stderr = np.zeros(params.n)
        return UtilityEstimate(
            mean=mean.tolist(),
            stderr=stderr.tolist(),
            trials=trials,
            stderr_defined=trials > 1,
            seed=seed,
            workers=workers,
        )
