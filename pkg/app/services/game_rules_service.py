"""Service for the legal-move rules of the mining game."""

from dataclasses import replace
from typing import FrozenSet, List, Optional

from app.exceptions import EmptyChainError, IllegalActionError
from app.models import Action, Block, Chain, Decision, GlobalState, TxSetKind
from app.schemas.params import GameParams
from app.services.economics_service import EconomicsService


class GameRulesService:
    """Feasibility, continue/fork semantics, the abandon rule and chain selection."""

    def __init__(self, economics: Optional[EconomicsService] = None):
        self.economics = economics or EconomicsService()

    def new_state(self) -> GlobalState:
        return GlobalState(chains=(Chain(blocks=(), created_round=0, chain_id=0),), round=1, next_chain_id=1)

    def feasible_txsets(
        self, chain: Chain, round_index: int, params: GameParams, p1_created: bool
    ) -> FrozenSet[TxSetKind]:
        """
        Transaction sets that may be mined on top of a chain.

        Args:
            chain: Chain to extend
            round_index: Current round (1-based)
            params: Game parameters
            p1_created: Whether the deposit transaction exists in this game

        Returns:
            Set of feasible kinds (Unrelated is always present)
        """
        kinds = {TxSetKind.UNRELATED}
        revocation_spent = chain.contains(TxSetKind.TXS1) or chain.contains(TxSetKind.TXS2)
        if not revocation_spent:
            kinds.add(TxSetKind.TXS1)
            if len(chain) >= params.T:
                kinds.add(TxSetKind.TXS2)
        if p1_created and round_index == 1 and len(chain) == 0:
            kinds.add(TxSetKind.TXS_P1)
        # tx_p2 spends the tx_p1 deposit and the bribe's dummy output
        if (
            chain.contains(TxSetKind.TXS2)
            and chain.contains(TxSetKind.TXS_P1)
            and not chain.contains(TxSetKind.TXS_P2)
        ):
            kinds.add(TxSetKind.TXS_P2)
        return frozenset(kinds)

    def is_fork_legal(self, state: GlobalState, chain: Chain, params: GameParams) -> bool:
        """
        Whether the last block of a chain may be forked away.

        Only blocks that stand in the way of a strictly better block are forked,
        and only while no other fork is pending.
        """
        if len(chain) == 0:
            raise EmptyChainError("Chains of length 0 cannot be forked")
        if len(state.chains) > 1:
            return False
        reward = self.economics.reward_of
        last = chain.last.txset
        if last is TxSetKind.TXS1:
            return reward(TxSetKind.TXS2, params) > reward(TxSetKind.TXS1, params)
        if last is TxSetKind.TXS_P1:
            return reward(TxSetKind.TXS1, params) > reward(TxSetKind.TXS_P1, params)
        return False

    def fork_txsets(self, state: GlobalState, chain: Chain, params: GameParams, p1_created: bool) -> FrozenSet[TxSetKind]:
        """Kinds that may replace the last block of a chain (empty when the fork is illegal)."""
        if len(chain) == 0 or not self.is_fork_legal(state, chain, params):
            return frozenset()
        return self.feasible_txsets(chain.prefix(), state.round, params, p1_created)

    def feasible_actions(self, state: GlobalState, params: GameParams, p1_created: bool) -> List[Action]:
        """Ω(state, round): every continue and fork a player may choose, in a fixed order."""
        actions = []
        for chain in state.chains:
            for kind in sorted(self.feasible_txsets(chain, state.round, params, p1_created)):
                actions.append(Action(chain.chain_id, Decision.CONTINUE, kind))
        for chain in state.chains:
            for kind in sorted(self.fork_txsets(state, chain, params, p1_created)):
                actions.append(Action(chain.chain_id, Decision.FORK, kind))
        return actions

    def is_feasible(self, state: GlobalState, action: Action, params: GameParams, p1_created: bool) -> bool:
        chain = state.chain(action.target_chain_id)
        if chain is None:
            return False
        if action.decision is Decision.CONTINUE:
            return action.txset in self.feasible_txsets(chain, state.round, params, p1_created)
        return action.txset in self.fork_txsets(state, chain, params, p1_created)

    def apply_action(
        self, state: GlobalState, action: Action, winner: int, params: GameParams, p1_created: bool
    ) -> GlobalState:
        """
        Apply the winner's action. The round counter is left to the caller.

        Raises:
            IllegalActionError: action outside Ω(state, round) or unknown winner
        """
        if not 0 <= winner < params.n:
            raise IllegalActionError(f"Winner {winner} is not a player", player=winner, round_index=state.round)
        chain = state.chain(action.target_chain_id)
        if chain is None:
            raise IllegalActionError(
                f"No chain #{action.target_chain_id} in state", player=winner, round_index=state.round
            )
        if action.decision is Decision.FORK and len(chain) == 0:
            raise IllegalActionError("Fork requested on an empty chain", player=winner, round_index=state.round)
        if not self.is_feasible(state, action, params, p1_created):
            raise IllegalActionError(f"Infeasible action {action.describe()}", player=winner, round_index=state.round)

        block = Block(action.txset, winner)
        if action.decision is Decision.CONTINUE:
            extended = replace(chain, blocks=chain.blocks + (block,))
            chains = tuple(extended if c.chain_id == chain.chain_id else c for c in state.chains)
            return replace(state, chains=chains)

        fork = Chain(blocks=chain.blocks[:-1] + (block,), created_round=state.round, chain_id=state.next_chain_id)
        return replace(state, chains=state.chains + (fork,), next_chain_id=state.next_chain_id + 1)

    def abandon(self, state: GlobalState) -> GlobalState:
        """Drop every chain at least one block shorter than another."""
        longest = max(len(c) for c in state.chains)
        survivors = tuple(c for c in state.chains if len(c) == longest)
        if len(survivors) == len(state.chains):
            return state
        return replace(state, chains=survivors)

    def longest_chain(self, state: GlobalState) -> Chain:
        return state.longest()

    def play_round(
        self, state: GlobalState, action: Action, winner: int, params: GameParams, p1_created: bool
    ) -> GlobalState:
        """Apply, abandon and move to the next round."""
        return self.abandon(self.apply_action(state, action, winner, params, p1_created)).advance()

    def chain_violations(self, chain: Chain, params: GameParams) -> List[str]:
        """Structural invariants every reachable chain satisfies."""
        problems = []
        kinds = chain.kinds()
        if kinds.count(TxSetKind.TXS1) + kinds.count(TxSetKind.TXS2) > 1:
            problems.append("txs1 and txs2 spend the same output")
        for height, kind in enumerate(kinds):
            if kind is TxSetKind.TXS_P1 and height != 0:
                problems.append(f"txs_p1 at height {height}")
            if kind is TxSetKind.TXS2 and height < params.T:
                problems.append(f"txs2 at height {height} before timelock {params.T}")
            if kind is TxSetKind.TXS_P2 and TxSetKind.TXS2 not in kinds[:height]:
                problems.append(f"txs_p2 at height {height} without earlier txs2")
        return problems
