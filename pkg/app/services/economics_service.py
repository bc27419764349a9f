"""Service for block rewards, final settlement and mining-power assumptions."""

import logging
import math
from typing import Dict, List, Tuple

from app.exceptions import GameNotOverError, InvalidParamsError
from app.models import GlobalState, TxSetKind
from app.schemas.params import GameParams, Severity, Violation, errors_only, LAMBDA_SUM_TOLERANCE
from app.schemas.settlement import DepositState, SettlementReport

logger = logging.getLogger(__name__)

STRONGEST_MIN_SHARE = 0.20
RELATIVELY_STRONG_RANGE = (0.01, 0.02)
SMALL_MINER_SHARE = 0.01
SMALL_MINERS_TOTAL = 0.05
LAMBDA_FLOOR = 1e-100


class EconomicsService:
    """Reward model and settlement of finished games."""

    def reward_of(self, kind: TxSetKind, params: GameParams) -> int:
        """
        Miner-side reward of a block housing the given transaction set.

        Args:
            kind: Transaction set kind
            params: Game parameters

        Returns:
            Block reward in satoshi (deposit excluded)
        """
        if kind is TxSetKind.UNRELATED:
            return params.B + params.f
        if kind is TxSetKind.TXS1:
            return params.B + params.f1
        if kind is TxSetKind.TXS2:
            return params.B + params.f2
        if kind is TxSetKind.TXS_P1:
            return params.B + params.f_p1
        return params.B + params.f_p2

    def reward_table(self, params: GameParams) -> Dict[TxSetKind, int]:
        return {kind: self.reward_of(kind, params) for kind in TxSetKind}

    def payoffs(self, final_state: GlobalState, params: GameParams) -> Tuple[int, ...]:
        """Per-player net reward of a finished game without building a report."""
        chain = final_state.longest()
        rewards = [0] * params.n
        has_p1 = has_p2 = False
        for block in chain.blocks:
            rewards[block.winner] += self.reward_of(block.txset, params)
            if block.txset is TxSetKind.TXS_P1:
                has_p1 = True
            elif block.txset is TxSetKind.TXS_P2:
                has_p2 = True
        creator = params.p1_creator
        if creator is not None and has_p1:
            if not has_p2:
                rewards[creator] -= params.penalty_P
            if params.charge_special_fees:
                rewards[creator] -= params.c_p1 * params.f_bar_p1
                if has_p2:
                    rewards[creator] -= params.c_p2 * params.f_bar_p2
        return tuple(rewards)

    def settle(self, final_state: GlobalState, params: GameParams) -> SettlementReport:
        """
        Credit every block of the winning chain to its miner and settle the deposit.

        Args:
            final_state: State after the last round
            params: Game parameters

        Returns:
            SettlementReport with net rewards and the deposit outcome
        """
        if final_state.round <= params.R:
            raise GameNotOverError(f"Game is at round {final_state.round}, it ends after round {params.R}")

        chain = final_state.longest()
        kinds = chain.kinds()
        block_total = sum(self.reward_of(kind, params) for kind in kinds)

        if TxSetKind.TXS_P1 not in kinds or params.p1_creator is None:
            deposit_state = DepositState.NOT_POSTED
        elif TxSetKind.TXS_P2 in kinds:
            deposit_state = DepositState.RECLAIMED
        else:
            deposit_state = DepositState.LOCKED_LOST

        adjustment = -params.penalty_P if deposit_state is DepositState.LOCKED_LOST else 0
        fee_debits = 0
        if params.charge_special_fees and deposit_state is not DepositState.NOT_POSTED:
            fee_debits = params.c_p1 * params.f_bar_p1
            if deposit_state is DepositState.RECLAIMED:
                fee_debits += params.c_p2 * params.f_bar_p2

        return SettlementReport(
            per_player_reward=list(self.payoffs(final_state, params)),
            winning_chain_id=chain.chain_id,
            deposit_state=deposit_state,
            block_reward_total=block_total,
            deposit_adjustment=adjustment,
            fee_debits=fee_debits,
            winning_chain=[f"{b.txset.label}@{b.winner}" for b in chain.blocks],
        )

    def validate_params(self, params: GameParams) -> List[Violation]:
        """
        Check the mining-power distribution and fee assumptions.

        Distribution assumptions are errors in strict mode and warnings otherwise.
        """
        violations: List[Violation] = []
        powers = params.lambdas
        total = math.fsum(powers)
        if abs(total - 1.0) > LAMBDA_SUM_TOLERANCE:
            violations.append(Violation(code="LAMBDA_SUM", message=f"powers must sum to 1 (got {total:.12f})"))
        if min(powers) <= LAMBDA_FLOOR:
            violations.append(Violation(code="LAMBDA_FLOOR", message="every mining power must exceed 1e-100"))
        if params.f_bar * 10_000 >= params.B:
            violations.append(Violation(
                code="FEE_SCALE",
                message="average fee should stay below 1e-4 of the base reward",
                severity=Severity.WARNING,
            ))

        severity = Severity.ERROR if params.strict_distribution else Severity.WARNING
        for code, message in self.distribution_issues(powers):
            violations.append(Violation(code=code, message=message, severity=severity))
        return violations

    def distribution_issues(self, powers: Tuple[float, ...]) -> List[Tuple[str, str]]:
        issues = []
        top = max(powers)
        if top < STRONGEST_MIN_SHARE:
            issues.append(("STRONGEST_SHARE", f"strongest miner needs λ_s ≥ 20% (got {top:.2%})"))
        if sum(1 for x in powers if x == top) > 1:
            issues.append(("STRONGEST_UNIQUE", "strongest miner must be unique"))
        low, high = RELATIVELY_STRONG_RANGE
        if not any(low < x < high for x in powers):
            issues.append(("RELATIVELY_STRONG", "no miner with 1% < λ < 2%"))
        small = math.fsum(x for x in powers if x < SMALL_MINER_SHARE)
        if small > SMALL_MINERS_TOTAL:
            issues.append(("SMALL_MINERS", f"miners below 1% hold {small:.2%}, more than 5%"))
        return issues

    def ensure_valid(self, params: GameParams) -> None:
        """Raise InvalidParamsError when any error-level violation is present."""
        errors = errors_only(self.validate_params(params))
        if errors:
            messages = [v.message for v in errors]
            logger.error(f"Rejected game parameters: {messages}")
            raise InvalidParamsError("; ".join(messages), violations=messages)
