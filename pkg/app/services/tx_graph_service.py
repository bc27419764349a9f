"""Service for the abstract transaction graph of the bribe and fork construction."""

import logging
from itertools import permutations
from typing import Dict, Iterable, List, Optional, Set, Tuple

from pydantic import ValidationError

from app.exceptions import ConditionViolationError, ConflictViolationError, DomainError, InvalidParamsError
from app.schemas.settlement import DepositState
from app.schemas.txgraph import (
    AnyOf,
    ConfirmationResult,
    ConfirmationStep,
    ExternalInput,
    GraphCheck,
    GraphParams,
    GraphReport,
    KeyOwner,
    LedgerScenario,
    MultiSig,
    OutputRef,
    Party,
    RelativeTimelock,
    RequiresConfirmedOutput,
    TxGraph,
    TxId,
    TxInput,
    TxOutput,
    TxTemplate,
)

logger = logging.getLogger(__name__)

DUMMY_AMOUNT = 1
DEPOSIT_REF = OutputRef(tx=TxId.TXP1, index=0)
DUMMY_REF = OutputRef(tx=TxId.TXB, index=1)
COMMITMENT_REF = OutputRef(tx=TxId.COMMITMENT_OLD, index=0)


def describe_condition(condition) -> str:
    """Human-readable controller of an output."""
    if isinstance(condition, KeyOwner):
        return condition.party
    if isinstance(condition, MultiSig):
        return f"{condition.m}-of-{condition.n} incl. {condition.must_include}"
    if isinstance(condition, RelativeTimelock):
        return f"{describe_condition(condition.then)} after {condition.blocks} blocks"
    if isinstance(condition, AnyOf):
        return " | ".join(describe_condition(option) for option in condition.options)
    return f"confirmed {condition.ref}"


class TxGraphService:
    """Builds, checks and replays the UTXO graph of the attack."""

    def build_attack_graph(
        self, channel_amount: int, bribe_fee: int, deposit: int, T: int, m: int, n: int, tx_fee: int = 1_000
    ) -> TxGraph:
        """
        Canonical graph: funding, the revoked commitment and its two conflicting spends,
        the bribe transaction and the self-penalty deposit with its reclaim.

        Args:
            channel_amount: Channel capacity (sat)
            bribe_fee: Fee the bribe transaction pays to the miner (sat)
            deposit: Self-penalty deposit P (sat)
            T: Relative timelock of the cheating path (blocks)
            m: Signatures required to move the deposit
            n: Size of the deposit signer set (N_s plus n-1 co-signers)
            tx_fee: Fee of every other transaction (sat)

        Returns:
            TxGraph with all seven templates

        Raises:
            InvalidParamsError: inconsistent amounts or m > n
        """
        try:
            params = GraphParams(
                channel_amount=channel_amount, bribe_fee=bribe_fee, deposit=deposit, T=T, m=m, n=n, tx_fee=tx_fee
            )
        except ValidationError as e:
            raise InvalidParamsError("Invalid graph parameters", violations=[err["msg"] for err in e.errors()])
        if m > n:
            raise InvalidParamsError(f"m={m} exceeds n={n}", violations=["m must not exceed n"])
        change = channel_amount - 3 * tx_fee - bribe_fee - DUMMY_AMOUNT
        if change <= 0:
            raise InvalidParamsError(
                f"Channel of {channel_amount} sat cannot fund a bribe of {bribe_fee} sat",
                violations=["bribe, dummy output and fees must fit in the channel"],
            )
        if deposit + DUMMY_AMOUNT <= tx_fee:
            raise InvalidParamsError("Deposit does not cover the reclaim fee", violations=["deposit too small"])

        p1, p2, ns, miner = (p.value for p in Party)
        cosigners = tuple(f"C{i}" for i in range(1, n))
        after_commit = channel_amount - tx_fee
        after_spend = after_commit - tx_fee

        templates = [
            TxTemplate(
                id=TxId.FUNDING,
                external_inputs=[
                    ExternalInput(party=p1, amount_sat=channel_amount // 2),
                    ExternalInput(party=p2, amount_sat=channel_amount - channel_amount // 2 + tx_fee),
                ],
                outputs=[TxOutput(
                    amount_sat=channel_amount,
                    condition=MultiSig(m=2, n=2, signers=(p1, p2), must_include=p1),
                    label="channel",
                )],
            ),
            TxTemplate(
                id=TxId.COMMITMENT_OLD,
                inputs=[TxInput(ref=OutputRef(tx=TxId.FUNDING, index=0))],
                outputs=[TxOutput(
                    amount_sat=after_commit,
                    condition=AnyOf(options=(
                        KeyOwner(party=p1),
                        RelativeTimelock(blocks=T, then=KeyOwner(party=p2)),
                    )),
                    label="conditionally timelocked",
                )],
            ),
            TxTemplate(
                id=TxId.TX1,
                inputs=[TxInput(ref=COMMITMENT_REF, branch=0)],
                outputs=[TxOutput(amount_sat=after_spend, condition=KeyOwner(party=p1), label="revocation")],
            ),
            TxTemplate(
                id=TxId.TX2,
                inputs=[TxInput(ref=COMMITMENT_REF, branch=1)],
                outputs=[TxOutput(amount_sat=after_spend, condition=KeyOwner(party=p2), label="old state")],
            ),
            TxTemplate(
                id=TxId.TXB,
                inputs=[TxInput(ref=OutputRef(tx=TxId.TX2, index=0))],
                outputs=[
                    TxOutput(amount_sat=bribe_fee, condition=KeyOwner(party=miner), label="bribe"),
                    TxOutput(amount_sat=DUMMY_AMOUNT, condition=KeyOwner(party=ns), label="dummy"),
                    TxOutput(amount_sat=change, condition=KeyOwner(party=p2), label="change"),
                ],
            ),
            TxTemplate(
                id=TxId.TXP1,
                external_inputs=[ExternalInput(party=ns, amount_sat=deposit + tx_fee)],
                outputs=[TxOutput(
                    amount_sat=deposit,
                    condition=MultiSig(m=m, n=n, signers=(ns,) + cosigners, must_include=ns),
                    label="deposit",
                )],
            ),
            TxTemplate(
                id=TxId.TXP2,
                inputs=[TxInput(ref=DEPOSIT_REF), TxInput(ref=DUMMY_REF)],
                outputs=[TxOutput(
                    amount_sat=deposit + DUMMY_AMOUNT - tx_fee, condition=KeyOwner(party=ns), label="reclaim",
                )],
            ),
        ]
        return TxGraph(params=params, templates=templates)

    def spend_conditions(self, graph: TxGraph, tx_id: TxId) -> List:
        """Every condition a transaction must meet: its inputs' gates and the outputs it waits for."""
        template = graph.get(tx_id)
        if template is None:
            raise DomainError(f"{tx_id.value} is not in the graph")
        conditions = []
        for spend in template.inputs:
            output = graph.output(spend.ref)
            if output is None:
                continue
            condition = output.condition
            if isinstance(condition, AnyOf) and spend.branch is not None:
                condition = condition.options[spend.branch]
            conditions.append(condition)
            if spend.ref.tx is not TxId.FUNDING:
                conditions.append(RequiresConfirmedOutput(ref=spend.ref))
        return conditions

    # validation

    def validate_graph(self, graph: TxGraph) -> GraphReport:
        """Static checks of the construction; failures are reported, not raised."""
        checks: List[GraphCheck] = []

        def check(name: str, passed: bool, violation: str) -> None:
            checks.append(GraphCheck(name=name, passed=passed, detail="" if passed else violation))

        missing = [tx.value for tx in TxId if graph.get(tx) is None]
        check("complete", not missing, f"missing transactions: {', '.join(missing)}")

        dangling = [
            f"{t.id.value} spends missing output {s.ref}"
            for t in graph.templates for s in t.inputs if graph.output(s.ref) is None
        ]
        check("references", not dangling, "; ".join(dangling))

        tx1, tx2 = graph.get(TxId.TX1), graph.get(TxId.TX2)
        spent1 = {s.ref for s in tx1.inputs} if tx1 else set()
        spent2 = {s.ref for s in tx2.inputs} if tx2 else set()
        check("conflict_pair", bool(spent1 & spent2), "tx1 and tx2 must spend the same commitment output")

        check("tx2_timelock", self._tx2_timelocked(graph), "cond₂ must be encumbered with a timelock")

        txb = graph.get(TxId.TXB)
        check("txb_outputs", txb is not None and len(txb.outputs) == 3, "tx_b must output three UTXOs")

        txp2 = graph.get(TxId.TXP2)
        refs = [s.ref for s in txp2.inputs] if txp2 else []
        check(
            "txp2_requires_bribe",
            any(ref.tx is TxId.TXB for ref in refs),
            "deposit reclaimable without bribe confirmation",
        )
        check(
            "txp2_inputs",
            sorted(map(str, refs)) == sorted(map(str, [DEPOSIT_REF, DUMMY_REF])),
            "tx_p2 must spend exactly the deposit and the dummy output",
        )

        deposit = graph.output(DEPOSIT_REF)
        gated = (
            deposit is not None
            and isinstance(deposit.condition, MultiSig)
            and deposit.condition.must_include == Party.BRIBED_MINER.value
            and deposit.condition.must_include in deposit.condition.signers
            and deposit.condition.m <= deposit.condition.n
        )
        check("deposit_multisig", gated, "deposit must be gated by an m-of-n multisig including N_s")

        overspent = [t.id.value for t in graph.templates if self._fee(graph, t) < 0]
        check("value_conservation", not overspent, f"outputs exceed inputs in {', '.join(overspent)}")

        report = GraphReport(checks=checks, violations=[c.detail for c in checks if not c.passed])
        if report.violations:
            logger.warning(f"Graph validation found {len(report.violations)} violations")
        return report

    def _tx2_timelocked(self, graph: TxGraph) -> bool:
        tx2 = graph.get(TxId.TX2)
        if tx2 is None:
            return False
        for spend in tx2.inputs:
            output = graph.output(spend.ref)
            if output is None:
                continue
            condition = output.condition
            if isinstance(condition, AnyOf):
                if spend.branch is None or spend.branch >= len(condition.options):
                    return False
                condition = condition.options[spend.branch]
            if isinstance(condition, RelativeTimelock) and condition.blocks >= 1:
                return True
        return False

    @staticmethod
    def _fee(graph: TxGraph, template: TxTemplate) -> int:
        incoming = sum(e.amount_sat for e in template.external_inputs)
        for spend in template.inputs:
            output = graph.output(spend.ref)
            incoming += output.amount_sat if output is not None else 0
        return incoming - sum(o.amount_sat for o in template.outputs)

    # confirmation replay

    def _failing(
        self,
        condition,
        branch: Optional[int],
        height: int,
        source_height: int,
        signers: Set[str],
        confirmed: Dict[TxId, int],
    ) -> Optional[str]:
        """Name of the first unmet condition, or None."""
        if isinstance(condition, KeyOwner):
            return None if condition.party in signers else "key_owner"
        if isinstance(condition, MultiSig):
            grants = len(signers.intersection(condition.signers))
            if condition.must_include not in signers or grants < condition.m:
                return "multisig"
            return None
        if isinstance(condition, RelativeTimelock):
            if height - source_height < condition.blocks:
                return "relative_timelock"
            return self._failing(condition.then, None, height, source_height, signers, confirmed)
        if isinstance(condition, AnyOf):
            if branch is not None:
                return self._failing(condition.options[branch], None, height, source_height, signers, confirmed)
            failures = [
                self._failing(option, None, height, source_height, signers, confirmed)
                for option in condition.options
            ]
            return None if any(f is None for f in failures) else failures[0]
        required = confirmed.get(condition.ref.tx)
        return None if required is not None and required <= height else "requires_confirmed"

    def _all_parties(self, graph: TxGraph) -> Set[str]:
        parties = {p.value for p in Party}
        deposit = graph.output(DEPOSIT_REF)
        if deposit is not None and isinstance(deposit.condition, MultiSig):
            parties.update(deposit.condition.signers)
        return parties

    def simulate_confirmation(self, graph: TxGraph, scenario: LedgerScenario) -> ConfirmationResult:
        """
        Replay confirmations in order, enforcing conditions and conflicts.

        Funding counts as confirmed at height 0 unless the scenario places it.

        Raises:
            ConflictViolationError: an output is spent twice or a transaction confirms twice
            ConditionViolationError: a spend fails its condition (named in `condition`)
        """
        signers = set(scenario.signers) if scenario.signers is not None else self._all_parties(graph)
        confirmed: Dict[TxId, int] = {}
        spent: Dict[OutputRef, TxId] = {}
        total_in = total_out = 0

        steps = list(scenario.steps)
        if all(step.tx is not TxId.FUNDING for step in steps):
            steps.insert(0, ConfirmationStep(tx=TxId.FUNDING, height=0))

        for step in steps:
            template = graph.get(step.tx)
            if template is None:
                raise DomainError(f"{step.tx.value} is not in the graph")
            if step.tx in confirmed:
                raise ConflictViolationError(f"{step.tx.value} is already confirmed")
            for spend in template.inputs:
                source = confirmed.get(spend.ref.tx)
                output = graph.output(spend.ref)
                if source is None or source > step.height or output is None:
                    raise ConditionViolationError(
                        f"{step.tx.value} spends {spend.ref} before it is confirmed",
                        condition="requires_confirmed",
                    )
                if spend.ref in spent:
                    raise ConflictViolationError(
                        f"{step.tx.value} spends {spend.ref}, already spent by {spent[spend.ref].value}"
                    )
                failing = self._failing(output.condition, spend.branch, step.height, source, signers, confirmed)
                if failing is not None:
                    raise ConditionViolationError(
                        f"{step.tx.value} cannot spend {spend.ref} at height {step.height}: {failing}",
                        condition=failing,
                    )
            for spend in template.inputs:
                spent[spend.ref] = step.tx
                total_in += graph.output(spend.ref).amount_sat
            total_in += sum(e.amount_sat for e in template.external_inputs)
            total_out += sum(o.amount_sat for o in template.outputs)
            confirmed[step.tx] = step.height
            logger.debug(f"Confirmed {step.tx.value} at height {step.height}")

        sweep = (
            scenario.cosigner_collusion
            and TxId.TXP1 in confirmed
            and TxId.TXP2 not in confirmed
            and DEPOSIT_REF not in spent
        )
        ownership: Dict[str, str] = {}
        balances: Dict[str, int] = {}
        for tx_id in confirmed:
            for index, output in enumerate(graph.get(tx_id).outputs):
                ref = OutputRef(tx=tx_id, index=index)
                if ref in spent:
                    continue
                condition = output.condition
                if sweep and ref == DEPOSIT_REF:
                    condition = KeyOwner(party=Party.BRIBED_MINER.value)
                ownership[str(ref)] = describe_condition(condition)
                if isinstance(condition, KeyOwner):
                    balances[condition.party] = balances.get(condition.party, 0) + output.amount_sat

        if TxId.TXP1 not in confirmed:
            deposit_state = DepositState.NOT_POSTED
        elif TxId.TXP2 in confirmed:
            deposit_state = DepositState.RECLAIMED
        elif sweep:
            deposit_state = DepositState.SWEPT
        else:
            deposit_state = DepositState.LOCKED_LOST

        return ConfirmationResult(
            confirmed={tx.value: height for tx, height in confirmed.items()},
            ownership=ownership,
            balances=balances,
            dead=self._dead(graph, confirmed, spent),
            deposit_state=deposit_state,
            collusion_sweep=sweep,
            total_input_sat=total_in,
            total_output_sat=total_out,
            total_fee_sat=sum(self._fee(graph, graph.get(tx)) for tx in confirmed),
        )

    @staticmethod
    def _dead(graph: TxGraph, confirmed: Dict[TxId, int], spent: Dict[OutputRef, TxId]) -> List[TxId]:
        """Unconfirmed transactions that can never confirm: an input is gone or comes from a dead one."""
        dead: Set[TxId] = set()
        changed = True
        while changed:
            changed = False
            for template in graph.templates:
                if template.id in confirmed or template.id in dead:
                    continue
                if any(s.ref in spent or s.ref.tx in dead for s in template.inputs):
                    dead.add(template.id)
                    changed = True
        return [tx for tx in TxId if tx in dead]

    # exhaustive scenarios

    def earliest_height(self, graph: TxGraph, tx_id: TxId, confirmed: Dict[TxId, int]) -> Optional[int]:
        """Lowest height at which a transaction's inputs and timelocks allow it, if its inputs are confirmed."""
        height = 0
        for spend in graph.get(tx_id).inputs:
            source = confirmed.get(spend.ref.tx)
            if source is None:
                return None
            height = max(height, source)
            condition = graph.output(spend.ref).condition
            if isinstance(condition, AnyOf) and spend.branch is not None:
                condition = condition.options[spend.branch]
            if isinstance(condition, RelativeTimelock):
                height = max(height, source + condition.blocks)
        return height

    def enumerate_scenarios(
        self, graph: TxGraph, cosigner_collusion: bool = False
    ) -> Iterable[Tuple[LedgerScenario, ConfirmationResult]]:
        """
        Every ordering of every subset of the non-funding transactions, each at its
        earliest legal height; orderings the ledger rejects are skipped.
        """
        candidates = [t.id for t in graph.templates if t.id is not TxId.FUNDING]
        for size in range(len(candidates) + 1):
            for order in permutations(candidates, size):
                confirmed: Dict[TxId, int] = {TxId.FUNDING: 0}
                steps, current = [], 0
                for tx_id in order:
                    height = self.earliest_height(graph, tx_id, confirmed)
                    if height is None:
                        break
                    current = max(current, height)
                    steps.append(ConfirmationStep(tx=tx_id, height=current))
                    confirmed[tx_id] = current
                else:
                    scenario = LedgerScenario(steps=steps, cosigner_collusion=cosigner_collusion)
                    try:
                        yield scenario, self.simulate_confirmation(graph, scenario)
                    except (ConflictViolationError, ConditionViolationError):
                        continue

    # documents

    def export_graph(self, graph: TxGraph) -> str:
        return graph.model_dump_json(indent=2)

    def import_graph(self, document: str) -> TxGraph:
        """
        Parse an exported graph document.

        Raises:
            InvalidParamsError: the document does not match the graph schema
        """
        try:
            return TxGraph.model_validate_json(document)
        except ValidationError as e:
            raise InvalidParamsError("Invalid graph document", violations=[err["msg"] for err in e.errors()])
