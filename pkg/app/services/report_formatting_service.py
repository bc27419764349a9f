"""Service for rendering reports as human-readable text or JSON lines."""

import json
from typing import Iterable, List, Sequence, Tuple

from pydantic import BaseModel

from app.schemas.cost import CostQuote
from app.schemas.empirics import EmpiricsReport
from app.schemas.oracle import BestResponseReport, ConditionReport
from app.schemas.simulation import UtilityEstimate
from app.schemas.txgraph import ConfirmationResult, GraphReport
from app.services.empirics_service import sat_to_btc

Record = Tuple[str, BaseModel]


class ReportFormattingService:
    """Formats the same report records for terminals and for machine consumers."""

    def json_lines(self, records: Iterable[Record]) -> str:
        """
        One JSON object per record, tagged with its type.

        Args:
            records: (type tag, pydantic model) pairs

        Returns:
            Newline-separated JSON documents that validate against the models again
        """
        return "\n".join(
            json.dumps({"type": tag, **model.model_dump(mode="json")}, ensure_ascii=False)
            for tag, model in records
        )

    def utilities(self, estimate: UtilityEstimate, names: Sequence[str]) -> str:
        lines = [f"Utility estimate over {estimate.trials} trials (seed {estimate.seed}, {estimate.workers} workers)"]
        for player, (mean, stderr) in enumerate(zip(estimate.mean, estimate.stderr)):
            spread = f"± {stderr:,.0f}" if estimate.stderr_defined else "(single trial)"
            lines.append(f"  N{player} {names[player]:<28} {mean:>18,.0f} sat {spread}")
        return "\n".join(lines)

    def conditions(self, report: ConditionReport) -> str:
        lines = ["Equilibrium hypotheses:"]
        for check in report.checks.values():
            mark = {True: "pass", False: "FAIL", None: "info"}[check.passed]
            value = "" if check.value is None else f" value={check.value:,.6g}"
            threshold = "" if check.threshold is None else f" threshold={check.threshold:,.6g}"
            detail = f"  ({check.detail})" if check.detail else ""
            lines.append(f"  [{mark}] {check.name}{value}{threshold}{detail}")
        lines.append(f"  Y = {report.y:.6g}")
        lines.append(f"Bribe and fork equilibrium conditions hold: {'yes' if report.equilibrium_conditions_hold else 'no'}")
        if report.strict_violations:
            lines.append(f"Distribution assumptions violated: {', '.join(report.strict_violations)}")
        return "\n".join(lines)

    def best_responses(self, reports: Sequence[BestResponseReport]) -> str:
        lines = []
        for report in reports:
            if report.is_best_response:
                lines.append(
                    f"  N{report.player} {report.strategy}: best response over {report.strategy_space} "
                    f"(utility {report.utility:,.2f})"
                )
            else:
                lines.append(
                    f"  N{report.player} {report.strategy}: deviation {report.witness_strategy} "
                    f"gains {report.utility_gap:,.2f} sat"
                )
        verdict = "Nash equilibrium" if all(r.is_best_response for r in reports) else "not an equilibrium"
        return "\n".join([f"Profile is {verdict}:"] + lines)

    def quotes(self, quotes: List[CostQuote]) -> str:
        lines = ["Bound                      sat              BTC       fiat"]
        for quote in quotes:
            fiat = "" if quote.fiat_value is None else f"{quote.fiat_value:>10,.2f}"
            lines.append(f"{quote.bound_kind.value:<20} {quote.value_sat:>15,} {sat_to_btc(quote.value_sat):>14} {fiat}")
        notes = {q.note for q in quotes if q.note}
        lines.extend(f"note: {note}" for note in sorted(notes))
        return "\n".join(lines)

    def empirics(self, report: EmpiricsReport) -> str:
        lines = [
            f"Weeks: {report.weeks}",
            f"Block fees: mean {sat_to_btc(report.mean_block_fee_sat)} BTC, "
            f"range {sat_to_btc(report.min_block_fee_sat)}-{sat_to_btc(report.max_block_fee_sat)} BTC",
            f"Tx fees: mean {report.mean_tx_fee_sat} sat, range {report.min_tx_fee_sat}-{report.max_tx_fee_sat} sat",
            f"Tx per block: {report.mean_tx_per_block}",
            f"Strongest pool: {report.strongest_pool} (λ_s = {report.lambda_s:.5f})",
            f"Pools with 1-2% of blocks: {', '.join(report.relatively_strong_pools) or 'none'}",
            "Pool shares:",
        ]
        lines.extend(f"  {row.pool:<20} {row.blocks:>7} {row.share:>9.3%}" for row in report.shares.rows)
        if report.lambda_min_estimates:
            lines.append("Single-device mining power:")
            lines.extend(f"  {name:<22} {value:.3g}" for name, value in report.lambda_min_estimates.items())
        if report.inconsistent_weeks:
            lines.append(f"Inconsistent weeks: {', '.join(report.inconsistent_weeks)}")
        if report.strict_violations:
            lines.append(f"Distribution assumptions violated: {', '.join(report.strict_violations)}")
        return "\n".join(lines)

    def graph_report(self, report: GraphReport) -> str:
        lines = [f"  [{'pass' if c.passed else 'FAIL'}] {c.name}" + (f": {c.detail}" if c.detail else "")
                 for c in report.checks]
        header = "Graph is valid" if report.ok else f"Graph has {len(report.violations)} violations"
        return "\n".join([header] + lines)

    def confirmation(self, result: ConfirmationResult) -> str:
        lines = ["Confirmed: " + ", ".join(f"{tx}@{h}" for tx, h in result.confirmed.items())]
        lines.extend(f"  {ref:<16} -> {owner}" for ref, owner in result.ownership.items())
        lines.append("Balances: " + ", ".join(f"{p}={v:,}" for p, v in sorted(result.balances.items())))
        if result.dead:
            lines.append("Dead: " + ", ".join(tx.value for tx in result.dead))
        lines.append(f"Deposit: {result.deposit_state.value}" + (" (co-signer sweep)" if result.collusion_sweep else ""))
        return "\n".join(lines)
