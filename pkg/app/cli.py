"""Command line entry point: simulate, oracle, cost, empirics and txgraph."""

import argparse
import logging
import sys
from pathlib import Path
from typing import List, Optional

from pydantic import ValidationError

from app.core.config import get_settings
from app.core.dependencies import (
    get_attack_cost_service,
    get_empirics_service,
    get_equilibrium_service,
    get_params_repository,
    get_report_formatting_service,
    get_simulation_service,
    get_strategy_service,
    get_tx_graph_service,
)
from app.exceptions import (
    DomainError,
    EmptyInputError,
    ForkGameException,
    InstanceTooLargeError,
    InvalidParamsError,
    ParseError,
    SchemaError,
    UnknownStrategyError,
)
from app.schemas.cost import CostRequest
from app.schemas.params import GameParams
from app.schemas.run_config import OutputFormat, RunConfig
from app.schemas.txgraph import ConfirmationStep, LedgerScenario, TxId
from app.services.empirics_service import NETWORK_HASHRATE_2022
from app.services.equilibrium_service import EquilibriumService
from app.services.strategy_service import StrategyProfile

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_RUNTIME = 3
EXIT_BUDGET = 4

USAGE_ERRORS = (
    InvalidParamsError,
    DomainError,
    ParseError,
    SchemaError,
    EmptyInputError,
    UnknownStrategyError,
    ValidationError,
    OSError,
)


def _emit(text: str) -> None:
    print(text)


def _strategy_names(args: argparse.Namespace, params: GameParams) -> List[str]:
    if args.strategies:
        return [name.strip() for name in args.strategies.split(",")]
    return get_strategy_service().preset(args.profile, params)


def _run_config(args: argparse.Namespace, params: GameParams) -> RunConfig:
    settings = get_settings()
    return RunConfig(
        params_path=args.params,
        strategies=_strategy_names(args, params),
        trials=settings.DEFAULT_TRIALS if getattr(args, "trials", None) is None else args.trials,
        seed=settings.DEFAULT_SEED if getattr(args, "seed", None) is None else args.seed,
        output_format=OutputFormat(args.format),
        threads=settings.FORKGAME_THREADS if getattr(args, "threads", None) is None else args.threads,
        credible_threats=getattr(args, "credible_threats", False),
        strategy_space=getattr(args, "space", "library"),
        trace=getattr(args, "trace", None),
    )


def _profile(config: RunConfig, params: GameParams, threat_values: str = "lookahead") -> StrategyProfile:
    strategies = get_strategy_service()
    profile = strategies.profile(config.strategies, params)
    if config.credible_threats:
        value_fn = None
        if threat_values == "exact":
            value_fn = get_equilibrium_service().oracle_value_fn(profile)
        profile = strategies.with_credible_threats(profile, value_fn)
    return profile


def cmd_simulate(args: argparse.Namespace) -> int:
    """Estimate expected utilities by Monte Carlo."""
    params = get_params_repository().load(args.params)
    config = _run_config(args, params)
    profile = _profile(config, params, args.threat_values)
    simulation = get_simulation_service()
    estimate = simulation.estimate_utilities(profile, params, config.trials, config.seed, config.threads)
    if config.trace:
        trace = simulation.run_game(profile, params, config.seed)
        Path(config.trace).write_text(trace.to_jsonl() + "\n", encoding="utf-8")
        logger.info(f"Wrote trace of trial 0 to {config.trace}")

    formatter = get_report_formatting_service()
    if config.output_format is OutputFormat.JSON_LINES:
        _emit(formatter.json_lines([("utility_estimate", estimate)]))
    else:
        _emit(formatter.utilities(estimate, profile.names))
    return EXIT_OK


def cmd_oracle(args: argparse.Namespace) -> int:
    """Equilibrium hypotheses plus exact best-response checks of a profile."""
    params = get_params_repository().load(args.params)
    config = _run_config(args, params)
    oracle = get_equilibrium_service()
    if args.node_limit:
        oracle = EquilibriumService(oracle.rules, oracle.strategies, oracle.cost, node_limit=args.node_limit)
    conditions = oracle.theorem_conditions(params)
    profile = get_strategy_service().profile(config.strategies, params)
    reports = oracle.nash_check(profile, params, config.strategy_space)

    formatter = get_report_formatting_service()
    if config.output_format is OutputFormat.JSON_LINES:
        records = [("conditions", conditions)] + [("best_response", r) for r in reports]
        _emit(formatter.json_lines(records))
    else:
        _emit(formatter.conditions(conditions))
        _emit(formatter.best_responses(reports))
    return EXIT_OK


def cmd_cost(args: argparse.Namespace) -> int:
    """All five bribe cost quotes."""
    settings = get_settings()
    f1_minus_f = args.f1_minus_f if args.f1 is None else args.f1 - args.f
    request = CostRequest(
        f_bar=args.f_bar,
        f1_minus_f=f1_minus_f,
        f=args.f,
        B=args.B,
        lambda_min=args.lambda_min,
        lambda_s=args.lambda_s,
        lambda_j=args.lambda_j,
        T=args.T,
        price=args.price or settings.BTC_PRICE_USD,
    )
    quotes = get_attack_cost_service().quotes(request)
    formatter = get_report_formatting_service()
    if args.format == OutputFormat.JSON_LINES.value:
        _emit(formatter.json_lines(("cost_quote", q) for q in quotes))
    else:
        _emit(formatter.quotes(quotes))
    return EXIT_OK


def cmd_empirics(args: argparse.Namespace) -> int:
    """Fee statistics, pool shares and single-device mining power."""
    data_dir = Path(get_settings().DATA_DIR)
    report = get_empirics_service().report(
        args.fees or data_dir / "fees_2022.csv",
        args.pools or data_dir / "pools_2022.csv",
        args.devices or data_dir / "devices.csv",
        args.network_hashrate,
    )
    formatter = get_report_formatting_service()
    if args.format == OutputFormat.JSON_LINES.value:
        _emit(formatter.json_lines([("empirics", report)]))
    else:
        _emit(formatter.empirics(report))
    return EXIT_OK


def _parse_scenario(text: str) -> List[ConfirmationStep]:
    steps = []
    for item in filter(None, (part.strip() for part in text.split(","))):
        name, _, height = item.partition("@")
        try:
            steps.append(ConfirmationStep(tx=TxId(name), height=int(height)))
        except ValueError:
            raise InvalidParamsError(f"Bad scenario step '{item}', expected Tx@height")
    return steps


def cmd_txgraph(args: argparse.Namespace) -> int:
    """Build, validate or replay the attack's transaction graph."""
    service = get_tx_graph_service()
    if args.graph:
        graph = service.import_graph(Path(args.graph).read_text(encoding="utf-8"))
    else:
        graph = service.build_attack_graph(args.channel, args.bribe, args.deposit, args.T, args.m, args.n)

    formatter = get_report_formatting_service()
    json_lines = args.format == OutputFormat.JSON_LINES.value
    if args.action == "build":
        document = service.export_graph(graph)
        if args.out:
            Path(args.out).write_text(document, encoding="utf-8")
        else:
            _emit(document)
        return EXIT_OK
    if args.action == "validate":
        report = service.validate_graph(graph)
        _emit(formatter.json_lines([("graph_report", report)]) if json_lines else formatter.graph_report(report))
        return EXIT_OK if report.ok else EXIT_RUNTIME

    scenario = LedgerScenario(steps=_parse_scenario(args.scenario or ""), cosigner_collusion=args.collusion)
    result = service.simulate_confirmation(graph, scenario)
    _emit(formatter.json_lines([("confirmation", result)]) if json_lines else formatter.confirmation(result))
    return EXIT_OK


def _add_format(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--format", choices=[f.value for f in OutputFormat], default=OutputFormat.HUMAN.value)


def _add_profile(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--params", required=True, help="Game parameter file (key=value)")
    group = parser.add_mutually_exclusive_group()
    group.add_argument("--profile", default="bribe-and-fork", help="Preset: bribe-and-fork, greedy, waiters, txs1-first")
    group.add_argument("--strategies", help="Comma-separated strategy name per player")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="forkgame", description="Bribe & Fork game analysis toolkit")
    commands = parser.add_subparsers(dest="command", required=True)

    simulate = commands.add_parser("simulate", help="Monte Carlo utility estimates")
    _add_profile(simulate)
    simulate.add_argument("--trials", type=int)
    simulate.add_argument("--seed", type=int)
    simulate.add_argument("--threads", type=int)
    simulate.add_argument("--credible-threats", action="store_true")
    simulate.add_argument("--threat-values", choices=["lookahead", "exact"], default="lookahead")
    simulate.add_argument("--trace", help="Write the first trial as JSON lines")
    _add_format(simulate)
    simulate.set_defaults(handler=cmd_simulate)

    oracle = commands.add_parser("oracle", help="Exact equilibrium checks and their hypotheses")
    _add_profile(oracle)
    oracle.add_argument("--space", choices=["library", "full"], default="library")
    oracle.add_argument("--node-limit", type=int)
    _add_format(oracle)
    oracle.set_defaults(handler=cmd_oracle)

    cost = commands.add_parser("cost", help="Bribe cost bounds")
    cost.add_argument("--f-bar", type=int, default=10_000)
    cost.add_argument("--f", type=int, default=15_000_000)
    cost.add_argument("--f1", type=int)
    cost.add_argument("--f1-minus-f", type=int, default=10_000)
    cost.add_argument("--B", type=int, default=625_000_000)
    cost.add_argument("--lambda-min", type=float, default=1e-4)
    cost.add_argument("--lambda-s", type=float)
    cost.add_argument("--lambda-j", type=float, default=0.02)
    cost.add_argument("--T", type=int, default=110)
    cost.add_argument("--price", help="Price of one BTC in fiat")
    _add_format(cost)
    cost.set_defaults(handler=cmd_cost)

    empirics = commands.add_parser("empirics", help="Fee and pool-share statistics")
    empirics.add_argument("--fees")
    empirics.add_argument("--pools")
    empirics.add_argument("--devices")
    empirics.add_argument("--network-hashrate", default=str(NETWORK_HASHRATE_2022))
    _add_format(empirics)
    empirics.set_defaults(handler=cmd_empirics)

    txgraph = commands.add_parser("txgraph", help="Transaction graph of the attack")
    txgraph.add_argument("action", choices=["build", "validate", "simulate"])
    txgraph.add_argument("--graph", help="Graph document to load instead of building")
    txgraph.add_argument("--out")
    txgraph.add_argument("--channel", type=int, default=100_000_000)
    txgraph.add_argument("--bribe", type=int, default=300_000)
    txgraph.add_argument("--deposit", type=int, default=128_000_001)
    txgraph.add_argument("--T", type=int, default=110)
    txgraph.add_argument("--m", type=int, default=3)
    txgraph.add_argument("--n", type=int, default=5)
    txgraph.add_argument("--scenario", help="Comma list of Tx@height, e.g. CommitmentOld@1,Tx1@2")
    txgraph.add_argument("--collusion", action="store_true")
    _add_format(txgraph)
    txgraph.set_defaults(handler=cmd_txgraph)
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    settings = get_settings()
    logging.basicConfig(level=settings.LOG_LEVEL, stream=sys.stderr)
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return EXIT_OK if e.code == 0 else EXIT_USAGE

    try:
        return args.handler(args)
    except InstanceTooLargeError as e:
        logger.error(e.message)
        return EXIT_BUDGET
    except USAGE_ERRORS as e:
        logger.error(f"{args.command}: {getattr(e, 'message', e)}")
        return EXIT_USAGE
    except ForkGameException as e:
        logger.error(f"{args.command}: {e.message}")
        return EXIT_RUNTIME
    except Exception as e:
        logger.exception(f"{args.command} failed: {e}")
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
