"""Service for historical fee and pool-share data."""

import logging
from decimal import Decimal, InvalidOperation
from fractions import Fraction
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple, Union

import pandas as pd

from app.exceptions import DomainError, EmptyInputError, ParseError, SchemaError
from app.schemas.empirics import EmpiricsReport, FeeRecord, PoolShareRow, PoolShareTable
from app.schemas.params import GameParams
from app.services.attack_cost_service import SATOSHI_PER_BITCOIN
from app.services.economics_service import EconomicsService, RELATIVELY_STRONG_RANGE

logger = logging.getLogger(__name__)

FEE_COLUMNS = ["week", "avg_block_fee_btc", "avg_tx_fee_btc", "tx_per_block"]
POOL_COLUMNS = ["pool", "blocks"]
DEVICE_COLUMNS = ["device", "hashrate_hs"]

NETWORK_HASHRATE_2022 = Decimal("2e20")

PathLike = Union[str, Path]


def btc_to_sat(value: str) -> int:
    """Exact BTC string to satoshi; more than 8 fraction digits is an error."""
    amount = Decimal(value.strip()) * SATOSHI_PER_BITCOIN
    if amount != amount.to_integral_value():
        raise ValueError(f"{value} BTC is not a whole number of satoshi")
    return int(amount)


def sat_to_btc(amount_sat: int) -> str:
    return f"{Decimal(amount_sat) / SATOSHI_PER_BITCOIN:.8f}"


class EmpiricsService:
    """Parses the bundled CSV fixtures and turns them into game parameters."""

    def __init__(self, economics: Optional[EconomicsService] = None):
        self.economics = economics or EconomicsService()

    def _read_csv(self, path: PathLike, columns: List[str]) -> Tuple[pd.DataFrame, List[int]]:
        """Read a commented CSV as strings, returning the frame and each row's file line."""
        path = Path(path)
        lines = path.read_text(encoding="utf-8").splitlines()
        data_lines = [i + 1 for i, line in enumerate(lines) if line.strip() and not line.lstrip().startswith("#")]
        try:
            frame = pd.read_csv(path, dtype=str, keep_default_na=False, comment="#", skipinitialspace=True)
        except pd.errors.EmptyDataError:
            raise SchemaError(f"{path.name} is empty; expected header {','.join(columns)}")
        except pd.errors.ParserError as e:
            raise ParseError(f"{path.name}: {e}")
        header = [c.strip() for c in frame.columns]
        if header != columns:
            raise SchemaError(f"{path.name} header {','.join(header)} does not match {','.join(columns)}")
        frame.columns = header
        return frame, data_lines[1:]

    def load_fee_csv(self, path: PathLike) -> List[FeeRecord]:
        """
        Load weekly fee averages.

        Args:
            path: CSV with columns week,avg_block_fee_btc,avg_tx_fee_btc,tx_per_block

        Returns:
            One FeeRecord per week, amounts in satoshi

        Raises:
            SchemaError: missing or wrong header
            ParseError: a row that cannot be converted, with its line number
        """
        frame, lines = self._read_csv(path, FEE_COLUMNS)
        records = []
        for line, row in zip(lines, frame.itertuples(index=False)):
            try:
                record = FeeRecord(
                    period=row.week.strip(),
                    avg_block_fee_sat=btc_to_sat(row.avg_block_fee_btc),
                    avg_tx_fee_sat=btc_to_sat(row.avg_tx_fee_btc),
                    avg_tx_per_block=Decimal(row.tx_per_block.strip()),
                )
            except (InvalidOperation, ValueError) as e:
                raise ParseError(f"bad fee row: {e}", line=line)
            if not record.is_consistent:
                logger.warning(f"{record.period}: block fee is not tx fee times tx count within 10%")
            records.append(record)
        logger.info(f"Loaded {len(records)} fee records from {path}")
        return records

    def load_pool_csv(self, path: PathLike) -> List[Tuple[str, int]]:
        frame, lines = self._read_csv(path, POOL_COLUMNS)
        counts = []
        for line, row in zip(lines, frame.itertuples(index=False)):
            try:
                counts.append((row.pool.strip(), int(row.blocks)))
            except ValueError:
                raise ParseError(f"block count '{row.blocks}' is not an integer", line=line)
        return counts

    def load_devices(self, path: PathLike) -> Dict[str, Decimal]:
        frame, lines = self._read_csv(path, DEVICE_COLUMNS)
        devices = {}
        for line, row in zip(lines, frame.itertuples(index=False)):
            try:
                devices[row.device.strip()] = Decimal(row.hashrate_hs.strip())
            except InvalidOperation:
                raise ParseError(f"hashrate '{row.hashrate_hs}' is not a number", line=line)
        return devices

    def pool_shares(self, block_counts: Sequence[Tuple[str, int]]) -> PoolShareTable:
        """
        Share of mined blocks per pool, largest first.

        Raises:
            EmptyInputError: no pools or no blocks
            DomainError: negative count
        """
        if any(count < 0 for _, count in block_counts):
            raise DomainError("block counts must be non-negative")
        total = sum(count for _, count in block_counts)
        if not block_counts or total == 0:
            raise EmptyInputError("pool shares need at least one mined block")
        ordered = sorted(block_counts, key=lambda item: -item[1])
        rows = [
            PoolShareRow(pool=name, blocks=count, share=float(Fraction(count, total)))
            for name, count in ordered
        ]
        return PoolShareTable(rows=rows, total_blocks=total)

    def estimate_lambda_min(self, device_hashrate, network_hashrate=NETWORK_HASHRATE_2022) -> float:
        """Mining power of a single device against the whole network."""
        device = Decimal(str(device_hashrate))
        network = Decimal(str(network_hashrate))
        if device <= 0 or network <= 0:
            raise DomainError("hashrates must be positive")
        if device > network:
            raise DomainError("device hashrate exceeds the network hashrate")
        return float(device / network)

    def derive_game_params(
        self,
        fees: Sequence[FeeRecord],
        shares: PoolShareTable,
        B: int,
        R: int,
        T: int,
        f1: int,
        f2: int,
        P: int = 0,
        p1_creator: Optional[int] = None,
    ) -> GameParams:
        """
        Game parameters whose fees and powers come from the data.

        f̄ is the mean weekly transaction fee, m the mean transactions per block
        (both rounded half up), and every pool is one player.
        """
        if not fees:
            raise EmptyInputError("no fee records")
        if not shares.rows:
            raise EmptyInputError("no pool shares")
        count = Decimal(len(fees))
        f_bar = (sum(Decimal(r.avg_tx_fee_sat) for r in fees) / count).to_integral_value(rounding="ROUND_HALF_UP")
        m = (sum(r.avg_tx_per_block for r in fees) / count).to_integral_value(rounding="ROUND_HALF_UP")
        return GameParams(
            lambdas=[row.share for row in shares.rows],
            R=R,
            T=T,
            B=B,
            m=int(m),
            f_bar=int(f_bar),
            f1=f1,
            f2=f2,
            penalty_P=P,
            p1_creator=p1_creator,
            strict_distribution=True,
        )

    def report(
        self,
        fee_path: PathLike,
        pool_path: PathLike,
        device_path: Optional[PathLike] = None,
        network_hashrate=NETWORK_HASHRATE_2022,
    ) -> EmpiricsReport:
        """Fee statistics, pool shares and λ estimates of the 2022 data."""
        fees = self.load_fee_csv(fee_path)
        if not fees:
            raise EmptyInputError("fee file has no rows")
        shares = self.pool_shares(self.load_pool_csv(pool_path))
        block_fees = [r.avg_block_fee_sat for r in fees]
        tx_fees = [r.avg_tx_fee_sat for r in fees]
        per_block = sum(r.avg_tx_per_block for r in fees) / len(fees)

        devices = self.load_devices(device_path) if device_path else {}
        low, high = RELATIVELY_STRONG_RANGE
        strongest = shares.rows[0]
        issues = self.economics.distribution_issues(tuple(row.share for row in shares.rows))
        return EmpiricsReport(
            weeks=len(fees),
            mean_block_fee_sat=round(Fraction(sum(block_fees), len(fees))),
            min_block_fee_sat=min(block_fees),
            max_block_fee_sat=max(block_fees),
            mean_tx_fee_sat=round(Fraction(sum(tx_fees), len(fees))),
            min_tx_fee_sat=min(tx_fees),
            max_tx_fee_sat=max(tx_fees),
            mean_tx_per_block=int(per_block.to_integral_value(rounding="ROUND_HALF_UP")),
            inconsistent_weeks=[r.period for r in fees if not r.is_consistent],
            shares=shares,
            lambda_s=strongest.share,
            strongest_pool=strongest.pool,
            relatively_strong_pools=[row.pool for row in shares.rows if low < row.share < high],
            lambda_min_estimates={
                name: self.estimate_lambda_min(rate, network_hashrate) for name, rate in devices.items()
            },
            strict_violations=[code for code, _ in issues],
        )
