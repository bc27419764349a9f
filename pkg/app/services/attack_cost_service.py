"""Service for closed-form bribe bounds, penalty sizing and fiat conversion."""

import logging
import math
from decimal import ROUND_HALF_UP, Decimal, localcontext
from fractions import Fraction
from typing import List, Optional, Union

from app.core.config import get_settings
from app.exceptions import DomainError
from app.schemas.cost import BoundKind, CostQuote, CostRequest

logger = logging.getLogger(__name__)

SATOSHI_PER_BITCOIN = 100_000_000
_CENT = Decimal("0.01")
_PRECISION = 50

Number = Union[int, float, str, Fraction, Decimal]


def exact(value: Number) -> Fraction:
    """Exact rational of a number, reading floats through their shortest decimal form."""
    if isinstance(value, Fraction):
        return value
    if isinstance(value, float):
        return Fraction(repr(value))
    return Fraction(value)


def lock_weight(T: int) -> Decimal:
    """0.05^(T/2), the probability weight of a T-round hold-out."""
    with localcontext() as ctx:
        ctx.prec = _PRECISION
        return Decimal("0.05") ** (Decimal(T) / 2)


class AttackCostService:
    """Attack-cost calculators of the legacy bribe and of Bribe & Fork."""

    def legacy_bribe_bound(self, f1: int, f: int, lambda_min: Number) -> int:
        """ceil((f1 - f) / λ_min): the bribe needed when every miner must be bribed."""
        lam = exact(lambda_min)
        if f1 <= f:
            raise DomainError(f"f1 ({f1}) must exceed f ({f})")
        if not 0 < lam <= 1:
            raise DomainError(f"lambda_min must lie in (0, 1], got {lambda_min}")
        return math.ceil(Fraction(f1 - f) / lam)

    def bf_bribe_bound_general_raw(
        self, f_bar: int, f1: int, f: int, lambda_s: Number, T: int,
        c_p1: int = 1, c_p2: int = 1, f_bar_p1: Optional[int] = None, f_bar_p2: Optional[int] = None,
    ) -> Decimal:
        f_bar_p1 = f1 - f if f_bar_p1 is None else f_bar_p1
        f_bar_p2 = f_bar if f_bar_p2 is None else f_bar_p2
        if f1 <= f:
            raise DomainError(f"f1 ({f1}) must exceed f ({f})")
        with localcontext() as ctx:
            ctx.prec = _PRECISION
            lam = Decimal(str(lambda_s))
            denominator = lam - lock_weight(T)
            if denominator <= 0:
                raise DomainError(f"lambda_s={lambda_s} does not exceed 0.05^(T/2) for T={T}")
            numerator = Decimal(c_p1 * f_bar_p1 + c_p1 * f_bar + c_p2 * f_bar_p2 + (f1 - f))
            return numerator / denominator + Decimal(c_p2 * f_bar)

    def bf_bribe_bound_general(
        self, f_bar: int, f1: int, f: int, lambda_s: Number, T: int,
        c_p1: int = 1, c_p2: int = 1, f_bar_p1: Optional[int] = None, f_bar_p2: Optional[int] = None,
    ) -> int:
        """
        Lower bound on f2 - f that makes the strongest miner wait for txs2 and post the deposit.

        Args:
            f_bar: Average single-transaction fee (sat)
            f1: Fee total of the revocation block (sat)
            f: Fee total of an average block (sat)
            lambda_s: Mining power of the strongest miner
            T: Timelock in rounds
            c_p1, c_p2: Slots taken by the deposit transactions
            f_bar_p1, f_bar_p2: Per-slot fees of the deposit transactions (sat)

        Returns:
            The bound rounded up to whole satoshi
        """
        raw = self.bf_bribe_bound_general_raw(f_bar, f1, f, lambda_s, T, c_p1, c_p2, f_bar_p1, f_bar_p2)
        return int(raw.to_integral_value(rounding="ROUND_CEILING"))

    def bf_bribe_bound_simplified(self, f_bar: int, f1: int, f: int, lambda_s: Number) -> int:
        """ceil((2f̄ + 2(f1 - f)) / λ_s + f̄)."""
        lam = exact(lambda_s)
        if not 0 < lam <= 1:
            raise DomainError(f"lambda_s must lie in (0, 1], got {lambda_s}")
        if f1 < f:
            raise DomainError(f"f1 ({f1}) must not be below f ({f})")
        return math.ceil(Fraction(2 * f_bar + 2 * (f1 - f)) / lam + f_bar)

    def feasibility_ceiling(self, f1: int, f: int, lambda_j: Number) -> int:
        """floor((f1 - f) / λ_j): the bribe must stay below this for a 1-2% miner to still prefer txs1."""
        lam = exact(lambda_j)
        if not 0 < lam <= 1:
            raise DomainError(f"lambda_j must lie in (0, 1], got {lambda_j}")
        if f1 < f:
            raise DomainError(f"f1 ({f1}) must not be below f ({f})")
        return math.floor(Fraction(f1 - f) / lam)

    def penalty_floor(self, lambda_s: Number, f: int, B: int) -> int:
        """Smallest deposit strictly above λ_s(f + B)."""
        lam = exact(lambda_s)
        if lam < 0 or f < 0 or B < 0:
            raise DomainError("penalty floor needs non-negative inputs")
        return math.floor(lam * (f + B)) + 1

    def to_fiat(self, amount_sat: int, price_per_btc: Number) -> Decimal:
        """Satoshi amount in currency units, rounded to cents."""
        price = Decimal(str(price_per_btc))
        if price <= 0:
            raise DomainError(f"price must be positive, got {price_per_btc}")
        return (Decimal(amount_sat) * price / SATOSHI_PER_BITCOIN).quantize(_CENT, rounding=ROUND_HALF_UP)

    def minimal_bribe(self, raw_bound: Number) -> int:
        """Smallest whole-satoshi value strictly above a real-valued bound."""
        return math.floor(exact(raw_bound) if not isinstance(raw_bound, Decimal) else raw_bound) + 1

    def cost_reduction_ratio(self, legacy: int, bribe_and_fork: int) -> Fraction:
        if bribe_and_fork <= 0:
            raise DomainError("Bribe & Fork bound must be positive")
        return Fraction(legacy, bribe_and_fork)

    def quotes(self, request: CostRequest) -> List[CostQuote]:
        """
        All five cost quotes for one set of inputs.

        Returns:
            Legacy, general, simplified, ceiling and penalty quotes with fiat values
        """
        note = None
        lambda_s = request.lambda_s
        if lambda_s is None:
            lambda_s = get_settings().DEFAULT_LAMBDA_S
            note = f"lambda_s defaulted to {lambda_s}: the largest 2022 pool held over 20% of blocks"
            logger.info(note)

        f1 = request.f + request.f1_minus_f
        f = request.f
        price = request.price
        echo = {
            "f_bar": str(request.f_bar), "f1": str(f1), "f": str(f), "B": str(request.B),
            "lambda_min": str(request.lambda_min), "lambda_s": str(lambda_s),
            "lambda_j": str(request.lambda_j), "T": str(request.T),
        }

        legacy = self.legacy_bribe_bound(f1, f, request.lambda_min)
        general_raw = self.bf_bribe_bound_general_raw(request.f_bar, f1, f, lambda_s, request.T)
        general = int(general_raw.to_integral_value(rounding="ROUND_CEILING"))
        simplified = self.bf_bribe_bound_simplified(request.f_bar, f1, f, lambda_s)
        ceiling = self.feasibility_ceiling(f1, f, request.lambda_j)
        penalty = self.penalty_floor(lambda_s, f, request.B)

        def quote(kind: BoundKind, value: int, raw: float, extra: Optional[str] = None) -> CostQuote:
            return CostQuote(
                bound_kind=kind, value_sat=value, raw_value=raw, inputs=echo,
                fiat_value=self.to_fiat(value, price), note=extra,
            )

        return [
            quote(BoundKind.LEGACY, legacy, float(Fraction(f1 - f) / exact(request.lambda_min))),
            quote(BoundKind.BF_GENERAL, general, float(general_raw), note),
            quote(BoundKind.BF_SIMPLIFIED, simplified,
                  float(Fraction(2 * request.f_bar + 2 * (f1 - f)) / exact(lambda_s) + request.f_bar), note),
            quote(BoundKind.FEASIBILITY_CEILING, ceiling, float(Fraction(f1 - f) / exact(request.lambda_j))),
            quote(BoundKind.PENALTY_FLOOR, penalty, float(exact(lambda_s) * (f + request.B)), note),
        ]
