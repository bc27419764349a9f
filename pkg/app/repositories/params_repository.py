"""Repository for flat key-value game parameter files."""

import logging
from decimal import Decimal, InvalidOperation
from pathlib import Path
from typing import Dict, Optional, Union

from dotenv import dotenv_values
from pydantic import ValidationError

from app.exceptions import InvalidParamsError
from app.repositories.base import FileRepository
from app.schemas.params import GameParams

logger = logging.getLogger(__name__)

MONEY_KEYS = {
    "B": "B",
    "f_bar": "f_bar",
    "f1": "f1",
    "f2": "f2",
    "f_bar_p1": "f_bar_p1",
    "f_bar_p2": "f_bar_p2",
    "penalty": "penalty_P",
}
INT_KEYS = ("R", "T", "m", "c_p1", "c_p2")
BOOL_KEYS = ("strict_distribution", "charge_special_fees")
SATOSHI_PER_BITCOIN = Decimal(100_000_000)


class ParamsRepository(FileRepository):
    """Loads and stores GameParams as `key=value` files."""

    def parse(self, values: Dict[str, Optional[str]], source: str = "<params>") -> GameParams:
        """
        Build GameParams from raw key-value pairs.

        Args:
            values: Keys and string values as read from the file
            source: Name used in error messages

        Returns:
            Validated GameParams

        Raises:
            InvalidParamsError: unknown keys, bad numbers, duplicate money units or invariant violations
        """
        data: Dict[str, object] = {}
        problems = []
        seen_money = {}
        for key, raw in values.items():
            raw = (raw or "").strip()
            try:
                if key == "lambda":
                    data["lambda"] = [float(x) for x in raw.split(",") if x.strip()]
                elif key in INT_KEYS:
                    data[key] = int(raw)
                elif key in BOOL_KEYS:
                    data[key] = raw.lower() in ("1", "true", "yes", "on")
                elif key == "p1_creator":
                    data[key] = int(raw) if raw else None
                elif key.endswith(("_sat", "_btc")) and key[:-4] in MONEY_KEYS:
                    name, unit = key[:-4], key[-3:]
                    if name in seen_money:
                        problems.append(f"{name} given as both {seen_money[name]} and {unit}")
                        continue
                    seen_money[name] = unit
                    amount = Decimal(raw) if unit == "sat" else Decimal(raw) * SATOSHI_PER_BITCOIN
                    if amount != amount.to_integral_value():
                        problems.append(f"{key}={raw} is not a whole number of satoshi")
                        continue
                    data[MONEY_KEYS[name]] = int(amount)
                else:
                    problems.append(f"unknown key '{key}'")
            except (ValueError, InvalidOperation):
                problems.append(f"{key}={raw} is not a valid value")
        if problems:
            raise InvalidParamsError(f"{source}: {'; '.join(problems)}", violations=problems)
        try:
            return GameParams.model_validate(data)
        except ValidationError as e:
            messages = [f"{'.'.join(map(str, err['loc'])) or 'params'}: {err['msg']}" for err in e.errors()]
            raise InvalidParamsError(f"{source}: {'; '.join(messages)}", violations=messages)

    def load(self, path: Union[str, Path]) -> GameParams:
        """Read a params file; a bare file name is also looked up among the bundled fixtures."""
        resolved = self.resolve(path)
        if not resolved.is_file():
            raise FileNotFoundError(f"Params file not found: {path}")
        logger.info(f"Loading game parameters from {resolved}")
        return self.parse(dotenv_values(resolved), source=resolved.name)

    def dumps(self, params: GameParams) -> str:
        lines = [f"lambda={','.join(repr(x) for x in params.lambdas)}"]
        lines += [f"{key}={getattr(params, key)}" for key in INT_KEYS]
        for name, field in MONEY_KEYS.items():
            lines.append(f"{name}_sat={getattr(params, field)}")
        lines.append(f"p1_creator={'' if params.p1_creator is None else params.p1_creator}")
        lines += [f"{key}={str(getattr(params, key)).lower()}" for key in BOOL_KEYS]
        return "\n".join(lines) + "\n"

    def save(self, params: GameParams, path: Union[str, Path]) -> Path:
        return self.write_text(path, self.dumps(params))
