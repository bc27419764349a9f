"""Immutable value types of the mining game."""

from dataclasses import dataclass, field, replace
from enum import Enum, IntEnum
from typing import Optional, Tuple


class TxSetKind(IntEnum):
    """The five transaction sets a block can house. Ordinal order is the tie-break order."""

    UNRELATED = 0
    TXS1 = 1
    TXS2 = 2
    TXS_P1 = 3
    TXS_P2 = 4

    @property
    def label(self) -> str:
        return _KIND_LABELS[self]


_KIND_LABELS = {
    TxSetKind.UNRELATED: "Unrelated",
    TxSetKind.TXS1: "Txs1",
    TxSetKind.TXS2: "Txs2",
    TxSetKind.TXS_P1: "TxsP1",
    TxSetKind.TXS_P2: "TxsP2",
}


class Decision(str, Enum):
    CONTINUE = "continue"
    FORK = "fork"


@dataclass(frozen=True, slots=True)
class Block:
    txset: TxSetKind
    winner: int


@dataclass(frozen=True, slots=True)
class Chain:
    """One mined chain: its blocks, the round it was created in and its id."""

    blocks: Tuple[Block, ...] = ()
    created_round: int = 0
    chain_id: int = 0

    def __len__(self) -> int:
        return len(self.blocks)

    @property
    def last(self) -> Optional[Block]:
        return self.blocks[-1] if self.blocks else None

    def contains(self, kind: TxSetKind) -> bool:
        return any(block.txset is kind for block in self.blocks)

    def prefix(self) -> "Chain":
        """The chain without its last block (the base a fork builds on)."""
        return replace(self, blocks=self.blocks[:-1])

    def kinds(self) -> Tuple[TxSetKind, ...]:
        return tuple(block.txset for block in self.blocks)


@dataclass(frozen=True, slots=True)
class GlobalState:
    """The set of currently mined chains, kept ordered by chain id."""

    chains: Tuple[Chain, ...] = field(default_factory=lambda: (Chain(),))
    round: int = 1
    next_chain_id: int = 1

    def chain(self, chain_id: int) -> Optional[Chain]:
        for candidate in self.chains:
            if candidate.chain_id == chain_id:
                return candidate
        return None

    def longest(self) -> Chain:
        """The oldest of the longest chains: max length, then (created_round, chain_id)."""
        return min(self.chains, key=lambda c: (-len(c.blocks), c.created_round, c.chain_id))

    def advance(self) -> "GlobalState":
        return replace(self, round=self.round + 1)

    def describe(self) -> str:
        parts = []
        for chain in self.chains:
            blocks = ",".join(f"{b.txset.label}@{b.winner}" for b in chain.blocks)
            parts.append(f"#{chain.chain_id}[{blocks}]")
        return f"r{self.round} " + " ".join(parts)


@dataclass(frozen=True, slots=True)
class Action:
    target_chain_id: int
    decision: Decision
    txset: TxSetKind

    def describe(self) -> str:
        return f"{self.decision.value}/{self.txset.label}@#{self.target_chain_id}"
