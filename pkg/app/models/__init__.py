from .game import TxSetKind, Decision, Block, Chain, GlobalState, Action

__all__ = ["TxSetKind", "Decision", "Block", "Chain", "GlobalState", "Action"]
