"""Set-theoretic types with row and presence polymorphism: subtyping, tallying, typing."""
from .core import (
    CLOSED, FIELD, OPEN, TYPE, ContractivityError, KindError, Node, Store, Var, row_kind,
)
from .subtype import is_empty, is_equiv, is_subtype

__all__ = [
    "CLOSED", "OPEN", "TYPE", "FIELD", "ContractivityError", "KindError", "Node", "Store",
    "Var", "row_kind", "is_empty", "is_equiv", "is_subtype",
]
