"""Minimal computer-algebra core: parse, print, evaluate, differentiate and
simplify scalar expression trees."""

from .algebra import Algebra, WorkLimitExceeded, differentiate, simplify
from .evaluate import EvaluationError, UnboundIdentifierError, evaluate, evaluate_many
from .nodes import (COORDINATES, FUNCTIONS, Expr, as_expr, const, dag_size, free_symbols,
                    node_count, num, substitute, var)
from .parser import ExprSyntaxError, parse_bindings, parse_expression
from .printer import to_raw_text, to_text, to_text_shared

__all__ = [
    "Algebra", "COORDINATES", "EvaluationError", "Expr", "ExprSyntaxError", "FUNCTIONS",
    "UnboundIdentifierError", "WorkLimitExceeded", "as_expr", "const", "dag_size",
    "differentiate", "evaluate", "evaluate_many", "free_symbols", "node_count", "num",
    "parse_bindings", "parse_expression", "simplify", "substitute", "to_raw_text", "to_text",
    "to_text_shared", "var",
]
