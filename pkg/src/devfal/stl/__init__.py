"""Signal temporal logic: formula trees, concrete syntax, and monitoring."""

from .formula import (
    Abs,
    Add,
    Always,
    And,
    Channel,
    Const,
    Eventually,
    Expr,
    Formula,
    Interval,
    IntervalError,
    Not,
    Or,
    Predicate,
    Scale,
    Sub,
    Until,
    channels,
    horizon,
    to_text,
)
from .parser import FormulaSyntaxError, parse
from .semantics import (
    HorizonError,
    Signal,
    UnknownChannelError,
    evaluate,
    evaluate_reference,
)

__all__ = [
    "Abs",
    "Add",
    "Always",
    "And",
    "Channel",
    "Const",
    "Eventually",
    "Expr",
    "Formula",
    "FormulaSyntaxError",
    "HorizonError",
    "Interval",
    "IntervalError",
    "Not",
    "Or",
    "Predicate",
    "Scale",
    "Signal",
    "Sub",
    "UnknownChannelError",
    "Until",
    "channels",
    "evaluate",
    "evaluate_reference",
    "horizon",
    "parse",
    "to_text",
]
