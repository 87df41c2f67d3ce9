"""Abstract syntax for a bounded-time signal temporal logic.

Formulas are immutable trees built from comparison predicates over signal
channels, boolean connectives, and time-bounded temporal operators.  All
temporal bounds are in seconds; conversion to sample indices happens at
evaluation time against a concrete signal.

Predicates are kept in the normalized form ``mu > 0``: every comparison is
rewritten at construction so that the predicate holds exactly when its margin
expression is positive.  This makes the quantitative semantics a single rule
(the margin itself) instead of four.
"""

from __future__ import annotations

import math
from dataclasses import dataclass


class IntervalError(ValueError):
    """Raised for malformed temporal intervals (a < 0 or a > b)."""


# ---------------------------------------------------------------------------
# arithmetic expressions over channels
# ---------------------------------------------------------------------------


class Expr:
    """Base class for margin expressions (affine terms and abs)."""

    __slots__ = ()


@dataclass(frozen=True)
class Const(Expr):
    value: float

    def __str__(self) -> str:
        return repr(float(self.value))


@dataclass(frozen=True)
class Channel(Expr):
    name: str

    def __str__(self) -> str:
        return self.name


@dataclass(frozen=True)
class Add(Expr):
    left: Expr
    right: Expr

    def __str__(self) -> str:
        return f"{self.left} + {_paren_additive(self.right)}"


@dataclass(frozen=True)
class Sub(Expr):
    left: Expr
    right: Expr

    def __str__(self) -> str:
        return f"{self.left} - {_paren_additive(self.right)}"


@dataclass(frozen=True)
class Scale(Expr):
    """A numeric coefficient times a sub-expression."""

    coef: float
    arg: Expr

    def __str__(self) -> str:
        if isinstance(self.arg, (Scale, Const)):
            # the grammar allows one coefficient per term; nested or constant
            # products re-parse folded, so printing them cannot round-trip
            raise ValueError(
                "cannot print a scaled constant or nested scaling; "
                "fold the coefficients first"
            )
        return f"{float(self.coef)!r} * {_paren_additive(self.arg)}"


@dataclass(frozen=True)
class Abs(Expr):
    arg: Expr

    def __str__(self) -> str:
        return f"abs({self.arg})"


def _paren_additive(e: Expr) -> str:
    # The expression grammar has no parentheses, so additive sub-terms on the
    # right of +/- (or under *) are re-associated instead of parenthesized.
    # Printing keeps the tree left-deep to round-trip exactly.
    if isinstance(e, (Add, Sub)):
        raise ValueError(
            "cannot print a right-nested additive expression; "
            "expression trees must be left-associated"
        )
    return str(e)


def expr_channels(e: Expr) -> set[str]:
    if isinstance(e, Channel):
        return {e.name}
    if isinstance(e, Const):
        return set()
    if isinstance(e, (Add, Sub)):
        return expr_channels(e.left) | expr_channels(e.right)
    if isinstance(e, (Scale, Abs)):
        return expr_channels(e.arg)
    raise TypeError(f"not an expression: {e!r}")


# ---------------------------------------------------------------------------
# temporal intervals
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Interval:
    """Closed time interval [start, end] in seconds, 0 <= start <= end."""

    start: float
    end: float

    def __post_init__(self) -> None:
        if not (math.isfinite(self.start) and math.isfinite(self.end)):
            raise IntervalError(f"interval bounds must be finite, got [{self.start}, {self.end}]")
        if self.start < 0:
            raise IntervalError(f"interval start must be >= 0, got {self.start}")
        if self.start > self.end:
            raise IntervalError(
                f"interval start must not exceed end, got [{self.start}, {self.end}]"
            )

    def __str__(self) -> str:
        return f"[{float(self.start)!r},{float(self.end)!r}]"


# ---------------------------------------------------------------------------
# formulas
# ---------------------------------------------------------------------------


class Formula:
    """Base class for formulas.  Instances are immutable and comparable."""

    __slots__ = ()

    def __invert__(self) -> "Formula":
        return Not(self)

    def __and__(self, other: "Formula") -> "Formula":
        return And(self, other)

    def __or__(self, other: "Formula") -> "Formula":
        return Or(self, other)


@dataclass(frozen=True)
class Predicate(Formula):
    """Atomic predicate, satisfied iff ``margin > 0`` at the sample."""

    margin: Expr

    def __str__(self) -> str:
        return f"{self.margin} > 0.0"


@dataclass(frozen=True)
class Not(Formula):
    child: Formula

    def __str__(self) -> str:
        return f"not ({self.child})"


@dataclass(frozen=True)
class And(Formula):
    left: Formula
    right: Formula

    def __str__(self) -> str:
        return f"({self.left}) and ({self.right})"


@dataclass(frozen=True)
class Or(Formula):
    left: Formula
    right: Formula

    def __str__(self) -> str:
        return f"({self.left}) or ({self.right})"


@dataclass(frozen=True)
class Always(Formula):
    interval: Interval
    child: Formula

    def __str__(self) -> str:
        return f"G{self.interval} ({self.child})"


@dataclass(frozen=True)
class Eventually(Formula):
    interval: Interval
    child: Formula

    def __str__(self) -> str:
        return f"F{self.interval} ({self.child})"


@dataclass(frozen=True)
class Until(Formula):
    interval: Interval
    left: Formula
    right: Formula

    def __str__(self) -> str:
        return f"({self.left}) U{self.interval} ({self.right})"


def channels(phi: Formula) -> set[str]:
    """Set of channel names the formula reads."""
    if isinstance(phi, Predicate):
        return expr_channels(phi.margin)
    if isinstance(phi, Not):
        return channels(phi.child)
    if isinstance(phi, (And, Or)):
        return channels(phi.left) | channels(phi.right)
    if isinstance(phi, (Always, Eventually)):
        return channels(phi.child)
    if isinstance(phi, Until):
        return channels(phi.left) | channels(phi.right)
    raise TypeError(f"not a formula: {phi!r}")


def horizon(phi: Formula) -> float:
    """Time depth in seconds a signal must cover past t to evaluate at t."""
    if isinstance(phi, Predicate):
        return 0.0
    if isinstance(phi, Not):
        return horizon(phi.child)
    if isinstance(phi, (And, Or)):
        return max(horizon(phi.left), horizon(phi.right))
    if isinstance(phi, (Always, Eventually)):
        return phi.interval.end + horizon(phi.child)
    if isinstance(phi, Until):
        return phi.interval.end + max(horizon(phi.left), horizon(phi.right))
    raise TypeError(f"not a formula: {phi!r}")


def to_text(phi: Formula) -> str:
    """Concrete-syntax rendering; parsing it back yields an equal formula."""
    return str(phi)
