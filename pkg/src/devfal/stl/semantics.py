"""Quantitative semantics over uniformly sampled signals.

The satisfaction value of a formula at sample index t follows the usual
recursive definition: a predicate contributes its margin, negation flips the
sign, and/or take min/max, bounded temporal operators take inf/sup of the
child values over the shifted window, and until takes the sup over witness
times of min(right value, inf of left values up to the witness).

Interval bounds in seconds map to sample indices by round(bound / dt).  A
window that reaches past the end of the signal is an error, never an empty
inf/sup.

Two evaluators are provided.  ``evaluate`` computes satisfaction arrays
bottom-up with numpy sliding windows and is the production path.
``evaluate_reference`` is a transcription of the recursive definition, one
time index at a time; it exists as an oracle to test ``evaluate`` against and
makes no attempt to be fast beyond caching repeated (node, index) calls.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

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
    Not,
    Or,
    Predicate,
    Scale,
    Sub,
    Until,
)

__all__ = [
    "Signal",
    "evaluate",
    "evaluate_reference",
    "UnknownChannelError",
    "HorizonError",
]


class UnknownChannelError(KeyError):
    """A formula reads a channel the signal does not carry."""


class HorizonError(ValueError):
    """Evaluation would need samples past the end of the signal."""


@dataclass(frozen=True, eq=False)
class Signal:
    """Uniformly sampled multi-channel signal.

    samples has shape (n_samples, n_channels); row i is the state at time
    i * dt.  The array is copied and frozen so signals can be shared across
    threads.
    """

    dt: float
    channels: tuple[str, ...]
    samples: np.ndarray = field(repr=False)

    def __post_init__(self) -> None:
        if self.dt <= 0:
            raise ValueError(f"dt must be positive, got {self.dt}")
        object.__setattr__(self, "channels", tuple(self.channels))
        arr = np.asarray(self.samples, dtype=float)
        if arr.ndim != 2:
            raise ValueError(f"samples must be 2-D, got shape {arr.shape}")
        if arr.shape[0] < 1:
            raise ValueError("signal needs at least one sample")
        if arr.shape[1] != len(self.channels):
            raise ValueError(
                f"{arr.shape[1]} sample columns for {len(self.channels)} channels"
            )
        if len(set(self.channels)) != len(self.channels):
            raise ValueError(f"duplicate channel names: {self.channels}")
        arr = arr.copy()
        arr.flags.writeable = False
        object.__setattr__(self, "samples", arr)

    def __len__(self) -> int:
        return self.samples.shape[0]

    def column(self, name: str) -> np.ndarray:
        try:
            return self.samples[:, self.channels.index(name)]
        except ValueError:
            raise UnknownChannelError(
                f"channel {name!r} not in signal channels {self.channels}"
            ) from None

    def value(self, name: str, t: int) -> float:
        return float(self.column(name)[t])


def _window_indices(interval: Interval, dt: float) -> tuple[int, int]:
    return round(interval.start / dt), round(interval.end / dt)


# ---------------------------------------------------------------------------
# production evaluator: bottom-up arrays
# ---------------------------------------------------------------------------


def _expr_array(e: Expr, sig: Signal) -> np.ndarray:
    if isinstance(e, Const):
        return np.full(len(sig), e.value)
    if isinstance(e, Channel):
        return sig.column(e.name)
    if isinstance(e, Add):
        return _expr_array(e.left, sig) + _expr_array(e.right, sig)
    if isinstance(e, Sub):
        return _expr_array(e.left, sig) - _expr_array(e.right, sig)
    if isinstance(e, Scale):
        return e.coef * _expr_array(e.arg, sig)
    if isinstance(e, Abs):
        return np.abs(_expr_array(e.arg, sig))
    raise TypeError(f"not an expression: {e!r}")


def _window_reduce(values: np.ndarray, lo: int, hi: int, kind: str) -> np.ndarray:
    # out[t] = reduce(values[t+lo : t+hi+1]); output only where the window fits
    n = values.shape[0] - hi
    if n <= 0:
        return np.empty(0)
    windows = sliding_window_view(values[lo:], hi - lo + 1)
    return windows.min(axis=1) if kind == "min" else windows.max(axis=1)


def _until_array(left: np.ndarray, right: np.ndarray, lo: int, hi: int) -> np.ndarray:
    # out[t] = max over k in [lo, hi] of min(right[t+k], min(left[t .. t+k]))
    n = min(left.shape[0], right.shape[0]) - hi
    if n <= 0:
        return np.empty(0)
    lw = sliding_window_view(left[: n + hi], hi + 1)
    rw = sliding_window_view(right[: n + hi], hi + 1)
    held = np.minimum.accumulate(lw, axis=1)
    return np.minimum(rw, held)[:, lo : hi + 1].max(axis=1)


def _sat_array(phi: Formula, sig: Signal) -> np.ndarray:
    """Satisfaction values for every index where the formula's windows fit."""
    if isinstance(phi, Predicate):
        return _expr_array(phi.margin, sig)
    if isinstance(phi, Not):
        return -_sat_array(phi.child, sig)
    if isinstance(phi, (And, Or)):
        left = _sat_array(phi.left, sig)
        right = _sat_array(phi.right, sig)
        n = min(left.shape[0], right.shape[0])
        op = np.minimum if isinstance(phi, And) else np.maximum
        return op(left[:n], right[:n])
    if isinstance(phi, (Always, Eventually)):
        lo, hi = _window_indices(phi.interval, sig.dt)
        child = _sat_array(phi.child, sig)
        return _window_reduce(child, lo, hi, "min" if isinstance(phi, Always) else "max")
    if isinstance(phi, Until):
        lo, hi = _window_indices(phi.interval, sig.dt)
        return _until_array(_sat_array(phi.left, sig), _sat_array(phi.right, sig), lo, hi)
    raise TypeError(f"not a formula: {phi!r}")


def evaluate(phi: Formula, sig: Signal, t: int = 0) -> float:
    """Satisfaction value of phi on sig at sample index t.

    Positive means satisfied, negative means violated, with magnitude the
    margin in the predicate units.  Raises HorizonError when any temporal
    window shifted by t reaches past the last sample.
    """
    if t < 0 or t >= len(sig):
        raise HorizonError(f"index {t} outside signal of {len(sig)} samples")
    values = _sat_array(phi, sig)
    if t >= values.shape[0]:
        raise HorizonError(
            f"formula needs {len(sig) - values.shape[0]} samples past index {t} "
            f"but the signal ends at index {len(sig) - 1}"
        )
    return float(values[t])


# ---------------------------------------------------------------------------
# reference evaluator: direct recursion
# ---------------------------------------------------------------------------


def _expr_at(e: Expr, sig: Signal, t: int) -> float:
    if isinstance(e, Const):
        return float(e.value)
    if isinstance(e, Channel):
        return sig.value(e.name, t)
    if isinstance(e, Add):
        return _expr_at(e.left, sig, t) + _expr_at(e.right, sig, t)
    if isinstance(e, Sub):
        return _expr_at(e.left, sig, t) - _expr_at(e.right, sig, t)
    if isinstance(e, Scale):
        return e.coef * _expr_at(e.arg, sig, t)
    if isinstance(e, Abs):
        return abs(_expr_at(e.arg, sig, t))
    raise TypeError(f"not an expression: {e!r}")


def _ref(phi: Formula, sig: Signal, t: int, memo: dict) -> float:
    key = (id(phi), t)
    hit = memo.get(key)
    if hit is not None:
        return hit
    if t >= len(sig):
        raise HorizonError(f"index {t} outside signal of {len(sig)} samples")
    if isinstance(phi, Predicate):
        value = _expr_at(phi.margin, sig, t)
    elif isinstance(phi, Not):
        value = -_ref(phi.child, sig, t, memo)
    elif isinstance(phi, And):
        value = min(_ref(phi.left, sig, t, memo), _ref(phi.right, sig, t, memo))
    elif isinstance(phi, Or):
        value = max(_ref(phi.left, sig, t, memo), _ref(phi.right, sig, t, memo))
    elif isinstance(phi, Always):
        lo, hi = _window_indices(phi.interval, sig.dt)
        value = min(_ref(phi.child, sig, u, memo) for u in range(t + lo, t + hi + 1))
    elif isinstance(phi, Eventually):
        lo, hi = _window_indices(phi.interval, sig.dt)
        value = max(_ref(phi.child, sig, u, memo) for u in range(t + lo, t + hi + 1))
    elif isinstance(phi, Until):
        lo, hi = _window_indices(phi.interval, sig.dt)
        best = -np.inf
        for t1 in range(t + lo, t + hi + 1):
            step = min(
                _ref(phi.right, sig, t1, memo),
                min(_ref(phi.left, sig, t2, memo) for t2 in range(t, t1 + 1)),
            )
            best = max(best, step)
        value = float(best)
    else:
        raise TypeError(f"not a formula: {phi!r}")
    memo[key] = value
    return value


def evaluate_reference(phi: Formula, sig: Signal, t: int = 0) -> float:
    """Oracle evaluator: the recursive definition, computed index by index."""
    if t < 0 or t >= len(sig):
        raise HorizonError(f"index {t} outside signal of {len(sig)} samples")
    return _ref(phi, sig, t, {})
