"""Random formula/signal generators shared by the STL and acceptance tests.

Temporal bounds are drawn as whole seconds with dt = 1, at most MAX_BOUND per
operator, so a depth-d formula needs at most d * MAX_BOUND + 1 samples; the
generators never produce a formula whose window leaves the signal.
"""

from __future__ import annotations

import numpy as np

from devfal.stl import (
    Abs,
    Add,
    Always,
    And,
    Channel,
    Const,
    Eventually,
    Formula,
    Interval,
    Not,
    Or,
    Predicate,
    Scale,
    Signal,
    Sub,
    Until,
    horizon,
)

MAX_BOUND = 5  # samples per temporal window at dt = 1


def make_signal(rng: np.random.Generator, names, n: int, dt: float = 1.0) -> Signal:
    samples = rng.uniform(-3.0, 3.0, size=(n, len(names)))
    return Signal(dt=dt, channels=tuple(names), samples=samples)


def _coef(rng: np.random.Generator) -> float:
    value = round(float(rng.uniform(-2.0, 2.0)), 3)
    return value if value else 1.0


def random_expr(rng: np.random.Generator, names, depth: int, printable: bool):
    """Random margin expression; printable=True keeps additive trees left-deep
    (the concrete grammar has no grouping parentheses)."""
    if depth <= 0 or rng.random() < 0.35:
        if rng.random() < 0.25:
            return Const(_coef(rng))
        return Channel(str(names[int(rng.integers(len(names)))]))
    kind = int(rng.integers(4))
    if kind in (0, 1):
        left = random_expr(rng, names, depth - 1, printable)
        right = random_expr(rng, names, depth - 1, printable)
        if printable:
            while isinstance(right, (Add, Sub)):
                right = random_expr(rng, names, depth - 2, printable)
        return Add(left, right) if kind == 0 else Sub(left, right)
    if kind == 2:
        arg = random_expr(rng, names, depth - 1, printable)
        if isinstance(arg, (Const, Scale)) or (printable and isinstance(arg, (Add, Sub))):
            arg = Channel(str(names[int(rng.integers(len(names)))]))
        return Scale(_coef(rng), arg)
    return Abs(random_expr(rng, names, depth - 1, printable))


def _interval(rng: np.random.Generator) -> Interval:
    a = int(rng.integers(0, MAX_BOUND))
    b = int(rng.integers(a, MAX_BOUND + 1))
    return Interval(float(a), float(b))


def random_formula(
    rng: np.random.Generator, names, depth: int, printable: bool = False
) -> Formula:
    if depth <= 0 or rng.random() < 0.25:
        return Predicate(random_expr(rng, names, 2, printable))
    kind = int(rng.integers(6))
    child = lambda: random_formula(rng, names, depth - 1, printable)  # noqa: E731
    if kind == 0:
        return Not(child())
    if kind == 1:
        return And(child(), child())
    if kind == 2:
        return Or(child(), child())
    if kind == 3:
        return Always(_interval(rng), child())
    if kind == 4:
        return Eventually(_interval(rng), child())
    return Until(_interval(rng), child(), child())


def signal_for(rng: np.random.Generator, phi: Formula, names, max_n: int = 64) -> Signal:
    """A signal long enough for phi at t = 0, at most max_n samples."""
    need = int(round(horizon(phi))) + 1
    n = int(rng.integers(need, max_n + 1)) if need <= max_n else need
    return make_signal(rng, names, n)


def until_bruteforce(sig: Signal, a: int, b: int, left, right, t: int = 0) -> float:
    """Triple-loop sup-min-inf evaluation of (left U[a,b] right) on margins.

    left/right are per-sample margin arrays; mirrors the recursive definition
    literally, one loop per quantifier.
    """
    best = -np.inf
    for t1 in range(t + a, t + b + 1):
        inner = np.inf
        for t2 in range(t, t1 + 1):
            inner = min(inner, left[t2])
        best = max(best, min(float(right[t1]), float(inner)))
    return float(best)
