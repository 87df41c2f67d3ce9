"""Budgeted ask/tell minimizers over axis-aligned boxes.

Two search strategies share one interface: uniform random sampling and
CMA-ES.  The caller owns evaluation; an optimizer only proposes candidate
batches (``ask``) and ranks told values (``tell``).  Proposals always lie in
the box, the total number of asked points never exceeds the budget, and all
randomness comes from one explicitly seeded generator, so a (kind, box, seed,
budget) tuple fully determines the proposal sequence.

The CMA-ES here is the standard (mu/mu_w, lambda) strategy with rank-one and
rank-mu covariance updates and cumulative step-size adaptation.  Candidates
falling outside the box are resampled up to ten times, then clipped
coordinate-wise.  Generations where every told value is identical carry no
ranking information and leave the search distribution untouched.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "SearchBox",
    "BudgetExhaustedError",
    "AskTellOptimizer",
    "RandomSearch",
    "CmaEs",
    "make_optimizer",
    "OPTIMIZER_KINDS",
    "population_size",
]

_RESAMPLE_TRIES = 10


class BudgetExhaustedError(RuntimeError):
    """ask() was called with no evaluations left in the budget."""


@dataclass(frozen=True)
class SearchBox:
    """Axis-aligned box with strictly positive widths in every coordinate."""

    lower: tuple[float, ...]
    upper: tuple[float, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "lower", tuple(float(v) for v in self.lower))
        object.__setattr__(self, "upper", tuple(float(v) for v in self.upper))
        if len(self.lower) != len(self.upper):
            raise ValueError("lower and upper must have the same dimension")
        if len(self.lower) == 0:
            raise ValueError("box must have at least one dimension")
        for lo, hi in zip(self.lower, self.upper):
            if not (math.isfinite(lo) and math.isfinite(hi)):
                raise ValueError(f"box bounds must be finite, got [{lo}, {hi}]")
            if not lo < hi:
                raise ValueError(f"box widths must be positive, got [{lo}, {hi}]")

    @property
    def dimension(self) -> int:
        return len(self.lower)

    @property
    def lower_array(self) -> np.ndarray:
        return np.array(self.lower)

    @property
    def upper_array(self) -> np.ndarray:
        return np.array(self.upper)

    @property
    def center(self) -> np.ndarray:
        return 0.5 * (self.lower_array + self.upper_array)

    @property
    def widths(self) -> np.ndarray:
        return self.upper_array - self.lower_array

    def contains(self, x: np.ndarray) -> bool:
        x = np.asarray(x, dtype=float)
        return bool(np.all(x >= self.lower_array) and np.all(x <= self.upper_array))

    def clip(self, x: np.ndarray) -> np.ndarray:
        return np.clip(x, self.lower_array, self.upper_array)


def population_size(dimension: int) -> int:
    """Default generation size: 4 + floor(3 ln n)."""
    return 4 + int(3 * math.log(dimension))


@dataclass
class BestSample:
    value: float
    point: np.ndarray
    index: int  # 0-based position in the ask order


class AskTellOptimizer:
    """Common bookkeeping: budget accounting and earliest-seen best tracking."""

    kind: str = "abstract"

    def __init__(self, box: SearchBox, seed: int, budget: int):
        if budget < 1:
            raise ValueError(f"budget must be at least 1, got {budget}")
        self.box = box
        self.seed = int(seed)
        self.budget = int(budget)
        self.rng = np.random.default_rng(self.seed)
        self.asked = 0
        self.told = 0
        self._best: BestSample | None = None
        self._pending: np.ndarray | None = None

    @property
    def remaining(self) -> int:
        return self.budget - self.asked

    @property
    def best(self) -> BestSample | None:
        return self._best

    def ask(self) -> np.ndarray:
        """Next candidate batch, shape (batch, n), every point inside the box."""
        if self._pending is not None:
            raise RuntimeError("ask() called again before tell()")
        if self.remaining <= 0:
            raise BudgetExhaustedError(
                f"budget of {self.budget} evaluations already asked"
            )
        batch = self._propose(min(self._generation_size(), self.remaining))
        self.asked += batch.shape[0]
        self._pending = batch
        return batch

    def tell(self, candidates: np.ndarray, values) -> None:
        """Record objective values for the batch returned by the last ask()."""
        if self._pending is None:
            raise RuntimeError("tell() without a matching ask()")
        candidates = np.asarray(candidates, dtype=float)
        values = np.asarray(values, dtype=float)
        if candidates.shape != self._pending.shape:
            raise ValueError(
                f"tell() batch shape {candidates.shape} does not match "
                f"last ask() shape {self._pending.shape}"
            )
        if values.shape != (candidates.shape[0],):
            raise ValueError(
                f"need one value per candidate, got {values.shape} for "
                f"{candidates.shape[0]} candidates"
            )
        if not np.all(np.isfinite(values)):
            raise ValueError("objective values must be finite")
        base = self.told
        for i, (x, v) in enumerate(zip(candidates, values)):
            if self._best is None or v < self._best.value:
                self._best = BestSample(float(v), x.copy(), base + i)
        self.told += candidates.shape[0]
        self._pending = None
        self._update(candidates, values)

    # hooks ------------------------------------------------------------

    def _generation_size(self) -> int:
        raise NotImplementedError

    def _propose(self, count: int) -> np.ndarray:
        raise NotImplementedError

    def _update(self, candidates: np.ndarray, values: np.ndarray) -> None:
        pass


class RandomSearch(AskTellOptimizer):
    """Uniform i.i.d. sampling over the box."""

    kind = "random"

    def _generation_size(self) -> int:
        return population_size(self.box.dimension)

    def _propose(self, count: int) -> np.ndarray:
        lo, hi = self.box.lower_array, self.box.upper_array
        return lo + self.rng.random((count, self.box.dimension)) * (hi - lo)


class CmaEs(AskTellOptimizer):
    """(mu/mu_w, lambda) CMA-ES restricted to a box.

    State follows the standard formulation: mean m, step size sigma,
    covariance C with evolution paths p_c (rank-one) and p_s (step size).
    The mean starts at the box center and sigma at a quarter of the mean
    box width.
    """

    kind = "cma-es"

    def __init__(self, box: SearchBox, seed: int, budget: int):
        super().__init__(box, seed, budget)
        n = box.dimension
        self.lam = population_size(n)
        self.mu = self.lam // 2
        raw = np.log(self.lam / 2 + 0.5) - np.log(np.arange(1, self.mu + 1))
        self.weights = raw / raw.sum()
        self.mueff = float(raw.sum() ** 2 / (raw**2).sum())

        self.cc = (4 + self.mueff / n) / (n + 4 + 2 * self.mueff / n)
        self.cs = (self.mueff + 2) / (n + self.mueff + 5)
        self.c1 = 2 / ((n + 1.3) ** 2 + self.mueff)
        self.cmu = min(
            1 - self.c1,
            2 * (self.mueff - 2 + 1 / self.mueff) / ((n + 2) ** 2 + self.mueff),
        )
        self.damps = 1 + 2 * max(0.0, math.sqrt((self.mueff - 1) / (n + 1)) - 1) + self.cs
        self.chin = math.sqrt(n) * (1 - 1 / (4 * n) + 1 / (21 * n * n))

        self.mean = box.center
        self.sigma = 0.25 * float(box.widths.mean())
        self.cov = np.eye(n)
        self.path_c = np.zeros(n)
        self.path_s = np.zeros(n)
        self.generations = 0
        self._decompose()

    def _decompose(self) -> None:
        """Refresh the C = B diag(d^2) B' factorization, repairing if needed."""
        self.cov = 0.5 * (self.cov + self.cov.T)
        try:
            eigvals, eigvecs = np.linalg.eigh(self.cov)
        except np.linalg.LinAlgError:
            eigvals, eigvecs = None, None
        if (
            eigvals is None
            or not np.all(np.isfinite(eigvals))
            or eigvals.min() <= 0
            or not np.all(np.isfinite(eigvecs))
        ):
            # lost positive definiteness: restart the shape at the current scale
            self.cov = np.eye(self.box.dimension) * self.sigma**2
            eigvals, eigvecs = np.linalg.eigh(self.cov)
        self._scales = np.sqrt(eigvals)
        self._basis = eigvecs

    def _generation_size(self) -> int:
        return self.lam

    def _sample_one(self) -> np.ndarray:
        n = self.box.dimension
        for _ in range(_RESAMPLE_TRIES):
            z = self.rng.standard_normal(n)
            x = self.mean + self.sigma * (self._basis @ (self._scales * z))
            if self.box.contains(x):
                return x
        return self.box.clip(x)

    def _propose(self, count: int) -> np.ndarray:
        return np.stack([self._sample_one() for _ in range(count)])

    def _update(self, candidates: np.ndarray, values: np.ndarray) -> None:
        if candidates.shape[0] < self.lam:
            # truncated final generation: not enough samples for a full update
            return
        if np.all(values == values[0]):
            # flat generation: ranking carries no information
            return
        n = self.box.dimension
        order = np.argsort(values, kind="stable")  # stable: earliest-seen wins ties
        elite = candidates[order[: self.mu]]

        old_mean = self.mean
        self.mean = self.weights @ elite
        shift = (self.mean - old_mean) / self.sigma

        inv_sqrt = self._basis @ np.diag(1.0 / self._scales) @ self._basis.T
        self.path_s = (1 - self.cs) * self.path_s + math.sqrt(
            self.cs * (2 - self.cs) * self.mueff
        ) * (inv_sqrt @ shift)

        self.generations += 1
        ps_norm = float(np.linalg.norm(self.path_s))
        hsig = ps_norm / math.sqrt(
            1 - (1 - self.cs) ** (2 * self.generations)
        ) / self.chin < 1.4 + 2 / (n + 1)
        self.path_c = (1 - self.cc) * self.path_c + hsig * math.sqrt(
            self.cc * (2 - self.cc) * self.mueff
        ) * shift

        steps = (elite - old_mean) / self.sigma
        rank_mu = (self.weights[:, None] * steps).T @ steps
        var_loss = (1 - hsig) * self.cc * (2 - self.cc)  # compensates a short p_c
        self.cov = (
            (1 - self.c1 - self.cmu) * self.cov
            + self.c1 * (np.outer(self.path_c, self.path_c) + var_loss * self.cov)
            + self.cmu * rank_mu
        )

        self.sigma *= math.exp(
            min(1.0, (self.cs / self.damps) * (ps_norm / self.chin - 1))
        )
        self._decompose()


OPTIMIZER_KINDS = ("random", "cma-es")


def make_optimizer(kind: str, box: SearchBox, seed: int, budget: int) -> AskTellOptimizer:
    """Construct an optimizer by kind name ('random' or 'cma-es')."""
    if kind == "random":
        return RandomSearch(box, seed, budget)
    if kind == "cma-es":
        return CmaEs(box, seed, budget)
    raise ValueError(f"unknown optimizer kind {kind!r}; choose from {OPTIMIZER_KINDS}")
