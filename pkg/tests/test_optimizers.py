"""Ask/tell optimizers: bookkeeping, determinism, and search quality."""

import math

import numpy as np
import pytest

from devfal.optimizers import (
    OPTIMIZER_KINDS,
    BudgetExhaustedError,
    CmaEs,
    RandomSearch,
    SearchBox,
    make_optimizer,
    population_size,
)

UNIT2 = SearchBox((0.0, 0.0), (1.0, 1.0))


def run_sphere(kind, center, budget, seed, box):
    opt = make_optimizer(kind, box, seed, budget)
    while opt.remaining > 0:
        batch = opt.ask()
        opt.tell(batch, [float(np.sum((x - center) ** 2)) for x in batch])
    return opt


class TestSearchBox:
    def test_properties(self):
        box = SearchBox((0.0, -2.0), (1.0, 2.0))
        assert box.dimension == 2
        assert box.center == pytest.approx([0.5, 0.0])
        assert box.widths == pytest.approx([1.0, 4.0])
        assert box.contains(np.array([0.5, 1.9]))
        assert not box.contains(np.array([0.5, 2.1]))
        assert box.clip(np.array([2.0, -3.0])) == pytest.approx([1.0, -2.0])

    def test_validation(self):
        with pytest.raises(ValueError):
            SearchBox((0.0,), (0.0,))  # zero width
        with pytest.raises(ValueError):
            SearchBox((0.0, 0.0), (1.0,))  # arity
        with pytest.raises(ValueError):
            SearchBox((0.0,), (math.inf,))


class TestPopulationSize:
    def test_formula_values(self):
        assert population_size(1) == 4
        assert population_size(2) == 6  # 4 + floor(3 ln 2)
        assert population_size(4) == 8  # 4 + floor(3 ln 4)
        assert population_size(10) == 10


class TestBookkeeping:
    @pytest.mark.parametrize("kind", OPTIMIZER_KINDS)
    def test_budget_exactly_tracked(self, kind):
        opt = make_optimizer(kind, UNIT2, 0, 10)
        sizes = []
        while opt.remaining > 0:
            batch = opt.ask()
            sizes.append(batch.shape[0])
            opt.tell(batch, np.zeros(batch.shape[0]) + 1.0)
        assert opt.asked == 10
        assert sizes == [6, 4]  # lambda = 6 at n = 2, then the truncated rest
        with pytest.raises(BudgetExhaustedError):
            opt.ask()

    @pytest.mark.parametrize("kind", OPTIMIZER_KINDS)
    def test_all_candidates_inside_box(self, kind):
        box = SearchBox((-3.0, 5.0, 0.0), (-1.0, 9.0, 0.5))
        opt = make_optimizer(kind, box, 3, 60)
        rng = np.random.default_rng(0)
        while opt.remaining > 0:
            batch = opt.ask()
            assert all(box.contains(x) for x in batch)
            opt.tell(batch, rng.random(batch.shape[0]))

    def test_double_ask_rejected(self):
        opt = make_optimizer("random", UNIT2, 0, 10)
        opt.ask()
        with pytest.raises(RuntimeError):
            opt.ask()

    def test_tell_without_ask_rejected(self):
        opt = make_optimizer("random", UNIT2, 0, 10)
        with pytest.raises(RuntimeError):
            opt.tell(np.zeros((1, 2)), [0.0])

    def test_tell_arity_mismatch_rejected(self):
        opt = make_optimizer("random", UNIT2, 0, 10)
        batch = opt.ask()
        with pytest.raises(ValueError):
            opt.tell(batch, list(range(batch.shape[0] - 1)))

    def test_tell_nonfinite_rejected(self):
        opt = make_optimizer("random", UNIT2, 0, 10)
        batch = opt.ask()
        values = [1.0] * batch.shape[0]
        values[0] = math.nan
        with pytest.raises(ValueError):
            opt.tell(batch, values)

    def test_best_is_argmin(self):
        opt = make_optimizer("random", SearchBox((0.0,), (1.0,)), 0, 4)
        batch = opt.ask()
        opt.tell(batch, [3.0, 1.0, 2.0, 5.0])
        assert opt.best.index == 1
        assert opt.best.value == 1.0
        assert opt.best.point == pytest.approx(batch[1])

    def test_best_tie_keeps_earliest(self):
        opt = make_optimizer("random", SearchBox((0.0,), (1.0,)), 0, 4)
        batch = opt.ask()
        opt.tell(batch, [1.0, 1.0, 1.0, 1.0])
        assert opt.best.index == 0

    def test_best_spans_generations(self):
        opt = make_optimizer("random", UNIT2, 0, 12)
        batch = opt.ask()
        opt.tell(batch, [5.0, 4.0, 6.0, 7.0, 8.0, 9.0])
        first_best = opt.best.value
        batch = opt.ask()
        opt.tell(batch, [9.0] * batch.shape[0])
        assert opt.best.value == first_best  # later, worse generation ignored

    def test_unknown_kind(self):
        with pytest.raises(ValueError):
            make_optimizer("annealing", UNIT2, 0, 10)

    def test_budget_validation(self):
        with pytest.raises(ValueError):
            make_optimizer("random", UNIT2, 0, 0)


class TestDeterminism:
    @pytest.mark.parametrize("kind", OPTIMIZER_KINDS)
    def test_same_seed_same_trajectory(self, kind):
        seqs = []
        for _ in range(2):
            opt = make_optimizer(kind, UNIT2, 42, 30)
            seen = []
            while opt.remaining > 0:
                batch = opt.ask()
                seen.append(batch.copy())
                opt.tell(batch, [float(x.sum()) for x in batch])
            seqs.append(np.vstack(seen))
        assert np.array_equal(seqs[0], seqs[1])

    @pytest.mark.parametrize("kind", OPTIMIZER_KINDS)
    def test_different_seeds_differ(self, kind):
        a = make_optimizer(kind, UNIT2, 0, 6).ask()
        b = make_optimizer(kind, UNIT2, 1, 6).ask()
        assert not np.array_equal(a, b)


class TestCmaBehavior:
    def test_initial_mean_is_box_center(self):
        box = SearchBox((2.0, -4.0), (4.0, 0.0))
        opt = CmaEs(box, 0, 100)
        assert opt.mean == pytest.approx([3.0, -2.0])
        # sigma = 0.25 * mean box width = 0.25 * 3
        assert opt.sigma == pytest.approx(0.75)

    def test_flat_values_leave_mean_unchanged(self):
        opt = CmaEs(UNIT2, 1, 100)
        before = opt.mean.copy()
        batch = opt.ask()
        opt.tell(batch, np.full(batch.shape[0], 2.5))
        assert opt.mean == pytest.approx(before)

    def test_mean_moves_toward_corner_winner(self):
        # rank the corner-nearest candidate best: recombination must pull the
        # mean toward that corner
        corner = np.array([1.0, 1.0])
        opt = CmaEs(UNIT2, 2, 100)
        start = np.linalg.norm(opt.mean - corner)
        batch = opt.ask()
        opt.tell(batch, [float(np.linalg.norm(x - corner)) for x in batch])
        assert np.linalg.norm(opt.mean - corner) < start

    def test_truncated_final_generation_skips_update(self):
        opt = CmaEs(UNIT2, 3, 8)  # lambda = 6, so the second ask yields 2
        batch = opt.ask()
        opt.tell(batch, [float(x.sum()) for x in batch])
        mean_after_full = opt.mean.copy()
        batch = opt.ask()
        assert batch.shape[0] == 2
        opt.tell(batch, [float(x.sum()) for x in batch])
        assert opt.mean == pytest.approx(mean_after_full)
        assert opt.best is not None  # best still tracks the truncated batch

    def test_sphere_mean_converges(self):
        # 40 generations on f(x) = |x - c|^2: mean within 1e-2 of c
        center = np.array([0.6, 0.4])
        opt = run_sphere("cma-es", center, budget=40 * 6, seed=0, box=UNIT2)
        assert np.linalg.norm(opt.mean - center) < 1e-2

    def test_sphere_beats_random(self):
        center = np.array([0.25, 0.7, 0.4, 0.55])
        box = SearchBox((0.0,) * 4, (1.0,) * 4)
        for seed in range(3):
            cma = run_sphere("cma-es", center, 100, seed, box)
            rand = run_sphere("random", center, 100, seed, box)
            assert cma.best.value < rand.best.value
