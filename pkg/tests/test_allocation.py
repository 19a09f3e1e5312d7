import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dppselect.allocation import (
    BudgetSplit,
    hard_select,
    round_half_away_from_zero,
    soft_allocate,
)
from dppselect.core import View
from dppselect.errors import BudgetExceedsFrames, UnsynchronizedStreams

from conftest import relevance


def vec_with_sum(total: float, n: int, view=View.EGO):
    return relevance(view, np.full(n, total / n))


class TestSoftAllocate:
    def test_symmetric_split(self):
        r = vec_with_sum(2.0, 8)
        x = vec_with_sum(2.0, 8, View.EXO)
        split = soft_allocate(r, x, 16)
        assert (split.k_ego, split.k_exo) == (8, 8)

    def test_worked_three_to_one(self):
        split = soft_allocate(
            vec_with_sum(3.0, 6), vec_with_sum(1.0, 6, View.EXO), 8
        )
        assert (split.k_ego, split.k_exo) == (6, 2)

    def test_capacity_cap_transfers(self):
        split = soft_allocate(
            vec_with_sum(1.0, 3), vec_with_sum(1.0, 12, View.EXO), 10
        )
        assert (split.k_ego, split.k_exo) == (3, 7)

    def test_exo_capacity_cap_transfers(self):
        split = soft_allocate(
            vec_with_sum(1.0, 12), vec_with_sum(1.0, 3, View.EXO), 10
        )
        assert (split.k_ego, split.k_exo) == (7, 3)

    def test_budget_exceeds_frames(self):
        with pytest.raises(BudgetExceedsFrames):
            soft_allocate(vec_with_sum(1.0, 3), vec_with_sum(1.0, 3, View.EXO), 7)

    def test_round_half_away_from_zero(self):
        # ego share 0.25 of k=2 gives exactly 0.5, which rounds up
        split = soft_allocate(
            vec_with_sum(1.0, 4), vec_with_sum(3.0, 4, View.EXO), 2
        )
        assert (split.k_ego, split.k_exo) == (1, 1)
        assert round_half_away_from_zero(2.5) == 3
        assert round_half_away_from_zero(3.5) == 4
        assert round_half_away_from_zero(-2.5) == -3

    @given(
        st.integers(min_value=1, max_value=64),
        st.lists(st.floats(min_value=1e-6, max_value=1.0), min_size=1, max_size=32),
        st.lists(st.floats(min_value=1e-6, max_value=1.0), min_size=1, max_size=32),
    )
    @settings(max_examples=300)
    def test_conservation(self, k, ego_scores, exo_scores):
        if k > len(ego_scores) + len(exo_scores):
            return
        split = soft_allocate(
            relevance(View.EGO, ego_scores), relevance(View.EXO, exo_scores), k
        )
        assert split.k_ego + split.k_exo == k
        assert 0 <= split.k_ego <= len(ego_scores)
        assert 0 <= split.k_exo <= len(exo_scores)

    def test_monotonicity_in_ego_mass(self):
        exo = vec_with_sum(2.0, 40, View.EXO)
        k = 12
        previous = -1
        for total in np.linspace(0.1, 8.0, 60):
            split = soft_allocate(vec_with_sum(float(total), 40), exo, k)
            assert split.k_ego >= previous
            previous = split.k_ego

    def test_degenerate_dominance(self):
        k = 8
        # ego share > 1 - 1/(2k) forces the full budget onto ego
        split = soft_allocate(
            vec_with_sum(100.0, 200), vec_with_sum(1.0, 200, View.EXO), k
        )
        assert split.k_ego == k and split.k_exo == 0

    @given(st.floats(min_value=1e-3, max_value=1e3))
    @settings(max_examples=100)
    def test_scale_covariance(self, c):
        ego = np.array([0.2, 0.7, 0.4])
        exo = np.array([0.5, 0.1, 0.9, 0.3])
        base = soft_allocate(ego, exo, 5)
        # scaling both views' scores leaves the ratio, hence the split, alone
        scaled = soft_allocate(c * ego, c * exo, 5)
        assert (scaled.k_ego, scaled.k_exo) == (base.k_ego, base.k_exo)

    def test_requires_positive_scores(self):
        with pytest.raises(ValueError):
            soft_allocate(
                relevance(View.EGO, [0.0, 0.0]), relevance(View.EXO, [0.5]), 2
            )


class TestBudgetSplit:
    def test_invariants(self):
        with pytest.raises(ValueError):
            BudgetSplit(k_ego=2, k_exo=2, k_total=5)
        with pytest.raises(ValueError):
            BudgetSplit(k_ego=-1, k_exo=6, k_total=5)


class TestHardSelect:
    def test_elementwise_argmax(self):
        mask = hard_select(
            relevance(View.EGO, [0.9, 0.1]), relevance(View.EXO, [0.2, 0.8])
        )
        assert mask.tolist() == [True, False]

    def test_ties_prefer_ego(self):
        scores = [0.4, 0.2, 0.7]
        mask = hard_select(
            relevance(View.EGO, scores), relevance(View.EXO, scores)
        )
        assert mask.all()

    def test_unsynchronized(self):
        with pytest.raises(UnsynchronizedStreams):
            hard_select(
                relevance(View.EGO, [0.1, 0.2, 0.3]),
                relevance(View.EXO, [0.1, 0.2, 0.3, 0.4]),
            )
