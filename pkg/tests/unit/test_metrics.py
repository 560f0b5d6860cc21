"""
Unit tests for selection-quality metrics

Tests ONVGR per front, fronts spanned and their conservation properties
"""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from pydantic import ValidationError

from src.models import InvalidArgumentError, Method, Selection, select_top_k
from src.services.mcda import rank
from src.services.metrics import FrontCoverage, evaluate_selection, front_profile
from src.services.pareto import fast_non_dominated_sort, partition_from_fronts
from tests.fixtures.matrices import random_matrix


@pytest.fixture
def partition():
    """Fronts of sizes 4, 3, 2."""
    return partition_from_fronts([[0, 1, 2, 3], [4, 5, 6], [7, 8]], 9)


@pytest.mark.unit
class TestEvaluateSelection:
    """Test suite for evaluate_selection()"""

    def test_full_selection_covers_every_front(self, partition):
        quality = evaluate_selection(Selection(indices=frozenset(range(9)), k=9), partition)

        assert [c.onvgr for c in quality.coverages] == [1.0, 1.0, 1.0]
        assert quality.fronts_spanned == 3

    def test_half_of_first_front(self, partition):
        """
        Given: Front 1 has 4 options and the selection holds 2 of them only
        When: evaluate_selection() is called
        Then: One coverage (1, 4, 2, 0.5) and fronts_spanned = 1
        """
        quality = evaluate_selection(Selection(indices=frozenset({1, 3}), k=2), partition)

        assert quality.coverages == (
            FrontCoverage(front_index=1, front_size=4, selected_in_front=2, onvgr=0.5),
        )
        assert quality.fronts_spanned == 1
        assert quality.front1_onvgr == 0.5

    def test_skipped_fronts_reported_as_zero(self, partition):
        quality = evaluate_selection(Selection(indices=frozenset({0, 7}), k=2), partition)

        assert quality.per_front_selected_counts == [1, 0, 1]
        assert quality.coverages[1].onvgr == 0.0
        assert quality.fronts_spanned == 3
        assert quality.total_selected == 2

    def test_empty_selection_rejected(self, partition):
        with pytest.raises(InvalidArgumentError):
            evaluate_selection(Selection(indices=frozenset(), k=1), partition)

    def test_out_of_range_selection_rejected(self, partition):
        with pytest.raises(InvalidArgumentError):
            evaluate_selection(Selection(indices=frozenset({0, 9}), k=2), partition)

    def test_front_profile(self, partition):
        assert front_profile(partition) == [(1, 4), (2, 3), (3, 2)]

    def test_coverage_ratio_must_match_counts(self):
        with pytest.raises(ValidationError):
            FrontCoverage(front_index=1, front_size=4, selected_in_front=2, onvgr=0.4)

    def test_coverage_cannot_exceed_front(self):
        with pytest.raises(ValidationError):
            FrontCoverage(front_index=1, front_size=2, selected_in_front=3, onvgr=1.0)


@pytest.mark.unit
@pytest.mark.property
class TestMetricProperties:
    """Randomized ONVGR bounds, conservation and monotonicity"""

    @settings(max_examples=100, deadline=None)
    @given(
        seed=st.integers(min_value=0, max_value=2**32 - 1),
        m=st.integers(min_value=1, max_value=120),
        n=st.integers(min_value=2, max_value=6),
        k=st.integers(min_value=1, max_value=150),
        method=st.sampled_from(list(Method)),
    )
    def test_bounds_and_conservation(self, seed, m, n, k, method):
        matrix = random_matrix(seed, m, n, integer_levels=7 if seed % 2 else None)
        partition = fast_non_dominated_sort(matrix)

        quality = evaluate_selection(select_top_k(rank(matrix, method), k), partition)

        assert all(0.0 <= c.onvgr <= 1.0 for c in quality.coverages)
        assert quality.total_selected == min(k, m)
        assert quality.coverages[-1].selected_in_front >= 1
        assert [c.front_size for c in quality.coverages] == partition.front_sizes[: quality.fronts_spanned]

    @settings(max_examples=100, deadline=None)
    @given(
        seed=st.integers(min_value=0, max_value=2**32 - 1),
        m=st.integers(min_value=2, max_value=100),
        k=st.integers(min_value=1, max_value=99),
        method=st.sampled_from(list(Method)),
    )
    def test_larger_k_never_loses_coverage(self, seed, m, k, method):
        matrix = random_matrix(seed, m, 3)
        partition = fast_non_dominated_sort(matrix)
        ranking = rank(matrix, method)

        small = evaluate_selection(select_top_k(ranking, k), partition)
        large = evaluate_selection(select_top_k(ranking, k + 1), partition)

        padded = np.zeros(large.fronts_spanned, dtype=int)
        padded[: small.fronts_spanned] = small.per_front_selected_counts
        assert np.all(np.asarray(large.per_front_selected_counts) >= padded)
        assert large.fronts_spanned >= small.fronts_spanned
