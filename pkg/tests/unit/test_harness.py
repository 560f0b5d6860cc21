"""
Unit tests for the experiment harness

Tests grid specs, single cells, the partition cache, aggregation, trend
checks and results-file parsing
"""

import threading

import numpy as np
import pandas as pd
import pytest
from pydantic import ValidationError

from src.models import CellExecutionError, Method, ResultsFormatError
from src.services import harness
from src.services.datagen import GeneratorConfig, generate, project_properties
from src.services.pareto import fast_non_dominated_sort
from src.utils.fingerprint import matrix_fingerprint


def result_rows(rows):
    """results.csv-shaped frame from (method, k, n_properties, seed, front, size, selected, spanned)."""
    return pd.DataFrame(
        [
            {
                "method": method,
                "n_sensors": 100,
                "k": k,
                "n_properties": n_props,
                "seed": seed,
                "front": front,
                "front_size": size,
                "selected_in_front": selected,
                "onvgr": selected / size,
                "fronts_spanned": spanned,
            }
            for method, k, n_props, seed, front, size, selected, spanned in rows
        ],
        columns=harness.RESULT_COLUMNS,
    )


def counting_sort(monkeypatch):
    """Route the harness sort through a wrapper; returns the n_criteria of every call."""
    calls = []

    def sort(projected, *args, **kwargs):
        calls.append(projected.n_criteria)
        return fast_non_dominated_sort(projected, *args, **kwargs)

    monkeypatch.setattr(harness, "fast_non_dominated_sort", sort)
    return calls


@pytest.mark.unit
class TestGridSpec:
    """Test suite for GridSpec"""

    def test_full_grid_has_45_cells(self):
        spec = harness.GridSpec.full()

        assert spec.n_sensors == 100_000
        assert spec.ks == (1_000, 5_000, 10_000)
        assert spec.cells_per_seed == 45

    def test_desk_grid_keeps_selection_fractions(self):
        spec = harness.GridSpec.desk()

        assert spec.n_sensors == 10_000
        assert [k / spec.n_sensors for k in spec.ks] == [0.01, 0.05, 0.1]
        assert spec.seeds == tuple(range(1, 11))
        assert spec.cells_per_seed == 45

    @pytest.mark.parametrize(
        "overrides",
        [
            {"ks": (5, 5)},
            {"ks": (0,)},
            {"ks": (200,)},
            {"property_counts": (1,)},
            {"property_counts": (7,)},
            {"seeds": (-1,)},
            {"seeds": (2**64,)},
            {"methods": ()},
            {"vikor_v": 2.0},
        ],
    )
    def test_invalid_levels_rejected(self, overrides):
        fields = {
            "n_sensors": 100,
            "methods": (Method.SAW,),
            "ks": (10,),
            "property_counts": (2,),
            "seeds": (1,),
        }
        fields.update(overrides)

        with pytest.raises(ValidationError):
            harness.GridSpec(**fields)


@pytest.mark.unit
class TestRunCell:
    """Test suite for run_cell()"""

    def test_full_selection_covers_every_front(self, sensors):
        """
        Given: A 300-sensor dataset
        When: A cell selects k = M
        Then: Every front has ONVGR 1
        """
        cache = harness.PartitionCache()

        result = harness.run_cell(sensors, Method.TOPSIS, 300, 4, seed=7, cache=cache)

        assert all(c.onvgr == 1.0 for c in result.quality.coverages)
        assert result.quality.total_selected == 300
        assert (result.n_sensors, result.k, result.n_properties, result.seed) == (300, 300, 4, 7)

    @pytest.mark.parametrize("method", list(Method))
    def test_dominating_option_selected_first(self, chain_matrix, method):
        result = harness.run_cell(chain_matrix, method, 1, 2, cache=harness.PartitionCache())

        assert result.quality.fronts_spanned == 1
        assert result.quality.coverages[0].selected_in_front == 1

    def test_partition_reused_across_methods(self, sensors):
        cache = harness.PartitionCache()

        first = harness.run_cell(sensors, Method.SAW, 30, 3, cache=cache)
        second = harness.run_cell(sensors, Method.VIKOR, 60, 3, cache=cache)

        assert len(cache) == 1
        assert second.timings.sort_ms == 0.0
        sizes = fast_non_dominated_sort(project_properties(sensors, 3)).front_sizes
        for result in (first, second):
            assert [c.front_size for c in result.quality.coverages] == sizes[: result.quality.fronts_spanned]

    def test_k_above_option_count_carries_coordinates(self, chain_matrix):
        with pytest.raises(CellExecutionError) as exc_info:
            harness.run_cell(chain_matrix, Method.SAW, 5, 2, seed=3, cache=harness.PartitionCache())

        assert exc_info.value.cell == {"method": "saw", "k": 5, "n_properties": 2, "seed": 3}
        assert "k=5" in str(exc_info.value)

    def test_bad_property_count_wrapped(self, chain_matrix):
        with pytest.raises(CellExecutionError):
            harness.run_cell(chain_matrix, Method.SAW, 1, 3, cache=harness.PartitionCache())

    def test_bad_vikor_v_wrapped(self, chain_matrix):
        with pytest.raises(CellExecutionError):
            harness.run_cell(chain_matrix, Method.VIKOR, 1, 2, vikor_v=1.5, cache=harness.PartitionCache())


@pytest.mark.unit
class TestPartitionCache:
    """Test suite for PartitionCache"""

    def test_computes_once_per_key(self, sensors):
        cache = harness.PartitionCache()
        projected = project_properties(sensors, 2)
        fingerprint = matrix_fingerprint(sensors)

        first, computed_first = cache.get_or_compute(fingerprint, 2, projected)
        second, computed_second = cache.get_or_compute(fingerprint, 2, projected)

        assert computed_first and not computed_second
        assert first is second

    def test_concurrent_requests_share_one_computation(self, sensors):
        cache = harness.PartitionCache()
        projected = project_properties(sensors, 5)
        fingerprint = matrix_fingerprint(sensors)
        outcomes = []

        def request():
            outcomes.append(cache.get_or_compute(fingerprint, 5, projected))

        threads = [threading.Thread(target=request) for _ in range(8)]
        for thread in threads:
            thread.start()
        for thread in threads:
            thread.join()

        assert sum(computed for _, computed in outcomes) == 1
        assert len({id(partition) for partition, _ in outcomes}) == 1

    def test_clear(self, sensors):
        cache = harness.PartitionCache()
        cache.get_or_compute("key", 2, project_properties(sensors, 2))

        cache.clear()

        assert len(cache) == 0

    def test_empty_cache_passed_to_run_cell_is_filled(self, sensors):
        cache = harness.PartitionCache()

        harness.run_cell(sensors, Method.SAW, 30, 3, cache=cache)

        assert len(cache) == 1

    def test_run_cell_without_cache_shares_nothing(self, sensors, monkeypatch):
        sorts = counting_sort(monkeypatch)

        harness.run_cell(sensors, Method.SAW, 30, 3)
        harness.run_cell(sensors, Method.SAW, 30, 3)

        assert len(sorts) == 2

    def test_run_grid_sorts_each_projection_once(self, tmp_path, monkeypatch):
        """
        Given: A grid with 2 seeds, 2 property counts, 2 methods and 2 ks
        When: run_grid runs with an empty cache and writes the fronts files
        Then: Each (seed, n_properties) projection is sorted exactly once
        """
        sorts = counting_sort(monkeypatch)
        cache = harness.PartitionCache()
        spec = harness.GridSpec(
            n_sensors=80,
            methods=(Method.SAW, Method.VIKOR),
            ks=(4, 8),
            property_counts=(2, 4),
            seeds=(1, 2),
        )

        harness.run_grid(spec, tmp_path, cache=cache)

        assert len(cache) == 4
        assert sorted(sorts) == [2, 2, 4, 4]


@pytest.mark.unit
class TestAggregation:
    """Test suite for results_frame(), summarize() and compare_methods()"""

    def test_results_frame_sorted_for_stable_output(self, sensors):
        cache = harness.PartitionCache()
        results = [
            harness.run_cell(sensors, Method.VIKOR, 10, 2, seed=2, cache=cache),
            harness.run_cell(sensors, Method.SAW, 10, 2, seed=1, cache=cache),
        ]

        frame = harness.results_frame(results)

        assert list(frame.columns) == harness.RESULT_COLUMNS
        assert frame["method"].iloc[0] == "saw"
        assert frame.groupby(["method", "seed"])["selected_in_front"].sum().tolist() == [10, 10]

    def test_summarize_uses_population_std(self):
        results = result_rows(
            [
                ("saw", 10, 2, 1, 1, 10, 5, 1),
                ("saw", 10, 2, 2, 1, 10, 9, 2),
                ("saw", 10, 2, 2, 2, 10, 1, 2),
            ]
        )

        summary = harness.summarize(results)

        row = summary.iloc[0]
        assert list(summary.columns) == harness.SUMMARY_COLUMNS
        assert row["n_seeds"] == 2
        assert row["onvgr_front1_mean"] == pytest.approx(0.7)
        assert row["onvgr_front1_std"] == pytest.approx(0.2)
        assert row["fronts_spanned_mean"] == pytest.approx(1.5)
        assert row["fronts_spanned_std"] == pytest.approx(0.5)

    def test_summarize_empty(self):
        assert list(harness.summarize(result_rows([])).columns) == harness.SUMMARY_COLUMNS

    def test_compare_methods_orders_by_onvgr_then_fronts(self):
        results = result_rows(
            [
                ("saw", 10, 2, 1, 1, 10, 6, 1),
                ("topsis", 10, 2, 1, 1, 10, 8, 3),
                ("vikor", 10, 2, 1, 1, 10, 8, 2),
            ]
        )

        comparison = harness.compare_methods(harness.summarize(results))

        assert comparison["method"].tolist() == ["vikor", "topsis", "saw"]
        assert comparison["position"].tolist() == [1, 2, 3]


@pytest.mark.unit
class TestCheckTrends:
    """Test suite for check_trends()"""

    def test_trends_hold(self):
        results = result_rows(
            [
                ("saw", 10, 2, 1, 1, 10, 8, 1),
                ("saw", 20, 2, 1, 1, 10, 9, 2),
                ("saw", 10, 6, 1, 1, 50, 10, 2),
                ("saw", 20, 6, 1, 1, 50, 15, 3),
            ]
        )

        report = harness.check_trends(results)

        by_name = {(c.check, c.n_properties): c for c in report.checks}
        assert by_name[("fewer_properties_higher_onvgr", None)].holds
        assert by_name[("onvgr_non_decreasing_in_k", 2)].satisfied == 1
        assert by_name[("fronts_non_decreasing_in_k", 6)].holds
        assert report.all_hold

    def test_violation_reported(self):
        results = result_rows(
            [
                ("topsis", 10, 2, 1, 1, 10, 2, 1),
                ("topsis", 10, 6, 1, 1, 10, 5, 1),
            ]
        )

        report = harness.check_trends(results)

        assert not report.all_hold
        frame = report.to_frame()
        failing = frame[~frame["holds"]]
        assert failing["check"].tolist() == ["fewer_properties_higher_onvgr"]

    def test_empty_results_give_empty_report(self):
        assert harness.check_trends(result_rows([])).checks == ()


@pytest.mark.unit
class TestReadResults:
    """Test suite for read_results()"""

    def test_round_trip_through_csv(self, tmp_path):
        frame = result_rows([("saw", 10, 2, 1, 1, 10, 5, 1)])
        path = tmp_path / "results.csv"
        frame.to_csv(path, index=False)

        loaded = harness.read_results(path)

        assert loaded["k"].dtype == np.int64
        assert loaded["onvgr"].iloc[0] == 0.5

    def test_wrong_header(self, tmp_path):
        path = tmp_path / "results.csv"
        path.write_text("method,k\nsaw,10\n")

        with pytest.raises(ResultsFormatError, match="line 1"):
            harness.read_results(path)

    def test_bad_cell_reports_line(self, tmp_path):
        path = tmp_path / "results.csv"
        good = "saw,100,10,2,1,1,10,5,0.5,1"
        path.write_text(",".join(harness.RESULT_COLUMNS) + f"\n{good}\nsaw,100,ten,2,1,1,10,5,0.5,1\n")

        with pytest.raises(ResultsFormatError, match="line 3"):
            harness.read_results(path)

    def test_row_wider_than_header_reports_line(self, tmp_path):
        path = tmp_path / "results.csv"
        path.write_text(",".join(harness.RESULT_COLUMNS) + "\nx,saw,100,10,2,1,1,10,5,0.5,1\n")

        with pytest.raises(ResultsFormatError, match="line 2"):
            harness.read_results(path)

    def test_unknown_method(self, tmp_path):
        path = tmp_path / "results.csv"
        path.write_text(",".join(harness.RESULT_COLUMNS) + "\nahp,100,10,2,1,1,10,5,0.5,1\n")

        with pytest.raises(ResultsFormatError, match="method"):
            harness.read_results(path)

    def test_missing_file(self, tmp_path):
        with pytest.raises(FileNotFoundError):
            harness.read_results(tmp_path / "absent.csv")

    def test_empty_file(self, tmp_path):
        path = tmp_path / "results.csv"
        path.write_text("")

        with pytest.raises(ResultsFormatError):
            harness.read_results(path)


@pytest.mark.unit
class TestEmitPlotData:
    """Test suite for emit_plot_data()"""

    def test_two_methods_three_fronts_give_six_rows(self, tmp_path):
        results = result_rows(
            [
                ("saw", 10, 2, 1, 1, 10, 5, 3),
                ("saw", 10, 2, 1, 2, 10, 3, 3),
                ("saw", 10, 2, 1, 3, 10, 2, 3),
                ("vikor", 10, 2, 1, 1, 10, 8, 2),
                ("vikor", 10, 2, 1, 2, 10, 2, 2),
            ]
        )
        results_path = tmp_path / "results.csv"
        results.to_csv(results_path, index=False)

        harness.emit_plot_data(results_path, tmp_path / "plots")

        counts = pd.read_csv(tmp_path / "plots" / "counts_p2_k10.csv")
        onvgr = pd.read_csv(tmp_path / "plots" / "onvgr_p2_k10.csv")
        assert list(counts.columns) == harness.COUNT_FIGURE_COLUMNS
        assert list(onvgr.columns) == harness.ONVGR_FIGURE_COLUMNS
        assert len(counts) == 6
        assert counts.groupby("method")["selected_mean"].sum().tolist() == [10, 10]
        vikor_front3 = onvgr[(onvgr["method"] == "vikor") & (onvgr["front"] == 3)]
        assert vikor_front3["onvgr_mean"].iloc[0] == 0.0

    def test_count_columns_named_as_seed_means(self, tmp_path):
        results_path = tmp_path / "results.csv"
        result_rows([("topsis", 5, 2, 1, 1, 64, 5, 1)]).to_csv(results_path, index=False)

        harness.emit_plot_data(results_path, tmp_path / "plots")

        lines = (tmp_path / "plots" / "counts_p2_k5.csv").read_text().splitlines()
        assert lines[0] == "front,method,selected_mean,front_size_mean"
        assert (tmp_path / "plots" / "onvgr_p2_k5.csv").read_text().splitlines()[0] == (
            "front,method,onvgr_mean"
        )

    def test_header_only_results_give_header_only_files(self, tmp_path):
        results_path = tmp_path / "results.csv"
        results_path.write_text(",".join(harness.RESULT_COLUMNS) + "\n")

        written = harness.emit_plot_data(results_path, tmp_path / "plots")

        assert [p.name for p in written] == ["counts_all.csv", "onvgr_all.csv"]
        assert (tmp_path / "plots" / "counts_all.csv").read_text().strip() == (
            "n_properties,k," + ",".join(harness.COUNT_FIGURE_COLUMNS)
        )

    def test_seeds_averaged(self, tmp_path):
        results = result_rows(
            [
                ("saw", 4, 3, 1, 1, 4, 4, 1),
                ("saw", 4, 3, 2, 1, 8, 2, 2),
                ("saw", 4, 3, 2, 2, 8, 2, 2),
            ]
        )
        results_path = tmp_path / "results.csv"
        results.to_csv(results_path, index=False)

        harness.emit_plot_data(results_path, tmp_path / "plots")

        counts = pd.read_csv(tmp_path / "plots" / "counts_p3_k4.csv")
        front1 = counts[counts["front"] == 1].iloc[0]
        front2 = counts[counts["front"] == 2].iloc[0]
        assert front1["selected_mean"] == 3.0
        assert front1["front_size_mean"] == 6.0
        assert front2["selected_mean"] == 1.0
