"""
Tests for the analysis module.
"""

import math
from dataclasses import replace

import pytest

from quasilattice.analysis import (
    check_neighbor_law,
    core_accounting,
    covering_radius,
    cyclic_components,
    decoration_stats,
    interior_radius,
    min_distance,
    ring_census,
)
from quasilattice.ifs import apply_map
from quasilattice.pipeline import PatternSet, build_model_set, extend, prune_core
from quasilattice.utils import SpatialGrid

TAU = (1 + 5**0.5) / 2
T = TAU - 1


@pytest.fixture(scope="module")
def pentagonal_stats(pentagonal_pattern):
    return decoration_stats(pentagonal_pattern)


class TestCyclicComponents:
    """Tests for the cyclic part of the core."""

    def test_pentagonal_sizes(self, pentagonal_report):
        """Test five fixed points, five 2-cycles, one 5-cycle and one component of 26."""
        assert sorted(pentagonal_report.component_sizes) == [1] * 5 + [2] * 5 + [5, 26]
        assert len(pentagonal_report.members) == 46

    def test_pentagonal_two_cycle(self, pentagonal_report, pentagonal_ifs):
        """Test that a 2-cycle x -> g_1(x) -> g_2(g_1(x)) = x is a component of its own."""
        pairs = [component for component in pentagonal_report.components if len(component) == 2]
        assert len(pairs) == 5
        for x, y in pairs:
            assert any(apply_map(pentagonal_ifs, k, x) == y for k in range(5))
            assert any(apply_map(pentagonal_ifs, k, y) == x for k in range(5))

    def test_components_sorted(self, pentagonal_report):
        """Test deterministic ordering by smallest coordinate key."""
        firsts = [component[0].coords for component in pentagonal_report.components]
        assert firsts == sorted(firsts)
        for component in pentagonal_report.components:
            keys = [x.coords for x in component]
            assert keys == sorted(keys)

    def test_pentagonal_fixed_points(self, pentagonal_report, pentagonal_ifs, tau):
        """Test that the fixed points are -tau*z^k and lie on cycles."""
        assert [k for k, _ in pentagonal_report.fixed_points] == list(range(5))
        for k, x in pentagonal_report.fixed_points:
            assert x == -(tau * pentagonal_ifs.translations[k])
            assert x in pentagonal_report

    def test_origin_is_cyclic(self, pentagonal_report, field5):
        """Test that 0 belongs to the cyclic network."""
        assert field5.zero in pentagonal_report

    def test_hmv_fixed_points_only(self, hmv_core, hmv_ifs, t, field5):
        """Test that the HMV cyclic part is 0 and +-t*z^k, each a singleton."""
        report = cyclic_components(hmv_core.F1, hmv_ifs)
        assert report.component_sizes == [1] * 11
        expected = {field5.zero.coords} | {(s * t * field5.power(k)).coords for s in (1, -1) for k in range(5)}
        assert report.members == expected
        assert len(report.fixed_points) == 11

    def test_stable_under_pruning(self, pentagonal_core, pentagonal_ifs, pentagonal_report):
        """Test that pruning F1 again leaves the cyclic part unchanged."""
        F1, _ = prune_core(pentagonal_core.F1, pentagonal_ifs)
        assert cyclic_components(F1, pentagonal_ifs) == pentagonal_report

    def test_no_cycles(self, pentagonal_ifs, field5):
        """Test that an acyclic set has no components."""
        report = cyclic_components([field5.from_int(7)], pentagonal_ifs)
        assert report.components == ()
        assert report.members == frozenset()


class TestCoreAccounting:
    """Tests for the split of F1 into cycles and images."""

    def test_pentagonal(self, pentagonal_core, pentagonal_ifs, pentagonal_report):
        """Test 46 cyclic points and 25 forward images."""
        accounting = core_accounting(pentagonal_core.F1, pentagonal_ifs, pentagonal_report)
        assert accounting.cyclic == 46
        assert accounting.images == 25
        assert accounting.unreachable == 0

    def test_computes_report_when_missing(self, hmv_core, hmv_ifs):
        """Test that the cyclic report is derived when not given."""
        accounting = core_accounting(hmv_core.F1, hmv_ifs)
        assert (accounting.cyclic, accounting.images, accounting.unreachable) == (11, 0, 0)


class TestDecorationStats:
    """Tests for the predecessor histogram and distances."""

    def test_minimal_distance(self, pentagonal_stats):
        """Test delta = t^3."""
        assert pentagonal_stats.min_distance == pytest.approx(T**3, abs=1e-9)

    def test_min_distance_helper(self, small_pattern):
        """Test that min_distance agrees with the full statistics."""
        assert min_distance(small_pattern) == decoration_stats(small_pattern).min_distance

    def test_histogram_sums_to_size(self, pentagonal_stats, pentagonal_pattern):
        """Test that every point is counted once."""
        assert pentagonal_stats.size == len(pentagonal_pattern)
        assert set(pentagonal_stats.histogram) == {1, 2, 3, 4, 5}

    def test_maximal_class_attained(self, pentagonal_stats):
        """Test that some points have all five predecessors."""
        assert pentagonal_stats.histogram[5] > 0

    def test_class_minima(self, pentagonal_stats):
        """Test that per-class minima never undercut delta."""
        for distance in pentagonal_stats.class_min_distances.values():
            assert distance >= pentagonal_stats.min_distance - 1e-9

    def test_single_seed(self, pentagonal_ifs, tau):
        """Test that the histogram of a seeded sub-solution sums to its size."""
        pattern = extend([-tau], pentagonal_ifs, 10.0)
        stats = decoration_stats(pattern)
        assert stats.size == len(pattern)

    def test_single_point(self, pentagonal_ifs, pentagonal_core):
        """Test that one point has no minimal distance."""
        pattern = build_model_set(pentagonal_ifs, 0.1, core=pentagonal_core)
        stats = decoration_stats(pattern)
        assert math.isinf(stats.min_distance)
        assert stats.size == 1


class TestInteriorRadius:
    """Tests for the exact-count region."""

    def test_pentagonal(self, pentagonal_pattern):
        """Test rho - (c + max|z_k|) = 30 - (tau + 1)."""
        assert interior_radius(pentagonal_pattern) == pytest.approx(30 - TAU - 1)


class TestCheckNeighborLaw:
    """Tests for the neighbour-distance law."""

    def test_pentagonal_holds(self, pentagonal_pattern, pentagonal_stats):
        """Test that the law holds at radius 30."""
        assert check_neighbor_law(pentagonal_pattern, pentagonal_stats) == []

    def test_full_class_keeps_distance(self, pentagonal_pattern):
        """Test that no five-predecessor point has a neighbour at distance t^3."""
        grid = SpatialGrid.for_points(pentagonal_pattern.physical_array())
        limit = interior_radius(pentagonal_pattern)
        positions = pentagonal_pattern.physical_array()
        for i, record in enumerate(pentagonal_pattern.records()):
            if record.pred_count == 5 and math.hypot(*record.phys) <= limit:
                assert len(grid.query(positions[i], T**3 + 1e-9, exclude=i)) == 0

    def test_hmv_holds(self, hmv_ifs, hmv_core):
        """Test that the law holds for the eleven-map system."""
        pattern = build_model_set(hmv_ifs, 12.0, core=hmv_core)
        assert check_neighbor_law(pattern) == []

    def test_corrupted_count_detected(self, pentagonal_ifs, pentagonal_core):
        """Test that raising one predecessor count to m produces a violation."""
        pattern = build_model_set(pentagonal_ifs, 20.0, core=pentagonal_core)
        stats = decoration_stats(pattern)
        records = pattern.records()
        positions = pattern.physical_array()
        grid = SpatialGrid.for_points(positions)
        limit = interior_radius(pattern)
        threshold = stats.min_distance * pentagonal_ifs.expansion * 0.999

        target = next(
            record
            for i, record in enumerate(records)
            if record.pred_count < 5
            and math.hypot(*record.phys) <= limit
            and len(grid.query(positions[i], threshold, exclude=i))
        )
        points = dict(pattern.points)
        points[target.key] = replace(target, pred_count=5)
        corrupted = PatternSet(ifs=pentagonal_ifs, rho=pattern.rho, points=points, core=pattern.core)

        violations = check_neighbor_law(corrupted)
        assert [v.elem for v in violations] == [target.elem]
        assert violations[0].allowed == 0
        assert violations[0].neighbor_maps >= 1

    def test_tiny_pattern(self, pentagonal_ifs, pentagonal_core):
        """Test that a one-point pattern has nothing to check."""
        pattern = build_model_set(pentagonal_ifs, 0.1, core=pentagonal_core)
        assert check_neighbor_law(pattern) == []


class TestCoveringRadius:
    """Tests for the empirical covering radius."""

    def test_stable_across_radii(self, pentagonal_ifs, pentagonal_core, pentagonal_pattern):
        """Test that the largest hole does not grow with the pattern."""
        small = build_model_set(pentagonal_ifs, 10.0, core=pentagonal_core)
        inner = covering_radius(small, step=0.1)
        outer = covering_radius(pentagonal_pattern, region=20.0, step=0.25)
        assert 0 < inner < 2.0
        assert 0 < outer < 2.0

    def test_seeded_pattern_has_holes(self, pentagonal_ifs, tau):
        """Test that the sub-solution from -tau leaves a hole wider than 2."""
        pattern = extend([-tau], pentagonal_ifs, 20.0)
        assert covering_radius(pattern, step=0.25) > 2.0

    def test_empty_pattern(self, pentagonal_ifs):
        """Test that an empty pattern covers nothing."""
        assert math.isinf(covering_radius(PatternSet(ifs=pentagonal_ifs, rho=1.0)))


class TestRingCensus:
    """Tests for the neighbour-ring census."""

    def test_counts_cover_class(self, pentagonal_pattern):
        """Test that the census counts each interior five-predecessor point once."""
        census = ring_census(pentagonal_pattern, 1.0)
        limit = interior_radius(pentagonal_pattern) - 1.0
        centres = sum(
            1 for r in pentagonal_pattern if r.pred_count == 5 and math.hypot(*r.phys) <= limit
        )
        assert sum(census.values()) == centres
        assert all(count <= 10 for count in census)

    def test_other_class(self, pentagonal_pattern):
        """Test that a different centre class can be selected."""
        centre = pentagonal_pattern.get((0, 0, 0, 0)).pred_count
        census = ring_census(pentagonal_pattern, T, pred_count=centre)
        assert sum(census.values()) >= 1
