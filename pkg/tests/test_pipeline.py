"""
Tests for the model set construction pipeline.
"""

import math

import numpy as np
import pytest

from quasilattice import settings
from quasilattice.errors import BudgetExceeded, Intractable, ValidationError
from quasilattice.ifs import apply_map, compute_bounds, preimages
from quasilattice.pipeline import (
    ALL_CYCLES,
    SEEDS,
    STABILIZE,
    PatternSet,
    build_model_set,
    candidate_count,
    compute_core,
    determine_N,
    enumerate_core,
    extend,
    membership_oracle,
    prune_core,
    quadratic_form_bound,
    verify_oracle,
)
from quasilattice.ring import embed


class TestCandidateCount:
    """Tests for the lattice size formula."""

    def test_values(self):
        """Test (2N+1)^d for the pentagonal and scaled ranges."""
        assert candidate_count(4, 2) == 625
        assert candidate_count(4, 5) == 14641


class TestQuadraticFormBound:
    """Tests for the certified coordinate range."""

    def test_pentagonal(self, pentagonal_ifs):
        """Test N = 2 for tau*x + z^k."""
        assert quadratic_form_bound(pentagonal_ifs) == 2

    def test_hmv(self, hmv_ifs):
        """Test N = 1 for the eleven-map system."""
        assert quadratic_form_bound(hmv_ifs) == 1

    def test_scaled(self, scaled_ifs):
        """Test N = 5 when the translations are doubled."""
        assert quadratic_form_bound(scaled_ifs) == 5

    def test_negative(self, negative_ifs):
        """Test that beta = -tau needs the same range as beta = tau."""
        assert quadratic_form_bound(negative_ifs) == 2


class TestEnumerateCore:
    """Tests for step 1."""

    def test_pentagonal_count(self, pentagonal_ifs):
        """Test that 91 lattice points project into both balls."""
        assert len(enumerate_core(pentagonal_ifs, N=2)) == 91

    def test_points_inside_bounds(self, pentagonal_ifs):
        """Test that every F0 point satisfies both radius conditions."""
        bounds = compute_bounds(pentagonal_ifs)
        slack = 1 + settings.RADIUS_TOLERANCE
        for x in enumerate_core(pentagonal_ifs, bounds, 2):
            assert abs(embed(x)) <= bounds.c * slack
            assert abs(embed(x, 0)) <= bounds.c_planes[0] * slack

    def test_sorted_and_distinct(self, pentagonal_ifs):
        """Test that F0 is ordered by coordinates without repeats."""
        keys = [x.coords for x in enumerate_core(pentagonal_ifs, N=2)]
        assert keys == sorted(set(keys))

    def test_fixed_points_on_boundary_kept(self, pentagonal_ifs, tau):
        """Test that -tau*z^k, sitting exactly on |x| = c, survive the radius test."""
        keys = {x.coords for x in enumerate_core(pentagonal_ifs, N=2)}
        for z in pentagonal_ifs.translations:
            assert (-(tau * z)).coords in keys

    def test_radius_factor_enlarges(self, pentagonal_ifs):
        """Test that a larger physical radius keeps at least as many points."""
        assert len(enumerate_core(pentagonal_ifs, N=2, radius_factor=2.0)) >= 91

    def test_budget(self, pentagonal_ifs):
        """Test that an oversized lattice raises Intractable."""
        with pytest.raises(Intractable):
            enumerate_core(pentagonal_ifs, N=2, budget=100)

    def test_threads_give_same_result(self, pentagonal_ifs, monkeypatch):
        """Test that parallel filtering matches the single-threaded result."""
        single = enumerate_core(pentagonal_ifs, N=2, threads=1)
        monkeypatch.setenv("QL_THREADS", "4")
        assert enumerate_core(pentagonal_ifs, N=2) == single


class TestThreadCount:
    """Tests for the QL_THREADS setting."""

    def test_default(self, monkeypatch):
        """Test that a missing variable gives one thread."""
        monkeypatch.delenv("QL_THREADS", raising=False)
        assert settings.thread_count() == 1

    def test_value(self, monkeypatch):
        """Test that a positive integer is used as is."""
        monkeypatch.setenv("QL_THREADS", "3")
        assert settings.thread_count() == 3

    @pytest.mark.parametrize("raw", ["zero", "0", "-2", " "])
    def test_invalid_values(self, monkeypatch, raw):
        """Test that unusable values fall back to one thread."""
        monkeypatch.setenv("QL_THREADS", raw)
        assert settings.thread_count() == 1


class TestDetermineN:
    """Tests for the coordinate range selection."""

    def test_pentagonal(self, pentagonal_ifs):
        """Test the certified N = 2."""
        assert determine_N(pentagonal_ifs) == 2

    def test_hmv(self, hmv_ifs):
        """Test the certified N = 1."""
        assert determine_N(hmv_ifs) == 1

    def test_stabilize_not_above_certified(self, pentagonal_ifs):
        """Test that the count-stabilising search stops no later than the certified bound."""
        assert 1 <= determine_N(pentagonal_ifs, strategy=STABILIZE) <= 2
        assert 1 <= determine_N(pentagonal_ifs, strategy=STABILIZE, consecutive=2) <= 2

    @pytest.mark.parametrize("name", ["pentagonal_ifs", "hmv_ifs"])
    def test_stabilize_agrees_with_default(self, name, request):
        """Test that the stable core count is reached at the certified N."""
        ifs = request.getfixturevalue(name)
        assert determine_N(ifs, strategy=STABILIZE) == determine_N(ifs)

    def test_unknown_strategy(self, pentagonal_ifs):
        """Test that an unknown strategy is rejected."""
        with pytest.raises(ValidationError):
            determine_N(pentagonal_ifs, strategy="guess")

    def test_budget(self, pentagonal_ifs):
        """Test that a certified lattice beyond the budget raises Intractable."""
        with pytest.raises(Intractable):
            determine_N(pentagonal_ifs, budget=100)


class TestPruneCore:
    """Tests for step 2."""

    def test_pentagonal(self, pentagonal_core):
        """Test 91 -> 71."""
        assert len(pentagonal_core.F0) == 91
        assert len(pentagonal_core.F1) == 71
        assert len(pentagonal_core.removed) == 20

    def test_every_survivor_has_a_predecessor(self, pentagonal_core):
        """Test that each F1 point is hit by an edge inside F1."""
        hit = {target for targets in pentagonal_core.graph.values() for target in targets}
        assert hit == {x.coords for x in pentagonal_core.F1}

    def test_idempotent(self, pentagonal_ifs, pentagonal_core):
        """Test that pruning F1 again removes nothing."""
        F1, _ = prune_core(pentagonal_core.F1, pentagonal_ifs)
        assert F1 == list(pentagonal_core.F1)

    def test_lone_point_removed(self, pentagonal_ifs, field5):
        """Test that a point with no predecessor is dropped and the result may be empty."""
        F1, graph = prune_core([field5.zero], pentagonal_ifs)
        assert F1 == []
        assert graph == {}

    def test_negative_factor(self, negative_ifs):
        """Test that beta = -tau keeps 66 of the same 91 candidates."""
        core = compute_core(negative_ifs)
        assert len(core.F0) == 91
        assert len(core.F1) == 66


class TestComputeCore:
    """Tests for steps 1 and 2 together."""

    def test_summary(self, pentagonal_core):
        """Test N and lattice size."""
        assert pentagonal_core.N == 2
        assert pentagonal_core.lattice_size == 625

    def test_hmv(self, hmv_core):
        """Test that the HMV core is its eleven fixed points."""
        assert hmv_core.N == 1
        assert len(hmv_core.F1) == 11

    def test_coherent(self, coherent_ifs):
        """Test 21 -> 16 for the ten-map decagonal system."""
        core = compute_core(coherent_ifs)
        assert len(core.F0) == 21
        assert len(core.F1) == 16

    def test_explicit_N(self, pentagonal_ifs):
        """Test that an explicit N bypasses the search."""
        assert compute_core(pentagonal_ifs, N=3).N == 3

    def test_invalid_N(self, pentagonal_ifs):
        """Test that N must be positive."""
        with pytest.raises(ValidationError):
            compute_core(pentagonal_ifs, N=0)


class TestExtend:
    """Tests for step 3."""

    def test_core_is_closed(self, pentagonal_ifs, pentagonal_core):
        """Test that extending F1 to radius c finds no new points."""
        bounds = compute_bounds(pentagonal_ifs)
        pattern = extend(pentagonal_core.F1, pentagonal_ifs, bounds.c)
        assert set(pattern.points) == {x.coords for x in pentagonal_core.F1}

    def test_pentagonal_size(self, pentagonal_pattern):
        """Test that the radius 30 pattern has more than 8000 points."""
        assert len(pentagonal_pattern) > 8000

    def test_predecessor_counts_exact(self, small_pattern):
        """Test pred_count(y) = #{k : g_k^-1(y) in the pattern} for every point."""
        ifs = small_pattern.ifs
        coords = small_pattern.coordinate_array()
        sources = preimages(ifs, coords)
        for record, rows in zip(small_pattern.records(), sources):
            expected = sum(tuple(row) in small_pattern.points for row in rows.tolist())
            assert record.pred_count == expected

    def test_closure_under_maps(self, small_pattern):
        """Test that images inside the ball are members."""
        ifs = small_pattern.ifs
        limit = small_pattern.rho * (1 - 1e-9)
        for record in small_pattern.records():
            for k in range(ifs.m):
                image = apply_map(ifs, k, record.elem)
                if abs(embed(image)) <= limit:
                    assert image in small_pattern

    def test_every_point_has_a_predecessor(self, small_pattern):
        """Test that the compact pattern has no point with zero predecessors."""
        assert small_pattern.pred_counts().min() >= 1

    def test_order_independent(self, pentagonal_ifs, pentagonal_core):
        """Test that the seed order does not change points or counts."""
        forward = extend(pentagonal_core.F1, pentagonal_ifs, 8.0)
        backward = extend(list(reversed(pentagonal_core.F1)), pentagonal_ifs, 8.0)
        assert forward.points == backward.points

    def test_single_seed_is_proper_subset(self, pentagonal_ifs, pentagonal_core, tau):
        """Test that the fixed point -tau alone generates only part of the pattern."""
        full = build_model_set(pentagonal_ifs, 20.0, core=pentagonal_core)
        partial = extend([-tau], pentagonal_ifs, 20.0)
        assert set(partial.points) < set(full.points)

    def test_seed_outside_ball_not_kept(self, pentagonal_ifs, field5):
        """Test that a seed beyond rho is expanded but not recorded."""
        far = field5.from_int(10)
        pattern = extend([far], pentagonal_ifs, 1.0)
        assert far not in pattern

    def test_budget(self, pentagonal_ifs, pentagonal_core):
        """Test that the point budget raises BudgetExceeded."""
        with pytest.raises(BudgetExceeded):
            extend(pentagonal_core.F1, pentagonal_ifs, 30.0, max_points=100)

    def test_invalid_rho(self, pentagonal_ifs, field5):
        """Test that rho must be positive."""
        with pytest.raises(ValidationError):
            extend([field5.zero], pentagonal_ifs, 0.0)

    def test_no_seeds(self, pentagonal_ifs):
        """Test that at least one seed is required."""
        with pytest.raises(ValidationError):
            extend([], pentagonal_ifs, 5.0)


class TestBuildModelSet:
    """Tests for the full pipeline."""

    def test_flags(self, small_pattern, pentagonal_core):
        """Test that core and cyclic flags are set from the core."""
        core_keys = {x.coords for x in pentagonal_core.F1}
        flagged = {record.key for record in small_pattern if record.is_core}
        assert flagged == core_keys
        cyclic = sum(record.is_cyclic for record in small_pattern)
        assert cyclic == 46
        assert small_pattern.seed_mode == ALL_CYCLES

    def test_tiny_radius(self, pentagonal_ifs, pentagonal_core, field5):
        """Test that radius 0.1 keeps only the origin."""
        pattern = build_model_set(pentagonal_ifs, 0.1, core=pentagonal_core)
        assert len(pattern) == 1
        assert field5.zero in pattern

    def test_seeds_window(self, pentagonal_ifs, pentagonal_core, tau):
        """Test that the seeds window extends the given seeds."""
        pattern = build_model_set(pentagonal_ifs, 10.0, "seeds", [-tau], core=pentagonal_core)
        assert pattern.seed_mode == SEEDS
        assert -tau in pattern

    def test_open_window(self, hmv_ifs, hmv_core, field5):
        """Test that the open HMV window from 0 alone is part of the compact pattern."""
        compact = build_model_set(hmv_ifs, 12.0, core=hmv_core)
        open_window = build_model_set(hmv_ifs, 12.0, "seeds", [field5.zero], core=hmv_core)
        assert set(open_window.points) <= set(compact.points)

    def test_strict_rejects_removed_point(self, pentagonal_ifs, pentagonal_core):
        """Test that strict mode refuses a seed outside the maximal solution."""
        outsider = pentagonal_core.removed[0]
        with pytest.raises(ValidationError, match="maximal solution"):
            build_model_set(pentagonal_ifs, 5.0, "seeds", [outsider], strict=True, core=pentagonal_core)

    def test_strict_accepts_member(self, pentagonal_ifs, pentagonal_core, tau):
        """Test that strict mode accepts a fixed point."""
        pattern = build_model_set(pentagonal_ifs, 5.0, "seeds", [-tau], strict=True, core=pentagonal_core)
        assert len(pattern) >= 1

    def test_seeds_window_needs_seeds(self, pentagonal_ifs, pentagonal_core):
        """Test that the seeds window without seeds is rejected."""
        with pytest.raises(ValidationError):
            build_model_set(pentagonal_ifs, 5.0, "seeds", core=pentagonal_core)

    def test_unknown_window(self, pentagonal_ifs, pentagonal_core):
        """Test that an unknown window name is rejected."""
        with pytest.raises(ValidationError):
            build_model_set(pentagonal_ifs, 5.0, "open", core=pentagonal_core)

    def test_invalid_rho(self, pentagonal_ifs, pentagonal_core):
        """Test that rho must be positive."""
        with pytest.raises(ValidationError):
            build_model_set(pentagonal_ifs, -1.0, core=pentagonal_core)


class TestMembershipOracle:
    """Tests for the inverse-map membership oracle."""

    def test_cyclic_members(self, pentagonal_report, pentagonal_ifs):
        """Test that every cyclic point is accepted."""
        for component in pentagonal_report.components:
            for x in component:
                assert membership_oracle(x, pentagonal_ifs, pentagonal_report)

    def test_forward_image(self, pentagonal_report, pentagonal_ifs, field5):
        """Test that g_3(g_1(0)) belongs to the maximal solution."""
        x = apply_map(pentagonal_ifs, 2, apply_map(pentagonal_ifs, 0, field5.zero))
        assert membership_oracle(x, pentagonal_ifs, pentagonal_report)

    def test_removed_points(self, pentagonal_report, pentagonal_ifs, pentagonal_core):
        """Test that the 20 points removed in step 2 are rejected."""
        for x in pentagonal_core.removed:
            assert not membership_oracle(x, pentagonal_ifs, pentagonal_report)

    def test_accepts_plain_iterables(self, pentagonal_report, pentagonal_ifs, field5):
        """Test that the cyclic set may be given as elements or coordinate keys."""
        elements = [x for component in pentagonal_report.components for x in component]
        keys = [x.coords for x in elements]
        x = apply_map(pentagonal_ifs, 1, field5.zero)
        assert membership_oracle(x, pentagonal_ifs, elements) == membership_oracle(x, pentagonal_ifs, keys)

    def test_far_internal_image(self, pentagonal_report, pentagonal_ifs, field5):
        """Test that a point whose internal image lies outside B_c' is rejected at once."""
        x = field5.from_int(3)
        assert abs(embed(x, 0)) > compute_bounds(pentagonal_ifs).c_planes[0]
        assert not membership_oracle(x, pentagonal_ifs, pentagonal_report)


class TestVerifyOracle:
    """Tests for the oracle cross-check."""

    def test_pentagonal(self, pentagonal_ifs, pentagonal_core):
        """Test agreement on every lattice point of Z^4_2 within radius 8."""
        check = verify_oracle(pentagonal_ifs, 8.0, core=pentagonal_core)
        assert check.ok
        assert check.checked > 0
        assert 0 < check.members < check.checked

    def test_stride(self, pentagonal_ifs, pentagonal_core):
        """Test that a stride thins the sample."""
        full = verify_oracle(pentagonal_ifs, 4.0, core=pentagonal_core)
        thinned = verify_oracle(pentagonal_ifs, 4.0, core=pentagonal_core, stride=3)
        assert thinned.checked == math.ceil(full.checked / 3)

    def test_invalid_stride(self, pentagonal_ifs, pentagonal_core):
        """Test that the stride must be positive."""
        with pytest.raises(ValidationError):
            verify_oracle(pentagonal_ifs, 4.0, core=pentagonal_core, stride=0)


class TestPatternSet:
    """Tests for the pattern container."""

    def test_membership(self, small_pattern, field5):
        """Test lookups by element and by coordinate tuple."""
        assert field5.zero in small_pattern
        assert (0, 0, 0, 0) in small_pattern
        assert small_pattern.get(field5.zero).phys == (0.0, 0.0)
        assert small_pattern.get(field5.from_int(100)) is None

    def test_records_sorted(self, small_pattern):
        """Test that records come in coordinate order."""
        keys = [record.key for record in small_pattern.records()]
        assert keys == sorted(keys)
        assert [r.key for r in small_pattern] == keys

    def test_arrays(self, small_pattern):
        """Test the array views."""
        size = len(small_pattern)
        assert small_pattern.coordinate_array().shape == (size, 4)
        assert small_pattern.physical_array().shape == (size, 2)
        assert small_pattern.pred_counts().shape == (size,)
        radii = np.hypot(*small_pattern.physical_array().T)
        assert radii.max() <= small_pattern.rho * (1 + 1e-12)

    def test_empty(self, pentagonal_ifs):
        """Test an empty pattern."""
        pattern = PatternSet(ifs=pentagonal_ifs, rho=1.0)
        assert len(pattern) == 0
        assert pattern.coordinate_array().shape == (0, 4)
        assert pattern.physical_array().shape == (0, 2)

    def test_mark(self, pentagonal_ifs, pentagonal_core):
        """Test that mark replaces both flags."""
        pattern = extend(pentagonal_core.F1, pentagonal_ifs, 3.0)
        key = next(iter(pattern.points))
        pattern.mark([key], [])
        assert pattern.points[key].is_core
        assert not pattern.points[key].is_cyclic
        assert sum(r.is_core for r in pattern) == 1
