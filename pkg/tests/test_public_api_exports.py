"""
Tests for the public API exports in the quasilattice package.
"""

import quasilattice
from quasilattice import (
    build_model_set,
    check_neighbor_law,
    compute_core,
    conjugate_ifs,
    cyclic_components,
    decoration_stats,
    determine_N,
    emit_config,
    export_points,
    extend,
    load_preset,
    make_field,
    make_ifs,
    membership_oracle,
    parse_config,
    render_svg,
)


def test_pipeline_functions_exported():
    """Test that the construction steps are available from the top-level package."""
    assert callable(determine_N)
    assert callable(compute_core)
    assert callable(extend)
    assert callable(build_model_set)
    assert callable(membership_oracle)


def test_analysis_and_render_functions_exported():
    """Test that diagnostics and drawing helpers are available from the top-level package."""
    assert callable(cyclic_components)
    assert callable(decoration_stats)
    assert callable(check_neighbor_law)
    assert callable(export_points)
    assert callable(render_svg)


def test_all_exports_are_listed():
    """Test that __all__ lists the exported helpers."""
    expected_exports = {
        "make_field",
        "make_ifs",
        "conjugate_ifs",
        "compute_core",
        "build_model_set",
        "parse_config",
        "emit_config",
        "load_preset",
        "QuasilatticeError",
    }

    assert expected_exports.issubset(set(quasilattice.__all__))
    for name in quasilattice.__all__:
        assert hasattr(quasilattice, name)


def test_top_level_names_are_module_objects():
    """Test that re-exports are the same objects as in their modules."""
    from quasilattice import config, ifs, ring

    assert make_field is ring.make_field
    assert make_ifs is ifs.make_ifs
    assert parse_config is config.parse_config
    assert callable(load_preset)


def test_version():
    """Test the package metadata."""
    assert quasilattice.__version__ == "0.1.0"
