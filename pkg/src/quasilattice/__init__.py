"""
Quasilattice: self-similar model sets from Pisot-unit iterated function systems

Builds the maximal finite-type solution of Λ = ∪ g_k(Λ) for maps
g_k(x) = βx + z_k over a cyclotomic ring, decorates every point with its
number of predecessors and draws the result together with its windows.
"""

__version__ = "0.1.0"
__author__ = "JaclynCodes"
__license__ = "MIT"

from .errors import (
    QuasilatticeError,
    ValidationError,
    NotAUnit,
    NotPisot,
    ParseError,
    BudgetExceeded,
    Intractable,
    IoError,
)
from .ring import RingElement, FieldSpec, make_field, cyclotomic_field, embed, apply_automorphism
from .ifs import IfsSpec, make_ifs, conjugate_ifs, compute_bounds, roots_of_unity
from .pipeline import (
    PatternSet,
    CoreResult,
    determine_N,
    enumerate_core,
    prune_core,
    compute_core,
    extend,
    build_model_set,
    membership_oracle,
)
from .analysis import cyclic_components, decoration_stats, min_distance, check_neighbor_law
from .render import RenderSpec, attractor_approx, export_points, render_svg
from .config import JobConfig, parse_config, emit_config
from .presets import load_preset, preset_names

# Package metadata and public API exports
__all__ = [
    "__version__",
    "__author__",
    "__license__",
    "QuasilatticeError",
    "ValidationError",
    "NotAUnit",
    "NotPisot",
    "ParseError",
    "BudgetExceeded",
    "Intractable",
    "IoError",
    "RingElement",
    "FieldSpec",
    "make_field",
    "cyclotomic_field",
    "embed",
    "apply_automorphism",
    "IfsSpec",
    "make_ifs",
    "conjugate_ifs",
    "compute_bounds",
    "roots_of_unity",
    "PatternSet",
    "CoreResult",
    "determine_N",
    "enumerate_core",
    "prune_core",
    "compute_core",
    "extend",
    "build_model_set",
    "membership_oracle",
    "cyclic_components",
    "decoration_stats",
    "min_distance",
    "check_neighbor_law",
    "RenderSpec",
    "attractor_approx",
    "export_points",
    "render_svg",
    "JobConfig",
    "parse_config",
    "emit_config",
    "load_preset",
    "preset_names",
]
