"""
Shared pytest fixtures for the test suite.

Cores and patterns of the built-in presets are expensive enough to build once
per session. Tests that modify a pattern build their own.
"""

import pytest

from quasilattice.analysis import cyclic_components
from quasilattice.pipeline import build_model_set, compute_core
from quasilattice.presets import load_preset
from quasilattice.ring import cyclotomic_field, cyclotomic_pisot


@pytest.fixture(scope='session')
def field5():
    """The ring Z[z] with z = exp(2*pi*i/5)."""
    return cyclotomic_field(5)


@pytest.fixture(scope='session')
def tau(field5):
    """The golden ratio 1 + z + z^4."""
    return cyclotomic_pisot(field5)


@pytest.fixture(scope='session')
def t(tau):
    """t = tau - 1 = 1/tau."""
    return tau - 1


@pytest.fixture(scope='session')
def pentagonal_ifs():
    """g_k(x) = tau*x + z^k, k = 1..5."""
    return load_preset("pentagonal-basic").ifs


@pytest.fixture(scope='session')
def pentagonal_core(pentagonal_ifs):
    return compute_core(pentagonal_ifs)


@pytest.fixture(scope='session')
def pentagonal_report(pentagonal_ifs, pentagonal_core):
    """Cyclic components of the pentagonal core."""
    return cyclic_components(pentagonal_core.F1, pentagonal_ifs)


@pytest.fixture(scope='session')
def pentagonal_pattern(pentagonal_ifs, pentagonal_core):
    """Pentagonal pattern inside radius 30."""
    return build_model_set(pentagonal_ifs, 30.0, core=pentagonal_core)


@pytest.fixture(scope='session')
def small_pattern(pentagonal_ifs, pentagonal_core):
    """Pentagonal pattern inside radius 6, for export and drawing tests."""
    return build_model_set(pentagonal_ifs, 6.0, core=pentagonal_core)


@pytest.fixture(scope='session')
def hmv_ifs():
    """Eleven maps with factor tau^2: translation 0 and the tenth roots of unity."""
    return load_preset("hmv-decagonal").ifs


@pytest.fixture(scope='session')
def hmv_core(hmv_ifs):
    return compute_core(hmv_ifs)


@pytest.fixture(scope='session')
def coherent_ifs():
    return load_preset("coherent-decagonal").ifs


@pytest.fixture(scope='session')
def scaled_ifs():
    return load_preset("pentagonal-scaled-2").ifs


@pytest.fixture(scope='session')
def negative_ifs():
    return load_preset("pentagonal-negative").ifs
