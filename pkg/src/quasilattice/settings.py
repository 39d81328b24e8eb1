"""
Library defaults for quasilattice.

Values here are the defaults used when a caller or a job configuration does
not override them.
"""

import logging
import os

logger = logging.getLogger(__name__)

# Relative slack for radius tests against the bounds c and c_j. Cycle points
# can sit exactly on |x| = c.
RADIUS_TOLERANCE = 1e-9

# Relative slack for the cutoff radius rho of the recursive extension.
RHO_TOLERANCE = 1e-12

# Maximum number of lattice vectors (2N+1)^d enumerated in step 1.
LATTICE_BUDGET = 10**8

# Maximum number of points kept by the recursive extension.
POINT_BUDGET = 10**7

# Maximum number of points in a forward-iterated attractor cloud.
ATTRACTOR_BUDGET = 2 * 10**6

DEFAULT_DEPTH = 8
DEFAULT_RHO = 30.0

THREADS_ENV = "QL_THREADS"


def thread_count() -> int:
    """
    Number of worker threads allowed for data-parallel steps.

    Reads ``QL_THREADS``. Missing, non-numeric or non-positive values give 1.

    Returns:
        Positive thread count
    """
    raw = os.environ.get(THREADS_ENV)
    if raw is None or not raw.strip():
        return 1
    try:
        value = int(raw)
    except ValueError:
        logger.warning("Ignoring %s=%r: not an integer", THREADS_ENV, raw)
        return 1
    if value < 1:
        logger.warning("Ignoring %s=%r: must be positive", THREADS_ENV, raw)
        return 1
    return value


__all__ = [
    "RADIUS_TOLERANCE",
    "RHO_TOLERANCE",
    "LATTICE_BUDGET",
    "POINT_BUDGET",
    "ATTRACTOR_BUDGET",
    "DEFAULT_DEPTH",
    "DEFAULT_RHO",
    "THREADS_ENV",
    "thread_count",
]
