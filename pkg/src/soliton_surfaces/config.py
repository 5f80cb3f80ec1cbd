"""
Runtime configuration.

Values are module constants read once from the environment, with defaults
tuned for double precision evaluation of the CP^(N-1) fixtures.

Usage:
    from soliton_surfaces import config
    workers = config.THREADS
"""

import os
from dataclasses import dataclass, replace


def _int_env(name: str, default: int) -> int:
    raw = os.getenv(name, "")
    try:
        value = int(raw)
    except ValueError:
        return default
    return value if value > 0 else default


# Grid sweeps
THREADS = _int_env("SOLITON_THREADS", os.cpu_count() or 1)

# Logging
LOG_LEVEL = os.getenv("SOLITON_LOG_LEVEL", "WARNING")
LOG_FILE = os.getenv("SOLITON_LOG_FILE") or None
LOG_DIR = os.getenv("SOLITON_LOG_DIR", "logs")

# Numerical thresholds
SINGULAR_DET_TOL = 1e-12
ALGEBRA_TOL = 1e-9
PROJECTOR_TOL = 1e-12
RAISING_ZERO_TOL = 1e-13
FRAME_DEGENERACY_TOL = 1e-10
METRIC_DEGENERACY_TOL = 1e-12
GAUGE_DET_TOL = 1e-10
FD_RELATIVE_STEP = 1e-4
INTEGRAND_FLOOR = 1e-300

# Surface defaults
DEFAULT_T = 0.5
DEFAULT_GRID_BOUNDS = (-5.0, 5.0, -5.0, 5.0)
DEFAULT_GRID_POINTS = 201
GAUGE_EXCLUSION_RADIUS = 1e-3
MAX_EXCLUDED_FRACTION = 0.01


@dataclass(frozen=True)
class Tolerances:
    """Pass thresholds applied by the verification suite."""

    residual: float = 1e-8
    fixture: float = 1e-10
    curvature: float = 1e-6
    curvature_spread: float = 1e-7
    euler: float = 0.01
    mapping: float = 1e-9
    sphere: float = 1e-8
    finite_difference: float = 1e-6

    def with_residual(self, tol: float) -> "Tolerances":
        """Override the residual threshold; the finite-difference one scales with it."""
        return replace(
            self,
            residual=tol,
            finite_difference=self.finite_difference * tol / self.residual,
        )
