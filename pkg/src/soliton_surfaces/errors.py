"""
Exception hierarchy for soliton_surfaces.

Every error carries the diagnostic payload needed to reproduce the failure
(determinant, residual, location...) and an ``exit_code`` used by the CLI:
2 for configuration problems, 3 for computation failures, 4 for I/O.
"""

from typing import Optional, Tuple

EXIT_OK = 0
EXIT_VERIFY_FAILED = 1
EXIT_CONFIG = 2
EXIT_COMPUTATION = 3
EXIT_IO = 4

Location = Tuple[float, ...]


class SolitonError(Exception):
    """Base class of all package errors."""

    exit_code = EXIT_COMPUTATION


class ConfigError(SolitonError):
    exit_code = EXIT_CONFIG

    def __init__(self, message: str, flag: Optional[str] = None):
        super().__init__(message)
        self.flag = flag


class ContractViolationError(SolitonError):
    """Operands with incompatible shapes."""


class SingularMatrixError(SolitonError):
    def __init__(self, det: float, tolerance: float):
        super().__init__(f"matrix is singular: |det|={det:.3e} <= {tolerance:.1e}")
        self.det = det
        self.tolerance = tolerance


class NotInAlgebraError(SolitonError):
    def __init__(self, hermitian_residual: float, trace_residual: float, tolerance: float):
        super().__init__(
            "matrix is not in su(N): "
            f"|A + A^H|={hermitian_residual:.3e}, |tr A|={trace_residual:.3e} "
            f"(tolerance {tolerance:.1e})"
        )
        self.hermitian_residual = hermitian_residual
        self.trace_residual = trace_residual


class FieldEvaluationError(SolitonError):
    def __init__(self, label: str, location: Location):
        loc = ", ".join(f"{v:.6g}" for v in location)
        super().__init__(f"non-finite value of field {label!r} at ({loc})")
        self.label = label
        self.location = location


class NearDegenerateError(SolitonError):
    def __init__(self, trace: float, numerator_norm: float, location: Location):
        super().__init__(
            f"raising/lowering denominator |tr|={trace:.3e} vanishes while the "
            f"numerator norm is {numerator_norm:.3e} at {location}"
        )
        self.trace = trace
        self.numerator_norm = numerator_norm
        self.location = location


class ChainLengthError(SolitonError):
    def __init__(self, index: int, size: int):
        super().__init__(
            f"projector chain terminated at index {index}, expected {size} members"
        )
        self.index = index
        self.size = size


class IntegrationError(SolitonError):
    def __init__(self, message: str, location: Location):
        super().__init__(f"{message} at {location}")
        self.location = location


class SingularParameterError(SolitonError):
    def __init__(self, lam: complex):
        super().__init__(f"spectral parameter lambda={lam} makes 1 - lambda^2 vanish")
        self.lam = lam


class FrameDegeneracyError(SolitonError):
    def __init__(self, bracket_norm: float, location: Location):
        super().__init__(
            f"tangent vectors are dependent: |[A1,A2]|={bracket_norm:.3e} at {location}"
        )
        self.bracket_norm = bracket_norm
        self.location = location


class MetricDegeneracyError(SolitonError):
    def __init__(self, det_g: float):
        super().__init__(f"first fundamental form is degenerate: det g={det_g:.3e}")
        self.det_g = det_g


class SphereFitError(SolitonError):
    pass


class MappingUndefinedError(SolitonError):
    def __init__(self, det: float, location: Location):
        super().__init__(f"gauge is singular (|det|={det:.3e}) at {location}")
        self.det = det
        self.location = location


class SurfaceSamplingError(SolitonError):
    def __init__(self, excluded: int, total: int):
        super().__init__(
            f"{excluded} of {total} vertices could not be projected on su(N)"
        )
        self.excluded = excluded
        self.total = total


class ExportError(SolitonError):
    exit_code = EXIT_IO

    def __init__(self, message: str, path: Optional[str] = None):
        super().__init__(f"{message}: {path}" if path else message)
        self.path = path
