"""Exception types raised across the package."""


class ParameterError(ValueError):
    """An argument is outside the admissible range."""


class BracketError(RuntimeError):
    """Root bracket does not contain a sign change."""

    def __init__(self, message, lo, hi):
        super().__init__(f"{message} (bracket [{lo:.6g}, {hi:.6g}])")
        self.lo = lo
        self.hi = hi


class GeometryError(ValueError):
    """Element is inverted or degenerate."""


class SingularityError(ArithmeticError):
    """Matrix is singular within tolerance."""


class SpdError(ArithmeticError):
    """Matrix is not symmetric positive definite."""


class FitQualityError(RuntimeError):
    """Polynomial fit failed to represent its target."""

    def __init__(self, message, sup_error):
        super().__init__(f"{message} (sup_error={sup_error:.3e})")
        self.sup_error = sup_error


class SolverError(RuntimeError):
    """Phase-factor solver did not converge."""

    def __init__(self, message, residual):
        super().__init__(f"{message} (residual={residual:.3e})")
        self.residual = residual


class LayoutError(ValueError):
    """Register sizes or branch parameters are inconsistent."""
