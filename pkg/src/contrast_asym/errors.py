"""Exception hierarchy shared by all toolkit modules."""


class ContrastAsymError(Exception):
    """Base class for all toolkit errors."""


class InvalidConductivityError(ContrastAsymError):
    """Conductivity matrix is not symmetric positive definite, or its
    eigenvalues fall outside the supported contrast range."""


class UnsupportedDimensionError(ContrastAsymError):
    """Operation only defined for a specific spatial dimension."""


class OrderingViolationError(ContrastAsymError):
    """Quadratic-form ordering between background and perturbed
    conductivity does not match the declared region type."""


class AssumptionViolationError(ContrastAsymError):
    """A structural hypothesis on the inclusion family fails outright
    (for example, overlapping conductive and insulating regions)."""


class UnresolvableThinRegionError(ContrastAsymError):
    """Requested mesh size cannot resolve an inclusion; the thinnest
    feature is below half the target element size."""


class SolverDivergenceError(ContrastAsymError):
    """Iterative linear solver hit its iteration cap before reaching the
    target residual."""


class MismatchedMeshError(ContrastAsymError):
    """Fields passed to an operation do not live on the same mesh."""


class NonzeroFluxError(ContrastAsymError):
    """Stream-function construction requires vanishing flux through every
    boundary component; measured flux exceeded the threshold."""


class ZeroMeasureInclusionError(ContrastAsymError):
    """No mesh cells are tagged as inclusion; measure weights undefined."""


class NonpositiveSampleError(ContrastAsymError):
    """Log-log rate fit received a nonpositive abscissa or ordinate."""


class ConfigError(ContrastAsymError):
    """Run-configuration text failed validation.

    Carries the 1-based line number when the offence is tied to a line.
    """

    def __init__(self, message, line=None, field=None):
        self.line = line
        self.field = field
        prefix = ""
        if line is not None:
            prefix += f"line {line}: "
        if field is not None:
            prefix += f"[{field}] "
        super().__init__(prefix + message)


class UnsupportedGeometryError(ContrastAsymError):
    """Mesh generation does not cover the requested family/domain pair."""
