"""Exception hierarchy shared by all modules."""


class LagrangeForgeError(Exception):
    """Base class for every error raised by the package."""


class StructureError(LagrangeForgeError):
    """Malformed input data (wrong shapes, too few facets, bad JSON fields)."""


class GeometryError(LagrangeForgeError):
    """Input is well formed but geometrically unusable (unbounded, empty, ...)."""


class PencilError(LagrangeForgeError):
    """A lattice direction does not define a pencil."""


class InfeasibleError(LagrangeForgeError):
    """A requested level/fiber/base value cannot be attained."""

    def __init__(self, message, constraint=None):
        super().__init__(message)
        self.constraint = constraint


class MarginError(InfeasibleError):
    """A loop or base value comes too close to a singular value."""


class BaseLocusError(LagrangeForgeError):
    """The pencil map is undefined at the given point."""


class NumericError(LagrangeForgeError):
    """A root finder or continuation step failed to converge."""

    def __init__(self, message, diagnostics=None):
        super().__init__(message)
        self.diagnostics = diagnostics or {}


class IncompleteSampleError(LagrangeForgeError):
    """A sample is missing nodes or frames needed for verification."""


class ModelError(LagrangeForgeError):
    """A point violates the defining equations of an ambient model."""
