"""Exception hierarchy shared by the solvers and file readers."""


class DMDGPError(Exception):
    """Base class for all package errors."""


class ArgumentError(DMDGPError, ValueError):
    """Bad argument: wrong point count, dimension mismatch, index out of range."""


class DegeneracyError(DMDGPError):
    """The K points defining a sphere intersection or hyperplane are (nearly) affinely dependent."""

    def __init__(self, message, vertex=None):
        super().__init__(message)
        self.vertex = vertex


class InfeasibleError(DMDGPError):
    """The spheres of a K-lateration do not intersect."""

    def __init__(self, message, residual=None, vertex=None):
        super().__init__(message)
        self.residual = residual
        self.vertex = vertex


class InstanceError(DMDGPError, ValueError):
    """Malformed or structurally invalid instance."""


class ParseError(DMDGPError, ValueError):
    """Syntax error in an instance, realization or PDB file."""

    def __init__(self, message, line=None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class EmptyStructureError(ParseError):
    """No backbone atoms survived PDB filtering."""


class GenerationError(DMDGPError):
    """Rejection sampling of a synthetic chain ran out of budget."""


class RefusalError(DMDGPError):
    """Exhaustive enumeration refused because the instance is too large."""


class SolverFailure(DMDGPError):
    """A solver could not produce a realization within tolerance."""

    def __init__(self, message, stats=None, residual=None, edge=None, s_size=None):
        super().__init__(message)
        self.stats = stats
        self.residual = residual
        self.edge = edge
        self.s_size = s_size


class SolverTimeout(SolverFailure):
    """Node or wall-time budget exhausted before a solution was found."""
