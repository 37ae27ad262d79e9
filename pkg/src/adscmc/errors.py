"""Exception hierarchy shared by the library and the CLI."""


class AdsCmcError(Exception):
    """Base class for all library errors."""


class DomainError(AdsCmcError, ValueError):
    """An argument lies outside the domain of the requested map."""


class StructureError(AdsCmcError, ValueError):
    """Array shapes or sizes do not match the grid they claim to live on."""


class DegeneracyError(AdsCmcError):
    """The ambient metric is not positive definite at some sampled point."""


class GeometryError(AdsCmcError):
    """The induced metric of a surface is degenerate."""


class UnsupportedError(AdsCmcError):
    """The requested diagnostic is unavailable for this perturbation."""


class DivergenceError(AdsCmcError):
    """Newton iteration failed to reach the residual tolerance."""

    def __init__(self, message, history=()):
        super().__init__(message)
        self.history = list(history)


class LinearSolveError(AdsCmcError):
    """The Newton linear system is singular to working precision."""


class ResonanceError(AdsCmcError):
    """Prescribed-curvature solve requested too close to r = 3m."""


class MatchingError(AdsCmcError):
    """No unique background sphere matches the leaf mean curvature."""


class FoliationAbort(AdsCmcError):
    """Continuation stopped at a specific leaf."""

    def __init__(self, message, leaf_index, reason):
        super().__init__(message)
        self.leaf_index = leaf_index
        self.reason = reason


class BoundaryNotMinimalError(AdsCmcError):
    """The inner boundary sphere of the perturbed metric is not minimal."""


class ConfigError(AdsCmcError, ValueError):
    """Invalid experiment configuration."""
