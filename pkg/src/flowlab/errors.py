"""Exception hierarchy shared by all flowlab modules."""


class FlowlabError(Exception):
    """Base class for all errors raised by this package."""


class AmbientDomainError(FlowlabError):
    """A spacetime point lies outside the chart of the ambient model."""


class GeometryError(FlowlabError):
    """Hypersurface geometry is invalid (e.g. spacelikeness lost).

    Carries the offending grid index and value when available.
    """

    def __init__(self, message, point=None, value=None):
        super().__init__(message)
        self.point = point
        self.value = value


class AdmissibilityError(FlowlabError):
    """Principal curvatures left the defining cone of the curvature function."""

    def __init__(self, message, point=None):
        super().__init__(message)
        self.point = point


class DomainError(FlowlabError):
    """Curvature value outside the domain of the reparametrization (e.g. F <= 0 under log)."""


class ConfigError(FlowlabError):
    """Invalid run configuration; message names the offending dotted field path."""

    def __init__(self, message, field=None):
        super().__init__(message)
        self.field = field


class CFLError(FlowlabError):
    """Requested time step violates the parabolic CFL bound."""

    def __init__(self, message, suggested_dt=None):
        super().__init__(message)
        self.suggested_dt = suggested_dt


class AssemblyError(FlowlabError):
    """Linearized-operator assembly failed (e.g. ellipticity lost)."""


class NumericalError(FlowlabError):
    """An iterative solver stalled or diverged."""


class FoliateError(FlowlabError):
    """Foliation continuation diverged; carries the last epsilon that converged."""

    def __init__(self, message, last_good_eps=None):
        super().__init__(message)
        self.last_good_eps = last_good_eps


class ConstructionError(FlowlabError):
    """A derived construction (e.g. flow reparametrization) is ill-posed."""
