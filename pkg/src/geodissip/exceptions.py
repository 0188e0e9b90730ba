class GeodissipError(Exception):
    """Base class for every error raised by geodissip"""

    pass


class DimensionMismatch(GeodissipError, ValueError):
    """
    Raised when a point, vector, metric or field has a dimension different
    from the chart it is used with
    """

    pass


class InvalidPoint(GeodissipError, ValueError):
    """Raised when a chart point has non-finite coordinates"""

    pass


class SingularMetric(GeodissipError):
    """
    Raised when the metric matrix at a point cannot be factorized (or has a
    non-positive determinant where a volume form is needed)
    """

    pass


class DegenerateGram(GeodissipError):
    """
    Raised when a Gram determinant is below the regularity threshold, that is,
    the point is outside the open set where the gradients are independent.
    ``diagnostic`` holds the rank analysis when it was computed
    """

    def __init__(self, message, det=None, threshold=None, diagnostic=None):
        super().__init__(message)
        self.det = det
        self.threshold = threshold
        self.diagnostic = diagnostic


class MissingRate(GeodissipError, ValueError):
    """Raised when a control field is requested without a rate function"""

    pass


class DegreeMismatch(GeodissipError, ValueError):
    """Raised when a form has the wrong degree for the requested operation"""

    pass


class DegreeOverflow(GeodissipError, ValueError):
    """Raised when k + 1 conserved/target differentials exceed the dimension"""

    pass


class InvalidLevel(GeodissipError, ValueError):
    """Raised when a leaf level c is not admissible (c <= 0)"""

    pass


class OriginExcluded(GeodissipError, ValueError):
    """Raised when a model on R^3 minus the origin is evaluated at 0"""

    pass


class StepFailure(GeodissipError):
    """
    Raised when the integrator produces a non-finite state. ``trajectory``
    holds the samples computed before the failure
    """

    def __init__(self, message, trajectory=None):
        super().__init__(message)
        self.trajectory = trajectory if trajectory is not None else []


class EmptyTrajectory(GeodissipError, ValueError):
    """Raised when a report is requested for a trajectory without samples"""

    pass


class ConfigError(GeodissipError, ValueError):
    """
    Raised when a run or verify configuration is invalid, ``field`` names
    the offending entry
    """

    def __init__(self, message, field=None):
        super().__init__(message)
        self.field = field


class InvalidMetric(GeodissipError, ValueError):
    """Raised when a metric evaluator returns a non symmetric matrix"""

    pass


class DimensionLimit(GeodissipError, ValueError):
    """Raised when an enumeration-based routine is asked for a too large chart"""

    pass
