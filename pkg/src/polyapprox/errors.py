"""Exception hierarchy shared by all polyapprox modules."""


class PolyApproxError(Exception):
    """Base class for every error raised by this package."""


class UnboundedBody(PolyApproxError):
    pass


class ConvergenceFailure(PolyApproxError):
    pass


class Unsupported(PolyApproxError):
    pass


class DegenerateBody(PolyApproxError):
    pass


class VertexEnumerationOverflow(PolyApproxError):
    pass


class DensityViolation(PolyApproxError):
    pass


class InsufficientHits(PolyApproxError):
    pass


class BoundViolation(PolyApproxError):
    """A verified inequality did not hold; ``details`` keeps both sides."""

    def __init__(self, message, details=None):
        super().__init__(message)
        self.details = details or {}


class UnboundedCircumscription(PolyApproxError):
    pass


class Infeasible(PolyApproxError):
    pass


class ContainmentViolation(PolyApproxError):
    pass


class RetryExhausted(PolyApproxError):
    def __init__(self, message, diagnostics=None):
        super().__init__(message)
        self.diagnostics = diagnostics or []


class ThresholdNotMet(PolyApproxError):
    pass


class ParameterBelowThreshold(PolyApproxError):
    pass


class InvalidIndexPair(PolyApproxError):
    pass


class ParseError(PolyApproxError):
    """Scenario or body document could not be parsed."""

    def __init__(self, message, field=None, line=None):
        loc = []
        if line is not None:
            loc.append(f"line {line}")
        if field is not None:
            loc.append(f"field {field!r}")
        super().__init__(f"{message} ({', '.join(loc)})" if loc else message)
        self.message = message
        self.field = field
        self.line = line
