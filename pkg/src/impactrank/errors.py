"""Exception hierarchy shared by every module."""


class ImpactRankError(Exception):
    """Base class for all errors raised by impactrank."""


class MissingMetadata(ImpactRankError):
    def __init__(self, paper_id):
        super().__init__(f"edge references unknown paper {paper_id!r}")
        self.paper_id = paper_id


class MalformedRecord(ImpactRankError):
    def __init__(self, line, reason="", lineno=None):
        where = f" (line {lineno})" if lineno is not None else ""
        msg = f"malformed record{where}: {line!r}"
        if reason:
            msg += f": {reason}"
        super().__init__(msg)
        self.line = line
        self.lineno = lineno


class RatioOutOfRange(ImpactRankError):
    pass


class EmptyGraph(ImpactRankError):
    pass


class DimensionMismatch(ImpactRankError):
    pass


class NoConvergence(ImpactRankError):
    """Raised when an iterative solver runs out of iterations.

    The last residual and the full residual trace are attached so callers
    can report how far the solve got.
    """

    def __init__(self, msg, residual=float("nan"), residuals=None, iterations=0):
        super().__init__(f"{msg} (residual={residual:.3e} after {iterations} iterations)")
        self.residual = residual
        self.residuals = list(residuals or [])
        self.iterations = iterations


class SingularSystem(ImpactRankError):
    pass


class ContractionPreconditionViolated(ImpactRankError):
    pass


class InvalidParameters(ImpactRankError):
    pass


class EmptyWindow(ImpactRankError):
    pass


class InsufficientTail(ImpactRankError):
    pass


class MissingAuthors(ImpactRankError):
    pass


class DegenerateInput(ImpactRankError):
    pass


class ZeroIdeal(ImpactRankError):
    pass
