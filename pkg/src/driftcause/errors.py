"""Exception hierarchy shared across the package."""


class DriftCauseError(Exception):
    """Base class for every error raised on bad input data or models."""


class UnknownFeatureError(DriftCauseError, KeyError):
    def __init__(self, name):
        super().__init__(name)
        self.name = name

    def __str__(self):
        return f"unknown feature {self.name!r}"


class GraphError(DriftCauseError, ValueError):
    """Structural problem with a graph (cycle, self-loop, node mismatch)."""


class InvalidNetError(DriftCauseError, ValueError):
    """A Bayesian network failed validation."""

    def __init__(self, violations):
        self.violations = list(violations)
        super().__init__("; ".join(str(v) for v in self.violations))


class StateSpaceError(DriftCauseError, ValueError):
    """Exact enumeration would exceed the configured state-space cap."""


class ZeroProbabilityError(DriftCauseError, ValueError):
    """Conditioning on an event of probability zero."""


class DataError(DriftCauseError, ValueError):
    """Malformed records, streams or queries."""


class FormatError(DriftCauseError, ValueError):
    """Parse error in a net, scenario or stream file."""

    def __init__(self, message, path=None, line=None):
        self.path = path
        self.line = line
        where = ""
        if path is not None:
            where += f"{path}:"
        if line is not None:
            where += f"{line}:"
        super().__init__(f"{where} {message}" if where else message)
