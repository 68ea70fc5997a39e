"""Exception hierarchy shared by every stage of the pipeline."""


class TailwalkError(Exception):
    """Base class; ``stage`` names the pipeline step that failed."""

    stage = "tailwalk"


class GraphError(TailwalkError, ValueError):
    stage = "graph"


class GraphParseError(GraphError):
    """Malformed graph file. ``line`` is 1-based."""

    def __init__(self, line: int, message: str):
        super().__init__(f"line {line}: {message}")
        self.line = line


class TruncationError(TailwalkError):
    stage = "truncation"


class NumericalError(TailwalkError):
    stage = "numerics"


class JacobiError(TailwalkError, ValueError):
    stage = "jacobi"


class ConsistencyError(NumericalError):
    """A computed quantity contradicts a theorem the code relies on."""

    stage = "jost"
