"""Exception hierarchy shared by every module."""


class QCQPError(Exception):
    """Base class for all errors raised by this package."""


class DimensionError(QCQPError, ValueError):
    pass


class NonFiniteEntry(QCQPError, ValueError):
    pass


class NegativeMultiplier(QCQPError, ValueError):
    pass


class AllZeroMultipliers(QCQPError, ValueError):
    pass


class FullRank(QCQPError):
    """The vectors b_k span the whole space, so no kernel direction exists."""

    def __init__(self, rank, n):
        super().__init__(f"rank of the linear terms is {rank} = n; no kernel direction")
        self.rank = rank
        self.n = n


class DegenerateInput(QCQPError, ValueError):
    pass


class DualDivergence(QCQPError):
    """The dual objective looks unbounded above, or its domain is empty."""


class NoConvergence(QCQPError):
    """Iteration budget exhausted without a certified solution.

    ``best`` carries the best-so-far candidate (a ``Solution``) when one exists.
    """

    def __init__(self, message, best=None):
        super().__init__(message)
        self.best = best


class InternalContradiction(QCQPError):
    """Both alternatives were verified at once."""

    def __init__(self, message, strict_point=None, multiplier=None):
        super().__init__(message)
        self.strict_point = strict_point
        self.multiplier = multiplier


class GridTooLarge(QCQPError, ValueError):
    pass


class ParseError(QCQPError, ValueError):
    def __init__(self, message, line=None, column=None, field=None):
        where = []
        if line is not None:
            where.append(f"line {line}")
        if column is not None:
            where.append(f"column {column}")
        if field is not None:
            where.append(f"field {field!r}")
        super().__init__(f"{message} ({', '.join(where)})" if where else message)
        self.line = line
        self.column = column
        self.field = field


class ValidationError(QCQPError, ValueError):
    def __init__(self, problems):
        self.problems = list(problems)
        super().__init__("; ".join(self.problems))
