"""Exception hierarchy. ``exit_code`` is what the CLI returns for each class."""


class RqmError(Exception):
    exit_code = 1


class ConfigurationError(RqmError, ValueError):
    """Invalid schedule, problem constants, or experiment configuration."""

    exit_code = 2


class ParseError(ConfigurationError):
    """Malformed data file. Carries the 1-based line number when known."""

    def __init__(self, message, line=None, path=None):
        self.line = line
        self.path = path
        where = ""
        if path is not None:
            where += f"{path}"
        if line is not None:
            where += f":{line}"
        super().__init__(f"{where}: {message}" if where else message)


class ShapeError(RqmError, ValueError):
    exit_code = 2


class DegenerateSubproblemError(RqmError, ValueError):
    """The prox subproblem has no strong convexity (gamma + A*sigma <= 0)."""

    exit_code = 2


class NumericalFailure(RqmError, ArithmeticError):
    """A non-finite value appeared in the solver state."""

    exit_code = 3

    def __init__(self, message, iteration=None):
        self.iteration = iteration
        if iteration is not None:
            message = f"iteration {iteration}: {message}"
        super().__init__(message)


class ReferenceNotConvergedError(RqmError):
    pass


class RateNotMeasurableError(RqmError):
    """The mean gap is nonpositive somewhere in the fitting window."""
