"""Exception hierarchy; the CLI maps these onto process exit codes."""


class AxivortError(Exception):
    """Base class for all library errors."""


class ValidationError(AxivortError, ValueError):
    """Invalid input: constants, measures, scenarios, domain violations. Exit code 2."""


class ConvergenceError(AxivortError, RuntimeError):
    """Dual ascent did not reach tolerance. Carries the best state seen. Exit code 3.

    The attribute ``best`` holds a DualSolution built from the best iterate;
    ``grad_norm`` its residual.
    """

    def __init__(self, message, best=None, grad_norm=None):
        super().__init__(message)
        self.best = best
        self.grad_norm = grad_norm


class InternalConsistencyError(AxivortError, RuntimeError):
    """A mathematical invariant (duality, monotonicity, velocity bound) failed. Exit code 4."""


class SupportViolationError(InternalConsistencyError):
    """An atom left the admissible box during time stepping."""


class StaleSolutionError(InternalConsistencyError):
    """A dual solution does not match the measure it is used with."""
