"""Exception hierarchy shared by the solvers and the CLI."""


class CoverageError(Exception):
    """Base class for every error raised by this package."""


class InfeasibleError(CoverageError):
    """The instance admits no feasible solution (CLI exit code 2)."""


class InfeasibleBudgetError(InfeasibleError):
    """The root alone already exceeds the budget."""


class UnreachableError(InfeasibleError):
    def __init__(self, node, message=None):
        self.node = node
        super().__init__(message or f"node {node!r} is not reachable from the root")


class LpError(CoverageError):
    def __init__(self, status, message=None):
        self.status = status
        super().__init__(message or f"LP solve failed with status {status!r}")


class ValidationError(CoverageError, ValueError):
    """Malformed input or a solution that fails verification (CLI exit code 3)."""


class CapExceededError(CoverageError):
    """Instance too large for an exhaustive oracle."""


class CertificateError(CoverageError):
    """A runtime LP certificate check failed."""
