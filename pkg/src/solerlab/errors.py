"""Exception hierarchy.

Every error carries the process exit code the command line maps it to:
2 for bad input or violated preconditions, 3 for solver failures and
4 for verdicts that could not be reached.
"""


class SolerError(Exception):
    exit_code = 3

    def __init__(self, message, **details):
        super().__init__(message)
        self.details = details


# -- input / precondition problems (exit 2) --------------------------------

class InputError(SolerError, ValueError):
    exit_code = 2


class ConfigurationError(InputError):
    pass


class DomainError(InputError):
    pass


class Unsupported(InputError):
    pass


class HypothesisError(InputError):
    """A precondition of a perturbation argument does not hold."""


class NotCritical(InputError):
    """The requested object only exists at the charge-critical exponent."""


class NearPole(InputError):
    pass


# -- numerical failures (exit 3) ---------------------------------------------

class SolverError(SolerError):
    pass


class ConvergenceError(SolverError):
    pass


class BracketError(SolverError):
    pass


class BranchError(SolverError):
    pass


class SingularBlock(SolverError):
    pass


class ContourError(SolverError):
    pass


class ContourTooClose(ContourError):
    pass


class FitError(SolverError):
    pass


class GridError(SolverError):
    pass


class MultiplicityError(SolverError):
    pass


class RegimeError(SolverError):
    """The small-amplitude regime assumed by a construction is not reached."""


# -- undecided outcomes (exit 4) ---------------------------------------------

class InconclusiveError(SolerError):
    exit_code = 4
