"""Exception and warning types shared across the package.

The command line entry point maps these onto process exit codes, so the
hierarchy is part of the public interface: configuration problems exit
with 2, integrator blowups with 3, violated physical invariants with 4.
"""


class DoubleWellError(Exception):
    """Base class for all errors raised by this package."""


class ConfigError(DoubleWellError):
    """A configuration file or parameter set is invalid.

    Carries optional ``line`` and ``key`` attributes pointing at the
    offending location in a config file.
    """

    def __init__(self, message, *, line=None, key=None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line
        self.key = key


class IntegratorBlowupError(DoubleWellError):
    """A stochastic or deterministic integration produced non-finite state.

    ``time`` is the simulation time of the failed step and ``seed`` the
    trajectory seed (None for deterministic integrations).
    """

    def __init__(self, message, *, time=None, seed=None):
        super().__init__(message)
        self.time = time
        self.seed = seed


class InvariantViolationError(DoubleWellError):
    """A physical invariant (norm, trace, positivity, ...) failed its check."""


class OracleFailureError(InvariantViolationError):
    """The deterministic master-equation oracle violated one of its own invariants."""


class LeakageWarning(UserWarning):
    """Occupation of the top Fock levels exceeded the truncation threshold."""


class GridCoverageWarning(UserWarning):
    """A position grid misses a non-negligible fraction of the state's mass."""
