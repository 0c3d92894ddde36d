"""Exception hierarchy shared across the package.

The CLI maps these onto exit codes: ConfigError and InputError exit with 2,
NumericalError with 3.
"""


class SignalMarketError(Exception):
    """Base class for all package errors."""


class ConfigError(SignalMarketError):
    """Invalid configuration or parameter domain."""


class InputError(SignalMarketError):
    """Malformed or inconsistent input data."""


class NumericalError(SignalMarketError):
    """A numerical procedure failed (non-convergence, rank deficiency, ...)."""


class CollinearityError(NumericalError):
    """Design matrix is rank deficient.

    Carries the names of the offending columns so callers can report them.
    """

    def __init__(self, columns):
        self.columns = list(columns)
        super().__init__(f"collinear columns: {', '.join(self.columns)}")


class WeakInstrumentError(NumericalError):
    """First stage is degenerate (F below threshold)."""
