"""Exception and warning types shared across the package."""


class FocklabError(Exception):
    """Base class for all focklab runtime errors."""


class NumericalError(FocklabError):
    """A numerical routine failed to converge or produced non-finite values."""


class GridExhaustionError(FocklabError):
    """Probability mass beyond the sampling grid exceeds the allowed tolerance."""


class HeisenbergViolationError(FocklabError, ValueError):
    """Requested quadrature variances violate the uncertainty bound."""


class DatasetFormatError(FocklabError, ValueError):
    """A quadrature dataset file is malformed."""


class TruncationWarning(UserWarning):
    """State construction lost more norm to Fock truncation than tolerated."""
