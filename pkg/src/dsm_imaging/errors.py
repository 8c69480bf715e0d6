"""Exception hierarchy shared by all modules."""


class DSMError(Exception):
    """Base class for every error raised by this package."""


class DomainError(DSMError, ValueError):
    """Argument outside the supported numerical envelope."""


class SingularityError(DSMError, ValueError):
    """Evaluation requested at a singular point (e.g. H0 at the origin)."""


class ValidationError(DSMError, ValueError):
    """Invalid configuration, scenario or data file."""


class CoverageError(DSMError, ValueError):
    """Point outside the coverage of a tabulated field (no extrapolation)."""


class DegenerateDataError(DSMError, ValueError):
    """Data carry no information (e.g. zero scattered-field norm)."""
