"""Direct sampling method (DSM) imaging of small anomalies from S-parameters.

Born-approximated forward synthesis, single- and multi-transmitter DSM
indicator maps, and a Bessel-series evaluator of the indicator's structure.
"""

from .errors import (
    CoverageError,
    DegenerateDataError,
    DomainError,
    DSMError,
    SingularityError,
    ValidationError,
)

__version__ = "0.1.0"

__all__ = [
    "CoverageError",
    "DegenerateDataError",
    "DomainError",
    "DSMError",
    "SingularityError",
    "ValidationError",
    "__version__",
]
