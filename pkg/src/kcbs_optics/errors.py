"""Exception hierarchy.

Two families matter to callers: :class:`DataError` (bad input, bad tables) and
:class:`NumericError` (a computation cannot be carried out to the required
accuracy). The CLI maps them onto distinct exit codes.
"""


class KcbsError(Exception):
    """Base class for all package errors."""


class DataError(KcbsError, ValueError):
    """Input data or parameters are invalid."""


class NumericError(KcbsError, ArithmeticError):
    """A numerical quantity is undefined or could not be computed accurately."""


class InvalidStateError(DataError):
    """An optical state was constructed with invalid parameters."""


class RangeError(DataError):
    """A parameter lies outside its admissible range."""


class CountsFormatError(DataError):
    """A counts table row is malformed or violates a count-table invariant."""

    def __init__(self, message: str, row: int | None = None, rule: str | None = None):
        self.row = row
        self.rule = rule
        prefix = f"row {row}: " if row is not None else ""
        super().__init__(prefix + message)


class InconsistentCountsError(DataError):
    """Inclusion-exclusion produced a negative event-class count."""


class TruncationError(NumericError):
    """Photon-number truncation left more probability mass than allowed."""

    def __init__(self, tail_mass: float, bound: float, n_max: int):
        self.tail_mass = tail_mass
        self.bound = bound
        self.n_max = n_max
        super().__init__(
            f"truncation at N_max={n_max} leaves tail mass {tail_mass:.3e} > {bound:.1e}"
        )


class UndefinedConditioningError(NumericError):
    """Conditioning on an event of probability zero."""


class UndefinedEstimateError(NumericError):
    """An estimator or ratio has a zero denominator."""


class SaturationError(NumericError):
    """A click rate of 1 cannot be inverted to a mean photon number."""


class IntegrationError(NumericError):
    """Quadrature did not reach the requested tolerance."""

    def __init__(self, achieved: float, requested: float):
        self.achieved = achieved
        self.requested = requested
        super().__init__(f"quadrature error estimate {achieved:.2e} exceeds {requested:.1e}")
