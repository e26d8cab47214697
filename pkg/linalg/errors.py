"""Exception hierarchy shared by every layer of the laboratory."""

from __future__ import annotations


class RiskLabError(ValueError):
    """Base class for all domain errors raised by the numerical layers."""


class InvalidMatrix(RiskLabError):
    """Matrix has non-finite entries or non-positive dimensions."""


class DimensionError(RiskLabError):
    """Operand shapes are inconsistent."""


class NotSymmetric(RiskLabError):
    """A symmetric matrix was required."""


class NotSpd(RiskLabError):
    """A symmetric positive definite matrix was required.

    ``group`` carries the offending block index for clustered covariances.
    """

    def __init__(self, message: str, group: int | None = None):
        super().__init__(message)
        self.group = group


class RankDeficient(RiskLabError):
    """The design matrix does not have full row rank."""

    def __init__(self, message: str, rank: int | None = None, expected: int | None = None):
        super().__init__(message)
        self.rank = rank
        self.expected = expected


class InvalidParameter(RiskLabError):
    """A scalar model parameter is outside its domain."""


class InvalidRegime(RiskLabError):
    """Requested (n, p, gamma) regime is outside the analysed one."""


class TooManyResamples(RiskLabError):
    """Rank-deficient design draws exceeded the allowed fraction."""


class ConfigError(RiskLabError):
    """Experiment configuration is invalid; ``field`` is the dotted key."""

    def __init__(self, field: str, message: str):
        super().__init__(f"{field}: {message}")
        self.field = field
