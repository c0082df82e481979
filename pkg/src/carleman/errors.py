"""Exception hierarchy shared by the pipeline stages."""


class CarlemanError(Exception):
    """Base class for every error raised by this package."""


class OrderBudgetExceeded(CarlemanError):
    pass


class BudgetExceeded(CarlemanError):
    pass


class InsufficientNegativeScales(CarlemanError):
    pass


class ConfigError(CarlemanError):
    """Anything wrong with a run configuration or its input files."""


class MalformedConfig(ConfigError):
    pass


class NonSquareMatrix(ConfigError):
    pass


class DimensionMismatch(ConfigError):
    pass


class UnknownPreset(ConfigError):
    pass


class ConditionFails(CarlemanError):
    """The decay hypothesis cannot be witnessed inside the truncation."""

    def __init__(self, message, floor=None):
        super().__init__(message)
        self.floor = floor


class RankDeficiency(CarlemanError):
    pass


class ReconstructionFailure(CarlemanError):
    pass


class NotUnitVector(CarlemanError):
    pass


class ScheduleExhausted(CarlemanError):
    pass


class ScheduleExceeded(CarlemanError):
    pass


class ConvergenceFailure(CarlemanError):
    pass


class CertificateViolation(CarlemanError):
    pass


class InconsistentPairing(CarlemanError):
    pass


class GridMismatch(CarlemanError):
    pass
