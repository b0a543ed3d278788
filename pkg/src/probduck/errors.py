"""Exception hierarchy shared by every module."""


class ProbDuckError(Exception):
    """Base class for all package errors."""


class SchemaError(ProbDuckError):
    pass


class AlignmentError(ProbDuckError):
    pass


class EmptyPanel(ProbDuckError):
    pass


class UnknownSeries(ProbDuckError, KeyError):
    pass


class PeriodOutOfRange(ProbDuckError, IndexError):
    pass


class TooFewSamples(ProbDuckError, ValueError):
    pass


class NonFiniteInput(ProbDuckError, ValueError):
    pass


class ProbabilityOutOfRange(ProbDuckError, ValueError):
    pass


class LengthMismatch(ProbDuckError, ValueError):
    pass


class StepTooCoarse(ProbDuckError, ValueError):
    pass


class StepMismatch(ProbDuckError, ValueError):
    pass


class ZeroBenefit(ProbDuckError, ValueError):
    pass


class EmptySweep(ProbDuckError, ValueError):
    pass


class ConfigError(ProbDuckError):
    pass


class DegenerateWarning(UserWarning):
    """Emitted when a statistic is undefined and a fallback value is used."""


class NormalizationWarning(UserWarning):
    """Emitted when a dependent convolution loses more mass than expected."""


class PlanningWarning(UserWarning):
    pass
