"""Exception hierarchy shared by all horoflow modules."""


class HoroflowError(Exception):
    """Base class for all library errors."""

    exit_code = 3


class ConfigInvalid(HoroflowError):
    exit_code = 2


class NonTermination(HoroflowError):
    """Fundamental-domain reduction exceeded its step budget."""


class DenominatorVanishes(HoroflowError):
    """1 - r*s too close to zero: the horocycle never reaches the target leaf."""


class NoSolution(HoroflowError):
    pass


class SupportEscapesCutoff(HoroflowError):
    pass


class PrecisionExhausted(HoroflowError):
    """Decimal input cannot certify the next continued-fraction partial quotient."""


class EmptySchedule(HoroflowError):
    pass


class BoundViolated(HoroflowError):
    exit_code = 4
