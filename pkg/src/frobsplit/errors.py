"""Exception types. Names follow the error labels used in reports."""


class FrobsplitError(Exception):
    """Base class for every error raised by the package."""


class ZeroInverse(FrobsplitError, ZeroDivisionError):
    pass


class ShapeMismatch(FrobsplitError, ValueError):
    pass


class BadType(FrobsplitError, ValueError):
    pass


class WeightOverflow(FrobsplitError, ValueError):
    pass


class BadProfile(FrobsplitError, ValueError):
    pass


class BadHeckePoint(FrobsplitError, ValueError):
    pass


class BadT(FrobsplitError, ValueError):
    pass


class DegenerateConfig(FrobsplitError, ValueError):
    pass


class NotInChart(FrobsplitError):
    pass


class OutsideBirationalLocus(FrobsplitError):
    pass


class LiftFailed(FrobsplitError):
    pass


class PipelineBroken(FrobsplitError):
    def __init__(self, level, message):
        super().__init__(f"level {level}: {message}")
        self.level = level


class BadConfig(FrobsplitError, ValueError):
    pass


class UnsupportedRank(FrobsplitError, ValueError):
    pass


class ParseError(FrobsplitError, ValueError):
    pass
