"""Exception hierarchy shared across the toolkit."""


class SlothError(Exception):
    """Base class for all toolkit errors."""


class ShapeError(SlothError, ValueError):
    """Operands of a primitive have non-conforming shapes."""

    def __init__(self, primitive, *shapes):
        self.primitive = primitive
        self.shapes = shapes
        desc = " vs ".join(str(tuple(s)) for s in shapes)
        super().__init__(f"{primitive}: invalid shapes {desc}")


class ContractError(SlothError, ValueError):
    """A documented precondition was violated by the caller."""


class UnsupportedCharacterError(SlothError, ValueError):
    def __init__(self, char, offset):
        self.char = char
        self.offset = offset
        super().__init__(f"unsupported character {char!r} at offset {offset}")


class EmptyInputError(SlothError, ValueError):
    pass


class DegenerateOutputError(SlothError):
    pass


class TrainingDivergedError(SlothError):
    pass


class WeightFileError(SlothError):
    """Base for weight/detector file problems."""


class MagicMismatchError(WeightFileError):
    pass


class DimensionMismatchError(WeightFileError):
    pass


class TruncatedFileError(WeightFileError):
    pass


class ExhaustedPositionsError(SlothError):
    pass


class UndefinedMetricError(SlothError, ZeroDivisionError):
    pass


class InsufficientDataError(SlothError, ValueError):
    pass
