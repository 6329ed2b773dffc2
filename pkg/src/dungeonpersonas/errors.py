"""Exception hierarchy shared across the package."""


class DungeonError(Exception):
    """Base class for all package errors."""


class MapFormatError(DungeonError):
    """Raised when a map document cannot be parsed into a valid level."""


class UnknownGlyphError(MapFormatError):
    pass


class NonRectangularError(MapFormatError):
    pass


class MissingHeroError(MapFormatError):
    pass


class MissingExitError(MapFormatError):
    pass


class UnpairedPortalError(MapFormatError):
    pass


class IllegalActionError(DungeonError):
    """The submitted action is not legal in the current state."""


class TerminalStateError(DungeonError):
    """The operation requires an ongoing game but the state is terminal."""


class ReplayMismatchError(DungeonError):
    """Replaying a trace produced a state digest that differs from the record."""


class EmptyTraceError(DungeonError):
    """The trace has no recorded turns."""


class TraceFormatError(DungeonError):
    """A trace file record is malformed; carries the 1-based line number."""

    def __init__(self, line_number: int, message: str):
        super().__init__(f"line {line_number}: {message}")
        self.line_number = line_number


class AlreadyNormalizedError(DungeonError):
    """A normalizer was fitted on, or applied to, already-normalized vectors."""


class UnnormalizedInputError(DungeonError):
    """A model expected a normalized feature vector but got raw counts."""


class EmptySequenceError(DungeonError):
    """A sequence model was given a zero-length input sequence."""


class EmptyDatasetError(DungeonError):
    """A dataset-level operation was given no examples."""


class DivergenceError(DungeonError):
    """Training produced a non-finite loss; carries the replica seed."""

    def __init__(self, seed: int, epoch: int):
        super().__init__(f"loss became non-finite (seed={seed}, epoch={epoch})")
        self.seed = seed
        self.epoch = epoch


class PipelineError(DungeonError):
    """An experiment stage failed; message is prefixed with the stage name."""

    def __init__(self, stage: str, message: str):
        super().__init__(f"{stage}: {message}")
        self.stage = stage


class UnknownMapError(DungeonError):
    pass


class UnknownSessionError(DungeonError):
    pass


class SessionFinishedError(DungeonError):
    pass
