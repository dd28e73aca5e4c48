"""Exception types shared across the engine."""


class PdgfixError(Exception):
    """Base class for all engine errors."""


class ParseError(PdgfixError):
    def __init__(self, line: int, column: int, message: str):
        super().__init__(f"line {line}, column {column}: {message}")
        self.line = line
        self.column = column
        self.message = message


class RenderError(PdgfixError):
    pass


class DanglingReference(PdgfixError):
    def __init__(self, index: int, message: str = ""):
        super().__init__(f"action {index}: {message or 'unresolved node reference'}")
        self.index = index


class UnknownVertex(PdgfixError):
    pass


class AlignmentFailure(PdgfixError):
    def __init__(self, index: int, message: str = ""):
        super().__init__(f"instance {index}: {message or 'no full mapping of the canonical graph'}")
        self.index = index


class EmptyCore(PdgfixError):
    def __init__(self, pair: tuple, message: str = ""):
        super().__init__(
            f"instances {pair[0]} and {pair[1]}: {message or 'no common edit actions'}"
        )
        self.pair = pair


class BundleInvariantViolation(PdgfixError):
    pass


class TimeoutExceeded(PdgfixError):
    pass


class RemapFailure(PdgfixError):
    def __init__(self, index: int, message: str = ""):
        super().__init__(f"action {index}: {message or 'no target counterpart'}")
        self.index = index


class VersionError(PdgfixError):
    pass


class SchemaError(PdgfixError):
    def __init__(self, message: str, action_index: int | None = None):
        super().__init__(message)
        self.action_index = action_index


class DuplicateId(PdgfixError):
    pass


class IoError(PdgfixError):
    pass
