"""
Exception hierarchy for cellgame.
"""


class CellGameError(Exception):
    """Base class for every error raised by this package."""


class FormulaSyntaxError(CellGameError):
    def __init__(self, message, position):
        super().__init__(f"{message} at position {position}")
        self.position = position


class ProofError(CellGameError):
    def __init__(self, line, message):
        super().__init__(f"line {line}: {message}")
        self.line = line


class ResourceLimitError(CellGameError):
    def __init__(self, what, value, limit):
        super().__init__(f"{what} = {value} exceeds limit {limit}")
        self.what = what
        self.value = value
        self.limit = limit


class GameSpecError(CellGameError):
    pass


class TableFormatError(CellGameError):
    def __init__(self, line, message):
        super().__init__(f"line {line}: {message}")
        self.line = line


class PreconditionError(CellGameError, ValueError):
    pass


class ConstructionError(CellGameError):
    """A constructed object failed its own verification (internal error)."""


class ProofFormatError(CellGameError):
    def __init__(self, line, message):
        super().__init__(f"line {line}: {message}")
        self.line = line
