"""Exception types shared across the toolkit."""


class AvscanError(Exception):
    """Base class for all toolkit errors."""


class SolSyntaxError(AvscanError):
    """Raised when a source file cannot be parsed. Carries position info."""

    def __init__(self, message, line, col, expected=None, path="<source>"):
        self.message = message
        self.line = line
        self.col = col
        self.expected = sorted(expected) if expected else []
        self.path = path
        super().__init__(str(self))

    def __str__(self):
        msg = f"{self.path}:{self.line}:{self.col}: {self.message}"
        if self.expected:
            msg += " (expected: " + ", ".join(self.expected) + ")"
        return msg


class DegenerateCluster(AvscanError):
    """A cluster instance has no statements to align."""


class EmptyCore(AvscanError):
    """Alignment produced no common statements; the cluster yields no signature."""


class UnsupportedConstruct(AvscanError):
    """A function contains a construct the CFG lowering cannot handle."""
