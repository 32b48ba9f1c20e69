"""Exception hierarchy shared by every qdecide module."""


class QDecideError(Exception):
    """Base class for all errors raised by qdecide."""


class ValidationError(QDecideError, ValueError):
    """Invalid input: bad indices, probabilities, shot counts, scenario content."""


class CapacityError(QDecideError):
    """A request exceeds a hard resource bound (qubit count, noise branches)."""


class ParseDiagnostic(ValidationError):
    """A located problem in circuit, reward, or parameter text.

    ``line`` and ``column`` are 1-based. ``kind`` is one of ``syntax``,
    ``unknown-gate``, ``bad-index``, ``bad-angle`` or ``unbound-parameter``.
    """

    KINDS = ("syntax", "unknown-gate", "bad-index", "bad-angle", "unbound-parameter")

    def __init__(self, kind: str, message: str, line: int = 1, column: int = 1):
        if kind not in self.KINDS:
            raise ValueError(f"unknown diagnostic kind {kind!r}")
        self.kind = kind
        self.message = message
        self.line = line
        self.column = column
        super().__init__(f"{line}:{column}: {kind}: {message}")

    def __eq__(self, other):
        if not isinstance(other, ParseDiagnostic):
            return NotImplemented
        return (self.kind, self.message, self.line, self.column) == (
            other.kind,
            other.message,
            other.line,
            other.column,
        )

    __hash__ = Exception.__hash__
