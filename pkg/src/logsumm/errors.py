"""Exception hierarchy shared by all modules."""


class LogsummError(Exception):
    """Base class for library errors."""


class DomainError(LogsummError, ValueError):
    """An argument lies outside the domain of an operation."""


class HorizonError(DomainError):
    """An index lies beyond the stored length of a sequence or table."""


class TruncationError(LogsummError, RuntimeError):
    """A series could not be truncated within the term budget."""


class CapacityError(LogsummError, MemoryError):
    """A request exceeds the configured memory or size budget."""
