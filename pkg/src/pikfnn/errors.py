"""Exception types shared across the package."""


class PikfnnError(Exception):
    """Base class for all package errors."""


class DomainError(PikfnnError, ValueError):
    """Argument outside the mathematical domain of an operation."""


class SingularityError(PikfnnError, ValueError):
    """Evaluation requested at (or too close to) a singular point."""


class RangeOverflowError(PikfnnError, OverflowError):
    """Result exceeds the representable double range."""


class UnsupportedKernelError(PikfnnError, ValueError):
    """No kernel formula registered for the requested (class, operator, dim)."""


class UnsupportedSourceError(PikfnnError, ValueError):
    """Source term outside the symbolic forms the annihilator builder handles."""


class ConfigurationError(PikfnnError, ValueError):
    """Invalid or inconsistent problem/training configuration."""


class ConditioningError(PikfnnError, RuntimeError):
    """Linear solve failed: system singular to working precision."""


class DivergenceError(PikfnnError, RuntimeError):
    """Optimizer produced a non-finite loss or runaway damping."""

    def __init__(self, message, iteration=None):
        super().__init__(message)
        self.iteration = iteration


class NodeFileError(PikfnnError, ValueError):
    """Malformed node file; carries the offending line number when known."""

    def __init__(self, message, line=None):
        super().__init__(message if line is None else f"line {line}: {message}")
        self.line = line
