"""Exception types shared across the package."""
from __future__ import annotations


class ChaoscopeError(Exception):
    """Base class for all package errors."""


class ParseError(ChaoscopeError):
    """Syntax or resolution error in DSL source, with position info."""

    def __init__(self, message: str, line: int, col: int):
        super().__init__(f"{message} (line {line}, column {col})")
        self.line = line
        self.col = col


class DomainError(ChaoscopeError):
    """Arithmetic domain violation during expression evaluation.

    ``component`` is the 0-based RHS component index when the error
    surfaced while evaluating a system's derivative vector.
    """

    def __init__(self, message: str, component: int | None = None):
        if component is not None:
            message = f"{message} (component {component})"
        super().__init__(message)
        self.component = component


class EmissionError(ChaoscopeError):
    """Kernel source emission failure (unknown dialect or unmapped function)."""


class PluginError(ChaoscopeError):
    """Base class for external-kernel plugin failures."""


class CompilerNotFoundError(PluginError):
    pass


class CompileError(PluginError):
    """Compilation failed; carries the captured compiler diagnostics."""

    def __init__(self, message: str, diagnostics: str = ""):
        super().__init__(message if not diagnostics else f"{message}\n{diagnostics}")
        self.diagnostics = diagnostics


class HandshakeError(PluginError):
    pass


class PluginExecutionError(PluginError):
    pass


class PluginOutputError(PluginError):
    """Malformed plugin output; names the offending line."""

    def __init__(self, message: str, line: int):
        super().__init__(f"{message} (output line {line})")
        self.line = line


class StoreError(ChaoscopeError):
    pass


class DuplicateRunError(StoreError):
    pass


class RunNotFoundError(StoreError):
    pass


class IntegrityError(StoreError):
    pass


class BoundaryError(ChaoscopeError):
    """Boundary statistics impossible (no testable cells, too few points)."""


class JobCancelled(ChaoscopeError):
    """Raised inside a pipeline run when the caller requested cancellation."""
