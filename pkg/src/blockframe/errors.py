"""Exceptions shared across the package.

The CLI maps FrameError to exit code 2 and ConvergenceError to exit code 3;
everything else is a genuine bug and escapes as-is.
"""


class FrameError(ValueError):
    """Structurally or numerically invalid input."""


class ConvergenceError(RuntimeError):
    """An iterative numerical routine exhausted its iteration budget."""
