"""Exception hierarchy shared by every layer."""

from typing import List, Optional


class DualityLabError(Exception):
    """Base class for all library errors."""


class ConfigurationError(DualityLabError):
    """Invalid combination of grid, scheme, potential or run parameters.

    ``diagnostics`` holds one line per problem; scenario loading fills it with
    ``line N: path: message`` entries.
    """

    def __init__(self, message: str, diagnostics: Optional[List[str]] = None):
        super().__init__(message)
        self.diagnostics = list(diagnostics or [])

    def __str__(self) -> str:
        base = super().__str__()
        if not self.diagnostics:
            return base
        return base + "\n" + "\n".join(f"  {line}" for line in self.diagnostics)


class ShapeError(DualityLabError):
    """Field length or frame count does not match what the operation needs."""


class DegenerateInputError(DualityLabError):
    """Input that cannot be processed, e.g. a zero field or an unnormalized state."""


class ToleranceUnreliableError(DualityLabError):
    """A finite-difference step outside the range where the oracle is trustworthy."""
