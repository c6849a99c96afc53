"""Duality Lab main package."""

__version__ = "0.1.0"

# Only import settings when the package is fully imported
__all__ = ["settings"]


def __getattr__(name):
    if name == "settings":
        from duality_lab.config import settings
        return settings
    raise AttributeError(f"module {__name__!r} has no attribute {name!r}")
