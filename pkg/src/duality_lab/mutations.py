"""Named fault injections for exercising the verification checks.

A mutation flips a single, well-defined piece of physics so that the checks
guarding it can be shown to fail. Production code asks ``is_active(name)`` at
the mutation point; nothing is active unless :func:`inject` is in effect.
"""

from contextlib import contextmanager
from contextvars import ContextVar
from typing import Dict, FrozenSet, Iterator

import structlog

logger = structlog.get_logger()

MUTATIONS: Dict[str, str] = {
    "hw_sign": "flip the sign of the wave-side energy density and of its variation",
    "kinetic_factor": "use hbar^2/m instead of hbar^2/2m in the Hamiltonian variation",
}

_active: ContextVar[FrozenSet[str]] = ContextVar("duality_lab_mutations", default=frozenset())


def is_active(name: str) -> bool:
    """Return True if the named mutation is injected in the current context."""
    return name in _active.get()


def sign(name: str) -> float:
    """-1.0 while the named mutation is active, else 1.0."""
    return -1.0 if is_active(name) else 1.0


@contextmanager
def inject(*names: str) -> Iterator[None]:
    """Activate mutations for the duration of the block."""
    unknown = [name for name in names if name not in MUTATIONS]
    if unknown:
        raise ValueError(f"Unknown mutation(s): {', '.join(unknown)}; known: {', '.join(sorted(MUTATIONS))}")

    for name in names:
        logger.warning("Mutation injected", mutation=name, effect=MUTATIONS[name])

    token = _active.set(_active.get() | frozenset(names))
    try:
        yield
    finally:
        _active.reset(token)
