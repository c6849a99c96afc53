"""Closed-form solutions used as oracles."""

from typing import Annotated, Literal, Optional, Sequence, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field

from duality_lab.dynamics.states import gaussian_packet, harmonic_eigenfunction, require_support
from duality_lab.errors import ConfigurationError
from duality_lab.numerics.grid import Grid
from duality_lab.numerics.wavefunction import Trajectory, Wavefunction
from duality_lab.physics.constants import PhysicalConstants


class _Reference(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid", allow_inf_nan=False)

    def sample(self, x: np.ndarray, t: float, constants: PhysicalConstants) -> np.ndarray:
        raise NotImplementedError


class FreeGaussianReference(_Reference):
    """Free spreading of the Gaussian packet with position spread sigma at t = 0."""

    kind: Literal["free_gaussian"] = "free_gaussian"
    x0: float = 0.0
    sigma: float = Field(..., gt=0.0)
    k0: float = 0.0

    def width(self, t: float, constants: Optional[PhysicalConstants] = None) -> float:
        """sigma(t) with sigma(t)^2 = sigma^2 + (hbar t / 2 m sigma)^2."""
        constants = constants or PhysicalConstants()
        return float(np.sqrt(self.sigma**2 + (constants.hbar * t / (2.0 * constants.mass * self.sigma)) ** 2))

    def sample(self, x: np.ndarray, t: float, constants: PhysicalConstants) -> np.ndarray:
        if t == 0.0:
            return gaussian_packet(x, self.x0, self.sigma, self.k0)
        hbar, mass = constants.hbar, constants.mass
        spread = 1.0 + 1j * hbar * t / (2.0 * mass * self.sigma**2)
        velocity = hbar * self.k0 / mass
        norm = (2.0 * np.pi * self.sigma**2) ** -0.25 / np.sqrt(spread)
        exponent = (
            -((x - self.x0 - velocity * t) ** 2) / (4.0 * self.sigma**2 * spread)
            + 1j * self.k0 * x
            - 0.5j * hbar * self.k0**2 * t / mass
        )
        return norm * np.exp(exponent)


class HarmonicEigenReference(_Reference):
    kind: Literal["harmonic_eigen"] = "harmonic_eigen"
    n: int = Field(default=0, ge=0, le=60)
    omega: float = Field(default=1.0, gt=0.0)

    def energy(self, constants: Optional[PhysicalConstants] = None) -> float:
        constants = constants or PhysicalConstants()
        return constants.hbar * self.omega * (self.n + 0.5)

    def sample(self, x: np.ndarray, t: float, constants: PhysicalConstants) -> np.ndarray:
        phase = np.exp(-1j * self.energy(constants) * t / constants.hbar)
        return phase * harmonic_eigenfunction(x, self.n, self.omega, constants)


class HarmonicCoherentReference(_Reference):
    """Ground state displaced to x0 at t = 0 with zero mean momentum."""

    kind: Literal["harmonic_coherent"] = "harmonic_coherent"
    x0: float = 1.0
    omega: float = Field(default=1.0, gt=0.0)

    def center(self, t: float) -> float:
        return self.x0 * float(np.cos(self.omega * t))

    def momentum(self, t: float, constants: Optional[PhysicalConstants] = None) -> float:
        constants = constants or PhysicalConstants()
        return -constants.mass * self.omega * self.x0 * float(np.sin(self.omega * t))

    def sample(self, x: np.ndarray, t: float, constants: PhysicalConstants) -> np.ndarray:
        hbar, mass = constants.hbar, constants.mass
        scale = mass * self.omega / hbar
        center = self.center(t)
        momentum = self.momentum(t, constants)
        exponent = (
            -0.5 * scale * (x - center) ** 2
            + 1j * momentum * (x - 0.5 * center) / hbar
            - 0.5j * self.omega * t
        )
        return (scale / np.pi) ** 0.25 * np.exp(exponent)


ReferenceSpec = Annotated[
    Union[FreeGaussianReference, HarmonicEigenReference, HarmonicCoherentReference],
    Field(discriminator="kind"),
]


def reference_state(
    spec: _Reference,
    grid: Grid,
    t: float,
    constants: Optional[PhysicalConstants] = None,
) -> Wavefunction:
    """Closed-form psi(x, t) sampled on the grid."""
    constants = constants or PhysicalConstants()
    values = spec.sample(grid.x, t, constants)
    require_support(grid, values, f"{spec.kind} reference at t={t:g}")
    return Wavefunction(grid, values)


def analytic_reference(
    spec: _Reference,
    grid: Grid,
    times: Sequence[float],
    constants: Optional[PhysicalConstants] = None,
) -> Trajectory:
    """Trajectory of closed-form frames at uniformly spaced times."""
    times = np.asarray(times, dtype=float)
    if times.ndim != 1 or times.size < 3:
        raise ConfigurationError("analytic reference needs at least 3 sample times")
    steps = np.diff(times)
    dt = float(steps[0])
    if dt <= 0.0 or not np.allclose(steps, dt, rtol=1e-9, atol=0.0):
        raise ConfigurationError("analytic reference times must be increasing and uniformly spaced")

    frames = tuple(reference_state(spec, grid, float(t), constants) for t in times)
    return Trajectory(
        grid=grid,
        dt=dt,
        frames=frames,
        t0=float(times[0]),
        metadata={"method": "analytic", "reference": spec.kind, "time_order": None},
    )
