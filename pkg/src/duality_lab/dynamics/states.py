"""Initial-state factory."""

import math
from typing import Annotated, List, Literal, Optional, Union

import numpy as np
import structlog
from pydantic import BaseModel, ConfigDict, Field
from scipy.special import eval_hermite

from duality_lab.errors import ConfigurationError
from duality_lab.numerics.grid import Boundary, Grid
from duality_lab.numerics.wavefunction import Wavefunction, normalize
from duality_lab.physics.constants import PhysicalConstants

logger = structlog.get_logger()

SUPPORT_TOLERANCE = 1e-10
MIN_POINTS_PER_SIGMA = 3.0


class _StateSpec(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid", allow_inf_nan=False)

    @property
    def localized(self) -> bool:
        """Whether the state must decay at the grid boundaries."""
        return True

    def sample(self, grid: Grid, constants: PhysicalConstants) -> np.ndarray:
        """Unnormalized samples on the grid."""
        raise NotImplementedError


class PlaneWaveState(_StateSpec):
    """exp(ikx) on a periodic box; k must fit the box."""

    kind: Literal["plane_wave"] = "plane_wave"
    k: float

    @property
    def localized(self) -> bool:
        return False

    def sample(self, grid: Grid, constants: PhysicalConstants) -> np.ndarray:
        if grid.boundary is not Boundary.PERIODIC:
            raise ConfigurationError("plane waves are only normalizable on periodic grids")
        cycles = self.k * grid.length / (2.0 * np.pi)
        if abs(cycles - round(cycles)) > 1e-9 * max(1.0, abs(cycles)):
            raise ConfigurationError(
                f"k = {self.k} is not commensurate with the periodic box (k L / 2 pi = {cycles:.6f})"
            )
        return np.exp(1j * self.k * grid.x) / np.sqrt(grid.length)


class GaussianState(_StateSpec):
    """(2 pi sigma^2)^(-1/4) exp(-(x - x0)^2 / (4 sigma^2) + i k0 x); sigma is the position spread."""

    kind: Literal["gaussian"] = "gaussian"
    x0: float = 0.0
    sigma: float = Field(..., gt=0.0)
    k0: float = 0.0

    def sample(self, grid: Grid, constants: PhysicalConstants) -> np.ndarray:
        if self.sigma < MIN_POINTS_PER_SIGMA * grid.dx:
            raise ConfigurationError(
                f"gaussian sigma {self.sigma} is below {MIN_POINTS_PER_SIGMA} grid spacings ({grid.dx:.4g})"
            )
        return gaussian_packet(grid.x, self.x0, self.sigma, self.k0)


class HarmonicEigenState(_StateSpec):
    kind: Literal["harmonic_eigen"] = "harmonic_eigen"
    n: int = Field(default=0, ge=0, le=60)
    omega: float = Field(default=1.0, gt=0.0)
    center: float = 0.0

    def sample(self, grid: Grid, constants: PhysicalConstants) -> np.ndarray:
        return harmonic_eigenfunction(grid.x, self.n, self.omega, constants, self.center)


class SuperpositionTerm(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid", allow_inf_nan=False)

    coeff_re: float = 1.0
    coeff_im: float = 0.0
    state: "InitialStateSpec"

    @property
    def coefficient(self) -> complex:
        return complex(self.coeff_re, self.coeff_im)


class SuperpositionState(_StateSpec):
    """Sum of normalized component states with complex coefficients."""

    kind: Literal["superposition"] = "superposition"
    terms: List[SuperpositionTerm] = Field(..., min_length=1)

    @property
    def localized(self) -> bool:
        return any(term.state.localized for term in self.terms)

    def sample(self, grid: Grid, constants: PhysicalConstants) -> np.ndarray:
        total = np.zeros(grid.n, dtype=complex)
        for term in self.terms:
            component = build_initial_state(term.state, grid, constants)
            total = total + term.coefficient * component.values
        return total


InitialStateSpec = Annotated[
    Union[PlaneWaveState, GaussianState, HarmonicEigenState, SuperpositionState],
    Field(discriminator="kind"),
]

SuperpositionTerm.model_rebuild()
SuperpositionState.model_rebuild()


def gaussian_packet(x: np.ndarray, x0: float, sigma: float, k0: float) -> np.ndarray:
    norm = (2.0 * np.pi * sigma**2) ** -0.25
    return norm * np.exp(-((x - x0) ** 2) / (4.0 * sigma**2) + 1j * k0 * x)


def harmonic_eigenfunction(
    x: np.ndarray,
    n: int,
    omega: float,
    constants: Optional[PhysicalConstants] = None,
    center: float = 0.0,
) -> np.ndarray:
    """Normalized eigenfunction n of the oscillator m omega^2 x^2 / 2."""
    constants = constants or PhysicalConstants()
    scale = constants.mass * omega / constants.hbar
    xi = np.sqrt(scale) * (x - center)
    norm = (scale / np.pi) ** 0.25 / math.sqrt(2.0**n * math.factorial(n))
    return (norm * eval_hermite(n, xi) * np.exp(-0.5 * xi**2)).astype(complex)


def require_support(grid: Grid, values: np.ndarray, label: str) -> None:
    """Raise unless the field has decayed at both ends of the grid."""
    magnitude = np.abs(values)
    peak = float(magnitude.max())
    if peak == 0.0:
        raise ConfigurationError(f"{label} vanishes identically on the grid")
    edge = float(max(magnitude[0], magnitude[-1]))
    if edge > SUPPORT_TOLERANCE * peak:
        raise ConfigurationError(
            f"{label} is not supported on [{grid.x_min}, {grid.x_max}]: "
            f"edge/peak = {edge / peak:.3e} exceeds {SUPPORT_TOLERANCE:.0e}"
        )


def build_initial_state(
    spec: _StateSpec,
    grid: Grid,
    constants: Optional[PhysicalConstants] = None,
) -> Wavefunction:
    """Sample, support-check and normalize an initial state."""
    constants = constants or PhysicalConstants()
    values = spec.sample(grid, constants)
    if spec.localized:
        require_support(grid, values, spec.kind)
    psi = normalize(Wavefunction(grid, values))
    logger.debug("Initial state built", kind=spec.kind, n=grid.n)
    return psi
