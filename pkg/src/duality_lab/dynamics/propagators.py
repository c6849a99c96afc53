"""Unitary time propagation: Crank-Nicolson and split-step spectral."""

from enum import Enum
from typing import Callable, Optional, Union

import numpy as np
import structlog
from pydantic import BaseModel, ConfigDict, Field, model_validator
from scipy import sparse
from scipy.linalg import lu_factor, lu_solve
from scipy.sparse.linalg import splu

from duality_lab.dynamics.potentials import StaticPotential
from duality_lab.errors import ConfigurationError, DegenerateInputError
from duality_lab.numerics.grid import Boundary, DerivativeScheme, Grid
from duality_lab.numerics.wavefunction import Trajectory, Wavefunction
from duality_lab.physics.constants import PhysicalConstants

logger = structlog.get_logger()

DEFAULT_STABILITY_BOUND = 0.5
INPUT_NORM_TOLERANCE = 1e-9


class PropagationMethod(str, Enum):
    CRANK_NICOLSON = "crank_nicolson"
    SPLIT_STEP_SPECTRAL = "split_step_spectral"


class PropagatorConfig(BaseModel):
    """Time stepping parameters. Every ``save_every``-th step is stored as a frame."""

    model_config = ConfigDict(frozen=True, extra="forbid", allow_inf_nan=False)

    method: PropagationMethod = PropagationMethod.CRANK_NICOLSON
    dt: float = Field(..., gt=0.0)
    steps: int = Field(..., ge=2)
    save_every: int = Field(default=1, ge=1)

    @model_validator(mode="after")
    def _check_frames(self) -> "PropagatorConfig":
        if self.steps % self.save_every != 0:
            raise ValueError(f"steps ({self.steps}) must be a multiple of save_every ({self.save_every})")
        if self.steps // self.save_every < 2:
            raise ValueError("at least 3 frames must be stored")
        return self

    @property
    def frame_dt(self) -> float:
        return self.dt * self.save_every

    @property
    def duration(self) -> float:
        return self.dt * self.steps


Operator = Union[np.ndarray, sparse.csr_matrix]


def hamiltonian_matrix(
    grid: Grid,
    potential_values: np.ndarray,
    constants: Optional[PhysicalConstants] = None,
    scheme: Optional[DerivativeScheme] = None,
) -> Operator:
    """Discrete Hamiltonian -(hbar^2/2m) D2 + diag(V).

    D2 is the grid's cached second-derivative matrix, the same operator the residual
    checks apply. Finite-difference schemes give a sparse CSR matrix, the spectral
    scheme a dense array.
    """
    constants = constants or PhysicalConstants()
    d2 = grid.second_derivative_matrix(scheme)
    potential_values = np.asarray(potential_values, dtype=float)
    if sparse.issparse(d2):
        return (-constants.kinetic_prefactor * d2 + sparse.diags(potential_values)).tocsr()
    return -constants.kinetic_prefactor * d2 + np.diag(potential_values)


class CrankNicolsonPropagator:
    """(1 + i dt H / 2 hbar) psi_next = (1 - i dt H / 2 hbar) psi.

    Sparse Hamiltonians are factorized with a sparse LU, dense ones with LAPACK.
    """

    def __init__(self, hamiltonian: Operator, dt: float, hbar: float):
        n = hamiltonian.shape[0]
        half = 0.5j * dt / hbar * hamiltonian
        if sparse.issparse(hamiltonian):
            identity = sparse.identity(n, dtype=complex, format="csc")
            self._explicit = (identity - half).tocsr()
            self._solve = splu((identity + half).tocsc()).solve
        else:
            self._explicit = np.eye(n) - half
            factors = lu_factor(np.eye(n) + half)
            self._solve = lambda rhs: lu_solve(factors, rhs)

    def __call__(self, psi: np.ndarray) -> np.ndarray:
        return self._solve(self._explicit @ psi)


class SplitStepPropagator:
    """Strang splitting: half potential kick, exact kinetic drift in Fourier space, half kick."""

    def __init__(self, grid: Grid, potential_values: np.ndarray, dt: float, constants: PhysicalConstants):
        k = grid.wavenumbers
        self._half_kick = np.exp(-0.5j * dt / constants.hbar * np.asarray(potential_values, dtype=float))
        self._drift = np.exp(-0.5j * dt * constants.hbar / constants.mass * k**2)

    def __call__(self, psi: np.ndarray) -> np.ndarray:
        psi = self._half_kick * psi
        psi = np.fft.ifft(self._drift * np.fft.fft(psi))
        return self._half_kick * psi


def check_stability(dt: float, potential_values: np.ndarray, bound: float = DEFAULT_STABILITY_BOUND) -> None:
    """Keep dt * max|V| within the regime where O(dt^2) error estimates hold."""
    product = dt * float(np.max(np.abs(potential_values)))
    if product > bound:
        raise ConfigurationError(
            f"dt * max|V| = {product:.4g} exceeds the accuracy guard {bound}; reduce dt or the potential range"
        )


def propagate(
    psi0: Wavefunction,
    potential: StaticPotential,
    config: PropagatorConfig,
    constants: Optional[PhysicalConstants] = None,
    scheme: Optional[DerivativeScheme] = None,
    stability_bound: float = DEFAULT_STABILITY_BOUND,
) -> Trajectory:
    """Integrate i hbar psi_t = H psi from psi0 and return the stored frames."""
    constants = constants or PhysicalConstants()
    grid = psi0.grid
    potential_values = potential.evaluate(grid, constants)

    check_stability(config.dt, potential_values, stability_bound)

    drift = abs(psi0.norm_sq() - 1.0)
    if drift > INPUT_NORM_TOLERANCE:
        raise DegenerateInputError(f"initial state is not normalized (|norm^2 - 1| = {drift:.3e})")

    step: Callable[[np.ndarray], np.ndarray]
    if config.method is PropagationMethod.SPLIT_STEP_SPECTRAL:
        if grid.boundary is not Boundary.PERIODIC:
            raise ConfigurationError("split-step spectral propagation requires a periodic grid")
        if scheme is not None and DerivativeScheme(scheme) is not DerivativeScheme.SPECTRAL:
            raise ConfigurationError("split-step propagation is spectral; it cannot be paired with a finite-difference scheme")
        scheme = DerivativeScheme.SPECTRAL
        step = SplitStepPropagator(grid, potential_values, config.dt, constants)
    else:
        scheme = grid.resolve_scheme(scheme)
        hamiltonian = hamiltonian_matrix(grid, potential_values, constants, scheme)
        step = CrankNicolsonPropagator(hamiltonian, config.dt, constants.hbar)

    logger.info(
        "Propagation started",
        method=config.method.value,
        scheme=scheme.value,
        dt=config.dt,
        steps=config.steps,
        n=grid.n,
    )

    psi = psi0.values.copy()
    frames = [psi0]
    for index in range(1, config.steps + 1):
        psi = step(psi)
        if index % config.save_every == 0:
            frames.append(Wavefunction(grid, psi))

    final_drift = abs(frames[-1].norm_sq() - psi0.norm_sq())
    logger.info("Propagation completed", frames=len(frames), norm_drift=final_drift)

    return Trajectory(
        grid=grid,
        dt=config.frame_dt,
        frames=tuple(frames),
        metadata={
            "method": config.method.value,
            "scheme": scheme.value,
            "spatial_order": grid.spatial_order(scheme),
            "time_order": 2,
            "step_dt": config.dt,
            "steps": config.steps,
            "save_every": config.save_every,
        },
    )
