"""Uniform 1D grid with differentiation operators and quadrature."""

from enum import Enum
from functools import lru_cache
from typing import Optional, Union

import numpy as np
import structlog
from pydantic import BaseModel, ConfigDict, Field, model_validator
from scipy import sparse
from scipy.linalg import circulant

from duality_lab.errors import ConfigurationError, ShapeError

logger = structlog.get_logger()

DEFAULT_DECAY_TOLERANCE = 1e-10

# One-sided 4th-order stencils for the first two boundary points, offsets 0..4 (first
# derivative) and 0..5 (second derivative) counted from the boundary.
_D1_EDGE = np.array(
    [
        [-25.0, 48.0, -36.0, 16.0, -3.0],
        [-3.0, -10.0, 18.0, -6.0, 1.0],
    ]
) / 12.0
_D2_EDGE = np.array(
    [
        [45.0, -154.0, 214.0, -156.0, 61.0, -10.0],
        [10.0, -15.0, -4.0, 14.0, -6.0, 1.0],
    ]
) / 12.0


class Boundary(str, Enum):
    """Boundary treatment of the lattice."""

    PERIODIC = "periodic"
    VANISHING = "vanishing"


class DerivativeScheme(str, Enum):
    """Discrete differentiation scheme."""

    SPECTRAL = "spectral"
    CENTRAL_FD4 = "central_fd4"


class Grid(BaseModel):
    """Uniform lattice on [x_min, x_max].

    Periodic grids exclude the right endpoint, Vanishing grids include both.
    """

    model_config = ConfigDict(frozen=True, extra="forbid")

    n: int = Field(..., ge=8, description="Number of points")
    x_min: float = Field(..., description="Left endpoint")
    x_max: float = Field(..., description="Right endpoint")
    boundary: Boundary = Field(default=Boundary.PERIODIC, description="Boundary mode")
    decay_tolerance: float = Field(
        default=DEFAULT_DECAY_TOLERANCE, gt=0.0, description="Allowed |f| at Vanishing endpoints, relative to the peak"
    )

    @model_validator(mode="after")
    def _check_domain(self) -> "Grid":
        if not np.isfinite(self.x_min) or not np.isfinite(self.x_max):
            raise ValueError("grid endpoints must be finite")
        if self.x_max <= self.x_min:
            raise ValueError(f"x_max ({self.x_max}) must exceed x_min ({self.x_min})")
        return self

    @property
    def length(self) -> float:
        return self.x_max - self.x_min

    @property
    def dx(self) -> float:
        if self.boundary is Boundary.PERIODIC:
            return self.length / self.n
        return self.length / (self.n - 1)

    @property
    def x(self) -> np.ndarray:
        if self.boundary is Boundary.PERIODIC:
            return self.x_min + self.dx * np.arange(self.n)
        return np.linspace(self.x_min, self.x_max, self.n)

    @property
    def wavenumbers(self) -> np.ndarray:
        """Angular wavenumbers in FFT order."""
        return 2.0 * np.pi * np.fft.fftfreq(self.n, d=self.dx)

    @property
    def default_scheme(self) -> DerivativeScheme:
        if self.boundary is Boundary.PERIODIC:
            return DerivativeScheme.SPECTRAL
        return DerivativeScheme.CENTRAL_FD4

    @property
    def quadrature_rule(self) -> str:
        if self.boundary is Boundary.PERIODIC:
            return "rectangle"
        return "simpson" if self.n % 2 == 1 else "trapezoid"

    @property
    def quadrature_order(self) -> Optional[int]:
        """Algebraic order of the quadrature; None means spectrally accurate."""
        return {"rectangle": None, "simpson": 4, "trapezoid": 2}[self.quadrature_rule]

    def spatial_order(self, scheme: Optional[DerivativeScheme] = None) -> Optional[int]:
        """Order of the derivative scheme; None means spectral."""
        scheme = self.resolve_scheme(scheme)
        return None if scheme is DerivativeScheme.SPECTRAL else 4

    def quadrature_weights(self) -> np.ndarray:
        dx = self.dx
        if self.quadrature_rule == "rectangle":
            return np.full(self.n, dx)
        if self.quadrature_rule == "simpson":
            weights = np.ones(self.n)
            weights[1:-1:2] = 4.0
            weights[2:-1:2] = 2.0
            return weights * dx / 3.0
        weights = np.full(self.n, dx)
        weights[0] = weights[-1] = 0.5 * dx
        return weights

    def resolve_scheme(self, scheme: Optional[DerivativeScheme]) -> DerivativeScheme:
        """Return the scheme to use, checking it against the boundary mode."""
        if scheme is None:
            return self.default_scheme
        scheme = DerivativeScheme(scheme)
        if scheme is DerivativeScheme.SPECTRAL and self.boundary is not Boundary.PERIODIC:
            raise ConfigurationError("Spectral differentiation requires a periodic grid")
        return scheme

    def _check_length(self, f: np.ndarray) -> np.ndarray:
        f = np.asarray(f)
        if f.shape != (self.n,):
            raise ShapeError(f"field has shape {f.shape}, grid expects ({self.n},)")
        return f

    def diff1(self, f: np.ndarray, scheme: Optional[DerivativeScheme] = None) -> np.ndarray:
        """First derivative of a field sampled on the grid."""
        f = self._check_length(f).astype(complex)
        scheme = self.resolve_scheme(scheme)
        if scheme is DerivativeScheme.SPECTRAL:
            k = self.wavenumbers
            if self.n % 2 == 0:
                # odd derivative of the Nyquist mode is not representable
                k[self.n // 2] = 0.0
            return np.fft.ifft(1j * k * np.fft.fft(f))
        if self.boundary is Boundary.PERIODIC:
            return _fd4_first_periodic(f, self.dx)
        return _fd4_first_vanishing(f, self.dx)

    def diff2(self, f: np.ndarray, scheme: Optional[DerivativeScheme] = None) -> np.ndarray:
        """Second derivative of a field sampled on the grid."""
        f = self._check_length(f).astype(complex)
        scheme = self.resolve_scheme(scheme)
        if scheme is DerivativeScheme.SPECTRAL:
            k = self.wavenumbers
            return np.fft.ifft(-(k**2) * np.fft.fft(f))
        if self.boundary is Boundary.PERIODIC:
            return _fd4_second_periodic(f, self.dx)
        return _fd4_second_vanishing(f, self.dx)

    def integrate(self, f: np.ndarray) -> complex:
        """Quadrature of a field over the domain."""
        f = self._check_length(f)
        return complex(np.dot(self.quadrature_weights(), f))

    def second_derivative_matrix(
        self, scheme: Optional[DerivativeScheme] = None
    ) -> Union[np.ndarray, sparse.csr_matrix]:
        """D2 as a matrix acting on grid values, cached per grid and scheme.

        Finite differences give a sparse CSR matrix; the spectral operator is a
        dense real circulant. The result is shared between callers and must not be
        modified in place.
        """
        return _second_derivative_matrix(self, self.resolve_scheme(scheme))

    def check_decay(self, values: np.ndarray, tolerance: Optional[float] = None) -> bool:
        """Warn when a field on a Vanishing grid has not decayed at the endpoints.

        Integration by parts drops boundary terms, which is only valid when the
        field is negligible at both ends. Periodic grids always pass.
        """
        if self.boundary is not Boundary.VANISHING:
            return True
        tolerance = self.decay_tolerance if tolerance is None else tolerance
        magnitude = np.abs(self._check_length(values))
        peak = float(magnitude.max())
        if peak == 0.0:
            return True
        edge = float(max(magnitude[0], magnitude[-1]))
        if edge > tolerance * peak:
            logger.warning(
                "Field not decayed at grid boundary",
                edge_ratio=edge / peak,
                tolerance=tolerance,
                x_min=self.x_min,
                x_max=self.x_max,
            )
            return False
        return True

    def describe(self) -> dict:
        """Metadata used in report headers."""
        return {
            "n": self.n,
            "x_min": self.x_min,
            "x_max": self.x_max,
            "boundary": self.boundary.value,
            "dx": self.dx,
            "quadrature": self.quadrature_rule,
        }


def _fd4_first_periodic(f: np.ndarray, h: float) -> np.ndarray:
    return (np.roll(f, 2) - 8.0 * np.roll(f, 1) + 8.0 * np.roll(f, -1) - np.roll(f, -2)) / (12.0 * h)


def _fd4_second_periodic(f: np.ndarray, h: float) -> np.ndarray:
    return (
        -np.roll(f, 2) + 16.0 * np.roll(f, 1) - 30.0 * f + 16.0 * np.roll(f, -1) - np.roll(f, -2)
    ) / (12.0 * h * h)


def _fd4_first_vanishing(f: np.ndarray, h: float) -> np.ndarray:
    out = np.empty_like(f)
    out[2:-2] = (f[:-4] - 8.0 * f[1:-3] + 8.0 * f[3:-1] - f[4:]) / (12.0 * h)
    head = f[:5]
    tail = f[::-1][:5]
    out[0] = _D1_EDGE[0] @ head / h
    out[1] = _D1_EDGE[1] @ head / h
    # mirror image of the left stencils; odd derivative flips sign
    out[-1] = -(_D1_EDGE[0] @ tail) / h
    out[-2] = -(_D1_EDGE[1] @ tail) / h
    return out


def _fd4_second_vanishing(f: np.ndarray, h: float) -> np.ndarray:
    out = np.empty_like(f)
    out[2:-2] = (-f[:-4] + 16.0 * f[1:-3] - 30.0 * f[2:-2] + 16.0 * f[3:-1] - f[4:]) / (12.0 * h * h)
    head = f[:6]
    tail = f[::-1][:6]
    out[0] = _D2_EDGE[0] @ head / (h * h)
    out[1] = _D2_EDGE[1] @ head / (h * h)
    out[-1] = _D2_EDGE[0] @ tail / (h * h)
    out[-2] = _D2_EDGE[1] @ tail / (h * h)
    return out


_FD4_SECOND = np.array([-1.0, 16.0, -30.0, 16.0, -1.0]) / 12.0


@lru_cache(maxsize=32)
def _second_derivative_matrix(grid: Grid, scheme: DerivativeScheme) -> Union[np.ndarray, sparse.csr_matrix]:
    n = grid.n
    if scheme is DerivativeScheme.SPECTRAL:
        column = np.fft.ifft(-(grid.wavenumbers**2)).real
        matrix = circulant(column)
        matrix.setflags(write=False)
        return matrix

    if grid.boundary is Boundary.PERIODIC:
        offsets = [-2, -1, 0, 1, 2, n - 2, n - 1, -(n - 1), -(n - 2)]
        diagonals = list(_FD4_SECOND) + [_FD4_SECOND[0], _FD4_SECOND[1], _FD4_SECOND[3], _FD4_SECOND[4]]
        return (sparse.diags(diagonals, offsets, shape=(n, n)) / grid.dx**2).tocsr()

    matrix = sparse.diags(list(_FD4_SECOND), [-2, -1, 0, 1, 2], shape=(n, n), format="lil")
    width = _D2_EDGE.shape[1]
    for row, stencil in enumerate(_D2_EDGE):
        matrix[row, :] = 0.0
        matrix[row, :width] = stencil
        matrix[n - 1 - row, :] = 0.0
        matrix[n - 1 - row, n - width :] = stencil[::-1]
    return (matrix.tocsr() / grid.dx**2).tocsr()
