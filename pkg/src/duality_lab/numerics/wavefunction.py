"""Wavefunction containers, normalization and node-safe polar decomposition."""

from dataclasses import dataclass, field
from typing import Any, Dict, Iterator, Optional, Sequence, Tuple

import numpy as np
import structlog

from duality_lab.errors import ConfigurationError, DegenerateInputError, ShapeError
from duality_lab.numerics.grid import DerivativeScheme, Grid

logger = structlog.get_logger()

DEFAULT_NODE_THRESHOLD = 1e-12
TRAJECTORY_NORM_TOLERANCE = 1e-6
TIME_DERIVATIVE_ORDER = 2


@dataclass(frozen=True, eq=False)
class Wavefunction:
    """Complex field psi(x) on a grid. Values are copied and made read-only."""

    grid: Grid
    values: np.ndarray

    def __post_init__(self):
        values = np.array(self.values, dtype=complex)
        if values.shape != (self.grid.n,):
            raise ShapeError(f"wavefunction has shape {values.shape}, grid expects ({self.grid.n},)")
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    @property
    def density(self) -> np.ndarray:
        return np.abs(self.values) ** 2

    def norm_sq(self) -> float:
        return self.grid.integrate(self.density).real

    def scaled(self, factor: complex) -> "Wavefunction":
        return Wavefunction(self.grid, factor * self.values)

    def inner(self, other: "Wavefunction") -> complex:
        """<self|other> by grid quadrature."""
        return self.grid.integrate(np.conj(self.values) * other.values)


@dataclass(frozen=True, eq=False)
class PolarForm:
    """Amplitude and phase-gradient fields of psi = R exp(i phi).

    phi itself is never formed. ``amplitude_grad_sq`` holds R_x^2 away from nodes
    and the node limit |psi_x|^2 under the mask; ``amplitude_flux`` is R R_x, which
    equals Re(psi* psi_x) and is smooth through nodes.
    """

    grid: Grid
    amplitude_sq: np.ndarray
    phase_grad_x: np.ndarray
    node_mask: np.ndarray
    amplitude_grad_sq: np.ndarray
    amplitude_flux: np.ndarray
    node_threshold: float

    @property
    def node_fraction(self) -> float:
        return float(np.count_nonzero(self.node_mask)) / self.grid.n


@dataclass(frozen=True, eq=False)
class Trajectory:
    """Time-ordered frames psi(x, t0 + j dt) sharing one grid."""

    grid: Grid
    dt: float
    frames: Tuple[Wavefunction, ...]
    t0: float = 0.0
    metadata: Dict[str, Any] = field(default_factory=dict)
    check_norm: bool = field(default=True, repr=False)

    def __post_init__(self):
        frames = tuple(self.frames)
        object.__setattr__(self, "frames", frames)
        if not self.dt > 0.0:
            raise ConfigurationError(f"trajectory time step must be positive, got {self.dt}")
        if len(frames) < 3:
            raise ShapeError(f"trajectory needs at least 3 frames, got {len(frames)}")
        for index, frame in enumerate(frames):
            if frame.grid != self.grid:
                raise ShapeError(f"frame {index} lives on a different grid")
        if self.check_norm:
            for index, frame in enumerate(frames):
                drift = abs(frame.norm_sq() - 1.0)
                if drift > TRAJECTORY_NORM_TOLERANCE:
                    raise DegenerateInputError(
                        f"frame {index} is not normalized (|norm^2 - 1| = {drift:.3e})"
                    )
        metadata = dict(self.metadata)
        metadata.setdefault("time_derivative_order", TIME_DERIVATIVE_ORDER)
        object.__setattr__(self, "metadata", metadata)

    def __len__(self) -> int:
        return len(self.frames)

    def __iter__(self) -> Iterator[Wavefunction]:
        return iter(self.frames)

    def __getitem__(self, index: int) -> Wavefunction:
        return self.frames[index]

    @property
    def times(self) -> np.ndarray:
        return self.t0 + self.dt * np.arange(len(self.frames))

    @property
    def time_window(self) -> Tuple[float, float]:
        times = self.times
        return float(times[0]), float(times[-1])

    @property
    def values(self) -> np.ndarray:
        """Frames stacked as an array of shape (frames, n)."""
        return np.stack([frame.values for frame in self.frames])

    def with_frames(self, frames: Sequence[Wavefunction], check_norm: Optional[bool] = None) -> "Trajectory":
        return Trajectory(
            grid=self.grid,
            dt=self.dt,
            frames=tuple(frames),
            t0=self.t0,
            metadata=self.metadata,
            check_norm=self.check_norm if check_norm is None else check_norm,
        )


def normalize(psi: Wavefunction) -> Wavefunction:
    """Scale psi so that the integral of |psi|^2 is one."""
    norm_sq = psi.norm_sq()
    if not np.isfinite(norm_sq) or norm_sq <= 0.0:
        raise DegenerateInputError(f"cannot normalize a field with norm^2 = {norm_sq}")
    psi.grid.check_decay(psi.values)
    return psi.scaled(1.0 / np.sqrt(norm_sq))


def polar_decompose(
    psi: Wavefunction,
    node_threshold: float = DEFAULT_NODE_THRESHOLD,
    scheme: Optional[DerivativeScheme] = None,
) -> PolarForm:
    """Amplitude and phase gradient of psi without unwrapping the phase.

    phi_x = Im(psi* psi_x) / R^2 wherever R^2 >= node_threshold * max(R^2); below
    that the point is masked and phi_x is set to zero.
    """
    if not 0.0 < node_threshold < 1.0:
        raise ConfigurationError(f"node_threshold must lie in (0, 1), got {node_threshold}")

    grid = psi.grid
    values = psi.values
    psi_x = grid.diff1(values, scheme)
    density = np.abs(values) ** 2
    cross = np.conj(values) * psi_x

    peak = density.max()
    node_mask = density < node_threshold * peak if peak > 0.0 else np.ones(grid.n, dtype=bool)
    safe = np.where(node_mask, 1.0, density)

    phase_grad_x = np.where(node_mask, 0.0, cross.imag / safe)
    amplitude_grad_sq = np.where(node_mask, np.abs(psi_x) ** 2, cross.real**2 / safe)

    for array in (density, phase_grad_x, node_mask, amplitude_grad_sq):
        array.setflags(write=False)

    return PolarForm(
        grid=grid,
        amplitude_sq=density,
        phase_grad_x=phase_grad_x,
        node_mask=node_mask,
        amplitude_grad_sq=amplitude_grad_sq,
        amplitude_flux=cross.real,
        node_threshold=node_threshold,
    )


def time_derivative(traj: Trajectory, frame_index: int) -> np.ndarray:
    """Second-order finite-difference d(psi)/dt at a stored frame.

    Interior frames use the central difference, the first and last frames the
    one-sided three-point stencils.
    """
    last = len(traj) - 1
    if not 0 <= frame_index <= last:
        raise ShapeError(f"frame index {frame_index} outside [0, {last}]")

    frames = traj.frames
    dt = traj.dt
    if frame_index == 0:
        return (-3.0 * frames[0].values + 4.0 * frames[1].values - frames[2].values) / (2.0 * dt)
    if frame_index == last:
        return (3.0 * frames[last].values - 4.0 * frames[last - 1].values + frames[last - 2].values) / (2.0 * dt)
    return (frames[frame_index + 1].values - frames[frame_index - 1].values) / (2.0 * dt)


def require_interior(traj: Trajectory, frame_index: int) -> None:
    """Raise unless frame_index has a neighbour on each side."""
    if not 1 <= frame_index <= len(traj) - 2:
        raise ShapeError(f"frame index {frame_index} is not interior (valid: 1..{len(traj) - 2})")


def corrupt_frame(traj: Trajectory, frame_index: int, factor: complex) -> Trajectory:
    """Copy of the trajectory with one frame multiplied by ``factor``.

    The result is no longer a solution and usually not normalized; it exists to
    show that the duality residual detects non-solutions.
    """
    if not 0 <= frame_index < len(traj):
        raise ShapeError(f"frame index {frame_index} outside trajectory of {len(traj)} frames")
    logger.warning("Corrupting trajectory frame", frame_index=frame_index, factor=str(factor))
    frames = list(traj.frames)
    frames[frame_index] = frames[frame_index].scaled(factor)
    return traj.with_frames(frames, check_norm=False)
