"""Spacetime functionals, their analytic variations and the duality residual.

Functionals integrate densities over space (grid quadrature) and time
(trapezoid over frames). Variations are functional gradients dF/dpsi*; the
directional derivative of F along a perturbation eta of frame j is
2 w_j Re <eta, dF/dpsi*>, with w_j the time-quadrature weight of the frame.
"""

from dataclasses import dataclass
from enum import Enum
from typing import Callable, Dict, List, NamedTuple, Optional, Sequence, Tuple

import numpy as np
import structlog
from pydantic import BaseModel, ConfigDict, computed_field
from scipy.integrate import trapezoid

from duality_lab import mutations
from duality_lab.dynamics.potentials import StaticPotential
from duality_lab.errors import ShapeError, ToleranceUnreliableError
from duality_lab.numerics.grid import Boundary, DerivativeScheme, Grid
from duality_lab.numerics.wavefunction import Trajectory, Wavefunction, require_interior, time_derivative
from duality_lab.physics.constants import PhysicalConstants
from duality_lab.physics.observables import KineticForm, kinetic_density, potential_density, wave_energy_density

logger = structlog.get_logger()

# euler_lagrange_residual = EULER_LAGRANGE_FACTOR * duality_residual on spectral grids
EULER_LAGRANGE_FACTOR = 1.0

FD_EPSILON_RANGE = (1e-7, 1e-3)
FD_RELATIVE_TOLERANCE = 1e-6
FD_ABSOLUTE_TOLERANCE = 1e-9
_BUMP = np.array([0.25, 0.5, 0.25])


class FunctionalTag(str, Enum):
    HC = "Hc"
    HW = "Hw"
    KC = "Kc"
    VC = "Vc"
    SC = "Sc"
    SW = "Sw"

    @property
    def time_coupled(self) -> bool:
        """Whether the density involves psi_t, coupling neighbouring frames."""
        return self in (FunctionalTag.HW, FunctionalTag.SW)


class PerturbationDirection(str, Enum):
    REAL = "real"
    IMAGINARY = "imaginary"


class ActionReport(BaseModel):
    """Time-integrated functionals over the trajectory window."""

    model_config = ConfigDict(frozen=True)

    k_c: float
    v_c: float
    h_w: float
    time_window: Tuple[float, float]

    @computed_field
    @property
    def h_c(self) -> float:
        return self.k_c + self.v_c

    @computed_field
    @property
    def s_c(self) -> float:
        return self.k_c - self.v_c

    @computed_field
    @property
    def s_w(self) -> float:
        return 2.0 * self.k_c - self.h_w


@dataclass(frozen=True, eq=False)
class VariationField:
    """dF/dpsi* at each interior frame; ``values`` has shape (interior frames, n)."""

    grid: Grid
    tag: FunctionalTag
    times: np.ndarray
    values: np.ndarray


class DualityResidual(NamedTuple):
    residual: np.ndarray
    norm: float


@dataclass(frozen=True)
class FdVariationResult:
    """Finite-difference directional derivative against the analytic prediction."""

    tag: FunctionalTag
    frame: int
    point: int
    direction: PerturbationDirection
    epsilon: float
    estimate: float
    predicted: float
    edge_site: bool

    @property
    def abs_error(self) -> float:
        return abs(self.estimate - self.predicted)

    @property
    def rel_error(self) -> float:
        return self.abs_error / max(abs(self.predicted), np.finfo(float).tiny)

    @property
    def allowed_error(self) -> float:
        return max(FD_RELATIVE_TOLERANCE * abs(self.predicted), FD_ABSOLUTE_TOLERANCE)

    @property
    def passed(self) -> bool:
        return self.abs_error <= self.allowed_error


# Frame series and functionals


def _frame_series(
    traj: Trajectory,
    potential: StaticPotential,
    constants: PhysicalConstants,
    scheme: Optional[DerivativeScheme],
    with_wave: bool = True,
) -> Dict[str, np.ndarray]:
    grid = traj.grid
    kinetic = np.array([kinetic_density(frame, KineticForm.A, constants, scheme).integral() for frame in traj])
    potential_energy = np.array([potential_density(frame, potential, constants).integral() for frame in traj])
    series = {"kinetic": kinetic, "potential": potential_energy}
    if with_wave:
        series["wave"] = np.array(
            [
                grid.integrate(wave_energy_density(frame.values, time_derivative(traj, j), constants.hbar)).real
                for j, frame in enumerate(traj)
            ]
        )
    return series


def time_weights(traj: Trajectory) -> np.ndarray:
    """Trapezoid weights over the frames."""
    weights = np.full(len(traj), traj.dt)
    weights[0] = weights[-1] = 0.5 * traj.dt
    return weights


def actions(
    traj: Trajectory,
    potential: StaticPotential,
    constants: Optional[PhysicalConstants] = None,
    scheme: Optional[DerivativeScheme] = None,
) -> ActionReport:
    """K_c, V_c, H_c, H_w, S_c and S_w over the trajectory window."""
    constants = constants or PhysicalConstants()
    series = _frame_series(traj, potential, constants, scheme)
    return ActionReport(
        k_c=float(trapezoid(series["kinetic"], dx=traj.dt)),
        v_c=float(trapezoid(series["potential"], dx=traj.dt)),
        h_w=float(trapezoid(series["wave"], dx=traj.dt)),
        time_window=traj.time_window,
    )


def functional_value(
    tag: FunctionalTag,
    traj: Trajectory,
    potential: StaticPotential,
    constants: Optional[PhysicalConstants] = None,
    scheme: Optional[DerivativeScheme] = None,
) -> float:
    """Value of a single functional over the trajectory."""
    constants = constants or PhysicalConstants()
    tag = FunctionalTag(tag)
    series = _frame_series(traj, potential, constants, scheme, with_wave=tag.time_coupled)
    kinetic, potential_energy = series["kinetic"], series["potential"]
    density = {
        FunctionalTag.KC: lambda: kinetic,
        FunctionalTag.VC: lambda: potential_energy,
        FunctionalTag.HC: lambda: kinetic + potential_energy,
        FunctionalTag.SC: lambda: kinetic - potential_energy,
        FunctionalTag.HW: lambda: series["wave"],
        FunctionalTag.SW: lambda: 2.0 * kinetic - series["wave"],
    }[tag]()
    return float(trapezoid(density, dx=traj.dt))


# Analytic variations


def _kinetic_gradient_prefactor(constants: PhysicalConstants) -> float:
    prefactor = constants.kinetic_prefactor
    if mutations.is_active("kinetic_factor"):
        prefactor *= 2.0
    return prefactor


def variation_kc(
    psi: Wavefunction,
    constants: Optional[PhysicalConstants] = None,
    scheme: Optional[DerivativeScheme] = None,
) -> np.ndarray:
    """-(hbar^2/2m) psi_xx."""
    constants = constants or PhysicalConstants()
    return -_kinetic_gradient_prefactor(constants) * psi.grid.diff2(psi.values, scheme)


def variation_kc_quadrature(
    psi: Wavefunction,
    constants: Optional[PhysicalConstants] = None,
    scheme: Optional[DerivativeScheme] = None,
) -> np.ndarray:
    """Exact gradient of the discretized K_c under the grid's quadrature inner product.

    With weights W the discrete functional Re psi^H W (-(hbar^2/2m) D2) psi has
    gradient -(hbar^2/2m) (D2 psi + W^-1 D2^T W psi) / 2. On periodic grids D2 is
    symmetric and W uniform, so this is ``variation_kc``; on Vanishing grids the
    one-sided edge rows and the Simpson or trapezoid weights make the two differ.
    """
    constants = constants or PhysicalConstants()
    grid = psi.grid
    if grid.boundary is Boundary.PERIODIC:
        return variation_kc(psi, constants, scheme)
    weights = grid.quadrature_weights()
    d2 = grid.second_derivative_matrix(scheme)
    adjoint = (d2.T @ (weights * psi.values)) / weights
    return -0.5 * _kinetic_gradient_prefactor(constants) * (grid.diff2(psi.values, scheme) + adjoint)


def variation_vc(
    psi: Wavefunction,
    potential: StaticPotential,
    constants: Optional[PhysicalConstants] = None,
) -> np.ndarray:
    """V psi."""
    return potential.evaluate(psi.grid, constants) * psi.values


def variation_hc(
    psi: Wavefunction,
    potential: StaticPotential,
    constants: Optional[PhysicalConstants] = None,
    scheme: Optional[DerivativeScheme] = None,
) -> np.ndarray:
    """H psi = -(hbar^2/2m) psi_xx + V psi, the sum of the K_c and V_c variations."""
    return variation_kc(psi, constants, scheme) + variation_vc(psi, potential, constants)


def variation_sc(
    psi: Wavefunction,
    potential: StaticPotential,
    constants: Optional[PhysicalConstants] = None,
    scheme: Optional[DerivativeScheme] = None,
) -> np.ndarray:
    """-(hbar^2/2m) psi_xx - V psi. Contains no time derivative."""
    return variation_kc(psi, constants, scheme) - variation_vc(psi, potential, constants)


def _wave_gradient(traj: Trajectory, frame_index: int, hbar: float) -> np.ndarray:
    return mutations.sign("hw_sign") * 1j * hbar * time_derivative(traj, frame_index)


def variation_hw(
    traj: Trajectory,
    frame_index: int,
    constants: Optional[PhysicalConstants] = None,
) -> np.ndarray:
    """i hbar psi_t at an interior frame; time-boundary terms are dropped."""
    constants = constants or PhysicalConstants()
    require_interior(traj, frame_index)
    return _wave_gradient(traj, frame_index, constants.hbar)


def variation_sw(
    traj: Trajectory,
    frame_index: int,
    constants: Optional[PhysicalConstants] = None,
    scheme: Optional[DerivativeScheme] = None,
) -> np.ndarray:
    """2 dK_c/dpsi* - i hbar psi_t."""
    return 2.0 * variation_kc(traj[frame_index], constants, scheme) - variation_hw(traj, frame_index, constants)


KineticGradient = Callable[[Wavefunction, PhysicalConstants, Optional[DerivativeScheme]], np.ndarray]


def _gradient(
    tag: FunctionalTag,
    traj: Trajectory,
    frame_index: int,
    potential: StaticPotential,
    constants: PhysicalConstants,
    scheme: Optional[DerivativeScheme],
    kinetic: KineticGradient = variation_kc,
) -> np.ndarray:
    psi = traj[frame_index]
    if tag is FunctionalTag.VC:
        return variation_vc(psi, potential, constants)
    if tag is FunctionalTag.HW:
        return _wave_gradient(traj, frame_index, constants.hbar)
    kinetic_part = kinetic(psi, constants, scheme)
    if tag is FunctionalTag.KC:
        return kinetic_part
    if tag is FunctionalTag.HC:
        return kinetic_part + variation_vc(psi, potential, constants)
    if tag is FunctionalTag.SC:
        return kinetic_part - variation_vc(psi, potential, constants)
    return 2.0 * kinetic_part - _wave_gradient(traj, frame_index, constants.hbar)


def variation_field(
    tag: FunctionalTag,
    traj: Trajectory,
    potential: StaticPotential,
    constants: Optional[PhysicalConstants] = None,
    scheme: Optional[DerivativeScheme] = None,
) -> VariationField:
    """Analytic gradient of a functional at every interior frame."""
    constants = constants or PhysicalConstants()
    tag = FunctionalTag(tag)
    interior = range(1, len(traj) - 1)
    values = np.stack([_gradient(tag, traj, j, potential, constants, scheme) for j in interior])
    return VariationField(grid=traj.grid, tag=tag, times=traj.times[1:-1], values=values)


# Duality principle


def duality_residual(
    traj: Trajectory,
    frame_index: int,
    potential: StaticPotential,
    constants: Optional[PhysicalConstants] = None,
    scheme: Optional[DerivativeScheme] = None,
) -> DualityResidual:
    """i hbar psi_t - H psi: the variation of H_w minus the variation of H_c.

    It vanishes exactly when the frame satisfies the (discrete) Schroedinger equation.
    """
    constants = constants or PhysicalConstants()
    wave_side = variation_hw(traj, frame_index, constants)
    corpuscular_side = variation_hc(traj[frame_index], potential, constants, scheme)
    residual = wave_side - corpuscular_side
    norm = float(np.sqrt(traj.grid.integrate(np.abs(residual) ** 2).real))
    return DualityResidual(residual=residual, norm=norm)


def euler_lagrange_residual(
    traj: Trajectory,
    frame_index: int,
    potential: StaticPotential,
    constants: Optional[PhysicalConstants] = None,
    scheme: Optional[DerivativeScheme] = None,
) -> np.ndarray:
    """dL/dpsi* - d/dx (dL/dpsi_x*) - d/dt (dL/dpsi_t*) for the field Lagrangian

    L = (i hbar/2)(psi* psi_t - psi psi_t*) - (hbar^2/2m) psi_x* psi_x - V psi* psi.

    Each partial derivative is assembled separately; the x- and t-divergences are
    taken numerically on the flux fields.
    """
    constants = constants or PhysicalConstants()
    require_interior(traj, frame_index)
    grid = traj.grid
    hbar = constants.hbar
    psi = traj[frame_index].values
    potential_values = potential.evaluate(grid, constants)

    d_density = 0.5j * hbar * time_derivative(traj, frame_index) - potential_values * psi

    flux_x = -constants.kinetic_prefactor * grid.diff1(psi, scheme)
    divergence_x = grid.diff1(flux_x, scheme)

    window = [Wavefunction(grid, -0.5j * hbar * traj[j].values) for j in (frame_index - 1, frame_index, frame_index + 1)]
    flux_t = Trajectory(grid=grid, dt=traj.dt, frames=tuple(window), check_norm=False)
    divergence_t = time_derivative(flux_t, 1)

    return d_density - divergence_x - divergence_t


def dual_derivation_discrepancy(
    traj: Trajectory,
    frame_index: int,
    potential: StaticPotential,
    constants: Optional[PhysicalConstants] = None,
    scheme: Optional[DerivativeScheme] = None,
) -> float:
    """Relative mismatch between the Euler-Lagrange and duality residuals.

    Normalized by ||i hbar psi_t|| + ||H psi||. On finite-difference grids the wide
    stencil D1 D1 differs from the compact D2; that known operator difference is
    added to the duality side before comparing.
    """
    constants = constants or PhysicalConstants()
    grid = traj.grid
    scheme = grid.resolve_scheme(scheme)
    psi = traj[frame_index].values

    el = euler_lagrange_residual(traj, frame_index, potential, constants, scheme)
    expected = EULER_LAGRANGE_FACTOR * duality_residual(traj, frame_index, potential, constants, scheme).residual
    if scheme is not DerivativeScheme.SPECTRAL:
        expected = expected + constants.kinetic_prefactor * (
            grid.diff1(grid.diff1(psi, scheme), scheme) - grid.diff2(psi, scheme)
        )

    def l2(field: np.ndarray) -> float:
        return float(np.sqrt(grid.integrate(np.abs(field) ** 2).real))

    scale = l2(1j * constants.hbar * time_derivative(traj, frame_index)) + l2(
        variation_hc(traj[frame_index], potential, constants, scheme)
    )
    return l2(el - expected) / max(scale, np.finfo(float).tiny)


# Finite-difference oracle


def clean_frames(tag: FunctionalTag, traj: Trajectory) -> List[int]:
    """Frames whose perturbation does not reach a time-boundary stencil.

    Time-coupled functionals need two frames of margin: the one-sided end stencils
    reach two frames in.
    """
    last = len(traj) - 1
    if FunctionalTag(tag).time_coupled:
        return list(range(3, last - 2))
    return list(range(0, last + 1))


def _bump(grid: Grid, point: int, direction: PerturbationDirection) -> np.ndarray:
    if not 1 <= point <= grid.n - 2:
        raise ShapeError(f"perturbation point {point} must be interior (1..{grid.n - 2})")
    bump = np.zeros(grid.n, dtype=complex)
    bump[point - 1 : point + 2] = _BUMP
    return bump if direction is PerturbationDirection.REAL else 1j * bump


def fd_variation(
    tag: FunctionalTag,
    traj: Trajectory,
    site: Tuple[int, int],
    epsilon: float,
    direction: PerturbationDirection,
    potential: StaticPotential,
    constants: Optional[PhysicalConstants] = None,
    scheme: Optional[DerivativeScheme] = None,
) -> FdVariationResult:
    """Central-difference directional derivative of F along a mollified point bump.

    ``epsilon`` is absolute; it must lie within FD_EPSILON_RANGE times the peak |psi|
    of the perturbed frame.
    """
    constants = constants or PhysicalConstants()
    tag = FunctionalTag(tag)
    direction = PerturbationDirection(direction)
    frame, point = site
    if not 0 <= frame < len(traj):
        raise ShapeError(f"perturbation frame {frame} outside trajectory of {len(traj)} frames")

    scale = float(np.max(np.abs(traj[frame].values)))
    low, high = FD_EPSILON_RANGE
    if not low * scale <= epsilon <= high * scale:
        raise ToleranceUnreliableError(
            f"epsilon {epsilon:.3e} outside [{low * scale:.3e}, {high * scale:.3e}] for field scale {scale:.3e}"
        )

    bump = _bump(traj.grid, point, direction)

    def shifted(sign: float) -> float:
        frames = list(traj.frames)
        frames[frame] = Wavefunction(traj.grid, frames[frame].values + sign * epsilon * bump)
        return functional_value(tag, traj.with_frames(frames, check_norm=False), potential, constants, scheme)

    estimate = (shifted(1.0) - shifted(-1.0)) / (2.0 * epsilon)

    gradient = _gradient(tag, traj, frame, potential, constants, scheme, kinetic=variation_kc_quadrature)
    weights = traj.grid.quadrature_weights()
    predicted = 2.0 * time_weights(traj)[frame] * float(np.real(np.sum(weights * np.conj(bump) * gradient)))
    logger.debug(
        "FD variation evaluated",
        tag=tag.value,
        frame=frame,
        point=point,
        direction=direction.value,
        estimate=float(estimate),
        predicted=predicted,
    )

    return FdVariationResult(
        tag=tag,
        frame=frame,
        point=point,
        direction=direction,
        epsilon=epsilon,
        estimate=float(estimate),
        predicted=predicted,
        edge_site=frame not in clean_frames(tag, traj),
    )


def richardson_sequence(
    tag: FunctionalTag,
    traj: Trajectory,
    site: Tuple[int, int],
    epsilons: Sequence[float],
    direction: PerturbationDirection,
    potential: StaticPotential,
    constants: Optional[PhysicalConstants] = None,
    scheme: Optional[DerivativeScheme] = None,
) -> List[FdVariationResult]:
    """fd_variation repeated over a sequence of step sizes."""
    return [
        fd_variation(tag, traj, site, epsilon, direction, potential, constants, scheme) for epsilon in epsilons
    ]


# Derived tolerances

ROUNDOFF_FACTOR = 1e3


@dataclass(frozen=True)
class DerivedTolerance:
    """A tolerance together with the note explaining where it comes from."""

    value: float
    provenance: str


def _second_order_coefficient(traj: Trajectory, hbar: float) -> float:
    # leading-order defect per energy component: E^3 (dt^2/12 + T^2/6) / hbar^2
    step_dt = float(traj.metadata.get("step_dt", traj.dt))
    return (step_dt**2 / 12.0 + traj.dt**2 / 6.0) / hbar**2


def _cubed_hamiltonian(
    traj: Trajectory,
    frame_index: int,
    potential: StaticPotential,
    constants: PhysicalConstants,
    scheme: Optional[DerivativeScheme],
) -> np.ndarray:
    grid = traj.grid
    potential_values = potential.evaluate(grid, constants)
    field = traj[frame_index].values
    for _ in range(3):
        field = -constants.kinetic_prefactor * grid.diff2(field, scheme) + potential_values * field
    return field


def _roundoff_floor(traj: Trajectory, hbar: float) -> float:
    return ROUNDOFF_FACTOR * float(np.finfo(float).eps) * hbar / traj.dt


def residual_tolerance(
    traj: Trajectory,
    frame_index: int,
    potential: StaticPotential,
    constants: Optional[PhysicalConstants] = None,
    scheme: Optional[DerivativeScheme] = None,
) -> DerivedTolerance:
    """Bound on ||duality_residual|| for a trajectory from a second-order propagator.

    Crank-Nicolson with step dt, sampled every T, leaves a defect of
    E^3 (dt^2/12 + T^2/6) / hbar^2 per energy component; the bound is twice the
    norm of that defect plus a roundoff floor scaled by hbar / T.
    """
    constants = constants or PhysicalConstants()
    grid = traj.grid
    coefficient = _second_order_coefficient(traj, constants.hbar)
    h3 = _cubed_hamiltonian(traj, frame_index, potential, constants, scheme)
    leading = 2.0 * coefficient * float(np.sqrt(grid.integrate(np.abs(h3) ** 2).real))
    floor = _roundoff_floor(traj, constants.hbar)
    provenance = (
        f"time order 2: 2*(dt^2/12 + T^2/6)/hbar^2*||H^3 psi|| = {leading:.3e} "
        f"(dt={traj.metadata.get('step_dt', traj.dt):g}, T={traj.dt:g}); "
        f"spatial order {grid.spatial_order(scheme) or 'spectral'} shared with the propagator; "
        f"roundoff floor {floor:.1e}"
    )
    return DerivedTolerance(value=leading + floor, provenance=provenance)


def energy_identity_tolerance(
    traj: Trajectory,
    frame_index: int,
    potential: StaticPotential,
    constants: Optional[PhysicalConstants] = None,
    scheme: Optional[DerivativeScheme] = None,
) -> DerivedTolerance:
    """Bound on |integral of H_w density - <H>|, which equals |Re <psi|residual>|."""
    constants = constants or PhysicalConstants()
    grid = traj.grid
    coefficient = _second_order_coefficient(traj, constants.hbar)
    h3 = _cubed_hamiltonian(traj, frame_index, potential, constants, scheme)
    leading = 2.0 * coefficient * abs(grid.integrate(np.conj(traj[frame_index].values) * h3).real)
    floor = _roundoff_floor(traj, constants.hbar)
    provenance = f"time order 2: 2*(dt^2/12 + T^2/6)/hbar^2*<H^3> = {leading:.3e}; roundoff floor {floor:.1e}"
    return DerivedTolerance(value=leading + floor, provenance=provenance)
