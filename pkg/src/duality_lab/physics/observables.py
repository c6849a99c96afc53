"""Pointwise energy and momentum densities, corpuscular and wave side."""

from dataclasses import dataclass
from enum import Enum
from typing import Optional

import numpy as np
import structlog

from duality_lab import mutations
from duality_lab.dynamics.potentials import StaticPotential
from duality_lab.numerics.grid import DerivativeScheme, Grid
from duality_lab.numerics.wavefunction import (
    DEFAULT_NODE_THRESHOLD,
    Trajectory,
    Wavefunction,
    polar_decompose,
    require_interior,
    time_derivative,
)
from duality_lab.physics.constants import PhysicalConstants

logger = structlog.get_logger()

__all__ = [
    "DensityField",
    "DensityForm",
    "KineticDecomposition",
    "KineticForm",
    "LocalFields",
    "PhysicalConstants",
    "energy_identity",
    "expectation_energy",
    "hc_density",
    "hw_density",
    "kinetic_decomposition",
    "kinetic_density",
    "local_fields",
    "mean_momentum",
    "momentum_density",
    "potential_density",
    "wave_energy_density",
]


class KineticForm(str, Enum):
    """The three equivalent kinetic energy density expressions."""

    A = "A"  # -(hbar^2/2m) psi* psi_xx
    B = "B"  # (hbar^2/2m) [|psi_x|^2 - d/dx (psi* psi_x)]
    C = "C"  # (hbar^2/2m) [R^2 phi_x^2 + R_x^2 - d/dx (R R_x)]


class DensityForm(str, Enum):
    KINETIC_A = "kinetic_a"
    KINETIC_B = "kinetic_b"
    KINETIC_C = "kinetic_c"
    POTENTIAL = "potential"
    TOTAL_CORPUSCULAR = "total_corpuscular"
    TOTAL_WAVE = "total_wave"


_KINETIC_TAGS = {
    KineticForm.A: DensityForm.KINETIC_A,
    KineticForm.B: DensityForm.KINETIC_B,
    KineticForm.C: DensityForm.KINETIC_C,
}


@dataclass(frozen=True, eq=False)
class DensityField:
    """Real density on a grid.

    ``imag_residue`` is |integral of the discarded imaginary part|; it is zero for
    manifestly real forms.
    """

    grid: Grid
    values: np.ndarray
    form_tag: DensityForm
    imag_residue: float = 0.0

    def integral(self) -> float:
        return self.grid.integrate(self.values).real


@dataclass(frozen=True, eq=False)
class LocalFields:
    """E(x) = -hbar phi_t and p(x) = hbar phi_x; both zero under ``node_mask``."""

    energy: np.ndarray
    momentum: np.ndarray
    node_mask: np.ndarray


@dataclass(frozen=True)
class KineticDecomposition:
    """<K> split into phase-gradient flow, amplitude-gradient quantum and boundary parts."""

    flow: float
    quantum: float
    boundary: float

    @property
    def total(self) -> float:
        return self.flow + self.quantum + self.boundary


def _real_part(grid: Grid, values: np.ndarray) -> tuple:
    return values.real.copy(), abs(grid.integrate(values.imag).real)


def kinetic_density(
    psi: Wavefunction,
    form: KineticForm = KineticForm.A,
    constants: Optional[PhysicalConstants] = None,
    scheme: Optional[DerivativeScheme] = None,
    node_threshold: float = DEFAULT_NODE_THRESHOLD,
) -> DensityField:
    """Kinetic energy density in one of the three forms.

    The forms differ pointwise by total derivatives, so their integrals agree.
    """
    constants = constants or PhysicalConstants()
    form = KineticForm(form)
    grid = psi.grid
    values = psi.values
    prefactor = constants.kinetic_prefactor
    grid.check_decay(values)

    if form is KineticForm.A:
        density, residue = _real_part(grid, -prefactor * np.conj(values) * grid.diff2(values, scheme))
    elif form is KineticForm.B:
        psi_x = grid.diff1(values, scheme)
        complex_density = prefactor * (np.conj(psi_x) * psi_x - grid.diff1(np.conj(values) * psi_x, scheme))
        density, residue = _real_part(grid, complex_density)
    else:
        polar = polar_decompose(psi, node_threshold, scheme)
        flow = polar.amplitude_sq * polar.phase_grad_x**2
        total_derivative = grid.diff1(polar.amplitude_flux, scheme).real
        density = prefactor * (flow + polar.amplitude_grad_sq - total_derivative)
        residue = 0.0

    return DensityField(grid=grid, values=density, form_tag=_KINETIC_TAGS[form], imag_residue=residue)


def potential_density(
    psi: Wavefunction,
    potential: StaticPotential,
    constants: Optional[PhysicalConstants] = None,
) -> DensityField:
    """V(x) |psi(x)|^2."""
    values = potential.evaluate(psi.grid, constants) * psi.density
    return DensityField(grid=psi.grid, values=values, form_tag=DensityForm.POTENTIAL)


def hc_density(
    psi: Wavefunction,
    potential: StaticPotential,
    constants: Optional[PhysicalConstants] = None,
    scheme: Optional[DerivativeScheme] = None,
) -> DensityField:
    """Corpuscular total-energy density: kinetic form A plus potential."""
    kinetic = kinetic_density(psi, KineticForm.A, constants, scheme)
    potential_part = potential_density(psi, potential, constants)
    return DensityField(
        grid=psi.grid,
        values=kinetic.values + potential_part.values,
        form_tag=DensityForm.TOTAL_CORPUSCULAR,
        imag_residue=kinetic.imag_residue,
    )


def expectation_energy(
    psi: Wavefunction,
    potential: StaticPotential,
    constants: Optional[PhysicalConstants] = None,
    scheme: Optional[DerivativeScheme] = None,
) -> float:
    """<psi|H|psi>."""
    return hc_density(psi, potential, constants, scheme).integral()


def wave_energy_density(psi_values: np.ndarray, psi_t: np.ndarray, hbar: float) -> np.ndarray:
    """(i hbar / 2)(psi* psi_t - psi psi_t*), real by construction."""
    bilinear = 0.5j * hbar * (np.conj(psi_values) * psi_t - psi_values * np.conj(psi_t))
    return mutations.sign("hw_sign") * bilinear.real


def hw_density(
    traj: Trajectory,
    frame_index: int,
    constants: Optional[PhysicalConstants] = None,
) -> DensityField:
    """Wave-side total-energy density at an interior frame."""
    constants = constants or PhysicalConstants()
    require_interior(traj, frame_index)
    values = wave_energy_density(traj[frame_index].values, time_derivative(traj, frame_index), constants.hbar)
    return DensityField(grid=traj.grid, values=values, form_tag=DensityForm.TOTAL_WAVE)


def local_fields(
    traj: Trajectory,
    frame_index: int,
    constants: Optional[PhysicalConstants] = None,
    node_threshold: float = DEFAULT_NODE_THRESHOLD,
    scheme: Optional[DerivativeScheme] = None,
) -> LocalFields:
    """Generalized Planck-Einstein fields at an interior frame."""
    constants = constants or PhysicalConstants()
    require_interior(traj, frame_index)
    psi = traj[frame_index]
    polar = polar_decompose(psi, node_threshold, scheme)
    psi_t = time_derivative(traj, frame_index)

    safe = np.where(polar.node_mask, 1.0, polar.amplitude_sq)
    phase_rate = np.where(polar.node_mask, 0.0, np.imag(np.conj(psi.values) * psi_t) / safe)

    if polar.node_mask.any():
        logger.debug("Local fields masked at nodes", masked_fraction=polar.node_fraction)

    return LocalFields(
        energy=-constants.hbar * phase_rate,
        momentum=constants.hbar * polar.phase_grad_x,
        node_mask=polar.node_mask,
    )


def kinetic_decomposition(
    psi: Wavefunction,
    constants: Optional[PhysicalConstants] = None,
    scheme: Optional[DerivativeScheme] = None,
    node_threshold: float = DEFAULT_NODE_THRESHOLD,
) -> KineticDecomposition:
    """Split <K> into flow (hbar^2/2m) int R^2 phi_x^2, quantum (hbar^2/2m) int R_x^2 and boundary terms.

    Only the flow part is built from p(x) = hbar phi_x, so p R^2 accounts for part
    of the kinetic energy only.
    """
    constants = constants or PhysicalConstants()
    grid = psi.grid
    polar = polar_decompose(psi, node_threshold, scheme)
    prefactor = constants.kinetic_prefactor

    flow = prefactor * grid.integrate(polar.amplitude_sq * polar.phase_grad_x**2).real
    quantum = prefactor * grid.integrate(polar.amplitude_grad_sq).real
    boundary = -prefactor * grid.integrate(grid.diff1(polar.amplitude_flux, scheme).real).real
    return KineticDecomposition(flow=flow, quantum=quantum, boundary=boundary)


def momentum_density(
    psi: Wavefunction,
    constants: Optional[PhysicalConstants] = None,
    scheme: Optional[DerivativeScheme] = None,
    node_threshold: float = DEFAULT_NODE_THRESHOLD,
) -> np.ndarray:
    """p(x) R^2(x) = hbar phi_x R^2."""
    constants = constants or PhysicalConstants()
    polar = polar_decompose(psi, node_threshold, scheme)
    return constants.hbar * polar.phase_grad_x * polar.amplitude_sq


def mean_momentum(
    psi: Wavefunction,
    constants: Optional[PhysicalConstants] = None,
    scheme: Optional[DerivativeScheme] = None,
) -> float:
    """Re <psi| -i hbar d/dx |psi>."""
    constants = constants or PhysicalConstants()
    grid = psi.grid
    p_psi = -1j * constants.hbar * grid.diff1(psi.values, scheme)
    return grid.integrate(np.conj(psi.values) * p_psi).real


def energy_identity(
    traj: Trajectory,
    frame_index: int,
    potential: StaticPotential,
    constants: Optional[PhysicalConstants] = None,
    scheme: Optional[DerivativeScheme] = None,
) -> tuple:
    """(integral of H_w density, <H>) at an interior frame."""
    wave = hw_density(traj, frame_index, constants).integral()
    corpuscular = expectation_energy(traj[frame_index], potential, constants, scheme)
    return wave, corpuscular
