"""Convergence studies: error against step size and measured order."""

from dataclasses import dataclass, field
from typing import List, Optional, Sequence

import numpy as np
import structlog

from duality_lab.dynamics.potentials import HarmonicPotential
from duality_lab.dynamics.propagators import PropagationMethod, PropagatorConfig, propagate
from duality_lab.dynamics.reference import HarmonicCoherentReference, reference_state
from duality_lab.dynamics.states import harmonic_eigenfunction
from duality_lab.numerics.grid import Boundary, DerivativeScheme, Grid
from duality_lab.numerics.wavefunction import Wavefunction, normalize
from duality_lab.physics.constants import PhysicalConstants
from duality_lab.physics.functionals import variation_hc

logger = structlog.get_logger()


@dataclass(frozen=True)
class ConvergenceRow:
    step: float
    error: float
    order: Optional[float] = None


@dataclass
class ConvergenceTable:
    """Errors for a decreasing sequence of steps; ``order`` compares each row with the previous one."""

    name: str
    variable: str
    rows: List[ConvergenceRow] = field(default_factory=list)

    @property
    def orders(self) -> List[float]:
        return [row.order for row in self.rows if row.order is not None]

    @property
    def finest_order(self) -> Optional[float]:
        orders = self.orders
        return orders[-1] if orders else None

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "variable": self.variable,
            "rows": [{"step": row.step, "error": row.error, "order": row.order} for row in self.rows],
        }


def _table(name: str, variable: str, steps: Sequence[float], errors: Sequence[float]) -> ConvergenceTable:
    rows = []
    for index, (step, error) in enumerate(zip(steps, errors)):
        order = None
        if index > 0 and error > 0.0 and errors[index - 1] > 0.0:
            order = float(np.log(errors[index - 1] / error) / np.log(steps[index - 1] / step))
        rows.append(ConvergenceRow(step=float(step), error=float(error), order=order))
    table = ConvergenceTable(name=name, variable=variable, rows=rows)
    logger.info("Convergence table computed", name=name, orders=table.orders)
    return table


def _l2(grid: Grid, values: np.ndarray) -> float:
    return float(np.sqrt(grid.integrate(np.abs(values) ** 2).real))


def temporal_convergence(
    time_steps: Sequence[float],
    duration: float = 0.2,
    method: PropagationMethod = PropagationMethod.CRANK_NICOLSON,
    grid: Optional[Grid] = None,
    reference: Optional[HarmonicCoherentReference] = None,
    constants: Optional[PhysicalConstants] = None,
) -> ConvergenceTable:
    """Final-state error of a propagated coherent state against its closed form.

    The default periodic spectral grid makes the spatial error negligible, so the
    measured order is the time order of the propagator.
    """
    constants = constants or PhysicalConstants()
    grid = grid or Grid(n=256, x_min=-12.0, x_max=12.0, boundary=Boundary.PERIODIC)
    reference = reference or HarmonicCoherentReference()
    potential = HarmonicPotential(omega=reference.omega)
    psi0 = normalize(reference_state(reference, grid, 0.0, constants))

    errors = []
    for dt in time_steps:
        steps = int(round(duration / dt))
        config = PropagatorConfig(method=method, dt=dt, steps=steps)
        traj = propagate(psi0, potential, config, constants)
        exact = reference_state(reference, grid, config.duration, constants)
        errors.append(_l2(grid, traj[-1].values - exact.values))

    return _table(f"{method.value} coherent state", "dt", time_steps, errors)


def spatial_convergence(
    grid_points: Sequence[int],
    x_min: float = -10.0,
    x_max: float = 10.0,
    boundary: Boundary = Boundary.VANISHING,
    scheme: Optional[DerivativeScheme] = None,
    omega: float = 1.0,
    level: int = 0,
    constants: Optional[PhysicalConstants] = None,
) -> ConvergenceTable:
    """||H psi - E psi|| for an oscillator eigenstate sampled on successively finer grids."""
    constants = constants or PhysicalConstants()
    potential = HarmonicPotential(omega=omega)
    energy = constants.hbar * omega * (level + 0.5)

    steps, errors = [], []
    for n in grid_points:
        grid = Grid(n=n, x_min=x_min, x_max=x_max, boundary=boundary)
        psi = normalize(Wavefunction(grid, harmonic_eigenfunction(grid.x, level, omega, constants)))
        defect = variation_hc(psi, potential, constants, scheme) - energy * psi.values
        steps.append(grid.dx)
        errors.append(_l2(grid, defect))

    resolved = Grid(n=grid_points[0], x_min=x_min, x_max=x_max, boundary=boundary).resolve_scheme(scheme)
    return _table(f"{resolved.value} eigenstate defect", "dx", steps, errors)
