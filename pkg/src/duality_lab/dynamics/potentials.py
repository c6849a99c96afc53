"""Declarative static potentials V(x)."""

from typing import Annotated, Literal, Optional, Tuple, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field

from duality_lab.errors import ShapeError
from duality_lab.numerics.grid import Grid
from duality_lab.physics.constants import PhysicalConstants


class StaticPotential(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid", allow_inf_nan=False)

    # time-dependent potentials are not supported
    time_dependence: Literal["static"] = "static"

    def evaluate(self, grid: Grid, constants: Optional[PhysicalConstants] = None) -> np.ndarray:
        raise NotImplementedError

    def max_abs(self, grid: Grid, constants: Optional[PhysicalConstants] = None) -> float:
        return float(np.max(np.abs(self.evaluate(grid, constants))))


class FreePotential(StaticPotential):
    kind: Literal["free"] = "free"

    def evaluate(self, grid: Grid, constants: Optional[PhysicalConstants] = None) -> np.ndarray:
        return np.zeros(grid.n)


class HarmonicPotential(StaticPotential):
    """V = m omega^2 (x - center)^2 / 2."""

    kind: Literal["harmonic"] = "harmonic"
    omega: float = Field(default=1.0, gt=0.0)
    center: float = 0.0

    def evaluate(self, grid: Grid, constants: Optional[PhysicalConstants] = None) -> np.ndarray:
        mass = (constants or PhysicalConstants()).mass
        return 0.5 * mass * self.omega**2 * (grid.x - self.center) ** 2


class SquareWellPotential(StaticPotential):
    """-depth inside |x - center| < width / 2, zero outside."""

    kind: Literal["square_well"] = "square_well"
    depth: float = Field(..., ge=0.0)
    width: float = Field(..., gt=0.0)
    center: float = 0.0

    def evaluate(self, grid: Grid, constants: Optional[PhysicalConstants] = None) -> np.ndarray:
        inside = np.abs(grid.x - self.center) < 0.5 * self.width
        return np.where(inside, -self.depth, 0.0)


class BarrierPotential(StaticPotential):
    """height inside |x - center| < width / 2, zero outside."""

    kind: Literal["barrier"] = "barrier"
    height: float
    width: float = Field(..., gt=0.0)
    center: float = 0.0

    def evaluate(self, grid: Grid, constants: Optional[PhysicalConstants] = None) -> np.ndarray:
        inside = np.abs(grid.x - self.center) < 0.5 * self.width
        return np.where(inside, self.height, 0.0)


class CustomPotential(StaticPotential):
    """Potential sampled on the grid points."""

    kind: Literal["custom"] = "custom"
    values: Tuple[float, ...]

    def evaluate(self, grid: Grid, constants: Optional[PhysicalConstants] = None) -> np.ndarray:
        if len(self.values) != grid.n:
            raise ShapeError(f"custom potential has {len(self.values)} samples, grid has {grid.n} points")
        return np.asarray(self.values, dtype=float)


PotentialSpec = Annotated[
    Union[FreePotential, HarmonicPotential, SquareWellPotential, BarrierPotential, CustomPotential],
    Field(discriminator="kind"),
]
