"""Physical constants carried through every computation."""

from pydantic import BaseModel, ConfigDict, Field


class PhysicalConstants(BaseModel):
    """Reduced Planck constant and particle mass, in consistent units."""

    model_config = ConfigDict(frozen=True, extra="forbid", allow_inf_nan=False)

    hbar: float = Field(default=1.0, gt=0.0, description="Reduced Planck constant")
    mass: float = Field(default=1.0, gt=0.0, description="Particle mass")

    @property
    def kinetic_prefactor(self) -> float:
        """hbar^2 / 2m."""
        return self.hbar**2 / (2.0 * self.mass)
