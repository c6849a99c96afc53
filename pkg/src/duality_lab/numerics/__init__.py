"""Grid, differentiation, quadrature and wavefunction containers."""

from duality_lab.numerics.grid import Boundary, DerivativeScheme, Grid
from duality_lab.numerics.wavefunction import (
    PolarForm,
    Trajectory,
    Wavefunction,
    normalize,
    polar_decompose,
    time_derivative,
)

__all__ = [
    "Boundary",
    "DerivativeScheme",
    "Grid",
    "PolarForm",
    "Trajectory",
    "Wavefunction",
    "normalize",
    "polar_decompose",
    "time_derivative",
]
