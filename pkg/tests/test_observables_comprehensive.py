"""Property tests for the density forms over families of smooth states."""

import os
import sys

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

sys.path.insert(0, os.path.abspath(os.path.join(os.path.dirname(__file__), "../src")))
from duality_lab.dynamics.potentials import HarmonicPotential
from duality_lab.dynamics.states import (
    GaussianState,
    HarmonicEigenState,
    SuperpositionState,
    SuperpositionTerm,
    build_initial_state,
)
from duality_lab.numerics.grid import Grid
from duality_lab.numerics.wavefunction import polar_decompose
from duality_lab.physics.constants import PhysicalConstants
from duality_lab.physics.observables import (
    KineticForm,
    expectation_energy,
    kinetic_decomposition,
    kinetic_density,
    mean_momentum,
)

GRID = Grid(n=256, x_min=-16.0, x_max=16.0)
CONSTANTS = PhysicalConstants()

center_strategy = st.floats(min_value=-2.0, max_value=2.0, allow_nan=False, allow_infinity=False)
width_strategy = st.floats(min_value=0.7, max_value=1.2, allow_nan=False, allow_infinity=False)
wavenumber_strategy = st.floats(min_value=-2.0, max_value=2.0, allow_nan=False, allow_infinity=False)
coefficient_strategy = st.floats(min_value=-1.0, max_value=1.0, allow_nan=False, allow_infinity=False)


@given(x0=center_strategy, sigma=width_strategy, k0=wavenumber_strategy)
@settings(max_examples=25, deadline=None)
def test_gaussian_kinetic_forms_agree_with_closed_form(x0, sigma, k0):
    """All three forms integrate to hbar^2/2m (k0^2 + 1/4 sigma^2)."""
    psi = build_initial_state(GaussianState(x0=x0, sigma=sigma, k0=k0), GRID, CONSTANTS)
    expected = 0.5 * (k0**2 + 0.25 / sigma**2)
    for form in KineticForm:
        assert kinetic_density(psi, form, CONSTANTS).integral() == pytest.approx(expected, abs=1e-10)


@given(x0=center_strategy, sigma=width_strategy, k0=wavenumber_strategy)
@settings(max_examples=25, deadline=None)
def test_gaussian_decomposition_separates_flow_and_quantum(x0, sigma, k0):
    """Flow carries the drift momentum, quantum the packet width."""
    psi = build_initial_state(GaussianState(x0=x0, sigma=sigma, k0=k0), GRID, CONSTANTS)
    parts = kinetic_decomposition(psi, CONSTANTS)
    assert parts.flow == pytest.approx(0.5 * k0**2, abs=1e-10)
    assert parts.quantum == pytest.approx(0.125 / sigma**2, abs=1e-10)
    assert mean_momentum(psi, CONSTANTS) == pytest.approx(k0, abs=1e-10)


@given(
    first=st.integers(min_value=0, max_value=4),
    gap=st.integers(min_value=1, max_value=3),
    a=coefficient_strategy,
    b=coefficient_strategy,
    phase=st.floats(min_value=0.0, max_value=2.0 * np.pi, allow_nan=False),
)
@settings(max_examples=25, deadline=None)
def test_superposition_energy_and_node_safe_form(first, gap, a, b, phase):
    """<H> is the weighted mean of eigenvalues; form C stays equal to form B through nodes."""
    if abs(a) + abs(b) < 1e-2:
        a = 1.0
    second = first + gap
    spec = SuperpositionState(
        terms=[
            SuperpositionTerm(coeff_re=a, state=HarmonicEigenState(n=first)),
            SuperpositionTerm(coeff_re=b * np.cos(phase), coeff_im=b * np.sin(phase), state=HarmonicEigenState(n=second)),
        ]
    )
    psi = build_initial_state(spec, GRID, CONSTANTS)
    weights = np.array([a**2, b**2]) / (a**2 + b**2)
    expected = weights @ np.array([first + 0.5, second + 0.5])
    assert expectation_energy(psi, HarmonicPotential(), CONSTANTS) == pytest.approx(expected, abs=1e-9)

    form_b = kinetic_density(psi, KineticForm.B, CONSTANTS).values
    form_c = kinetic_density(psi, KineticForm.C, CONSTANTS).values
    assert np.all(np.isfinite(form_c))
    np.testing.assert_allclose(form_c, form_b, atol=1e-9)


@given(
    first=st.integers(min_value=0, max_value=3),
    a=coefficient_strategy,
    b=coefficient_strategy,
    gauge=st.floats(min_value=0.0, max_value=2.0 * np.pi, allow_nan=False),
)
@settings(max_examples=25, deadline=None)
def test_densities_are_gauge_invariant_and_positive(first, a, b, gauge):
    """A global phase changes no density; the kinetic densities B and C and the momentum balance stay put."""
    if abs(a) + abs(b) < 1e-2:
        a = 1.0
    spec = SuperpositionState(
        terms=[
            SuperpositionTerm(coeff_re=a, state=HarmonicEigenState(n=first)),
            SuperpositionTerm(coeff_re=0.0, coeff_im=b, state=GaussianState(x0=1.0, sigma=1.0, k0=1.0)),
        ]
    )
    psi = build_initial_state(spec, GRID, CONSTANTS)
    rotated = psi.scaled(np.exp(1j * gauge))

    polar, polar_rotated = polar_decompose(psi), polar_decompose(rotated)
    np.testing.assert_array_equal(polar_rotated.node_mask, polar.node_mask)
    np.testing.assert_allclose(polar_rotated.phase_grad_x, polar.phase_grad_x, atol=1e-8)
    assert mean_momentum(rotated, CONSTANTS) == pytest.approx(mean_momentum(psi, CONSTANTS), abs=1e-12)

    for form in (KineticForm.B, KineticForm.C):
        density = kinetic_density(psi, form, CONSTANTS).values
        assert np.all(density >= -1e-14)
        np.testing.assert_allclose(kinetic_density(rotated, form, CONSTANTS).values, density, atol=1e-12)
    assert np.all(psi.density >= 0.0)
