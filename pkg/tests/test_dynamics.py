"""Tests for potentials, initial states, propagators and closed-form references."""

import os
import sys

import numpy as np
import pytest
from pydantic import TypeAdapter, ValidationError
from scipy import sparse

sys.path.insert(0, os.path.abspath(os.path.join(os.path.dirname(__file__), "../src")))
from duality_lab.dynamics.potentials import (
    BarrierPotential,
    CustomPotential,
    FreePotential,
    HarmonicPotential,
    PotentialSpec,
    SquareWellPotential,
)
from duality_lab.dynamics.propagators import (
    PropagationMethod,
    PropagatorConfig,
    check_stability,
    hamiltonian_matrix,
    propagate,
)
from duality_lab.dynamics.reference import (
    FreeGaussianReference,
    HarmonicCoherentReference,
    analytic_reference,
    reference_state,
)
from duality_lab.dynamics.states import (
    GaussianState,
    HarmonicEigenState,
    InitialStateSpec,
    PlaneWaveState,
    SuperpositionState,
    SuperpositionTerm,
    build_initial_state,
)
from duality_lab.errors import ConfigurationError, DegenerateInputError, ShapeError
from duality_lab.numerics.grid import Boundary, DerivativeScheme, Grid
from duality_lab.numerics.wavefunction import Wavefunction
from duality_lab.physics.constants import PhysicalConstants
from duality_lab.physics.observables import expectation_energy


@pytest.fixture
def grid():
    return Grid(n=128, x_min=-16.0, x_max=16.0)


@pytest.fixture
def constants():
    return PhysicalConstants()


@pytest.fixture
def ground(grid, constants):
    return build_initial_state(HarmonicEigenState(n=0), grid, constants)


# Potentials


def test_potential_profiles(grid):
    assert np.all(FreePotential().evaluate(grid) == 0.0)
    harmonic = HarmonicPotential(omega=2.0, center=1.0).evaluate(grid)
    assert harmonic[np.argmin(np.abs(grid.x - 1.0))] == pytest.approx(0.0, abs=1e-12)
    assert harmonic[0] == pytest.approx(0.5 * 4.0 * 17.0**2)
    well = SquareWellPotential(depth=3.0, width=2.0).evaluate(grid)
    assert well.min() == -3.0 and well[0] == 0.0
    barrier = BarrierPotential(height=5.0, width=1.0, center=2.0).evaluate(grid)
    assert barrier.max() == 5.0 and barrier[np.argmin(np.abs(grid.x))] == 0.0


def test_potential_mass_dependence(grid):
    heavy = PhysicalConstants(mass=2.0)
    light = HarmonicPotential().evaluate(grid)
    np.testing.assert_allclose(HarmonicPotential().evaluate(grid, heavy), 2.0 * light)


def test_custom_potential_length_must_match(grid):
    with pytest.raises(ShapeError):
        CustomPotential(values=(0.0,) * 10).evaluate(grid)
    values = tuple(float(v) for v in np.linspace(0.0, 1.0, grid.n))
    np.testing.assert_allclose(CustomPotential(values=values).evaluate(grid), values)


def test_potential_spec_discriminates_on_kind():
    adapter = TypeAdapter(PotentialSpec)
    assert isinstance(adapter.validate_python({"kind": "harmonic", "omega": 2.0}), HarmonicPotential)
    assert isinstance(adapter.validate_python({"kind": "free"}), FreePotential)
    with pytest.raises(ValidationError):
        adapter.validate_python({"kind": "time_dependent_kick"})


def test_potentials_are_static_only():
    with pytest.raises(ValidationError):
        HarmonicPotential(time_dependence="driven")


# Initial states


def test_state_spec_discriminates_on_kind(grid, constants):
    spec = TypeAdapter(InitialStateSpec).validate_python({"kind": "gaussian", "sigma": 1.0, "k0": 0.5})
    psi = build_initial_state(spec, grid, constants)
    assert psi.norm_sq() == pytest.approx(1.0, abs=1e-12)


def test_plane_wave_needs_commensurate_periodic_box(grid, constants):
    with pytest.raises(ConfigurationError):
        build_initial_state(PlaneWaveState(k=1.0), grid, constants)
    vanishing = Grid(n=129, x_min=-16.0, x_max=16.0, boundary=Boundary.VANISHING)
    with pytest.raises(ConfigurationError):
        build_initial_state(PlaneWaveState(k=2.0 * np.pi / 32.0), vanishing, constants)
    psi = build_initial_state(PlaneWaveState(k=2.0 * np.pi / 32.0), grid, constants)
    np.testing.assert_allclose(psi.density, 1.0 / 32.0)


def test_gaussian_must_be_resolved_and_supported(grid, constants):
    with pytest.raises(ConfigurationError):
        build_initial_state(GaussianState(sigma=0.5), grid, constants)
    with pytest.raises(ConfigurationError):
        build_initial_state(GaussianState(x0=14.0, sigma=1.0), grid, constants)


def test_superposition_is_normalized(grid, constants):
    spec = SuperpositionState(
        terms=[
            SuperpositionTerm(state=HarmonicEigenState(n=0)),
            SuperpositionTerm(coeff_im=1.0, state=HarmonicEigenState(n=1)),
        ]
    )
    psi = build_initial_state(spec, grid, constants)
    assert psi.norm_sq() == pytest.approx(1.0, abs=1e-12)
    ground = build_initial_state(HarmonicEigenState(n=0), grid, constants)
    assert abs(ground.inner(psi)) ** 2 == pytest.approx(0.5, abs=1e-12)


# Propagators


def test_propagator_config_validation():
    with pytest.raises(ValidationError):
        PropagatorConfig(dt=1e-3, steps=10, save_every=3)
    with pytest.raises(ValidationError):
        PropagatorConfig(dt=1e-3, steps=4, save_every=4)
    with pytest.raises(ValidationError):
        PropagatorConfig(dt=0.0, steps=4)
    config = PropagatorConfig(dt=1e-3, steps=10, save_every=5)
    assert config.frame_dt == pytest.approx(5e-3)
    assert config.duration == pytest.approx(1e-2)


def test_hamiltonian_matrix_is_hermitian(grid, constants):
    potential_values = HarmonicPotential().evaluate(grid)
    for scheme in (DerivativeScheme.SPECTRAL, DerivativeScheme.CENTRAL_FD4):
        hamiltonian = hamiltonian_matrix(grid, potential_values, constants, scheme)
        if sparse.issparse(hamiltonian):
            hamiltonian = hamiltonian.toarray()
        np.testing.assert_allclose(hamiltonian, hamiltonian.conj().T, atol=1e-10)


def test_fd4_hamiltonian_is_sparse_and_matches_stencils(constants):
    grid = Grid(n=257, x_min=-10.0, x_max=10.0, boundary=Boundary.VANISHING)
    psi = build_initial_state(HarmonicEigenState(n=1, center=0.5), grid, constants)
    potential_values = HarmonicPotential().evaluate(grid)
    hamiltonian = hamiltonian_matrix(grid, potential_values, constants)
    assert sparse.issparse(hamiltonian)
    assert hamiltonian.nnz < 6 * grid.n
    expected = -constants.kinetic_prefactor * grid.diff2(psi.values) + potential_values * psi.values
    np.testing.assert_allclose(hamiltonian @ psi.values, expected, atol=1e-10)


def test_crank_nicolson_eigenstate_rotates_by_cayley_phase(ground, constants):
    dt = 1e-3
    traj = propagate(ground, HarmonicPotential(), PropagatorConfig(dt=dt, steps=4), constants)
    theta = 2.0 * np.arctan(0.5 * dt * 0.5)
    for j, frame in enumerate(traj):
        np.testing.assert_allclose(frame.values, np.exp(-1j * j * theta) * ground.values, atol=1e-12)


@pytest.mark.parametrize("method", list(PropagationMethod))
def test_propagation_conserves_norm(method, grid, constants):
    psi0 = build_initial_state(HarmonicEigenState(n=0, center=1.0), grid, constants)
    config = PropagatorConfig(method=method, dt=2e-3, steps=50, save_every=5)
    traj = propagate(psi0, HarmonicPotential(), config, constants)
    assert len(traj) == 11
    assert traj.dt == pytest.approx(1e-2)
    assert traj.metadata["step_dt"] == 2e-3
    assert traj.metadata["method"] == method.value
    for frame in traj:
        assert abs(frame.norm_sq() - 1.0) < 1e-12


def test_crank_nicolson_long_run_conserves_norm_and_energy(grid, constants):
    psi0 = build_initial_state(HarmonicEigenState(n=0, center=1.0), grid, constants)
    potential = HarmonicPotential()
    traj = propagate(psi0, potential, PropagatorConfig(dt=1e-3, steps=1000, save_every=100), constants)
    energies = [expectation_energy(frame, potential, constants) for frame in traj]
    for frame in traj:
        assert abs(frame.norm_sq() - 1.0) <= 1e-9
    assert max(energies) - min(energies) <= 1e-8
    assert energies[0] == pytest.approx(1.0, abs=1e-10)


def test_crank_nicolson_agrees_with_split_step(grid, constants):
    psi0 = build_initial_state(HarmonicEigenState(n=0, center=1.0), grid, constants)
    results = []
    for method in PropagationMethod:
        config = PropagatorConfig(method=method, dt=1e-3, steps=100)
        results.append(propagate(psi0, HarmonicPotential(), config, constants)[-1])
    difference = results[0].values - results[1].values
    assert np.sqrt(grid.integrate(np.abs(difference) ** 2).real) < 1e-6


def test_free_gaussian_matches_closed_form(grid, constants):
    reference = FreeGaussianReference(sigma=1.0, k0=1.0)
    psi0 = build_initial_state(GaussianState(sigma=1.0, k0=1.0), grid, constants)
    traj = propagate(psi0, FreePotential(), PropagatorConfig(dt=1e-3, steps=20), constants)
    exact = reference_state(reference, grid, 0.02, constants)
    np.testing.assert_allclose(traj[-1].values, exact.values, atol=1e-5)


def test_split_step_matches_coherent_reference(grid, constants):
    reference = HarmonicCoherentReference(x0=1.0)
    psi0 = reference_state(reference, grid, 0.0, constants)
    config = PropagatorConfig(method=PropagationMethod.SPLIT_STEP_SPECTRAL, dt=1e-3, steps=100)
    traj = propagate(psi0, HarmonicPotential(), config, constants)
    exact = reference_state(reference, grid, 0.1, constants)
    np.testing.assert_allclose(traj[-1].values, exact.values, atol=1e-5)


def test_stability_guard(grid, constants, ground):
    with pytest.raises(ConfigurationError):
        check_stability(0.1, np.array([10.0]))
    with pytest.raises(ConfigurationError):
        propagate(ground, HarmonicPotential(), PropagatorConfig(dt=0.01, steps=4), constants)


def test_split_step_configuration_errors(constants):
    vanishing = Grid(n=129, x_min=-16.0, x_max=16.0, boundary=Boundary.VANISHING)
    psi0 = build_initial_state(HarmonicEigenState(n=0), vanishing, constants)
    config = PropagatorConfig(method=PropagationMethod.SPLIT_STEP_SPECTRAL, dt=1e-3, steps=4)
    with pytest.raises(ConfigurationError):
        propagate(psi0, HarmonicPotential(), config, constants)

    periodic = Grid(n=128, x_min=-16.0, x_max=16.0)
    psi0 = build_initial_state(HarmonicEigenState(n=0), periodic, constants)
    with pytest.raises(ConfigurationError):
        propagate(psi0, HarmonicPotential(), config, constants, scheme=DerivativeScheme.CENTRAL_FD4)


def test_unnormalized_initial_state_is_rejected(ground, constants):
    with pytest.raises(DegenerateInputError):
        propagate(ground.scaled(1.1), HarmonicPotential(), PropagatorConfig(dt=1e-3, steps=4), constants)


def test_crank_nicolson_on_vanishing_grid_uses_fd4(constants):
    grid = Grid(n=257, x_min=-10.0, x_max=10.0, boundary=Boundary.VANISHING)
    psi0 = build_initial_state(HarmonicEigenState(n=0, center=0.5), grid, constants)
    traj = propagate(psi0, HarmonicPotential(), PropagatorConfig(dt=1e-3, steps=6), constants)
    assert traj.metadata["scheme"] == "central_fd4"
    assert traj.metadata["spatial_order"] == 4
    assert abs(traj[-1].norm_sq() - 1.0) < 1e-6


# References


def test_free_gaussian_width_grows():
    reference = FreeGaussianReference(sigma=1.0)
    assert reference.width(0.0) == 1.0
    assert reference.width(2.0) == pytest.approx(np.sqrt(2.0))


def test_coherent_reference_orbit():
    reference = HarmonicCoherentReference(x0=2.0, omega=1.0)
    assert reference.center(np.pi) == pytest.approx(-2.0)
    assert reference.momentum(0.5 * np.pi) == pytest.approx(-2.0)


def test_coherent_reference_mean_position(grid, constants):
    reference = HarmonicCoherentReference(x0=1.5)
    psi = reference_state(reference, grid, 1.0, constants)
    mean_x = grid.integrate(grid.x * psi.density).real
    assert psi.norm_sq() == pytest.approx(1.0, abs=1e-12)
    assert mean_x == pytest.approx(1.5 * np.cos(1.0), abs=1e-10)


def test_analytic_reference_requires_uniform_times(grid, constants):
    reference = FreeGaussianReference(sigma=1.0)
    with pytest.raises(ConfigurationError):
        analytic_reference(reference, grid, [0.0, 0.1], constants)
    with pytest.raises(ConfigurationError):
        analytic_reference(reference, grid, [0.0, 0.1, 0.3], constants)
    traj = analytic_reference(reference, grid, [0.0, 0.1, 0.2], constants)
    assert traj.metadata["method"] == "analytic"
    assert isinstance(traj[0], Wavefunction)
