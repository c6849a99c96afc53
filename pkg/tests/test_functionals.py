"""Tests for functionals, variations, the duality residual and the FD oracle."""

import os
import sys

import numpy as np
import pytest

sys.path.insert(0, os.path.abspath(os.path.join(os.path.dirname(__file__), "../src")))
from duality_lab import mutations
from duality_lab.dynamics.potentials import HarmonicPotential
from duality_lab.dynamics.propagators import PropagatorConfig, propagate
from duality_lab.dynamics.reference import HarmonicEigenReference, analytic_reference
from duality_lab.dynamics.states import HarmonicEigenState, build_initial_state
from duality_lab.errors import ShapeError, ToleranceUnreliableError
from duality_lab.numerics.grid import Boundary, Grid
from duality_lab.numerics.wavefunction import Trajectory, corrupt_frame
from duality_lab.physics.constants import PhysicalConstants
from duality_lab.physics.functionals import (
    ActionReport,
    FunctionalTag,
    PerturbationDirection,
    actions,
    clean_frames,
    dual_derivation_discrepancy,
    duality_residual,
    energy_identity_tolerance,
    euler_lagrange_residual,
    fd_variation,
    functional_value,
    residual_tolerance,
    richardson_sequence,
    variation_field,
    variation_hc,
    variation_hw,
    variation_kc,
    variation_kc_quadrature,
    variation_sc,
    variation_vc,
)
from duality_lab.physics.observables import energy_identity


@pytest.fixture
def constants():
    return PhysicalConstants()


@pytest.fixture
def potential():
    return HarmonicPotential()


@pytest.fixture
def grid():
    return Grid(n=128, x_min=-16.0, x_max=16.0)


@pytest.fixture
def ground_solution(grid, potential, constants):
    """Nine Crank-Nicolson frames of the oscillator ground state."""
    psi0 = build_initial_state(HarmonicEigenState(n=0), grid, constants)
    return propagate(psi0, potential, PropagatorConfig(dt=1e-3, steps=8), constants)


@pytest.fixture
def coherent_solution(grid, potential, constants):
    psi0 = build_initial_state(HarmonicEigenState(n=0, center=1.0), grid, constants)
    return propagate(psi0, potential, PropagatorConfig(dt=1e-3, steps=8), constants)


def test_action_report_derived_fields():
    report = ActionReport(k_c=2.0, v_c=0.5, h_w=2.4, time_window=(0.0, 1.0))
    assert report.h_c == 2.5
    assert report.s_c == 1.5
    assert report.s_w == pytest.approx(1.6)
    dumped = report.model_dump()
    assert {"h_c", "s_c", "s_w"} <= set(dumped)


def test_actions_on_stationary_state(ground_solution, potential, constants):
    """For the ground state K = V = E/2 at every frame."""
    report = actions(ground_solution, potential, constants)
    window = ground_solution.time_window[1] - ground_solution.time_window[0]
    assert window == pytest.approx(8e-3)
    assert report.k_c == pytest.approx(0.25 * window, rel=1e-9)
    assert report.v_c == pytest.approx(0.25 * window, rel=1e-9)
    assert report.h_w == pytest.approx(0.5 * window, rel=1e-6)
    assert report.s_c == pytest.approx(0.0, abs=1e-12)


def test_functional_value_matches_action_report(coherent_solution, potential, constants):
    report = actions(coherent_solution, potential, constants)
    assert functional_value(FunctionalTag.HC, coherent_solution, potential, constants) == pytest.approx(report.h_c)
    assert functional_value(FunctionalTag.SW, coherent_solution, potential, constants) == pytest.approx(report.s_w)
    assert functional_value("Vc", coherent_solution, potential, constants) == pytest.approx(report.v_c)


def test_corpuscular_variations_compose(coherent_solution, potential, constants):
    psi = coherent_solution[3]
    kinetic = variation_kc(psi, constants)
    potential_part = variation_vc(psi, potential, constants)
    np.testing.assert_allclose(variation_hc(psi, potential, constants), kinetic + potential_part)
    np.testing.assert_allclose(variation_sc(psi, potential, constants), kinetic - potential_part)


def test_variation_field_covers_interior_frames(coherent_solution, potential, constants):
    field = variation_field(FunctionalTag.HW, coherent_solution, potential, constants)
    assert field.values.shape == (len(coherent_solution) - 2, coherent_solution.grid.n)
    np.testing.assert_allclose(field.times, coherent_solution.times[1:-1])
    np.testing.assert_allclose(field.values[0], variation_hw(coherent_solution, 1, constants))


def test_variation_hw_rejects_end_frames(coherent_solution, constants):
    with pytest.raises(ShapeError):
        variation_hw(coherent_solution, 0, constants)


def test_duality_residual_of_solution_is_within_derived_tolerance(coherent_solution, potential, constants):
    for frame in range(1, len(coherent_solution) - 1):
        residual = duality_residual(coherent_solution, frame, potential, constants)
        tolerance = residual_tolerance(coherent_solution, frame, potential, constants)
        assert residual.norm <= tolerance.value
        assert "time order 2" in tolerance.provenance


def test_duality_residual_detects_corrupted_frame(coherent_solution, potential, constants):
    corrupted = corrupt_frame(coherent_solution, 4, 1.01)
    clean = duality_residual(coherent_solution, 4, potential, constants).norm
    broken = duality_residual(corrupted, 4, potential, constants).norm
    assert broken > 100.0 * clean


def test_energy_identity_within_derived_tolerance(coherent_solution, potential, constants):
    wave, corpuscular = energy_identity(coherent_solution, 4, potential, constants)
    tolerance = energy_identity_tolerance(coherent_solution, 4, potential, constants)
    assert abs(wave - corpuscular) <= tolerance.value


def test_euler_lagrange_residual_matches_duality_residual(coherent_solution, potential, constants):
    el = euler_lagrange_residual(coherent_solution, 4, potential, constants)
    duality = duality_residual(coherent_solution, 4, potential, constants).residual
    assert np.max(np.abs(el - duality)) < 1e-9
    assert dual_derivation_discrepancy(coherent_solution, 4, potential, constants) < 1e-10


def test_dual_derivation_on_non_solution(coherent_solution, potential, constants):
    """The identity between the two derivations holds for any trajectory."""
    frozen = coherent_solution.with_frames((coherent_solution[0],) * 3)
    assert dual_derivation_discrepancy(frozen, 1, potential, constants) < 1e-10


def test_clean_frames(coherent_solution):
    assert clean_frames(FunctionalTag.HW, coherent_solution) == [3, 4, 5]
    assert clean_frames(FunctionalTag.KC, coherent_solution) == list(range(9))


@pytest.mark.parametrize("tag", list(FunctionalTag))
@pytest.mark.parametrize("direction", list(PerturbationDirection))
def test_fd_oracle_matches_analytic_variation(tag, direction, coherent_solution, potential, constants):
    frame = 4
    point = 70
    epsilon = 1e-4 * float(np.max(np.abs(coherent_solution[frame].values)))
    result = fd_variation(tag, coherent_solution, (frame, point), epsilon, direction, potential, constants)
    assert not result.edge_site
    assert result.passed, (result.estimate, result.predicted)


def test_fd_oracle_flags_time_boundary_sites(ground_solution, potential, constants):
    epsilon = 1e-4 * float(np.max(np.abs(ground_solution[0].values)))
    result = fd_variation(
        FunctionalTag.HW, ground_solution, (0, 64), epsilon, PerturbationDirection.IMAGINARY, potential, constants
    )
    assert result.edge_site
    assert not result.passed


def test_fd_oracle_rejects_unreliable_epsilon(coherent_solution, potential, constants):
    with pytest.raises(ToleranceUnreliableError):
        fd_variation(FunctionalTag.KC, coherent_solution, (4, 64), 1.0, "real", potential, constants)
    with pytest.raises(ToleranceUnreliableError):
        fd_variation(FunctionalTag.KC, coherent_solution, (4, 64), 1e-12, "real", potential, constants)


def test_fd_oracle_rejects_boundary_points(coherent_solution, potential, constants):
    with pytest.raises(ShapeError):
        fd_variation(FunctionalTag.KC, coherent_solution, (4, 0), 1e-5, "real", potential, constants)


def test_richardson_sequence_is_stable(coherent_solution, potential, constants):
    scale = float(np.max(np.abs(coherent_solution[4].values)))
    results = richardson_sequence(
        FunctionalTag.HC,
        coherent_solution,
        (4, 60),
        [1e-3 * scale, 1e-4 * scale, 1e-5 * scale],
        PerturbationDirection.REAL,
        potential,
        constants,
    )
    assert len(results) == 3
    assert all(result.passed for result in results)


def test_hw_sign_mutation_breaks_duality(coherent_solution, potential, constants):
    clean = duality_residual(coherent_solution, 4, potential, constants).norm
    with mutations.inject("hw_sign"):
        flipped = duality_residual(coherent_solution, 4, potential, constants).norm
    assert flipped > 1e3 * clean


def test_kinetic_factor_mutation_doubles_kinetic_variation(coherent_solution, constants):
    psi = coherent_solution[4]
    clean = variation_kc(psi, constants)
    with mutations.inject("kinetic_factor"):
        doubled = variation_kc(psi, constants)
    np.testing.assert_allclose(doubled, 2.0 * clean)


def test_analytic_eigenstate_residual_is_small(grid, potential, constants):
    traj = analytic_reference(HarmonicEigenReference(n=0), grid, [0.0, 1e-3, 2e-3], constants)
    residual = duality_residual(traj, 1, potential, constants)
    assert residual.norm < 1e-7


# Vanishing grids: Simpson weights and one-sided stencils


@pytest.fixture
def walled_grid():
    """Odd point count, so quadrature is Simpson with alternating 4/3, 2/3 weights."""
    return Grid(n=257, x_min=-10.0, x_max=10.0, boundary=Boundary.VANISHING)


@pytest.fixture
def walled_solution(walled_grid, potential, constants):
    psi0 = build_initial_state(HarmonicEigenState(n=0, center=0.5), walled_grid, constants)
    return propagate(psi0, potential, PropagatorConfig(dt=1e-3, steps=8), constants)


def test_quadrature_kinetic_gradient_reduces_to_plain_on_periodic_grid(coherent_solution, constants):
    psi = coherent_solution[4]
    np.testing.assert_array_equal(variation_kc_quadrature(psi, constants), variation_kc(psi, constants))


def test_quadrature_kinetic_gradient_is_self_adjoint_under_simpson_weights(walled_solution, constants):
    grid = walled_solution.grid
    psi = walled_solution[4]
    rng = np.random.default_rng(11)
    bump = np.zeros(grid.n, dtype=complex)
    bump[100:160] = rng.normal(size=60) + 1j * rng.normal(size=60)
    plain = variation_kc(psi, constants)
    consistent = variation_kc_quadrature(psi, constants)
    assert np.max(np.abs(consistent - plain)) > 1e-3 * np.max(np.abs(plain))

    # d/de K_c(psi + e bump) at e = 0, computed from the discrete functional itself
    def kinetic(values):
        return grid.integrate(np.conj(values) * (-constants.kinetic_prefactor) * grid.diff2(values)).real

    epsilon = 1e-4
    slope = (kinetic(psi.values + epsilon * bump) - kinetic(psi.values - epsilon * bump)) / (2.0 * epsilon)
    predicted = 2.0 * grid.integrate(np.conj(bump) * consistent).real
    assert slope == pytest.approx(predicted, rel=1e-6)


@pytest.mark.parametrize("tag", list(FunctionalTag))
@pytest.mark.parametrize("direction", list(PerturbationDirection))
@pytest.mark.parametrize("point", [128, 129, 140])
def test_fd_oracle_on_simpson_grid(tag, direction, point, walled_solution, potential, constants):
    frame = 4
    epsilon = 1e-4 * float(np.max(np.abs(walled_solution[frame].values)))
    result = fd_variation(tag, walled_solution, (frame, point), epsilon, direction, potential, constants)
    assert not result.edge_site
    assert result.passed, (result.estimate, result.predicted)


def test_euler_lagrange_residual_of_frozen_frames_is_minus_h_psi(grid, potential, constants):
    psi = build_initial_state(HarmonicEigenState(n=1, center=0.5), grid, constants)
    frozen = Trajectory(grid, 1e-3, (psi,) * 3)
    residual = euler_lagrange_residual(frozen, 1, potential, constants)
    np.testing.assert_allclose(residual, -variation_hc(psi, potential, constants), atol=1e-10)
