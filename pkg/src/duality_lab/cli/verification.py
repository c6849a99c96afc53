"""Verification checks and the acceptance suites.

Every check carries the tolerance it was judged against and a note on where that
tolerance comes from. Failures are data, not exceptions: a report with a failed
check maps to exit code 1.
"""

import json
import math
from enum import Enum
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
import structlog
from pydantic import BaseModel, Field, computed_field

from duality_lab import mutations
from duality_lab.config import Settings, get_settings
from duality_lab.dynamics.potentials import FreePotential, HarmonicPotential, StaticPotential
from duality_lab.dynamics.propagators import PropagationMethod, PropagatorConfig, propagate
from duality_lab.dynamics.states import (
    GaussianState,
    HarmonicEigenState,
    PlaneWaveState,
    SuperpositionState,
    SuperpositionTerm,
    build_initial_state,
)
from duality_lab.numerics.grid import Boundary, DerivativeScheme, Grid
from duality_lab.numerics.wavefunction import DEFAULT_NODE_THRESHOLD, Trajectory, Wavefunction, corrupt_frame
from duality_lab.physics.constants import PhysicalConstants
from duality_lab.physics.convergence import ConvergenceTable, spatial_convergence, temporal_convergence
from duality_lab.physics.functionals import (
    FunctionalTag,
    PerturbationDirection,
    clean_frames,
    dual_derivation_discrepancy,
    duality_residual,
    energy_identity_tolerance,
    fd_variation,
    residual_tolerance,
)
from duality_lab.physics.observables import (
    KineticForm,
    energy_identity,
    kinetic_decomposition,
    kinetic_density,
    local_fields,
    mean_momentum,
    momentum_density,
)

logger = structlog.get_logger()

ACCEPTANCE_CRITERIA = ("A1", "A2", "A3", "A4", "A5", "A6")

KINETIC_FORM_TOLERANCE = 1e-10
ENERGY_IDENTITY_TOLERANCE = 1e-6
ENERGY_CONSTANCY_TOLERANCE = 1e-8
DUAL_DERIVATION_TOLERANCE = 1e-10
CORRUPTION_SENSITIVITY = 100.0
HALVING_RATIO = 4.0
HALVING_BAND = 0.5
MOMENTUM_FIELD_TOLERANCE = 1e-12
DECOMPOSITION_TOLERANCE = 1e-8
MOMENTUM_CONSISTENCY_TOLERANCE = 1e-9
NORM_DRIFT_PER_STEP = 1e-12
NORM_DRIFT_FLOOR = 1e-9
FD_RELATIVE_EPSILON = 1e-4
RICHARDSON_EPSILONS = (1e-3, 1e-4, 1e-5)
ORACLE_TAGS = (FunctionalTag.KC, FunctionalTag.VC, FunctionalTag.HC, FunctionalTag.HW, FunctionalTag.SC, FunctionalTag.SW)
WALLED_GRID_POINTS = 257


class Comparison(str, Enum):
    AT_MOST = "<="
    AT_LEAST = ">="


class CheckResult(BaseModel):
    """One measured quantity judged against one tolerance."""

    criterion: str
    name: str
    measured: float
    tolerance: float
    comparison: Comparison = Comparison.AT_MOST
    passed: bool
    provenance: str


def make_check(
    criterion: str,
    name: str,
    measured: float,
    tolerance: float,
    provenance: str,
    comparison: Comparison = Comparison.AT_MOST,
) -> CheckResult:
    measured = float(measured)
    if math.isnan(measured):
        passed = False
    elif comparison is Comparison.AT_MOST:
        passed = measured <= tolerance
    else:
        passed = measured >= tolerance
    if not passed:
        logger.warning("Check failed", criterion=criterion, check=name, measured=measured, tolerance=tolerance)
    return CheckResult(
        criterion=criterion,
        name=name,
        measured=measured,
        tolerance=float(tolerance),
        comparison=comparison,
        passed=passed,
        provenance=provenance,
    )


class VerificationReport(BaseModel):
    suite: str
    seed: int
    mutations: List[str] = Field(default_factory=list)
    checks: List[CheckResult] = Field(default_factory=list)
    convergence: List[dict] = Field(default_factory=list)

    @computed_field
    @property
    def criteria(self) -> Dict[str, bool]:
        """Pass/fail per criterion, each criterion listed once."""
        summary: Dict[str, bool] = {}
        for check in self.checks:
            summary[check.criterion] = summary.get(check.criterion, True) and check.passed
        return dict(sorted(summary.items()))

    @computed_field
    @property
    def passed(self) -> bool:
        return all(check.passed for check in self.checks)

    @property
    def exit_code(self) -> int:
        return 0 if self.passed else 1

    def failed(self) -> List[CheckResult]:
        return [check for check in self.checks if not check.passed]

    def extend(self, checks: Sequence[CheckResult]) -> None:
        self.checks.extend(checks)

    def to_json(self) -> str:
        return json.dumps(self.model_dump(mode="json"), indent=2, sort_keys=True)


# Trajectory-level checks


def _l2(grid: Grid, values: np.ndarray) -> float:
    return float(np.sqrt(grid.integrate(np.abs(values) ** 2).real))


def _interior(traj: Trajectory) -> range:
    return range(1, len(traj) - 1)


def residual_norms(
    traj: Trajectory,
    potential: StaticPotential,
    constants: PhysicalConstants,
    scheme: Optional[DerivativeScheme] = None,
) -> np.ndarray:
    return np.array([duality_residual(traj, j, potential, constants, scheme).norm for j in _interior(traj)])


def duality_residual_check(
    label: str,
    traj: Trajectory,
    potential: StaticPotential,
    constants: PhysicalConstants,
    scheme: Optional[DerivativeScheme] = None,
) -> CheckResult:
    """Worst interior frame of ||i hbar psi_t - H psi|| against its derived bound."""
    worst: Optional[Tuple[float, float, str, int]] = None
    for j in _interior(traj):
        norm = duality_residual(traj, j, potential, constants, scheme).norm
        bound = residual_tolerance(traj, j, potential, constants, scheme)
        if worst is None or norm / bound.value > worst[0] / worst[1]:
            worst = (norm, bound.value, bound.provenance, j)
    norm, tolerance, provenance, frame = worst
    return make_check("A3", f"{label}: duality residual (worst frame {frame})", norm, tolerance, provenance)


def energy_identity_checks(
    label: str,
    traj: Trajectory,
    potential: StaticPotential,
    constants: PhysicalConstants,
    scheme: Optional[DerivativeScheme] = None,
) -> List[CheckResult]:
    wave, corpuscular = [], []
    for j in _interior(traj):
        w, c = energy_identity(traj, j, potential, constants, scheme)
        wave.append(w)
        corpuscular.append(c)
    wave_arr, corp_arr = np.array(wave), np.array(corpuscular)
    derived = energy_identity_tolerance(traj, len(traj) // 2, potential, constants, scheme)

    def spread(series: np.ndarray) -> float:
        return float((series.max() - series.min()) / max(abs(series.mean()), np.finfo(float).tiny))

    return [
        make_check(
            "A4",
            f"{label}: |int H_w - <H>| (max over interior frames)",
            float(np.max(np.abs(wave_arr - corp_arr))),
            ENERGY_IDENTITY_TOLERANCE,
            f"acceptance bound; second-order estimate for this run {derived.value:.3e} ({derived.provenance})",
        ),
        make_check(
            "A4",
            f"{label}: int H_w constant in time (relative spread)",
            spread(wave_arr),
            ENERGY_CONSTANCY_TOLERANCE,
            "static V: the discrete wave energy is a fixed function of the conserved spectral weights",
        ),
        make_check(
            "A4",
            f"{label}: <H> constant in time (relative spread)",
            spread(corp_arr),
            ENERGY_CONSTANCY_TOLERANCE,
            "static V: Crank-Nicolson conserves the discrete energy up to roundoff",
        ),
    ]


def kinetic_forms_check(
    label: str,
    psi: Wavefunction,
    constants: PhysicalConstants,
    scheme: Optional[DerivativeScheme] = None,
    node_threshold: float = DEFAULT_NODE_THRESHOLD,
) -> CheckResult:
    """Spread of the three kinetic-form integrals, including any discarded imaginary part."""
    grid = psi.grid
    scheme = grid.resolve_scheme(scheme)
    fields = [kinetic_density(psi, form, constants, scheme, node_threshold) for form in KineticForm]
    integrals = [field.integral() for field in fields]
    spread = max(abs(a - b) for a in integrals for b in integrals)
    residue = max(field.imag_residue for field in fields)

    tolerance = KINETIC_FORM_TOLERANCE
    provenance = f"forms differ by total derivatives; {grid.quadrature_rule} quadrature, scheme {scheme.value}"
    if scheme is not DerivativeScheme.SPECTRAL:
        third = grid.diff1(grid.diff1(grid.diff1(psi.values, scheme), scheme), scheme)
        discretization = constants.kinetic_prefactor * grid.dx**4 * _l2(grid, third) ** 2
        tolerance += discretization
        provenance += f"; fourth-order stencils add (hbar^2/2m) dx^4 ||psi'''||^2 = {discretization:.3e}"
    return make_check("A2", f"{label}: kinetic forms A/B/C integral spread", max(spread, residue), tolerance, provenance)


def dual_derivation_check(
    label: str,
    traj: Trajectory,
    potential: StaticPotential,
    constants: PhysicalConstants,
    scheme: Optional[DerivativeScheme] = None,
) -> CheckResult:
    worst = max(dual_derivation_discrepancy(traj, j, potential, constants, scheme) for j in _interior(traj))
    return make_check(
        "A5",
        f"{label}: Euler-Lagrange vs duality residual (relative)",
        worst,
        DUAL_DERIVATION_TOLERANCE,
        "factor 1; relative to ||i hbar psi_t|| + ||H psi||; finite-difference grids add (hbar^2/2m)(D1 D1 - D2) psi",
    )


def norm_drift_check(label: str, traj: Trajectory) -> CheckResult:
    steps = int(traj.metadata.get("steps", len(traj) - 1))
    drift = max(abs(frame.norm_sq() - traj[0].norm_sq()) for frame in traj)
    tolerance = max(NORM_DRIFT_FLOOR, NORM_DRIFT_PER_STEP * steps)
    return make_check(
        "dynamics",
        f"{label}: norm drift",
        drift,
        tolerance,
        f"unitary propagator: {NORM_DRIFT_PER_STEP:g} per step over {steps} steps, floor {NORM_DRIFT_FLOOR:g}",
    )


def _support_points(psi: Wavefunction, fraction: float = 1e-3) -> np.ndarray:
    magnitude = np.abs(psi.values)
    points = np.flatnonzero(magnitude >= fraction * magnitude.max())
    return points[(points >= 1) & (points <= psi.grid.n - 2)]


def variation_oracle_check(
    tag: FunctionalTag,
    cases: Sequence[Tuple[str, Trajectory, StaticPotential]],
    samples: int,
    rng: np.random.Generator,
    constants: PhysicalConstants,
    scheme: Optional[DerivativeScheme] = None,
) -> CheckResult:
    """Random (frame, point, direction) draws; measured is the worst error in units of the allowed error."""
    worst = 0.0
    draws = 0
    for _, traj, potential in cases:
        frames = clean_frames(tag, traj)
        if not frames:
            continue
        for _ in range(samples):
            frame = int(rng.choice(frames))
            psi = traj[frame]
            point = int(rng.choice(_support_points(psi)))
            direction = PerturbationDirection.REAL if rng.random() < 0.5 else PerturbationDirection.IMAGINARY
            epsilon = FD_RELATIVE_EPSILON * float(np.max(np.abs(psi.values)))
            result = fd_variation(tag, traj, (frame, point), epsilon, direction, potential, constants, scheme)
            worst = max(worst, result.abs_error / result.allowed_error)
            draws += 1
    labels = ", ".join(label for label, _, _ in cases)
    return make_check(
        "A1",
        f"{tag.value}: analytic gradient vs central difference ({draws} draws)",
        worst if draws else float("nan"),
        1.0,
        f"error / max(1e-6 relative, 1e-9 absolute); states: {labels}; epsilon {FD_RELATIVE_EPSILON:g} x peak |psi|",
    )


def richardson_check(
    tag: FunctionalTag,
    label: str,
    traj: Trajectory,
    potential: StaticPotential,
    constants: PhysicalConstants,
    scheme: Optional[DerivativeScheme] = None,
) -> CheckResult:
    frames = clean_frames(tag, traj)
    frame = frames[len(frames) // 2]
    psi = traj[frame]
    point = int(np.argmax(np.abs(psi.values)))
    scale = float(np.max(np.abs(psi.values)))
    results = [
        fd_variation(tag, traj, (frame, point), factor * scale, PerturbationDirection.REAL, potential, constants, scheme)
        for factor in RICHARDSON_EPSILONS
    ]
    worst = max(result.abs_error / result.allowed_error for result in results)
    errors = ", ".join(f"{result.abs_error:.2e}" for result in results)
    return make_check(
        "A1",
        f"{tag.value}: Richardson sequence on {label}",
        worst,
        1.0,
        f"quadratic functional, O(eps^2) truncation vanishes and the error sits at the roundoff floor; "
        f"errors for eps/scale {RICHARDSON_EPSILONS}: {errors}",
    )


def boundary_term_check(
    label: str,
    traj: Trajectory,
    potential: StaticPotential,
    constants: PhysicalConstants,
    scheme: Optional[DerivativeScheme] = None,
) -> CheckResult:
    """A first-frame perturbation of H_w must expose the dropped time-boundary terms."""
    psi = traj[0]
    point = int(np.argmax(np.abs(psi.values)))
    epsilon = FD_RELATIVE_EPSILON * float(np.max(np.abs(psi.values)))
    result = fd_variation(
        FunctionalTag.HW, traj, (0, point), epsilon, PerturbationDirection.IMAGINARY, potential, constants, scheme
    )
    detected = result.abs_error / result.allowed_error if result.edge_site else 0.0
    return make_check(
        "A1",
        f"Hw: first-frame perturbation flagged as edge site ({label})",
        detected,
        1.0,
        "the interior-frame variation drops time-boundary terms, so the edge mismatch must exceed the allowed error",
        Comparison.AT_LEAST,
    )


# Acceptance suites


class Workbench:
    """States, potentials and propagated trajectories shared by the suite checks."""

    def __init__(self, settings: Settings, rng: np.random.Generator):
        self.settings = settings
        self.rng = rng
        self.constants = PhysicalConstants()
        self.grid = Grid(
            n=settings.verify_grid_points,
            x_min=-16.0,
            x_max=16.0,
            boundary=Boundary.PERIODIC,
            decay_tolerance=settings.decay_tolerance,
        )
        self.node_threshold = settings.node_threshold
        self.dt = settings.verify_dt
        self._cache: Dict[Tuple[str, float, int], Tuple[Trajectory, StaticPotential]] = {}

    def problem(self, label: str) -> Tuple[Wavefunction, StaticPotential]:
        if label == "harmonic ground":
            spec, potential = HarmonicEigenState(n=0), HarmonicPotential()
        elif label == "coherent state":
            spec, potential = HarmonicEigenState(n=0, center=1.0), HarmonicPotential()
        elif label == "free gaussian":
            spec, potential = GaussianState(sigma=1.0, k0=1.0), FreePotential()
        else:
            raise KeyError(label)
        return build_initial_state(spec, self.grid, self.constants), potential

    def solution(self, label: str, dt: Optional[float] = None, steps: int = 20) -> Tuple[Trajectory, StaticPotential]:
        dt = dt or self.dt
        key = (label, dt, steps)
        if key not in self._cache:
            psi0, potential = self.problem(label)
            config = PropagatorConfig(method=PropagationMethod.CRANK_NICOLSON, dt=dt, steps=steps)
            self._cache[key] = (propagate(psi0, potential, config, self.constants), potential)
        return self._cache[key]

    def walled_solution(self, steps: int = 8) -> Tuple[Trajectory, StaticPotential]:
        """Coherent state between vanishing walls: fourth-order differences and Simpson weights."""
        grid = Grid(
            n=WALLED_GRID_POINTS,
            x_min=-10.0,
            x_max=10.0,
            boundary=Boundary.VANISHING,
            decay_tolerance=self.settings.decay_tolerance,
        )
        psi0 = build_initial_state(HarmonicEigenState(n=0, center=0.5), grid, self.constants)
        config = PropagatorConfig(method=PropagationMethod.CRANK_NICOLSON, dt=self.dt, steps=steps)
        return propagate(psi0, HarmonicPotential(), config, self.constants), HarmonicPotential()

    def plane_wave_k(self, cycles: int = 2) -> float:
        return 2.0 * np.pi * cycles / self.grid.length

    def random_smooth_state(self) -> Wavefunction:
        terms = []
        for _ in range(int(self.rng.integers(2, 4))):
            gaussian = GaussianState(
                x0=float(self.rng.uniform(-2.0, 2.0)),
                sigma=float(self.rng.uniform(0.6, 1.2)),
                k0=float(self.rng.uniform(-2.0, 2.0)),
            )
            coefficient = self.rng.normal(size=2)
            terms.append(SuperpositionTerm(coeff_re=float(coefficient[0]), coeff_im=float(coefficient[1]), state=gaussian))
        return build_initial_state(SuperpositionState(terms=terms), self.grid, self.constants)

    def static_states(self) -> List[Tuple[str, Wavefunction]]:
        states = [
            ("plane wave", build_initial_state(PlaneWaveState(k=self.plane_wave_k()), self.grid, self.constants)),
            ("gaussian", build_initial_state(GaussianState(sigma=1.0, k0=1.0), self.grid, self.constants)),
        ]
        for level in range(3):
            states.append((f"eigenstate n={level}", build_initial_state(HarmonicEigenState(n=level), self.grid, self.constants)))
        for index in range(5):
            states.append((f"random state {index}", self.random_smooth_state()))
        return states


SOLUTION_LABELS = ("harmonic ground", "coherent state", "free gaussian")


def check_variation_oracle(bench: Workbench) -> List[CheckResult]:
    """Gradient fidelity, Richardson behaviour and time-boundary hygiene."""
    cases = [(label, *bench.solution(label, steps=8)) for label in SOLUTION_LABELS]
    cases.append(("coherent state, vanishing walls", *bench.walled_solution()))
    checks = [
        variation_oracle_check(tag, cases, bench.settings.fd_samples, bench.rng, bench.constants) for tag in ORACLE_TAGS
    ]
    label, traj, potential = cases[1]
    checks.extend(richardson_check(tag, label, traj, potential, bench.constants) for tag in ORACLE_TAGS)
    checks.append(boundary_term_check(label, traj, potential, bench.constants))
    return checks


def check_kinetic_forms(bench: Workbench) -> List[CheckResult]:
    return [
        kinetic_forms_check(label, psi, bench.constants, node_threshold=bench.node_threshold)
        for label, psi in bench.static_states()
    ]


def check_duality_on_solutions(bench: Workbench) -> List[CheckResult]:
    checks = []
    for label in SOLUTION_LABELS:
        traj, potential = bench.solution(label)
        checks.append(duality_residual_check(label, traj, potential, bench.constants))

        half, _ = bench.solution(label, dt=bench.dt / 2.0)
        ratio = residual_norms(traj, potential, bench.constants).max() / residual_norms(half, potential, bench.constants).max()
        checks.append(
            make_check(
                "A3",
                f"{label}: residual ratio under dt halving minus {HALVING_RATIO:g}",
                abs(ratio - HALVING_RATIO),
                HALVING_BAND,
                f"measured ratio {ratio:.4f}; second-order time stepping gives C dt^2",
            )
        )

    traj, potential = bench.solution("harmonic ground")
    baseline = residual_norms(traj, potential, bench.constants).max()
    corrupted = corrupt_frame(traj, len(traj) // 2, 1.01)
    sensitivity = residual_norms(corrupted, potential, bench.constants).max() / baseline
    checks.append(
        make_check(
            "A3",
            "corrupted trajectory: residual over solution baseline",
            sensitivity,
            CORRUPTION_SENSITIVITY,
            f"frame {len(traj) // 2} scaled by 1.01; baseline {baseline:.3e}",
            Comparison.AT_LEAST,
        )
    )
    return checks


def check_energy_identity(bench: Workbench) -> List[CheckResult]:
    checks = []
    for label in SOLUTION_LABELS:
        traj, potential = bench.solution(label)
        checks.extend(energy_identity_checks(label, traj, potential, bench.constants))
    return checks


def check_dual_derivation(bench: Workbench) -> List[CheckResult]:
    checks = []
    for label in SOLUTION_LABELS:
        traj, potential = bench.solution(label)
        checks.append(dual_derivation_check(label, traj, potential, bench.constants))

    traj, potential = bench.solution("coherent state")
    checks.append(dual_derivation_check("corrupted coherent state", corrupt_frame(traj, 5, 1.01), potential, bench.constants))

    frozen = Trajectory(grid=bench.grid, dt=bench.dt, frames=(traj[0],) * 3)
    checks.append(dual_derivation_check("frozen frames", frozen, potential, bench.constants))

    grid = Grid(n=257, x_min=-10.0, x_max=10.0, boundary=Boundary.VANISHING)
    psi0 = build_initial_state(HarmonicEigenState(n=0, center=0.5), grid, bench.constants)
    config = PropagatorConfig(dt=bench.dt, steps=6)
    fd_traj = propagate(psi0, HarmonicPotential(), config, bench.constants, DerivativeScheme.CENTRAL_FD4)
    checks.append(dual_derivation_check("fd4 vanishing grid", fd_traj, HarmonicPotential(), bench.constants))
    return checks


def check_de_broglie_limit(bench: Workbench) -> List[CheckResult]:
    constants = bench.constants
    hbar = constants.hbar
    k = bench.plane_wave_k()
    omega = hbar * k**2 / (2.0 * constants.mass)
    psi0 = build_initial_state(PlaneWaveState(k=k), bench.grid, constants)
    config = PropagatorConfig(method=PropagationMethod.SPLIT_STEP_SPECTRAL, dt=bench.dt, steps=4)
    traj = propagate(psi0, FreePotential(), config, constants)
    fields = local_fields(traj, 2, constants, bench.node_threshold)
    energy_tolerance = hbar * omega * (omega * bench.dt) ** 2 / 6.0 + 1e-11

    checks = [
        make_check(
            "A6",
            "plane wave: max |E_field - hbar omega|",
            float(np.max(np.abs(fields.energy - hbar * omega))),
            energy_tolerance,
            "central time difference gives hbar sin(omega dt)/dt; bound hbar omega (omega dt)^2/6 + 1e-11",
        ),
        make_check(
            "A6",
            "plane wave: max |p_field - hbar k|",
            float(np.max(np.abs(fields.momentum - hbar * k))),
            MOMENTUM_FIELD_TOLERANCE,
            "spectral derivative is exact for grid-commensurate modes; roundoff only",
        ),
    ]

    sigma, k0 = 1.0, 1.0
    gaussian = build_initial_state(GaussianState(sigma=sigma, k0=k0), bench.grid, constants)
    parts = kinetic_decomposition(gaussian, constants, node_threshold=bench.node_threshold)
    checks.append(
        make_check(
            "A6",
            "gaussian: flow part vs hbar^2 k0^2 / 2m",
            abs(parts.flow - hbar**2 * k0**2 / (2.0 * constants.mass)),
            DECOMPOSITION_TOLERANCE,
            "closed form for a Gaussian packet; spectral grid",
        )
    )
    checks.append(
        make_check(
            "A6",
            "gaussian: quantum part vs hbar^2 / 8 m sigma^2",
            abs(parts.quantum - hbar**2 / (8.0 * constants.mass * sigma**2)),
            DECOMPOSITION_TOLERANCE,
            "closed form for a Gaussian packet; spectral grid",
        )
    )

    states = bench.static_states()
    coherent, _ = bench.solution("coherent state", steps=8)
    states.append(("coherent state frame", coherent[4]))

    def momentum_gap(psi: Wavefunction) -> float:
        balance = bench.grid.integrate(momentum_density(psi, constants, node_threshold=bench.node_threshold)).real
        return abs(balance - mean_momentum(psi, constants))

    worst = max(momentum_gap(psi) for _, psi in states)
    checks.append(
        make_check(
            "A6",
            f"integral of p R^2 vs Re<p> ({len(states)} states)",
            worst,
            MOMENTUM_CONSISTENCY_TOLERANCE,
            "identical up to masked nodes; masked points carry density below the node threshold",
        )
    )
    return checks


def check_convergence(bench: Workbench) -> Tuple[List[CheckResult], List[ConvergenceTable]]:
    tables = [
        temporal_convergence((4e-3, 2e-3, 1e-3, 5e-4), method=PropagationMethod.CRANK_NICOLSON, constants=bench.constants),
        temporal_convergence((4e-3, 2e-3, 1e-3, 5e-4), method=PropagationMethod.SPLIT_STEP_SPECTRAL, constants=bench.constants),
        spatial_convergence((64, 128, 256, 512), scheme=DerivativeScheme.CENTRAL_FD4, constants=bench.constants),
        spatial_convergence((24, 32, 48, 64), boundary=Boundary.PERIODIC, constants=bench.constants),
    ]
    checks = []
    for table, (expected, band) in zip(tables[:3], ((2.0, 0.25), (2.0, 0.25), (4.0, 0.5))):
        order = table.finest_order
        checks.append(
            make_check(
                "convergence",
                f"{table.name}: observed order vs {expected:g}",
                abs(order - expected) if order is not None else float("nan"),
                band,
                f"finest pair of {table.variable} values; measured order {order}",
            )
        )
    spectral = tables[3]
    checks.append(
        make_check(
            "convergence",
            f"{spectral.name}: finest error",
            spectral.rows[-1].error,
            1e-10,
            "spectral accuracy: error reaches roundoff once the eigenstate is resolved",
        )
    )
    return checks, tables


SUITES = {
    "quick": ("A1", "A2", "A3", "A4"),
    "full": ACCEPTANCE_CRITERIA,
}

_CRITERION_CHECKS = {
    "A1": check_variation_oracle,
    "A2": check_kinetic_forms,
    "A3": check_duality_on_solutions,
    "A4": check_energy_identity,
    "A5": check_dual_derivation,
    "A6": check_de_broglie_limit,
}


def run_suite(
    suite: str,
    seed: Optional[int] = None,
    mutate: Sequence[str] = (),
    settings: Optional[Settings] = None,
) -> VerificationReport:
    """Run an acceptance suite, optionally with injected mutations."""
    if suite not in SUITES:
        raise ValueError(f"unknown suite '{suite}'; choose from {', '.join(SUITES)}")
    settings = settings or get_settings()
    seed = settings.default_seed if seed is None else seed
    report = VerificationReport(suite=suite, seed=seed, mutations=sorted(mutate))

    logger.info("Verification started", suite=suite, seed=seed, mutations=list(mutate))
    with mutations.inject(*mutate):
        bench = Workbench(settings, np.random.default_rng(seed))
        for criterion in SUITES[suite]:
            report.extend(_CRITERION_CHECKS[criterion](bench))
        if suite == "full":
            checks, tables = check_convergence(bench)
            report.extend(checks)
            report.convergence = [table.to_dict() for table in tables]

    logger.info("Verification completed", suite=suite, passed=report.passed, failed=len(report.failed()))
    return report
