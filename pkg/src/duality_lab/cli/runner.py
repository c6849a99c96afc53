"""Scenario execution and output files."""

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Optional, Sequence

import numpy as np
import structlog

from duality_lab import mutations
from duality_lab.cli.scenario import ScenarioConfig
from duality_lab.cli.verification import (
    CheckResult,
    VerificationReport,
    dual_derivation_check,
    duality_residual_check,
    energy_identity_checks,
    kinetic_forms_check,
    norm_drift_check,
    variation_oracle_check,
)
from duality_lab.config import Settings, get_settings
from duality_lab.dynamics.propagators import propagate
from duality_lab.dynamics.states import build_initial_state
from duality_lab.numerics.wavefunction import Trajectory, corrupt_frame
from duality_lab.physics.functionals import FunctionalTag, actions, clean_frames, duality_residual
from duality_lab.physics.observables import (
    DensityField,
    DensityForm,
    KineticForm,
    expectation_energy,
    hc_density,
    hw_density,
    kinetic_density,
    local_fields,
    potential_density,
)

logger = structlog.get_logger()

NUMBER_FORMAT = "%.17e"
FD_ORACLE_TAGS = (FunctionalTag.KC, FunctionalTag.VC, FunctionalTag.HC, FunctionalTag.HW)


@dataclass
class RunResult:
    scenario: ScenarioConfig
    seed: int
    output_dir: Path
    report: VerificationReport
    files: List[Path] = field(default_factory=list)


def resolve_output_dir(flag: Optional[str], settings: Optional[Settings] = None) -> Path:
    """``--out`` wins; otherwise DUALITY_LAB_OUTPUT_DIR through the settings, otherwise the default."""
    if flag:
        return Path(flag)
    settings = settings or get_settings()
    return Path(settings.output_dir)


def _header(config: ScenarioConfig, seed: int, lines: Sequence[str]) -> str:
    constants = config.constants
    grid = ", ".join(f"{key}={value}" for key, value in config.grid.describe().items())
    return "\n".join(
        [
            f"scenario: {config.name}",
            f"seed: {seed}",
            f"grid: {grid}",
            f"constants: hbar={constants.hbar}, mass={constants.mass}",
            f"scheme: {config.resolved_scheme.value}",
            *lines,
        ]
    )


def _density_field(config: ScenarioConfig, traj: Trajectory, frame_index: int, form: DensityForm) -> DensityField:
    psi = traj[frame_index]
    constants, scheme = config.constants, config.resolved_scheme
    kinetic_forms = {
        DensityForm.KINETIC_A: KineticForm.A,
        DensityForm.KINETIC_B: KineticForm.B,
        DensityForm.KINETIC_C: KineticForm.C,
    }
    if form in kinetic_forms:
        return kinetic_density(psi, kinetic_forms[form], constants, scheme, config.resolved_node_threshold)
    if form is DensityForm.POTENTIAL:
        return potential_density(psi, config.potential, constants)
    if form is DensityForm.TOTAL_WAVE:
        return hw_density(traj, frame_index, constants)
    return hc_density(psi, config.potential, constants, scheme)


def write_field_dumps(config: ScenarioConfig, traj: Trajectory, seed: int, output_dir: Path) -> List[Path]:
    """One file per requested field per sampled frame: columns x and value(s)."""
    fields_dir = output_dir / "fields"
    fields_dir.mkdir(parents=True, exist_ok=True)
    x = traj.grid.x
    written = []
    for frame_index in config.sample_frames():
        t = float(traj.times[frame_index])
        for form in config.outputs.density_fields:
            density = _density_field(config, traj, frame_index, form)
            path = fields_dir / f"{form.value}_frame{frame_index:04d}.dat"
            header = _header(
                config,
                seed,
                [
                    f"field: {form.value}",
                    f"frame: {frame_index}",
                    f"t: {t!r}",
                    f"imag_residue: {density.imag_residue!r}",
                    "columns: x value",
                ],
            )
            np.savetxt(path, np.column_stack([x, density.values]), fmt=NUMBER_FORMAT, header=header)
            written.append(path)
        if config.outputs.local_fields:
            threshold = config.resolved_node_threshold
            fields = local_fields(traj, frame_index, config.constants, threshold, config.resolved_scheme)
            path = fields_dir / f"local_fields_frame{frame_index:04d}.dat"
            header = _header(
                config,
                seed,
                [
                    "field: local_fields",
                    f"frame: {frame_index}",
                    f"t: {t!r}",
                    f"node_threshold: {threshold!r}",
                    "columns: x energy momentum node_mask",
                ],
            )
            table = np.column_stack([x, fields.energy, fields.momentum, fields.node_mask.astype(float)])
            np.savetxt(path, table, fmt=NUMBER_FORMAT, header=header)
            written.append(path)
    return written


def write_timeseries(config: ScenarioConfig, traj: Trajectory, seed: int, output_dir: Path) -> Path:
    """Interior frames: t, <K>, <V>, <H>, int H_w, duality residual norm, norm drift."""
    constants, scheme, potential = config.constants, config.resolved_scheme, config.potential
    initial_norm = traj[0].norm_sq()
    rows = []
    for j in range(1, len(traj) - 1):
        psi = traj[j]
        kinetic = kinetic_density(psi, KineticForm.A, constants, scheme).integral()
        potential_energy = potential_density(psi, potential, constants).integral()
        rows.append(
            [
                traj.times[j],
                kinetic,
                potential_energy,
                expectation_energy(psi, potential, constants, scheme),
                hw_density(traj, j, constants).integral(),
                duality_residual(traj, j, potential, constants, scheme).norm,
                abs(psi.norm_sq() - initial_norm),
            ]
        )
    path = output_dir / "timeseries.dat"
    header = _header(config, seed, ["columns: t K V H int_Hw residual_norm norm_drift"])
    np.savetxt(path, np.array(rows), fmt=NUMBER_FORMAT, header=header)
    return path


def write_json(path: Path, payload: Dict) -> Path:
    path.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    return path


def scenario_checks(
    config: ScenarioConfig,
    propagated: Trajectory,
    traj: Trajectory,
    rng: np.random.Generator,
) -> List[CheckResult]:
    """Checks for one run; ``propagated`` is the trajectory before any corruption."""
    constants, scheme, potential, name = config.constants, config.resolved_scheme, config.potential, config.name
    checks = [
        norm_drift_check(name, propagated),
        kinetic_forms_check(name, traj[0], constants, scheme, config.resolved_node_threshold),
    ]
    if config.outputs.residual_norms:
        checks.append(duality_residual_check(name, traj, potential, constants, scheme))
    checks.extend(energy_identity_checks(name, traj, potential, constants, scheme))
    checks.append(dual_derivation_check(name, traj, potential, constants, scheme))

    samples = config.outputs.fd_oracle_samples
    if samples:
        cases = [(name, traj, potential)]
        for tag in FD_ORACLE_TAGS:
            if clean_frames(tag, traj):
                checks.append(variation_oracle_check(tag, cases, samples, rng, constants, scheme))
            else:
                logger.warning("Trajectory too short for the FD oracle", tag=tag.value, frames=len(traj))
    return checks


def run_scenario(
    config: ScenarioConfig,
    output_dir: Path,
    seed: Optional[int] = None,
    mutate: Sequence[str] = (),
    settings: Optional[Settings] = None,
) -> RunResult:
    """Propagate the scenario, write every requested output and the verification report.

    The report is written even when checks fail.
    """
    settings = settings or get_settings()
    config = config.with_settings(settings)
    if seed is None:
        seed = config.seed if config.seed is not None else settings.default_seed
    output_dir = Path(output_dir)
    output_dir.mkdir(parents=True, exist_ok=True)
    logger.info("Scenario run started", scenario=config.name, seed=seed, output_dir=str(output_dir))

    report = VerificationReport(suite=f"run:{config.name}", seed=seed, mutations=sorted(mutate))
    result = RunResult(scenario=config, seed=seed, output_dir=output_dir, report=report)

    with mutations.inject(*mutate):
        psi0 = build_initial_state(config.initial_state, config.grid, config.constants)
        propagated = propagate(
            psi0, config.potential, config.propagator, config.constants, config.resolved_scheme, settings.stability_bound
        )
        traj = propagated
        if config.corruption is not None:
            traj = corrupt_frame(propagated, config.corruption.frame, config.corruption.factor)

        result.files.extend(write_field_dumps(config, traj, seed, output_dir))
        result.files.append(write_timeseries(config, traj, seed, output_dir))
        if config.outputs.action_report:
            action_report = actions(traj, config.potential, config.constants, config.resolved_scheme)
            payload = {"scenario": config.name, "seed": seed, **action_report.model_dump(mode="json")}
            result.files.append(write_json(output_dir / "actions.json", payload))

        rng = np.random.default_rng(seed)
        report.extend(scenario_checks(config, propagated, traj, rng))

    result.files.append(write_json(output_dir / "verification.json", json.loads(report.to_json())))
    logger.info("Scenario run completed", scenario=config.name, passed=report.passed, files=len(result.files))
    return result
