"""Scenario files: pydantic models and a YAML loader with line-anchored diagnostics."""

from importlib import resources
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Tuple, Union

import structlog
import yaml
from pydantic import BaseModel, ConfigDict, Field, ValidationError, model_validator

from duality_lab.config import Settings
from duality_lab.dynamics.potentials import PotentialSpec
from duality_lab.dynamics.propagators import PropagationMethod, PropagatorConfig
from duality_lab.dynamics.states import InitialStateSpec
from duality_lab.errors import ConfigurationError
from duality_lab.numerics.grid import Boundary, DerivativeScheme, Grid
from duality_lab.numerics.wavefunction import DEFAULT_NODE_THRESHOLD
from duality_lab.physics.constants import PhysicalConstants
from duality_lab.physics.observables import DensityForm

logger = structlog.get_logger()

SCENARIO_PACKAGE = "duality_lab.scenarios"
SCENARIO_SUFFIXES = (".yaml", ".yml")


class OutputsSpec(BaseModel):
    """Which artifacts a run writes."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    density_fields: List[DensityForm] = Field(default_factory=list)
    local_fields: bool = False
    action_report: bool = True
    residual_norms: bool = True
    fd_oracle_samples: int = Field(default=0, ge=0)
    sample_frames: Optional[List[int]] = Field(
        default=None, description="Interior frames to dump; default first, middle and last interior frame"
    )


class CorruptionSpec(BaseModel):
    """Multiply one stored frame by a complex factor after propagation."""

    model_config = ConfigDict(frozen=True, extra="forbid", allow_inf_nan=False)

    frame: int = Field(..., ge=0)
    factor_re: float = 1.01
    factor_im: float = 0.0

    @property
    def factor(self) -> complex:
        return complex(self.factor_re, self.factor_im)


class ScenarioConfig(BaseModel):
    """A complete, self-contained run description."""

    model_config = ConfigDict(frozen=True, extra="forbid", allow_inf_nan=False)

    name: str = "scenario"
    description: str = ""
    grid: Grid
    constants: PhysicalConstants = Field(default_factory=PhysicalConstants)
    potential: PotentialSpec
    initial_state: InitialStateSpec
    propagator: PropagatorConfig
    scheme: Optional[DerivativeScheme] = None
    node_threshold: Optional[float] = Field(
        default=None, gt=0.0, lt=1.0, description="Node mask threshold; unset falls back to DUALITY_LAB_NODE_THRESHOLD"
    )
    outputs: OutputsSpec = Field(default_factory=OutputsSpec)
    seed: Optional[int] = None
    corruption: Optional[CorruptionSpec] = None

    @model_validator(mode="after")
    def _check_references(self) -> "ScenarioConfig":
        if self.scheme is DerivativeScheme.SPECTRAL and self.grid.boundary is not Boundary.PERIODIC:
            raise ValueError("scheme 'spectral' requires a periodic grid")
        if self.propagator.method is PropagationMethod.SPLIT_STEP_SPECTRAL:
            if self.grid.boundary is not Boundary.PERIODIC:
                raise ValueError("split_step_spectral propagation requires a periodic grid")
            if self.scheme not in (None, DerivativeScheme.SPECTRAL):
                raise ValueError("split_step_spectral propagation requires the spectral scheme")

        frame_count = self.frame_count
        if self.corruption is not None and self.corruption.frame >= frame_count:
            raise ValueError(f"corruption frame {self.corruption.frame} outside the {frame_count} stored frames")
        for frame in self.outputs.sample_frames or []:
            if not 1 <= frame <= frame_count - 2:
                raise ValueError(f"sample frame {frame} is not interior (valid: 1..{frame_count - 2})")
        return self

    def with_settings(self, settings: Settings) -> "ScenarioConfig":
        """Fill values the scenario leaves unset from the application settings."""
        update: Dict[str, Any] = {}
        if self.node_threshold is None:
            update["node_threshold"] = settings.node_threshold
        if "decay_tolerance" not in self.grid.model_fields_set:
            update["grid"] = self.grid.model_copy(update={"decay_tolerance": settings.decay_tolerance})
        return self.model_copy(update=update) if update else self

    @property
    def resolved_node_threshold(self) -> float:
        return DEFAULT_NODE_THRESHOLD if self.node_threshold is None else self.node_threshold

    @property
    def frame_count(self) -> int:
        return self.propagator.steps // self.propagator.save_every + 1

    @property
    def resolved_scheme(self) -> DerivativeScheme:
        return self.grid.resolve_scheme(self.scheme)

    def sample_frames(self) -> List[int]:
        if self.outputs.sample_frames:
            return sorted(set(self.outputs.sample_frames))
        last = self.frame_count - 2
        return sorted({1, (last + 1) // 2, last})


# Loading


def _line_of(node: Optional[yaml.Node], path: Sequence[Union[str, int]]) -> Tuple[int, str]:
    """1-based line of the deepest node reachable along ``path`` and the path walked."""
    if node is None:
        return 1, ""
    walked: List[str] = []
    for key in path:
        child = None
        if isinstance(node, yaml.MappingNode):
            for key_node, value_node in node.value:
                if key_node.value == str(key):
                    child = value_node
                    break
        elif isinstance(node, yaml.SequenceNode) and isinstance(key, int) and key < len(node.value):
            child = node.value[key]
        if child is None:
            # union tags and missing keys are not part of the document
            continue
        node = child
        walked.append(str(key))
    return node.start_mark.line + 1, ".".join(walked)


def _diagnostics(error: ValidationError, root: Optional[yaml.Node]) -> List[str]:
    lines = []
    for item in error.errors():
        location = item.get("loc", ())
        line, _ = _line_of(root, location)
        dotted = ".".join(str(part) for part in location) or "<root>"
        lines.append(f"line {line}: {dotted}: {item.get('msg', 'invalid value')}")
    return lines


def parse_scenario(text: str, source: str = "<string>", default_name: Optional[str] = None) -> ScenarioConfig:
    """Parse and validate a scenario document."""
    try:
        root = yaml.compose(text)
        data = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        mark = getattr(exc, "problem_mark", None)
        line = mark.line + 1 if mark is not None else 1
        problem = getattr(exc, "problem", None) or str(exc)
        raise ConfigurationError(f"{source}: invalid YAML", [f"line {line}: {problem}"]) from exc

    if data is None:
        data = {}
    if not isinstance(data, dict):
        raise ConfigurationError(f"{source}: scenario must be a mapping", [f"line 1: got {type(data).__name__}"])
    if default_name and "name" not in data:
        data["name"] = default_name

    try:
        config = ScenarioConfig.model_validate(data)
    except ValidationError as exc:
        diagnostics = _diagnostics(exc, root)
        logger.error("Scenario validation failed", source=source, errors=len(diagnostics))
        raise ConfigurationError(f"{source}: {len(diagnostics)} validation error(s)", diagnostics) from exc

    logger.info("Scenario loaded", source=source, name=config.name)
    return config


def bundled_scenarios() -> Dict[str, str]:
    """Names of the scenarios shipped with the package, mapped to their file names."""
    found = {}
    for entry in resources.files(SCENARIO_PACKAGE).iterdir():
        if entry.name.endswith(SCENARIO_SUFFIXES):
            found[entry.name.rsplit(".", 1)[0]] = entry.name
    return dict(sorted(found.items()))


def load_scenario(reference: Union[str, Path]) -> ScenarioConfig:
    """Load a scenario from a path, or by the name of a bundled scenario."""
    path = Path(reference)
    if path.is_file():
        return parse_scenario(path.read_text(encoding="utf-8"), source=str(path), default_name=path.stem)

    bundled = bundled_scenarios()
    name = str(reference)
    if name in bundled:
        text = resources.files(SCENARIO_PACKAGE).joinpath(bundled[name]).read_text(encoding="utf-8")
        return parse_scenario(text, source=f"bundled:{name}", default_name=name)

    raise ConfigurationError(
        f"scenario '{reference}' is neither a file nor a bundled scenario",
        [f"bundled scenarios: {', '.join(bundled) or 'none'}"],
    )
