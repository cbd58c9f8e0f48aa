"""
raywave - Run Configuration
YAML run files validated by pydantic, with diagnostics anchored to the line
of the offending key.
"""

import math
from dataclasses import dataclass
from pathlib import Path
from typing import Annotated, Any, List, Literal, Optional, Tuple, Union

import yaml
from pydantic import (
    BaseModel,
    ConfigDict,
    Field,
    ValidationError,
    field_validator,
    model_validator,
)

from src.core.waves.errors import ConfigError
from src.core.waves.fields import GridSpec
from src.core.waves.sources import ScaleParams, SpatialSource, TemporalSource
from src.core.waves.velocity import (
    ConstantVelocity,
    GaussianBumpVelocity,
    VelocityField,
    gaussian_lens,
    load_velocity_table,
)

Mode = Literal["asymptotic", "oracle", "compare", "profile", "rays"]
MODES = ("asymptotic", "oracle", "compare", "profile", "rays")


class _Section(BaseModel):
    model_config = ConfigDict(extra="forbid")


# ============================================
# Physics sections
# ============================================

class ScalesSpec(_Section):
    """lambda, mu and optionally c0; c0 defaults to c(0) of the velocity field."""

    model_config = ConfigDict(extra="forbid", populate_by_name=True)

    lam: float = Field(gt=0, alias="lambda")
    mu: float = Field(gt=0)
    c0: Optional[float] = Field(default=None, gt=0)
    nu: float = Field(default=1.0, gt=0)

    def resolve(self, velocity: VelocityField) -> ScaleParams:
        c_origin = velocity.c0
        if self.c0 is not None and abs(self.c0 - c_origin) > 1e-12 * c_origin:
            raise ValueError(f"c0={self.c0:g} disagrees with c(0)={c_origin:g}")
        return ScaleParams(lam=self.lam, mu=self.mu, c0=c_origin, nu=self.nu)


class SourceSpec(_Section):
    spatial: SpatialSource
    temporal: TemporalSource


class ConstantVelocitySpec(_Section):
    kind: Literal["constant"] = "constant"
    c: float = Field(default=1.0, gt=0)

    def build(self, base_dir: Path) -> VelocityField:
        return ConstantVelocity(self.c)


class BumpSpec(_Section):
    center: Tuple[float, float] = (0.0, 0.0)
    amplitude: float
    width: float = Field(gt=0)


class GaussianVelocitySpec(_Section):
    kind: Literal["gaussian"] = "gaussian"
    background: float = Field(default=1.0, gt=0)
    bumps: List[BumpSpec] = Field(default_factory=list)

    def build(self, base_dir: Path) -> VelocityField:
        return GaussianBumpVelocity(
            self.background, [(b.center, b.amplitude, b.width) for b in self.bumps]
        )


class LensVelocitySpec(_Section):
    kind: Literal["lens"] = "lens"
    depth: float = Field(default=0.3)
    center: Tuple[float, float] = (0.0, 0.0)
    width: float = Field(default=1.0, gt=0)
    background: float = Field(default=1.0, gt=0)

    def build(self, base_dir: Path) -> VelocityField:
        return gaussian_lens(self.depth, list(self.center), self.width, self.background)


class TableVelocitySpec(_Section):
    kind: Literal["table"] = "table"
    file: str

    def build(self, base_dir: Path) -> VelocityField:
        path = Path(self.file)
        if not path.is_absolute():
            path = base_dir / path
        return load_velocity_table(path)


VelocitySpec = Annotated[
    Union[ConstantVelocitySpec, GaussianVelocitySpec, LensVelocitySpec, TableVelocitySpec],
    Field(discriminator="kind"),
]


# ============================================
# Numerical sections
# ============================================

class RaySpec(_Section):
    psi_count: int = Field(default=512, ge=16)
    tol: float = Field(default=1e-9, gt=0, lt=1e-3)
    method: Literal["adaptive", "fixed"] = "adaptive"
    step: Optional[float] = Field(default=None, gt=0)
    focal_threshold: float = Field(default=1e-3, gt=0, lt=1)

    @model_validator(mode="after")
    def check_step(self) -> "RaySpec":
        if self.method == "fixed" and self.step is None:
            raise ValueError("method 'fixed' needs a step")
        return self


class TransientSpec(_Section):
    psi_count: int = Field(default=512, ge=8)
    mode: Literal["closed_form", "quadrature", "auto"] = "auto"
    # raise when the assembled field keeps an imaginary residue
    check_real: bool = False


class PropagatingSpec(_Section):
    profile_mode: Literal["closed_form", "quadrature", "instantaneous", "auto"] = "auto"
    band_factor: float = Field(default=12.0, gt=0)


class AxisSpec(_Section):
    min: float
    max: float
    count: int = Field(ge=1)

    @model_validator(mode="after")
    def check_order(self) -> "AxisSpec":
        if self.count > 1 and self.max <= self.min:
            raise ValueError("max must exceed min")
        return self

    def values(self) -> List[float]:
        if self.count == 1:
            return [self.min]
        step = (self.max - self.min) / (self.count - 1)
        return [self.min + k * step for k in range(self.count)]


class ProfileSpec(_Section):
    z: AxisSpec
    psi: List[float] = Field(default_factory=lambda: [0.0])
    mode: Literal["closed_form", "quadrature", "auto"] = "auto"
    lambda_sweep: List[float] = Field(default_factory=list)
    include_instantaneous: bool = True

    @field_validator("lambda_sweep")
    @classmethod
    def positive_lambdas(cls, v: List[float]) -> List[float]:
        if any(lam <= 0 for lam in v):
            raise ValueError("lambda values must be positive")
        return v


class OracleSpec(_Section):
    """FD discretization; unset fields are derived from the run."""

    h: float = Field(gt=0)
    dt: Optional[float] = Field(default=None, gt=0)
    cfl: float = Field(default=0.45, gt=0, le=0.5)
    half_width: Optional[float] = Field(default=None, gt=0)
    comparison_radius: Optional[float] = Field(default=None, ge=0)


class OutputSpec(_Section):
    text_export: bool = False


# ============================================
# Top level
# ============================================

class RunConfig(_Section):
    """A complete run: physics, numerics, mode and outputs."""

    mode: Mode
    scales: ScalesSpec
    source: SourceSpec
    velocity: VelocitySpec = Field(default_factory=ConstantVelocitySpec)
    omega_max: float = Field(default=10.0, gt=0)
    grid: Optional[GridSpec] = None
    times: List[float] = Field(default_factory=list)
    rays: RaySpec = Field(default_factory=RaySpec)
    transient: TransientSpec = Field(default_factory=TransientSpec)
    propagating: PropagatingSpec = Field(default_factory=PropagatingSpec)
    profile: Optional[ProfileSpec] = None
    oracle: Optional[OracleSpec] = None
    output: OutputSpec = Field(default_factory=OutputSpec)
    output_dir: Optional[str] = None

    @field_validator("times")
    @classmethod
    def sorted_times(cls, v: List[float]) -> List[float]:
        if any(t < 0 or not math.isfinite(t) for t in v):
            raise ValueError("times must be finite and nonnegative")
        if len(set(v)) != len(v):
            raise ValueError("times must be distinct")
        return sorted(v)

    @model_validator(mode="after")
    def check_mode_requirements(self) -> "RunConfig":
        needs = {
            "asymptotic": ("grid", "times"),
            "oracle": ("grid", "times", "oracle"),
            "compare": ("grid", "times", "oracle"),
            "profile": ("profile",),
            "rays": ("times",),
        }[self.mode]
        for name in needs:
            if getattr(self, name) in (None, []):
                raise ValueError(f"mode '{self.mode}' requires '{name}'")
        if self.mode in ("asymptotic", "compare", "rays") and self.times and self.times[0] <= 0:
            raise ValueError(f"mode '{self.mode}' needs times > 0")
        return self


# ============================================
# Loading with line anchors
# ============================================

def _node_line(root: Optional[yaml.Node], loc: Tuple[Any, ...]) -> Optional[int]:
    """1-based line of the deepest node reachable along ``loc``."""
    if root is None:
        return None
    node = root
    for key in loc:
        child = None
        if isinstance(node, yaml.MappingNode):
            for k, v in node.value:
                if k.value == str(key):
                    child = v
                    break
        elif isinstance(node, yaml.SequenceNode) and isinstance(key, int):
            if 0 <= key < len(node.value):
                child = node.value[key]
        if child is None:
            # discriminator tags and model names appear in loc but not in the file
            if isinstance(key, str) and isinstance(node, yaml.MappingNode) and key not in {
                k.value for k, _ in node.value
            } and _is_structural(key):
                continue
            break
        node = child
    return node.start_mark.line + 1


def _is_structural(key: str) -> bool:
    return key in {"sine", "polynomial", "tabulated", "constant", "gaussian", "lens", "table"} or (
        key[:1].isupper()
    )


def _dotted(loc: Tuple[Any, ...]) -> str:
    parts = [str(p) for p in loc if not (isinstance(p, str) and _is_structural(p))]
    return ".".join(parts) if parts else "<root>"


def parse_run_config(text: str, source: str = "<config>", mode: Optional[str] = None) -> RunConfig:
    """
    Validate YAML text; any failure becomes a ConfigError naming file, line and field.

    ``mode`` (from the command line) takes precedence over a ``mode`` key in the file.
    """
    try:
        root = yaml.compose(text)
        data = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        mark = getattr(exc, "problem_mark", None)
        raise ConfigError(f"YAML syntax: {getattr(exc, 'problem', exc)}", source,
                          mark.line + 1 if mark else None) from exc
    if not isinstance(data, dict):
        raise ConfigError("top level must be a mapping", source, 1)
    if mode is not None:
        data["mode"] = mode
    try:
        return RunConfig.model_validate(data)
    except ValidationError as exc:
        first = exc.errors()[0]
        loc = tuple(first["loc"])
        line = _node_line(root, loc)
        raise ConfigError(f"{_dotted(loc)}: {first['msg']}", source, line) from exc


@dataclass
class LoadedRun:
    """A validated config with its physics built."""

    config: RunConfig
    source: str
    base_dir: Path
    velocity: VelocityField
    scales: ScaleParams


def resolve_run(config: RunConfig, text: str, source: str, base_dir: Path) -> LoadedRun:
    """Build the velocity field and scales; enforce the c0 and omega checks."""
    root = yaml.compose(text)
    try:
        velocity = config.velocity.build(base_dir)
    except (OSError, ValueError) as exc:
        raise ConfigError(f"velocity: {exc}", source, _node_line(root, ("velocity",))) from exc
    try:
        scales = config.scales.resolve(velocity)
    except ValueError as exc:
        raise ConfigError(f"scales.c0: {exc}", source, _node_line(root, ("scales", "c0"))) from exc
    if scales.omega > config.omega_max:
        raise ConfigError(
            f"scales: omega = c0/(lambda mu) = {scales.omega:.6g} exceeds omega_max = {config.omega_max:g}",
            source, _node_line(root, ("scales",)),
        )
    return LoadedRun(config=config, source=source, base_dir=base_dir, velocity=velocity, scales=scales)


def load_run(path: Path, mode: Optional[str] = None) -> LoadedRun:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc.strerror}", str(path)) from exc
    config = parse_run_config(text, str(path), mode)
    return resolve_run(config, text, str(path), path.parent)


def resolved_dump(run: LoadedRun) -> dict:
    """Fully expanded config for the provenance echo."""
    payload = run.config.model_dump(mode="json", by_alias=True)
    payload["scales"]["c0"] = run.scales.c0
    payload["derived"] = {"omega": run.scales.omega, "velocity": run.velocity.describe()}
    return payload
