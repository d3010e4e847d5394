"""Experiment configuration: TOML text validated into pydantic models.

Unknown keys anywhere in the file are rejected. Each experiment has a table of
defaults that is deep-merged under the user's file before validation, so a
config may be as short as ``experiment = "plan"``.
"""

from __future__ import annotations

import copy
import hashlib
import json
import math
import sys
from typing import Literal, Optional

from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator, model_validator

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

EXPERIMENTS = (
    "fem-convergence",
    "fem-pollution",
    "pml-accuracy",
    "schwarz-iterations",
    "bem-pollution",
    "plan",
)


class ConfigError(ValueError):
    """Malformed or invalid configuration."""


class _Strict(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)


class PmlConfig(_Strict):
    R_scat: float = 1.5
    R_PML: float = 2.0
    R_tr: float = 3.0
    theta: float = math.pi / 4
    variant: Literal["Multiplied", "Unmultiplied"] = "Multiplied"
    exponent: float = 3.0

    @model_validator(mode="after")
    def _radii(self):
        if not 0 < self.R_scat < self.R_PML < self.R_tr:
            raise ValueError("need 0 < R_scat < R_PML < R_tr")
        if not 0 < self.theta < math.pi / 2:
            raise ValueError("theta must lie in (0, pi/2)")
        return self


class MeshConfig(_Strict):
    obstacle_radius: float = Field(1.0, gt=0)
    h: list[float] = Field(default_factory=lambda: [0.1])
    # obstacle size: h_obstacle if given, else graded from h when grade_obstacle
    h_obstacle: Optional[float] = Field(None, gt=0)
    grade_obstacle: bool = False
    growth: float = Field(1.25, gt=1)

    @field_validator("h")
    @classmethod
    def _positive(cls, v):
        if not v or any(x <= 0 for x in v):
            raise ValueError("mesh sizes must be positive")
        return v


class SweepConfig(_Strict):
    widths: list[float] = Field(default_factory=list)
    thetas: list[float] = Field(default_factory=list)
    floor_width: Optional[float] = None


class PollutionConfig(_Strict):
    hk: float = Field(0.5, gt=0)
    c: float = Field(5.0, gt=0)
    best_approximation: bool = False


class DecompositionConfig(_Strict):
    kind: Literal["Strip", "Checkerboard"] = "Strip"
    n: list[int] = Field(default_factory=lambda: [4])
    delta: float = Field(0.25, gt=0)
    kappa: float = Field(4 * 2 * math.pi / 20, gt=0)
    kappa0: Optional[float] = None
    sigma: float = Field(1.0, gt=0)
    cell_padding: float = Field(0.1, ge=0)
    height: float = Field(1.0, gt=0)
    hk: float = Field(0.5, gt=0)
    max_iters: int = Field(8, ge=1)
    initial: Literal["zero", "random"] = "zero"
    record_wallclock: bool = False


class BemCase(_Strict):
    kind: Literal["Ak", "AkPrime", "Breg", "BregPrime"]
    p: Literal[0, 1] = 0
    ppw: float = Field(gt=0)
    k: list[float]


class BemConfig(_Strict):
    cases: list[BemCase] = Field(default_factory=list)
    direction: float = 0.0


class RhoConfig(_Strict):
    kind: Literal["Nontrapping", "PowerLaw", "UserTable"] = "Nontrapping"
    C: float = Field(1.0, gt=0)
    alpha: float = 1.0
    table: list[tuple[float, float]] = Field(default_factory=list)


class PlanConfig(_Strict):
    rule: Literal["regime", "uniform-CRE", "uniform-kQO", "hp", "bem"] = "regime"
    rows: list[int] = Field(default_factory=lambda: [1])
    c: float = Field(0.5, gt=0)
    eps: float = Field(1.0, gt=0)
    areas: dict[str, float] = Field(default_factory=lambda: {"K": 1.0, "V": 1.0, "I": 1.0, "P": 1.0})


class ExperimentConfig(_Strict):
    experiment: Literal[EXPERIMENTS]
    k: list[float]
    p: list[int] = Field(default_factory=lambda: [1])
    seed: int = 0
    output: str = "out"
    direction: float = 0.0
    pml: PmlConfig = PmlConfig()
    mesh: MeshConfig = MeshConfig()
    sweep: SweepConfig = SweepConfig()
    pollution: PollutionConfig = PollutionConfig()
    decomposition: DecompositionConfig = DecompositionConfig()
    bem: BemConfig = BemConfig()
    rho: RhoConfig = RhoConfig()
    plan: PlanConfig = PlanConfig()

    @field_validator("k")
    @classmethod
    def _k(cls, v):
        if not v or any(x <= 0 for x in v):
            raise ValueError("wavenumbers must be positive")
        return v

    @field_validator("p")
    @classmethod
    def _p(cls, v):
        if not v or any(x < 0 for x in v):
            raise ValueError("degrees must be nonnegative")
        return v

    def config_hash(self) -> str:
        """sha256 of the canonical JSON form; the output directory is not part of it."""
        blob = json.dumps(self.model_dump(mode="json", exclude={"output"}), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode()).hexdigest()


_Q = math.pi / 8

DEFAULTS = {
    "fem-convergence": {
        "k": [10.0], "p": [1, 2],
        "pml": {"R_scat": 1.5, "R_PML": 2.0, "R_tr": 3.0, "theta": math.pi / 4},
        "mesh": {"h": [0.1, 0.0707, 0.05, 0.0354], "grade_obstacle": True},
    },
    "pml-accuracy": {
        "k": [10.0], "p": [3],
        "pml": {"R_scat": 1.25, "R_PML": 1.5, "R_tr": 1.7, "theta": math.pi / 4},
        "mesh": {"h": [0.07], "h_obstacle": 0.005},
        "sweep": {"widths": [0.08, 0.14, 0.2], "thetas": [_Q, 2 * _Q, 3 * _Q], "floor_width": 1.0},
    },
    "fem-pollution": {
        "k": [10.0, 20.0, 40.0], "p": [1],
        "pml": {"R_scat": 2.5, "R_PML": 2.75, "R_tr": 3.25, "theta": math.pi / 4},
        "pollution": {"hk": 0.5, "c": 5.0},
    },
    "schwarz-iterations": {"k": [20.0, 40.0], "p": [1]},
    "bem-pollution": {
        "k": [40.0, 80.0, 160.0], "p": [0],
        "bem": {"cases": [
            {"kind": "AkPrime", "p": 0, "ppw": 10.0, "k": [40.0, 80.0]},
            {"kind": "Breg", "p": 0, "ppw": 6.0, "k": [40.0, 80.0, 160.0]},
        ]},
    },
    "plan": {"k": [10.0], "p": [1]},
}


def _merge(base: dict, over: dict) -> dict:
    out = copy.deepcopy(base)
    for key, val in over.items():
        if isinstance(val, dict) and isinstance(out.get(key), dict):
            out[key] = _merge(out[key], val)
        else:
            out[key] = val
    return out


def build_config(data: dict, experiment: str | None = None, output: str | None = None) -> ExperimentConfig:
    """Merge experiment defaults under ``data`` and validate."""
    if not isinstance(data, dict):
        raise ConfigError("configuration must be a table")
    data = dict(data)
    if experiment is not None:
        data["experiment"] = experiment
    if output is not None:
        data["output"] = output
    name = data.get("experiment")
    if name not in EXPERIMENTS:
        raise ConfigError(f"unknown or missing experiment {name!r}; expected one of {', '.join(EXPERIMENTS)}")
    try:
        return ExperimentConfig.model_validate(_merge(DEFAULTS[name], data))
    except ValidationError as exc:
        raise ConfigError(str(exc)) from exc


def parse_config(text: str, experiment: str | None = None, output: str | None = None) -> ExperimentConfig:
    try:
        data = tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"config is not valid TOML: {exc}") from exc
    return build_config(data, experiment, output)


def load_config(path, experiment: str | None = None, output: str | None = None) -> ExperimentConfig:
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    return parse_config(text, experiment, output)
