"""
Scenario configuration.

One YAML document describes one run. Nested sections mirror the physics
inputs; the flat shorthand used in quick configs (M, N, lambda, t_max, ...)
is folded into the sections before validation.
"""
import copy
import math
import os
from typing import Any, Dict, List, Literal, Optional

import numpy as np
import pydantic
import yaml
from dotenv import load_dotenv
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from qst.errors import ConfigParseError, OutputError, ValidationError
from qst.physics.krawtchouk_core import ChainSpec
from qst.physics.numeric_oracle import IntegratorSettings
from qst.physics.open_dynamics import EnsembleConfig, ReservoirSpec

load_dotenv()

Mode = Literal["closed", "open", "oracle", "compare", "sweep"]
MODES = ("closed", "open", "oracle", "compare", "sweep")

# flat key -> section holding it
FLAT_KEYS = {
    "M": "chain",
    "omega0": "chain",
    "p": "chain",
    "gamma0": "reservoir",
    "lambda": "reservoir",
    "N": "ensemble",
    "N_values": "ensemble",
    "t_max": "grid",
    "num_points": "grid",
    "dt": "integrator",
    "method": "integrator",
    "modes": "integrator",
    "window": "integrator",
}
KEY_ALIASES = {"lam": "lambda"}
KERNEL_ALIASES = {"eq33": "collective"}

_Section = ConfigDict(extra="forbid", frozen=True)


class ChainSection(BaseModel):
    model_config = _Section

    M: int = Field(ge=2)
    omega0: float = Field(default=1.0, gt=0.0, allow_inf_nan=False)
    p: float = Field(default=0.5, gt=0.0, lt=1.0)


class ReservoirSection(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True, populate_by_name=True)

    gamma0: float = Field(default=1.0, gt=0.0, allow_inf_nan=False)
    lam: float = Field(default=50.0, gt=0.0, allow_inf_nan=False, alias="lambda")


class EnsembleSection(BaseModel):
    model_config = _Section

    N: int = Field(default=1, ge=1)
    N_values: Optional[List[int]] = None

    @field_validator("N_values")
    @classmethod
    def _positive_counts(cls, values):
        if values is not None and any(n < 1 for n in values):
            raise ValueError("N_values must all be ≥ 1")
        if values is not None and len(set(values)) != len(values):
            raise ValueError("N_values must not repeat")
        return values


class GridSection(BaseModel):
    model_config = _Section

    t_max: float = Field(default=math.pi, gt=0.0, allow_inf_nan=False)
    num_points: int = Field(default=201, ge=2)


class IntegratorSection(BaseModel):
    """Oracle settings; method picks the memory-kernel or the discretized-reservoir integrator."""

    model_config = _Section

    dt: float = Field(default=1e-4, gt=0.0, allow_inf_nan=False)
    method: Literal["memory_kernel", "modes"] = "memory_kernel"
    modes: int = Field(default=4000, ge=1)
    # None: 40 lambda
    window: Optional[float] = Field(default=None, gt=0.0)


class OutputSection(BaseModel):
    model_config = _Section

    path: Optional[str] = None


class TransferStateSection(BaseModel):
    """Qubit state theta/phi on the Bloch sphere for the state-fidelity column."""

    model_config = _Section

    theta: float = Field(ge=0.0, le=math.pi)
    phi: float = Field(default=0.0, allow_inf_nan=False)


class ScenarioConfig(BaseModel):
    """A validated run description."""

    model_config = ConfigDict(extra="forbid", frozen=True)

    mode: Mode
    chain: ChainSection
    reservoir: ReservoirSection = ReservoirSection()
    ensemble: EnsembleSection = EnsembleSection()
    grid: GridSection = GridSection()
    integrator: IntegratorSection = IntegratorSection()
    kernel_variant: Literal["collective", "residue", "lorentzian"] = "collective"
    output: OutputSection = OutputSection()
    transfer_state: Optional[TransferStateSection] = None

    @model_validator(mode="before")
    @classmethod
    def _fold_flat_keys(cls, data: Any) -> Any:
        if not isinstance(data, dict):
            return data
        data = dict(data)
        for key in list(data):
            section = FLAT_KEYS.get(KEY_ALIASES.get(key, key))
            if section is None:
                continue
            nested = dict(data.get(section) or {})
            nested[KEY_ALIASES.get(key, key)] = data.pop(key)
            data[section] = nested
        ensemble = data.get("ensemble")
        if isinstance(ensemble, dict) and isinstance(ensemble.get("N"), list):
            ensemble = dict(ensemble)
            if ensemble.get("N_values") is not None:
                raise ValueError("give the sweep counts as N or N_values, not both")
            ensemble["N_values"] = ensemble.pop("N")
            data["ensemble"] = ensemble
        if isinstance(data.get("output"), str):
            data["output"] = {"path": data["output"]}
        return data

    @field_validator("kernel_variant", mode="before")
    @classmethod
    def _kernel_alias(cls, value):
        if isinstance(value, str):
            return KERNEL_ALIASES.get(value, value)
        return value

    @model_validator(mode="after")
    def _sweep_needs_counts(self):
        if self.mode == "sweep" and not self.ensemble.N_values:
            raise ValueError("N_values is required for mode sweep")
        return self

    def chain_spec(self) -> ChainSpec:
        return ChainSpec(M=self.chain.M, omega0=self.chain.omega0, p=self.chain.p)

    def ensemble_config(self, N: Optional[int] = None) -> EnsembleConfig:
        return EnsembleConfig(
            chain=self.chain_spec(),
            reservoir=ReservoirSpec(gamma0=self.reservoir.gamma0, lam=self.reservoir.lam),
            N=self.ensemble.N if N is None else N,
        )

    def integrator_settings(self) -> IntegratorSettings:
        return IntegratorSettings(dt=self.integrator.dt, t_max=self.grid.t_max, num_points=self.grid.num_points)

    def time_grid(self) -> np.ndarray:
        return np.linspace(0.0, self.grid.t_max, self.grid.num_points)


_RELATIONS = {
    "greater_than_equal": ("≥", "ge"),
    "greater_than": (">", "gt"),
    "less_than_equal": ("≤", "le"),
    "less_than": ("<", "lt"),
}


def _describe(error: Dict[str, Any]) -> str:
    """One pydantic error as '<field> must be ...'."""
    names = [str(part) for part in error.get("loc", ()) if isinstance(part, str)]
    field = names[-1] if names else "config"
    kind = error.get("type", "")
    ctx = error.get("ctx") or {}
    if kind in _RELATIONS:
        symbol, key = _RELATIONS[kind]
        return f"{field} must be {symbol} {ctx.get(key)}"
    if kind == "missing":
        return f"{field} is required"
    if kind == "extra_forbidden":
        return f"unknown key {field!r}"
    if kind == "literal_error":
        return f"{field} must be one of {ctx.get('expected')}"
    if kind == "value_error":
        return str(error.get("msg", "")).removeprefix("Value error, ")
    return f"{field}: {error.get('msg', 'invalid value')}"


def validate_config(data: Any) -> ScenarioConfig:
    """Build a ScenarioConfig from a parsed document; errors name the field."""
    if not isinstance(data, dict):
        raise ConfigParseError("config document must be a mapping")
    try:
        return ScenarioConfig.model_validate(data)
    except pydantic.ValidationError as exc:
        raise ValidationError("; ".join(_describe(e) for e in exc.errors())) from exc


def _read_document(text: str) -> Any:
    try:
        return yaml.safe_load(text)
    except yaml.YAMLError as exc:
        mark = getattr(exc, "problem_mark", None)
        if mark is None:
            raise ConfigParseError(f"malformed config: {exc}") from exc
        problem = getattr(exc, "problem", None) or "syntax error"
        raise ConfigParseError(f"malformed config: {problem}", mark.line + 1, mark.column + 1) from exc


def override_document(data: Dict[str, Any], overrides: List[str]) -> Dict[str, Any]:
    """
    Apply "key=value" overrides to a config document.

    Keys are either dotted ("reservoir.lambda=20") or flat ("M=4"); values are
    parsed as YAML scalars or lists ("N_values=[1, 5, 10]").
    """
    data = copy.deepcopy(data)
    for item in overrides:
        key, sep, raw = item.partition("=")
        key = key.strip()
        if not sep or not key:
            raise ValidationError(f"override {item!r} must look like key=value")
        try:
            value = yaml.safe_load(raw)
        except yaml.YAMLError as exc:
            raise ConfigParseError(f"cannot parse override value {raw!r}") from exc

        parts = [KEY_ALIASES.get(part, part) for part in key.split(".")]
        if len(parts) == 1 and parts[0] in FLAT_KEYS:
            parts = [FLAT_KEYS[parts[0]], parts[0]]
        if len(parts) == 1 and parts[0] == "output" and not isinstance(value, dict):
            parts = ["output", "path"]
        if len(parts) == 2 and FLAT_KEYS.get(parts[1]) == parts[0]:
            # drop flat spellings of the same key
            for spelling in [parts[1]] + [k for k, v in KEY_ALIASES.items() if v == parts[1]]:
                data.pop(spelling, None)
        if parts == ["output", "path"] and isinstance(data.get("output"), str):
            data.pop("output")

        target = data
        for part in parts[:-1]:
            node = target.get(part)
            if node is None:
                node = target[part] = {}
            if not isinstance(node, dict):
                raise ValidationError(f"override {key!r}: {part} is not a section")
            target = node
        target[parts[-1]] = value
    return data


def parse_config(text: str, overrides: Optional[List[str]] = None) -> ScenarioConfig:
    """Parse and validate one YAML scenario document, overrides applied first."""
    data = _read_document(text)
    if overrides:
        if not isinstance(data, dict):
            raise ConfigParseError("config document must be a mapping")
        data = override_document(data, overrides)
    return validate_config(data)


def load_config_file(path: str, overrides: Optional[List[str]] = None) -> ScenarioConfig:
    try:
        with open(path, "r", encoding="utf-8") as f:
            text = f.read()
    except OSError as exc:
        raise OutputError(f"cannot read config {path}: {exc.strerror}") from exc
    return parse_config(text, overrides)


def serialize_config(config: ScenarioConfig) -> str:
    """YAML document that parses back to an equal config."""
    data = config.model_dump(mode="json", by_alias=True, exclude_none=True)
    return yaml.safe_dump(data, sort_keys=False, allow_unicode=True)


def apply_overrides(config: ScenarioConfig, overrides: List[str]) -> ScenarioConfig:
    """Re-validate config with "key=value" overrides applied."""
    if not overrides:
        return config
    data = config.model_dump(mode="json", by_alias=True, exclude_none=True)
    return validate_config(override_document(data, overrides))


def thread_count() -> int:
    """Sweep worker count from QST_THREADS; defaults to the available cores."""
    raw = os.getenv("QST_THREADS")
    if raw is None or raw.strip() == "":
        return os.cpu_count() or 1
    try:
        threads = int(raw)
    except ValueError:
        raise ValidationError(f"QST_THREADS must be an integer, got {raw!r}") from None
    if threads < 1:
        raise ValidationError("QST_THREADS must be ≥ 1")
    return threads


def log_level() -> str:
    return os.getenv("QST_LOG_LEVEL", "INFO").upper()
