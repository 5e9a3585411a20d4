"""
Run configuration: a TOML file validated into pydantic models.

    [family]
    preset = "cubic"      # or W = "q^3" and E = "0"
    nu = 2                # extra keys are preset parameters
    [family.params]
    C1 = 1

    [fold]
    N_min = 1
    N_max = 4

    [verify]
    samples = 64
    seed = 12345
    tol = 1e-9

    [spectral]
    a = -10.0
    b = 10.0
    n = 2000
    levels = 5
"""
import logging
import tomllib
from dataclasses import replace
from pathlib import Path
from typing import Dict, List, Optional, Tuple, Union

from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator, model_validator

from susy.conf import setting
from susy.exceptions import ConfigError
from susy.expressions import Expression, SamplingPolicy
from susy.models import FamilySpec, GridProblem
from susy.presets import from_config, make

logger = logging.getLogger(__name__)

ParamValue = Union[int, float, str]


class FamilyConfig(BaseModel):
    model_config = ConfigDict(extra="allow")

    preset: Optional[str] = None
    W: Optional[str] = None
    E: Optional[str] = None
    params: Dict[str, ParamValue] = Field(default_factory=dict)
    label: Optional[str] = None

    @model_validator(mode='after')
    def check_family(self):
        extra = dict(self.model_extra or {})
        self.params = {**extra, **self.params}
        if self.preset is None and self.W is None:
            raise ValueError("family needs either 'preset' or a custom 'W'")
        if self.preset is not None and (self.W is not None or self.E is not None):
            raise ValueError("give either 'preset' or custom 'W'/'E', not both")
        for name, value in self.params.items():
            if isinstance(value, bool):
                raise ValueError(f"parameter {name} must be a number or an expression string")
        return self

    def spec(self, N: int, poles: Tuple[float, ...] = (), domain=None) -> FamilySpec:
        """FamilySpec at fold N; parsing errors propagate as ExpressionError."""
        if self.preset is not None:
            spec = make(from_config(self.preset, self.params), N)
        else:
            spec = FamilySpec(
                N=N,
                W=Expression.parse(self.W),
                E=Expression.parse(self.E or "0"),
                bindings=self.params,
                label=self.label or "custom",
            )
        extra_poles = tuple(spec.poles) + tuple(poles)
        if extra_poles != spec.poles or domain is not None:
            spec = replace(spec, poles=extra_poles, domain=domain or spec.domain)
        return spec


class FoldConfig(BaseModel):
    N: Optional[int] = None
    N_min: Optional[int] = None
    N_max: Optional[int] = None

    @model_validator(mode='after')
    def check_range(self):
        if self.N is not None and (self.N_min is not None or self.N_max is not None):
            raise ValueError("give either N or N_min/N_max")
        if self.N is None and self.N_min is None and self.N_max is None:
            self.N = 1
        if self.N is not None and self.N < 1:
            raise ValueError("N must be at least 1")
        return self

    @property
    def folds(self) -> List[int]:
        if self.N is not None:
            return [self.N]
        low = self.N_min if self.N_min is not None else 1
        high = self.N_max if self.N_max is not None else low
        if low < 1 or high < low:
            raise ValueError(f"empty fold range {low}..{high}")
        return list(range(low, high + 1))


class VerifyConfig(BaseModel):
    samples: int = Field(default_factory=lambda: setting('VERIFY_SAMPLES'), gt=0)
    seed: int = Field(default_factory=lambda: setting('VERIFY_SEED'), ge=0)
    tol: float = Field(default_factory=lambda: setting('VERIFY_RTOL'), gt=0)
    atol: float = Field(default_factory=lambda: setting('VERIFY_ATOL'), gt=0)
    poles: List[float] = Field(default_factory=list)
    domain: Optional[Tuple[float, float]] = None

    @field_validator('domain')
    @classmethod
    def check_domain(cls, value):
        if value is not None and not value[0] < value[1]:
            raise ValueError(f"empty verification domain {value}")
        return value

    def policy(self) -> SamplingPolicy:
        return SamplingPolicy.from_settings(samples=self.samples, seed=self.seed,
                                            rtol=self.tol, atol=self.atol)


class SpectralConfig(BaseModel):
    a: Optional[float] = None
    b: Optional[float] = None
    n: int = Field(default_factory=lambda: setting('SPECTRAL_POINTS'), ge=16)
    levels: int = Field(default_factory=lambda: setting('SPECTRAL_LEVELS'), gt=0)
    kernel_tol: float = Field(default_factory=lambda: setting('KERNEL_TOL'), gt=0)
    pair_tol: float = Field(default_factory=lambda: setting('PAIR_TOL'), gt=0)
    mother_tol: float = Field(default_factory=lambda: setting('MOTHER_TOL'), gt=0)

    @model_validator(mode='after')
    def check_interval(self):
        if (self.a is None) != (self.b is None):
            raise ValueError("give both spectral.a and spectral.b")
        if self.a is not None and not self.a < self.b:
            raise ValueError(f"empty spectral interval [{self.a}, {self.b}]")
        return self

    def problem(self, spec: FamilySpec) -> GridProblem:
        if self.a is not None:
            return GridProblem(self.a, self.b, self.n)
        a, b = spec.window or tuple(setting('SPECTRAL_INTERVAL'))
        return GridProblem(float(a), float(b), self.n)


class OutputConfig(BaseModel):
    path: Optional[str] = None


class RunConfig(BaseModel):
    family: FamilyConfig
    fold: FoldConfig = Field(default_factory=FoldConfig)
    verify: VerifyConfig = Field(default_factory=VerifyConfig)
    spectral: SpectralConfig = Field(default_factory=SpectralConfig)
    output: OutputConfig = Field(default_factory=OutputConfig)

    @model_validator(mode='after')
    def check_expressions(self):
        # Parse once up front so malformed input is a configuration error
        for N in self.fold.folds:
            self.spec(N)
        return self

    def spec(self, N: int) -> FamilySpec:
        return self.family.spec(N, tuple(self.verify.poles), self.verify.domain)

    def with_overrides(self, seed: Optional[int] = None, out: Optional[str] = None) -> 'RunConfig':
        config = self.model_copy(deep=True)
        if seed is not None:
            config.verify.seed = seed
        if out is not None:
            config.output.path = out
        return config


def load_config(path: Union[str, Path]) -> RunConfig:
    path = Path(path)
    try:
        with path.open('rb') as handle:
            data = tomllib.load(handle)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"invalid TOML in {path}: {exc}") from exc
    return parse_config(data, source=str(path))


def parse_config(data: dict, source: str = "<config>") -> RunConfig:
    """Validate a parsed TOML table; malformed expressions surface as ExpressionError."""
    try:
        config = RunConfig.model_validate(data)
    except ValidationError as exc:
        raise ConfigError(f"{source}: {exc}") from exc
    logger.debug(f"Loaded config from {source}: folds {config.fold.folds}")
    return config

