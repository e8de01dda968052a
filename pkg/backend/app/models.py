from pydantic import BaseModel, Field, PositiveFloat, model_validator
from typing import Optional, List, Dict, Any
from pathlib import Path
from enum import Enum


class ModelType(str, Enum):
    TVBARC = "tvbarc"
    TVBINGARCH = "tvbingarch"


class Scenario(str, Enum):
    AR1 = "AR1"
    AR2 = "AR2"
    INGARCH11 = "INGARCH11"


class KnotConvention(str, Enum):
    BASIS = "basis"
    INTERIOR = "interior"
    BREAKPOINTS = "breakpoints"


class ClampMode(str, Enum):
    EVERY_STEP = "every_step"
    FINAL = "final"


class GradientMode(str, Enum):
    DETACHED = "detached"
    ADJOINT = "adjoint"


class AmseReading(str, Enum):
    PER_DRAW = "per_draw"
    POSTERIOR_MEAN = "posterior_mean"


# Priors
class Hyper(BaseModel):
    c1: PositiveFloat = 100.0  # variance of the delta prior
    c2: PositiveFloat = 100.0  # variance of the beta prior

    class Config:
        frozen = True


class HyperIngarch(Hyper):
    d1: PositiveFloat = 0.1  # Inverse-Gamma shape = scale for lambda0


# Sampler
class HmcConfig(BaseModel):
    leapfrog_steps: int = Field(30, ge=1)
    initial_step_size: PositiveFloat = 1e-3
    target_accept_low: float = 0.6
    target_accept_high: float = 0.8
    adapt_interval: int = Field(100, ge=1)
    iterations: int = Field(10000, ge=1)
    burn_in: int = Field(5000, ge=0)
    seed: int = Field(0, ge=0)
    down_factor: float = Field(0.8, gt=0.0, lt=1.0)
    up_factor: float = Field(1.25, gt=1.0)
    min_step_size: PositiveFloat = 1e-12
    clamp_mode: ClampMode = ClampMode.EVERY_STEP
    adapt_after_burn_in: bool = False

    @model_validator(mode="after")
    def check_ranges(self):
        problems = hmc_problems(self)
        if problems:
            raise ValueError("; ".join(problems))
        return self


def hmc_problems(config: HmcConfig) -> List[str]:
    """Cross-field constraints of the sampler configuration"""
    problems = []
    if not 0.0 < config.target_accept_low < config.target_accept_high < 1.0:
        problems.append("target_accept_low/high must satisfy 0 < low < high < 1")
    if config.burn_in >= config.iterations:
        problems.append("burn_in must be smaller than iterations")
    return problems


# Run configuration
class FitConfig(BaseModel):
    model: ModelType = ModelType.TVBARC
    p: int = Field(1, ge=0)
    q: int = Field(0, ge=0)
    num_basis: int = 6
    degree: int = Field(3, ge=0)
    hyper: HyperIngarch = HyperIngarch()
    hmc: HmcConfig = HmcConfig()
    gradient_mode: GradientMode = GradientMode.DETACHED
    likelihood_start: int = Field(1, ge=0, le=1)
    band_level: float = Field(0.95, gt=0.0, lt=1.0)
    input_path: Optional[Path] = None
    output_dir: Optional[Path] = None

    @model_validator(mode="after")
    def check_model_orders(self):
        problems = fit_problems(self)
        if problems:
            raise ValueError("; ".join(problems))
        return self

    def to_flat(self) -> Dict[str, Any]:
        """Flatten into the key=value layout used by config files and manifests"""
        flat: Dict[str, Any] = {
            "model": self.model.value,
            "p": self.p,
            "q": self.q,
            "num_basis": self.num_basis,
            "degree": self.degree,
            "gradient_mode": self.gradient_mode.value,
            "likelihood_start": self.likelihood_start,
            "band_level": self.band_level,
        }
        flat.update(self.hyper.model_dump())
        for key, value in self.hmc.model_dump().items():
            flat[key] = value.value if isinstance(value, Enum) else value
        if self.input_path is not None:
            flat["input_path"] = str(self.input_path)
        if self.output_dir is not None:
            flat["output_dir"] = str(self.output_dir)
        return flat


def fit_problems(config: FitConfig) -> List[str]:
    """Cross-field constraints of a fit configuration"""
    problems = []
    if config.model == ModelType.TVBARC and config.q != 0:
        problems.append("q must be 0 for tvbarc")
    if config.model == ModelType.TVBINGARCH and config.q < 1:
        problems.append("q must be >= 1 for tvbingarch")
    if config.num_basis < 4:
        problems.append("num_basis must be >= 4")
    if config.num_basis < config.degree + 1:
        problems.append("num_basis must be >= degree + 1")
    return problems
