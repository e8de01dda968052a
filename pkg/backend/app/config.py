from pydantic import ValidationError
from pydantic_settings import BaseSettings
from dotenv import dotenv_values
from pathlib import Path
from typing import Any, Dict, List, Optional
from app.models import FitConfig, HmcConfig, HyperIngarch, KnotConvention
from app.splines import SplineError, num_basis_from_knots
import logging

logger = logging.getLogger(__name__)


class Settings(BaseSettings):
    # Output
    output_dir: Path = Path("results")

    # Logging
    log_level: str = "INFO"

    # Parallel chains
    chain_workers: int = 1

    class Config:
        env_file = ".env"
        env_prefix = "TVCOUNT_"
        extra = "ignore"


settings = Settings()


class ConfigError(ValueError):
    def __init__(self, problems: List[str]):
        self.problems = problems
        super().__init__("invalid configuration:\n" + "\n".join(f"  - {p}" for p in problems))


PRESETS: Dict[str, Dict[str, Any]] = {
    # simulation studies: 6 basis functions, 10000 draws with 5000 burn-in
    "simulation": {"num_basis": 6, "c1": 100, "c2": 100, "d1": 0.1, "iterations": 10000, "burn_in": 5000},
    # daily case counts: 12 basis functions
    "application": {"num_basis": 12, "c1": 100, "c2": 100, "d1": 0.1, "iterations": 10000, "burn_in": 5000},
}

HYPER_KEYS = set(HyperIngarch.model_fields)
HMC_KEYS = set(HmcConfig.model_fields)
TOP_KEYS = set(FitConfig.model_fields) - {"hyper", "hmc"}
KNOT_KEYS = {"knots", "knot_convention"}
RESULT_PREFIX = "result."


def load_config_file(path) -> Dict[str, str]:
    """Read a flat key=value file; result.* keys from manifests are skipped"""
    path = Path(path)
    if not path.exists():
        raise ConfigError([f"config file {path} not found"])
    values = dotenv_values(path)
    return {k: v for k, v in values.items() if not k.startswith(RESULT_PREFIX) and v is not None}


def _format_errors(error: ValidationError, prefix: str = "") -> List[str]:
    problems = []
    for item in error.errors():
        loc = ".".join(str(part) for part in item["loc"])
        where = ".".join(part for part in [prefix, loc] if part) or "config"
        message = item["msg"].removeprefix("Value error, ")
        for part in message.split("; "):
            problems.append(f"{where}: {part}")
    return problems


def build_fit_config(file_values: Optional[Dict[str, Any]] = None, overrides: Optional[Dict[str, Any]] = None,
                     preset: Optional[str] = None) -> FitConfig:
    """Merge preset < file < flags and validate, reporting every violated constraint"""
    problems: List[str] = []
    merged: Dict[str, Any] = {}
    if preset is not None:
        if preset not in PRESETS:
            problems.append(f"preset: unknown preset {preset!r}, expected one of {sorted(PRESETS)}")
        else:
            merged.update(PRESETS[preset])
    merged.update(file_values or {})
    merged.update({k: v for k, v in (overrides or {}).items() if v is not None})

    unknown = sorted(set(merged) - HYPER_KEYS - HMC_KEYS - TOP_KEYS - KNOT_KEYS)
    problems += [f"{key}: unknown configuration key" for key in unknown]

    top = {k: v for k, v in merged.items() if k in TOP_KEYS}
    if "knots" in merged:
        try:
            top["num_basis"] = num_basis_from_knots(
                int(merged["knots"]), int(merged.get("degree", 3)),
                KnotConvention(merged.get("knot_convention", KnotConvention.BASIS)),
            )
        except (ValueError, SplineError) as e:
            problems.append(f"knots: {e}")

    try:
        hmc = HmcConfig.model_validate({k: v for k, v in merged.items() if k in HMC_KEYS})
    except ValidationError as e:
        problems += _format_errors(e, "hmc")
        hmc = HmcConfig()
    try:
        hyper = HyperIngarch.model_validate({k: v for k, v in merged.items() if k in HYPER_KEYS})
    except ValidationError as e:
        problems += _format_errors(e, "hyper")
        hyper = HyperIngarch()

    config = None
    try:
        config = FitConfig.model_validate({**top, "hyper": hyper, "hmc": hmc})
    except ValidationError as e:
        problems += _format_errors(e)

    if problems:
        raise ConfigError(problems)
    logger.debug(f"Run configuration: {config.to_flat()}")
    return config
