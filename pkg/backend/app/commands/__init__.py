"""
Command-line sub-commands. Each module exposes register(subparsers), which
adds its parser and binds run(args) -> exit status.
"""
from argparse import ArgumentParser
from pathlib import Path
from typing import Any, Dict, Optional
from app.config import build_fit_config, load_config_file, settings
from app.models import ClampMode, FitConfig, GradientMode, KnotConvention, ModelType

# flag dest -> config key; every one defaults to None so only given flags override
CONFIG_FLAGS = [
    "model", "p", "q", "num_basis", "knots", "knot_convention", "degree",
    "c1", "c2", "d1",
    "iterations", "burn_in", "seed", "leapfrog_steps", "initial_step_size",
    "adapt_interval", "clamp_mode", "adapt_after_burn_in",
    "gradient_mode", "likelihood_start", "band_level",
]


def add_fit_arguments(parser: ArgumentParser, with_model: bool = True):
    """Flags shared by every command that fits a model"""
    parser.add_argument("--config", type=Path, help="key=value configuration file")
    parser.add_argument("--preset", choices=["simulation", "application"])
    if with_model:
        parser.add_argument("--model", choices=[m.value for m in ModelType])
        parser.add_argument("--p", type=int)
        parser.add_argument("--q", type=int)
    parser.add_argument("--num-basis", dest="num_basis", type=int)
    parser.add_argument("--knots", type=int, help="knot count, read with --knot-convention")
    parser.add_argument("--knot-convention", dest="knot_convention", choices=[c.value for c in KnotConvention])
    parser.add_argument("--degree", type=int)
    parser.add_argument("--c1", type=float, help="prior variance of delta")
    parser.add_argument("--c2", type=float, help="prior variance of beta")
    parser.add_argument("--d1", type=float, help="Inverse-Gamma parameter of lambda0")
    parser.add_argument("--iterations", type=int)
    parser.add_argument("--burn-in", dest="burn_in", type=int)
    parser.add_argument("--seed", type=int)
    parser.add_argument("--leapfrog-steps", dest="leapfrog_steps", type=int)
    parser.add_argument("--step-size", dest="initial_step_size", type=float)
    parser.add_argument("--adapt-interval", dest="adapt_interval", type=int)
    parser.add_argument("--clamp-mode", dest="clamp_mode", choices=[c.value for c in ClampMode])
    parser.add_argument("--adapt-after-burn-in", dest="adapt_after_burn_in", action="store_true", default=None)
    parser.add_argument("--gradient-mode", dest="gradient_mode", choices=[g.value for g in GradientMode])
    parser.add_argument("--likelihood-start", dest="likelihood_start", type=int, choices=[0, 1])
    parser.add_argument("--band-level", dest="band_level", type=float)


def config_from_args(args, defaults: Optional[Dict[str, Any]] = None) -> FitConfig:
    """Preset < command defaults < config file < flags"""
    values: Dict[str, Any] = dict(defaults or {})
    if getattr(args, "config", None):
        values.update(load_config_file(args.config))
    flags = {key: getattr(args, key) for key in CONFIG_FLAGS if getattr(args, key, None) is not None}
    return build_fit_config(values, flags, preset=getattr(args, "preset", None))


def default_output(name: str) -> Path:
    return settings.output_dir / name
