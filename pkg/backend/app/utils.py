from pathlib import Path
from typing import Any, Dict, Optional
from app.evaluation import CredibleBand
import pandas as pd
import logging

logger = logging.getLogger(__name__)


def write_band_csv(band: CredibleBand, path) -> Path:
    """Write a credible band as x,lower,mean,upper rows"""
    path = Path(path)
    band.to_frame().to_csv(path, index=False, float_format="%.17g")
    return path


def write_intensity_csv(t, x, intensity, path) -> Path:
    path = Path(path)
    pd.DataFrame({"t": t, "x": x, "intensity": intensity}).to_csv(path, index=False, float_format="%.17g")
    return path


def _format_value(value: Any) -> str:
    if isinstance(value, float):
        return repr(value)
    return str(value)


def write_key_values(values: Dict[str, Any], path) -> Path:
    path = Path(path)
    path.write_text("".join(f"{key}={_format_value(value)}\n" for key, value in values.items()), encoding="utf-8")
    return path


def write_amse_report(amse: float, path, baseline: Optional[float] = None) -> Path:
    """amse.txt: amse=... and, when a baseline was fitted, baseline_amse=..."""
    report: Dict[str, Any] = {"amse": float(amse)}
    if baseline is not None:
        report["baseline_amse"] = float(baseline)
    return write_key_values(report, path)


def write_manifest(config_values: Dict[str, Any], acceptance: Dict[str, float], path,
                   results: Optional[Dict[str, Any]] = None) -> Path:
    """
    Run manifest: the flat config echo (loadable as a config file) followed by
    result.* lines that config loading skips.
    """
    manifest: Dict[str, Any] = dict(config_values)
    for block, rate in acceptance.items():
        manifest[f"result.accept_{block}"] = float(rate)
    for key, value in (results or {}).items():
        manifest[f"result.{key}"] = value
    path = write_key_values(manifest, path)
    logger.info(f"Manifest written to {path}")
    return path
