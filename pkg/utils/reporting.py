"""
Report emission: JSON for every command, CSV for sweeps. Output is
deterministic (sorted keys, Fractions as "p/q" strings) so that identical inputs
and seeds give byte-identical files.
"""
import hashlib
import json
import os
import sys
import tempfile
from fractions import Fraction
from typing import Any, Dict, Optional

import numpy as np
import polars as pl

from config import REPORT_TIMING
from utils.logger import logger


def to_jsonable(obj: Any) -> Any:
    if isinstance(obj, Fraction):
        return str(obj)
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.floating):
        return float(obj)
    if isinstance(obj, np.ndarray):
        return [to_jsonable(v) for v in obj.tolist()]
    if isinstance(obj, dict):
        return {str(k): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(v) for v in obj]
    return obj


def dumps(doc: Any) -> str:
    return json.dumps(to_jsonable(doc), sort_keys=True, indent=2) + "\n"


def inputs_digest(doc: Any) -> str:
    """sha256 of the canonical (sorted, compact) JSON form of the inputs."""
    canonical = json.dumps(to_jsonable(doc), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canonical.encode("utf-8")).hexdigest()


def build_report(command: str, inputs: Any, outputs: Dict[str, Any], seeds: Optional[Dict[str, Any]] = None,
                 schedule: Optional[Dict[str, Any]] = None, wall_time: Optional[float] = None) -> Dict[str, Any]:
    report: Dict[str, Any] = {
        "command": command,
        "inputs_digest": inputs_digest(inputs),
        "outputs": outputs,
    }
    if seeds:
        report["seeds"] = seeds
    if schedule is not None:
        report["schedule"] = schedule
        report["overrides"] = schedule.get("overrides", {})
    if REPORT_TIMING and wall_time is not None:
        report["wall_time"] = round(wall_time, 6)
    return report


def write_text(text: str, out: Optional[str] = None) -> None:
    """Write to stdout (out None or "-") or atomically to a file."""
    if out is None or out == "-":
        sys.stdout.write(text)
        sys.stdout.flush()
        return
    directory = os.path.dirname(os.path.abspath(out))
    os.makedirs(directory, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".pjlab-", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as fh:
            fh.write(text)
        os.replace(tmp, out)
    except BaseException:
        if os.path.exists(tmp):
            os.remove(tmp)
        raise
    logger.info(f"Saved report to {out}")


def write_report(report: Dict[str, Any], out: Optional[str] = None) -> None:
    write_text(dumps(report), out)


def write_csv(df: pl.DataFrame, out: Optional[str] = None) -> None:
    write_text(df.write_csv(), out)
