"""
Report writers: deterministic CSV tables, JSON summary documents and SVG files.
"""

import json
import logging
from pathlib import Path

import numpy as np
import pandas as pd

logger = logging.getLogger(__name__)


def write_csv(df: pd.DataFrame, path) -> Path:
    """Fixed float format and line endings so identical runs give identical bytes."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    df.to_csv(path, index=False, float_format="%.12g", lineterminator="\n")
    print(f"  ✓ Wrote {len(df)} rows to {path}")
    return path


def _plain(value):
    if isinstance(value, dict):
        return {str(k): _plain(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_plain(v) for v in value]
    if isinstance(value, np.ndarray):
        return _plain(value.tolist())
    if isinstance(value, (np.integer,)):
        return int(value)
    if isinstance(value, (np.floating,)):
        return float(value)
    if isinstance(value, complex):
        return [value.real, value.imag]
    if isinstance(value, pd.DataFrame):
        return value.to_dict(orient="records")
    if isinstance(value, Path):
        return str(value)
    return value


def summary_document(spec: dict, sections: dict) -> str:
    """JSON text embedding the resolved experiment spec next to the computed sections."""
    return json.dumps({"spec": _plain(spec), **_plain(sections)}, indent=2, sort_keys=True) + "\n"


def write_text(text: str, path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text, encoding="utf-8")
    print(f"  ✓ Wrote {path}")
    return path
