"""Write the result table and its summary sidecar."""
import json
import logging
import os
from pathlib import Path
from typing import Any, Dict

import numpy as np
import pandas as pd

from qst.errors import OutputError, QSTError
from qst.nodes.error_handler import failure

logger = logging.getLogger(__name__)

FLOAT_FORMAT = "%#.12g"


def format_decimal(value: float) -> str:
    """12 significant digits in positional notation, never an exponent."""
    text = FLOAT_FORMAT % value
    if "e" not in text:
        return text
    return np.format_float_positional(value, precision=12, unique=False, fractional=False, trim="k").rstrip(".")


def _plain(value):
    """numpy scalars and nested containers as JSON-ready Python values."""
    if isinstance(value, dict):
        return {str(k): _plain(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_plain(v) for v in value]
    if isinstance(value, np.generic):
        return value.item()
    return value


def _ensure_parent(path: Path) -> None:
    if path.parent != Path(''):
        os.makedirs(path.parent, exist_ok=True)


def emit_csv(table: pd.DataFrame, path: str) -> Path:
    """
    UTF-8 CSV with a header row, 12 significant digits and '\\n' line ends.
    Identical tables give identical bytes.
    """
    if table is None or table.empty:
        raise OutputError("refusing to write an empty table")
    target = Path(path)
    try:
        _ensure_parent(target)
        table.to_csv(target, index=False, float_format=format_decimal, encoding='utf-8', lineterminator='\n')
    except OSError as exc:
        raise OutputError(f"cannot write {target}: {exc.strerror}") from exc
    return target


def emit_summary(summary: Dict[str, Any], path: str) -> Path:
    """JSON sidecar next to the CSV (same stem, .json)."""
    target = Path(path).with_suffix('.json')
    try:
        _ensure_parent(target)
        with open(target, 'w', encoding='utf-8', newline='\n') as f:
            json.dump(_plain(summary), f, indent=2, sort_keys=True)
            f.write('\n')
    except OSError as exc:
        raise OutputError(f"cannot write {target}: {exc.strerror}") from exc
    return target


def write_output_node(state: Dict[str, Any]) -> Dict[str, Any]:
    """
    Write output files for the run.

    Creates two files:
    - <output_path>: the result table
    - <output_path stem>.json: peak fidelity, time of peak, max deviation
    """
    path = state['output_path']
    try:
        written = [
            emit_csv(state.get('table'), path),
            emit_summary(state.get('summary') or {}, path),
        ]
    except QSTError as exc:
        return failure(exc)

    for target in written:
        logger.info("[Write] %s", target)
    return {
        'written_files': [str(target) for target in written],
        'next_step': 'END',
        'error_message': None,
    }
