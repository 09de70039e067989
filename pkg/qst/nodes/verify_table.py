"""Result table verification node."""
import logging
from typing import Any, Dict

import numpy as np

from qst.errors import NumericError, OutputError
from qst.nodes.error_handler import failure

logger = logging.getLogger(__name__)

FIDELITY_SLACK = 1e-12


def verify_table_node(state: Dict[str, Any]) -> Dict[str, Any]:
    """
    Verify the result table before it is written.

    Checks:
    - Table is non-empty and starts with the time column
    - Every value is finite
    - Times are nondecreasing
    - Fidelity columns stay within [0, 1]
    """
    table = state.get('table')
    if table is None or table.empty:
        return failure(OutputError("result table is empty"))

    validation_errors = []
    if table.columns[0] != 't':
        validation_errors.append(f"first column is {table.columns[0]!r}, expected 't'")

    values = table.to_numpy(dtype=float)
    if not np.all(np.isfinite(values)):
        bad = [name for name in table.columns if not np.all(np.isfinite(table[name].to_numpy(dtype=float)))]
        validation_errors.append(f"non-finite values in {', '.join(bad)}")

    if np.any(np.diff(table['t'].to_numpy()) < 0):
        validation_errors.append("times are not nondecreasing")

    for name in table.columns:
        if not name.startswith('fidelity') and name != 'state_fidelity':
            continue
        column = table[name].to_numpy(dtype=float)
        if np.any(column < 0) or np.any(column > 1 + FIDELITY_SLACK):
            validation_errors.append(f"{name} leaves [0, 1] (max {np.nanmax(column):.15f})")

    if validation_errors:
        error_message = '; '.join(validation_errors)
        logger.error("[Verify] FAILED: %s", error_message)
        update = failure(NumericError(f"result verification failed: {error_message}"))
        update['verification_passed'] = False
        update['validation_errors'] = validation_errors
        return update

    logger.info("[Verify] ✓ %d rows, columns %s", len(table), ','.join(table.columns))
    return {
        'verification_passed': True,
        'validation_errors': [],
        'next_step': 'write_output' if state.get('output_path') else 'END',
        'error_message': None,
    }
