"""Closed-chain scenario node."""
import logging
from typing import Any, Dict

import numpy as np
import pandas as pd

from qst.errors import QSTError
from qst.nodes.error_handler import failure
from qst.physics.chain_dynamics import closed_fidelity_series, first_peak

logger = logging.getLogger(__name__)


def run_closed_node(state: Dict[str, Any]) -> Dict[str, Any]:
    """
    Fidelity of the isolated chain next to the |sin t|^(M-1) law.

    Columns: t, fidelity, sin_law.
    """
    config = state['config']
    try:
        spec = config.chain_spec()
        series = closed_fidelity_series(spec, config.time_grid())
    except QSTError as exc:
        return failure(exc)

    table = pd.DataFrame({
        't': series.times,
        'fidelity': series.values,
        'sin_law': np.abs(np.sin(series.times)) ** (spec.M - 1),
    })
    t_peak, peak = first_peak(series)
    logger.info("[Closed] M=%d, %d points, first peak %.9f at t=%.6g", spec.M, len(table), peak, t_peak)

    return {
        'table': table,
        'summary': {'peak_fidelity': peak, 'time_of_peak': t_peak},
        'next_step': 'verify_table',
        'error_message': None,
    }
