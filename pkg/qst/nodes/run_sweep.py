"""Protection-count sweep node."""
import logging
from concurrent.futures import ThreadPoolExecutor
from typing import Any, Dict

import pandas as pd

from qst.config import thread_count
from qst.errors import QSTError
from qst.nodes.error_handler import failure
from qst.physics.chain_dynamics import FidelitySeries, first_peak
from qst.physics.open_dynamics import open_fidelity_series

logger = logging.getLogger(__name__)


def run_sweep_node(state: Dict[str, Any]) -> Dict[str, Any]:
    """
    Open fidelity for every N in ensemble.N_values.

    Columns: t, fidelity_N<n> in the order of N_values. Points are evaluated
    on QST_THREADS workers; the table does not depend on completion order.
    """
    config = state['config']
    grid = config.time_grid()
    counts = list(config.ensemble.N_values)

    def evaluate(N: int) -> FidelitySeries:
        return open_fidelity_series(config.ensemble_config(N), grid)

    try:
        workers = min(thread_count(), len(counts))
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(evaluate, counts))
    except QSTError as exc:
        return failure(exc)

    columns = {'t': grid}
    peaks = {}
    for N, series in zip(counts, results):
        columns[f'fidelity_N{N}'] = series.values
        t_peak, peak = first_peak(series)
        peaks[str(N)] = {'peak_fidelity': peak, 'time_of_peak': t_peak}
        logger.info("[Sweep] N=%d: first peak %.9f at t=%.6g", N, peak, t_peak)

    return {
        'table': pd.DataFrame(columns),
        'summary': {'peaks': peaks},
        'next_step': 'verify_table',
        'error_message': None,
    }
