"""Open-system (analytic) scenario node."""
import logging
from typing import Any, Dict

import numpy as np
import pandas as pd

from qst.errors import QSTError
from qst.nodes.error_handler import failure
from qst.physics.chain_dynamics import first_peak
from qst.physics.open_dynamics import (
    bloch_state,
    open_fidelity_series,
    relaxed_chi,
    transfer_state_fidelity,
)

logger = logging.getLogger(__name__)


def run_open_node(state: Dict[str, Any]) -> Dict[str, Any]:
    """
    Protected transfer fidelity |chi_{M-1}(t)| of chain 1 among N chains.

    Columns: t, fidelity, fidelity_relaxed, and state_fidelity when the
    config carries a transfer_state.
    """
    config = state['config']
    try:
        ensemble = config.ensemble_config()
        series = open_fidelity_series(ensemble, config.time_grid())
        relaxed = np.abs(relaxed_chi(ensemble, ensemble.chain.M - 1, series.times))
        columns = {'t': series.times, 'fidelity': series.values, 'fidelity_relaxed': relaxed}

        if config.transfer_state is not None:
            xi_vac, xi_exc = bloch_state(config.transfer_state.theta, config.transfer_state.phi)
            columns['state_fidelity'] = [
                transfer_state_fidelity(ensemble, xi_vac, xi_exc, float(t)) for t in series.times
            ]
    except QSTError as exc:
        return failure(exc)

    t_peak, peak = first_peak(series)
    logger.info(
        "[Open] M=%d N=%d, first peak %.9f at t=%.6g", ensemble.chain.M, ensemble.N, peak, t_peak
    )
    return {
        'table': pd.DataFrame(columns),
        'summary': {'peak_fidelity': peak, 'time_of_peak': t_peak},
        'next_step': 'verify_table',
        'error_message': None,
    }
