"""Analytic-vs-oracle comparison node."""
import logging
from typing import Any, Dict

import numpy as np
import pandas as pd

from qst.errors import QSTError
from qst.nodes.error_handler import failure
from qst.nodes.run_oracle import numeric_trajectory
from qst.physics.chain_dynamics import first_peak
from qst.physics.numeric_oracle import compare
from qst.physics.open_dynamics import initial_coefficients, open_fidelity_series, site_trajectory

logger = logging.getLogger(__name__)


def run_compare_node(state: Dict[str, Any]) -> Dict[str, Any]:
    """
    Analytic fidelity against the oracle on the same grid.

    Columns: t, fidelity_analytic, fidelity_numeric, abs_deviation. The
    summary also reports the largest deviation over all site amplitudes.
    """
    config = state['config']
    try:
        ensemble = config.ensemble_config()
        grid = config.time_grid()
        analytic = open_fidelity_series(ensemble, grid)
        numeric = numeric_trajectory(config)
        amplitude_deviation = compare(
            site_trajectory(ensemble, initial_coefficients(ensemble, 1.0), grid),
            numeric.to_site(ensemble.chain),
        )
    except QSTError as exc:
        return failure(exc)

    fidelity_numeric = numeric.transfer_fidelity(ensemble.chain)
    deviation = np.abs(analytic.values - fidelity_numeric)
    table = pd.DataFrame({
        't': analytic.times,
        'fidelity_analytic': analytic.values,
        'fidelity_numeric': fidelity_numeric,
        'abs_deviation': deviation,
    })
    t_peak, peak = first_peak(analytic)
    max_deviation = float(deviation.max())
    logger.info("[Compare] max |analytic - numeric| = %.3e, amplitudes %.3e", max_deviation, amplitude_deviation)

    return {
        'table': table,
        'summary': {
            'peak_fidelity': peak,
            'time_of_peak': t_peak,
            'max_deviation': max_deviation,
            'max_amplitude_deviation': amplitude_deviation,
        },
        'next_step': 'verify_table',
        'error_message': None,
    }
