"""Numerical-oracle scenario node."""
import logging
from typing import Any, Dict

import pandas as pd

from qst.config import ScenarioConfig
from qst.errors import QSTError
from qst.nodes.error_handler import failure
from qst.physics.chain_dynamics import FidelitySeries, first_peak
from qst.physics.numeric_oracle import (
    discretize_reservoir,
    integrate_memory_kernel,
    integrate_mode_discretized,
)
from qst.physics.open_dynamics import AmplitudeTrajectory, initial_coefficients

logger = logging.getLogger(__name__)


def numeric_trajectory(config: ScenarioConfig) -> AmplitudeTrajectory:
    """Integrate the configured oracle for an excitation on site 0 of chain 1."""
    ensemble = config.ensemble_config()
    init = initial_coefficients(ensemble, 1.0)
    settings = config.integrator_settings()
    if config.integrator.method == "modes":
        reservoir = discretize_reservoir(ensemble, config.integrator.modes, config.integrator.window)
        return integrate_mode_discretized(ensemble, reservoir, init, settings)
    return integrate_memory_kernel(ensemble, init, settings, config.kernel_variant)


def run_oracle_node(state: Dict[str, Any]) -> Dict[str, Any]:
    """
    Transfer fidelity from direct integration.

    Columns: t, fidelity_numeric; the discretized reservoir adds
    reservoir_population.
    """
    config = state['config']
    try:
        trajectory = numeric_trajectory(config)
    except QSTError as exc:
        return failure(exc)

    fidelity = trajectory.transfer_fidelity(config.chain_spec())
    columns = {'t': trajectory.times, 'fidelity_numeric': fidelity}
    if trajectory.reservoir_population is not None:
        columns['reservoir_population'] = trajectory.reservoir_population

    t_peak, peak = first_peak(FidelitySeries(times=trajectory.times, values=fidelity))
    summary = {'peak_fidelity': peak, 'time_of_peak': t_peak}
    if config.integrator.method == "modes":
        summary['beyond_recurrence'] = trajectory.beyond_recurrence
    logger.info("[Oracle] %s, first peak %.9f at t=%.6g", config.integrator.method, peak, t_peak)

    return {
        'table': pd.DataFrame(columns),
        'summary': summary,
        'next_step': 'verify_table',
        'error_message': None,
    }
