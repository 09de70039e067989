"""Load and validate the scenario config node."""
import logging
from typing import Any, Dict

from qst.config import apply_overrides, load_config_file, parse_config
from qst.errors import QSTError, ValidationError
from qst.nodes.error_handler import failure

logger = logging.getLogger(__name__)


def load_config_node(state: Dict[str, Any]) -> Dict[str, Any]:
    """
    Resolve the ScenarioConfig for the run.

    Takes an already validated config, a YAML document or a path, in that
    order, with the --set overrides applied. Routes to the run node of the mode.
    """
    overrides = state.get('overrides') or []
    try:
        if state.get('config') is not None:
            config = apply_overrides(state['config'], overrides)
        elif state.get('config_text') is not None:
            config = parse_config(state['config_text'], overrides)
        elif state.get('config_path'):
            config = load_config_file(state['config_path'], overrides)
        else:
            raise ValidationError("no config given")
    except QSTError as exc:
        return failure(exc)

    logger.info(
        "[Config] mode=%s M=%d N=%d lambda=%g, %d points to t=%g",
        config.mode,
        config.chain.M,
        config.ensemble.N,
        config.reservoir.lam,
        config.grid.num_points,
        config.grid.t_max,
    )
    output_path = state.get('output_path')
    if not output_path and state.get('use_config_output'):
        output_path = config.output.path
    return {
        'config': config,
        'output_path': output_path,
        'next_step': f"run_{config.mode}",
        'error_message': None,
    }
