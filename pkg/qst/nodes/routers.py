"""Router functions for conditional edges."""
from typing import Any, Dict, Literal

RUN_NODES = ('run_closed', 'run_open', 'run_oracle', 'run_compare', 'run_sweep')


def route_by_mode(state: Dict[str, Any]) -> str:
    """Route after loading the config: the run node of the mode, or the error handler."""
    next_step = state.get('next_step', 'error_handler')
    if next_step in RUN_NODES:
        return next_step
    return 'error_handler'


def route_after_run(state: Dict[str, Any]) -> Literal['verify_table', 'error_handler']:
    """Route after a scenario node."""
    next_step = state.get('next_step', 'error_handler')
    if next_step == 'verify_table':
        return 'verify_table'
    return 'error_handler'


def route_after_verify(state: Dict[str, Any]) -> Literal['write_output', 'END', 'error_handler']:
    """Route after verification; only runs with an output path write files."""
    next_step = state.get('next_step', 'error_handler')
    if next_step in ('write_output', 'END'):
        return next_step
    return 'error_handler'


def route_after_write(state: Dict[str, Any]) -> Literal['END', 'error_handler']:
    next_step = state.get('next_step', 'error_handler')
    if next_step == 'END':
        return 'END'
    return 'error_handler'
