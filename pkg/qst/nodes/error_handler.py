"""Error handler node for failed runs."""
import logging
from typing import Any, Dict

from qst.errors import EXIT_VALIDATION, QSTError

logger = logging.getLogger(__name__)


def failure(exc: QSTError) -> Dict[str, Any]:
    """State update that sends a run to the error handler."""
    return {
        'next_step': 'error_handler',
        'error_message': str(exc),
        'exit_code': exc.exit_code,
        'error': exc,
    }


def error_handler_node(state: Dict[str, Any]) -> Dict[str, Any]:
    """
    Record the failure that stopped the run.
    The orchestrator turns the recorded exit code into the process status.
    """
    error_message = state.get('error_message') or 'Unknown error'
    exit_code = state.get('exit_code') or EXIT_VALIDATION
    logger.error("[Error] %s (exit %d)", error_message, exit_code)

    return {
        'next_step': 'END',
        'exit_code': exit_code,
        'error_message': error_message,
    }
