"""Graph nodes for scenario runs."""
from .load_config import load_config_node
from .run_closed import run_closed_node
from .run_open import run_open_node
from .run_oracle import run_oracle_node
from .run_compare import run_compare_node
from .run_sweep import run_sweep_node
from .verify_table import verify_table_node
from .write_output import write_output_node, emit_csv, emit_summary
from .error_handler import error_handler_node
from .routers import (
    route_by_mode,
    route_after_run,
    route_after_verify,
    route_after_write,
)

__all__ = [
    'load_config_node',
    'run_closed_node',
    'run_open_node',
    'run_oracle_node',
    'run_compare_node',
    'run_sweep_node',
    'verify_table_node',
    'write_output_node',
    'emit_csv',
    'emit_summary',
    'error_handler_node',
    'route_by_mode',
    'route_after_run',
    'route_after_verify',
    'route_after_write',
]
