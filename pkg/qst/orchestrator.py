"""
LangGraph orchestrator for scenario runs.
"""
import argparse
import logging
import sys
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional

import pandas as pd
from langgraph.graph import END, StateGraph

from qst.config import MODES, ScenarioConfig, log_level
from qst.errors import EXIT_OK, EXIT_VALIDATION, QSTError
from qst.nodes import (
    error_handler_node,
    load_config_node,
    route_after_run,
    route_after_verify,
    route_after_write,
    route_by_mode,
    run_closed_node,
    run_compare_node,
    run_open_node,
    run_oracle_node,
    run_sweep_node,
    verify_table_node,
    write_output_node,
)
from qst.state import ScenarioState

RUN_NODES = {
    'run_closed': run_closed_node,
    'run_open': run_open_node,
    'run_oracle': run_oracle_node,
    'run_compare': run_compare_node,
    'run_sweep': run_sweep_node,
}


@dataclass
class ScenarioResult:
    """Result table of a run plus its summary values."""

    table: pd.DataFrame
    summary: Dict[str, Any] = field(default_factory=dict)
    written_files: List[str] = field(default_factory=list)


def create_scenario_graph():
    """
    Create the LangGraph workflow for one scenario.

    Graph Flow:
    1. load_config → (run_closed | run_open | run_oracle | run_compare | run_sweep | error_handler)
    2. run_* → (verify_table | error_handler)
    3. verify_table → (write_output | END | error_handler) [VALIDATION]
    4. write_output → (END | error_handler)
    5. error_handler → END
    """
    workflow = StateGraph(ScenarioState)

    workflow.add_node("load_config", load_config_node)
    for name, node in RUN_NODES.items():
        workflow.add_node(name, node)
    workflow.add_node("verify_table", verify_table_node)
    workflow.add_node("write_output", write_output_node)
    workflow.add_node("error_handler", error_handler_node)

    workflow.set_entry_point("load_config")

    workflow.add_conditional_edges(
        "load_config",
        route_by_mode,
        {**{name: name for name in RUN_NODES}, "error_handler": "error_handler"},
    )

    for name in RUN_NODES:
        workflow.add_conditional_edges(
            name,
            route_after_run,
            {
                "verify_table": "verify_table",
                "error_handler": "error_handler",
            }
        )

    workflow.add_conditional_edges(
        "verify_table",
        route_after_verify,
        {
            "write_output": "write_output",
            "END": END,
            "error_handler": "error_handler",
        }
    )

    workflow.add_conditional_edges(
        "write_output",
        route_after_write,
        {
            "END": END,
            "error_handler": "error_handler",
        }
    )

    workflow.add_edge("error_handler", END)

    return workflow.compile()


def initial_state(**inputs: Any) -> ScenarioState:
    """Empty run state with the given inputs filled in."""
    state = ScenarioState(
        config_text=None,
        config_path=None,
        overrides=[],
        output_path=None,
        use_config_output=False,
        config=None,
        table=None,
        summary={},
        written_files=[],
        verification_passed=False,
        validation_errors=[],
        next_step='load_config',
        error_message=None,
        exit_code=EXIT_OK,
        error=None,
    )
    state.update(inputs)
    return state


def run_graph(state: ScenarioState) -> Dict[str, Any]:
    """Invoke the compiled graph on a prepared state and return the final state."""
    graph = create_scenario_graph()
    return graph.invoke(state)


def run_scenario(config: ScenarioConfig, output_path: Optional[str] = None) -> ScenarioResult:
    """
    Run one validated scenario and return its table.

    Files are written only when output_path is given. Raises the QSTError
    that stopped the run.
    """
    final_state = run_graph(initial_state(config=config, output_path=output_path))
    if final_state.get('exit_code', EXIT_OK) != EXIT_OK:
        error = final_state.get('error')
        if isinstance(error, QSTError):
            raise error
        raise QSTError(final_state.get('error_message') or 'scenario failed')
    return ScenarioResult(
        table=final_state['table'],
        summary=final_state.get('summary') or {},
        written_files=final_state.get('written_files') or [],
    )


class _ScenarioParser(argparse.ArgumentParser):
    """Usage errors exit with EXIT_VALIDATION."""

    def error(self, message: str):
        self.print_usage(sys.stderr)
        self.exit(EXIT_VALIDATION, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    parser = _ScenarioParser(
        prog='qst',
        description="State transfer on Krawtchouk chains in a common Lorentzian reservoir.",
    )
    subparsers = parser.add_subparsers(dest='mode', required=True)
    for mode in MODES:
        sub = subparsers.add_parser(mode, help=f"run a {mode} scenario")
        sub.add_argument('--config', required=True, help="YAML scenario document")
        sub.add_argument('--out', default=None, help="CSV path; overrides output.path")
        sub.add_argument(
            '--set', dest='overrides', action='append', default=[], metavar='KEY=VALUE',
            help="override a config value, e.g. reservoir.lambda=20 (repeatable)",
        )
    return parser


def _configure_logging() -> None:
    level = getattr(logging, log_level(), None)
    logging.basicConfig(
        level=level if isinstance(level, int) else logging.INFO,
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
    )


def main(argv: Optional[List[str]] = None) -> int:
    """CLI entry point; returns the process exit code."""
    args = build_parser().parse_args(argv)
    _configure_logging()

    final_state = run_graph(initial_state(
        config_path=args.config,
        overrides=[f"mode={args.mode}", *args.overrides],
        output_path=args.out,
        use_config_output=True,
    ))

    exit_code = final_state.get('exit_code', EXIT_OK)
    if exit_code != EXIT_OK:
        print(f"✗ {final_state.get('error_message') or 'scenario failed'}", file=sys.stderr)
        return exit_code or EXIT_VALIDATION

    summary = final_state.get('summary') or {}
    print(f"✓ {args.mode}: {len(final_state['table'])} rows")
    for key in ('peak_fidelity', 'time_of_peak', 'max_deviation'):
        if key in summary:
            print(f"  {key}: {summary[key]:.12g}")
    for N, peak in (summary.get('peaks') or {}).items():
        print(f"  N={N}: peak {peak['peak_fidelity']:.12g} at t={peak['time_of_peak']:.6g}")
    for path in final_state.get('written_files') or []:
        print(f"✓ Wrote {path}")
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
