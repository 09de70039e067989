"""
State schema for the scenario graph.
"""
from typing import Any, Dict, Optional, TypedDict

import pandas as pd

from qst.config import ScenarioConfig


class ScenarioState(TypedDict, total=False):
    """
    State object that flows through the graph.
    Tracks one scenario run from config document to written table.
    """
    # Input
    config_text: Optional[str]  # Raw YAML document, when running from text
    config_path: Optional[str]  # Path of the YAML document, when running from a file
    overrides: list  # "key=value" overrides applied to the document before validation
    output_path: Optional[str]  # CLI --out, takes precedence over output.path
    use_config_output: bool  # Fall back to output.path of the config when no --out is given
    config: Optional[ScenarioConfig]  # Validated scenario

    # Results
    table: Optional[pd.DataFrame]  # Result table, one row per time sample
    summary: Dict[str, Any]  # Peak fidelity, time of peak, max deviation, per-N peaks
    written_files: list  # Paths written by write_output

    # Verification
    verification_passed: bool  # Whether the table passed verification
    validation_errors: list  # Verification failure messages

    # Control Flow
    next_step: str  # Next node to execute
    error_message: Optional[str]  # Error message if the run failed
    exit_code: int  # Process exit code for the run
    error: Optional[Exception]  # The QSTError that stopped the run
