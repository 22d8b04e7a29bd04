"""Python access to the topopt core: configs, scenario runs, geometry fields."""

import json

from ._core import (  # noqa: F401
    Config,
    ConfigurationError,
    SolverError,
    geometry_fields,
    load_config,
    parse_config,
)
from ._core import run as _run

EXIT_CONVERGED = 0
EXIT_ERROR = 1
EXIT_NOT_CONVERGED = 2


def run(config, max_iterations=-1, snapshot_every=-1, verbose=False):
    """Run a scenario; returns (exit status, summary dict)."""
    r = _run(config, max_iterations, snapshot_every, verbose)
    summary = json.loads(r["summary_json"]) if r["summary_json"] else {"status": "error", "error": r["error"]}
    return r["status"], summary
