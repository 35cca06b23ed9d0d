"""Import shim so the tests can reuse scripts/run_experiments.py."""

import importlib.util
from pathlib import Path

_loader_spec = importlib.util.spec_from_file_location(
    "run_experiments", Path(__file__).resolve().parent.parent / "scripts" / "run_experiments.py"
)
_mod = importlib.util.module_from_spec(_loader_spec)
_loader_spec.loader.exec_module(_mod)
command_for = _mod.command_for
