"""Sandboxed code execution for the interpreter-only baseline agent.

Snippets run in a subprocess with an isolated working directory, a wall
time limit, and an address-space cap; stdout/stderr become the tool
observation.
"""

from __future__ import annotations

import subprocess
import sys
import tempfile
from dataclasses import dataclass
from pathlib import Path

DEFAULT_TIME_LIMIT_S = 120.0
DEFAULT_MEMORY_LIMIT_BYTES = 2 * 1024**3


@dataclass
class SandboxConfig:
    time_limit_s: float = DEFAULT_TIME_LIMIT_S
    memory_limit_bytes: int = DEFAULT_MEMORY_LIMIT_BYTES
    workdir: Path | None = None


def run_snippet(code: str, config: SandboxConfig | None = None) -> str:
    """Execute a code snippet; resource violations surface as
    'Error: resource limit' observations rather than exceptions."""
    config = config or SandboxConfig()
    workdir = config.workdir or Path(tempfile.mkdtemp(prefix="sandbox_"))
    workdir.mkdir(parents=True, exist_ok=True)
    script = workdir / "snippet.py"
    script.write_text(code)

    def _limits() -> None:
        import resource

        resource.setrlimit(
            resource.RLIMIT_AS, (config.memory_limit_bytes, config.memory_limit_bytes)
        )

    try:
        proc = subprocess.run(
            [sys.executable, "-I", str(script)],
            cwd=workdir,
            capture_output=True,
            text=True,
            timeout=config.time_limit_s,
            preexec_fn=_limits,
        )
    except subprocess.TimeoutExpired:
        return f"Error: resource limit (wall time {config.time_limit_s:g} s exceeded)"
    out = proc.stdout
    if proc.stderr:
        out += ("\n" if out else "") + proc.stderr
    if proc.returncode != 0:
        if "MemoryError" in proc.stderr or proc.returncode in (-9, 137):
            return "Error: resource limit (memory)\n" + out
        return f"Error: exit code {proc.returncode}\n{out}"
    return out.strip() or "(no output)"
