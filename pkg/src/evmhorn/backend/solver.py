"""Driving an external Horn solver over an emitted script.

The solver sees the reachability goal as a clause with a false head, so
the raw answers invert: ``unsat`` means the goal *is* reachable.  That
inversion lives in exactly one place, :func:`interpret`.
"""
from __future__ import annotations

import shutil
import subprocess
import tempfile
from pathlib import Path

from .evaluate import Verdict


class SolverError(RuntimeError):
    pass


def find_solver(preferred: str | None = None) -> str | None:
    """Path of an installed Horn solver binary, if any."""
    candidates = [preferred] if preferred else ["z3", "eld", "eldarica"]
    for cand in candidates:
        if cand and shutil.which(cand):
            return cand
    return None


def run_solver(script: str, solver: str, timeout: float = 60.0) -> str:
    """Run the solver on a script; return its final answer token."""
    with tempfile.TemporaryDirectory() as tmp:
        path = Path(tmp) / "query.smt2"
        path.write_text(script)
        cmd = [solver, str(path)]
        try:
            proc = subprocess.run(
                cmd, capture_output=True, text=True, timeout=timeout, check=False)
        except subprocess.TimeoutExpired:
            return "timeout"
    for line in (proc.stdout or "").splitlines():
        token = line.strip()
        if token in ("sat", "unsat", "unknown"):
            return token
    if proc.returncode != 0:
        raise SolverError(proc.stderr.strip() or f"solver exited {proc.returncode}")
    return "unknown"


def interpret(answer: str) -> Verdict:
    """Map a solver answer on a false-headed goal script to a verdict."""
    if answer == "unsat":
        return Verdict.REACHABLE
    if answer == "sat":
        return Verdict.UNREACHABLE
    return Verdict.UNKNOWN
