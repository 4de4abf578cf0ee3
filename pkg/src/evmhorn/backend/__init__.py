from .evaluate import (  # noqa: F401
    EvaluationError,
    Evaluator,
    QueryResult,
    Verdict,
    run_queries,
    saturate,
)
from .smtlib import EmitError, emit_script  # noqa: F401
from .solver import SolverError, find_solver, interpret, run_solver  # noqa: F401
