"""Static reachability analysis for EVM bytecode via constrained Horn clauses."""

__version__ = "0.1.0"
