"""Rendering encoded clause sets as constrained-Horn-clause scripts in
smt-lib 2 concrete syntax (logic HORN).

One script is produced per query: the goal becomes a clause with a
``false`` head, so an *unsatisfiable* script means the goal is reachable.
Output is deterministic for byte-stable golden tests.
"""
from __future__ import annotations

from ..clauses.ir import ClauseSet, GroundClause, Query
from ..hrt import ast

_SORTS = {
    "int": "Int",
    "bool": "Bool",
    "aint": "(Array Int Int)",
    "abool": "(Array Int Bool)",
}

_OPS = {"+": "+", "-": "-", "*": "*", "div": "div", "mod": "mod",
        "<": "<", ">": ">", "<=": "<=", ">=": ">=",
        "&&": "and", "||": "or", "=": "="}


class EmitError(ValueError):
    pass


def _sym(name: str) -> str:
    """Quote identifiers: clause variables carry sigils like ? and $."""
    if name.replace("_", "").replace(".", "").isalnum() and not name[0].isdigit():
        return name
    return f"|{name}|"


def _sort_of(e, env: dict) -> str:
    if isinstance(e, ast.Num):
        return "int"
    if isinstance(e, ast.BoolLit):
        return "bool"
    if isinstance(e, ast.Var):
        return env[e.name]
    if isinstance(e, ast.BinExpr):
        if e.op in ("&&", "||", "=", "!=", "<", ">", "<=", ">="):
            return "bool"
        return "int"
    if isinstance(e, ast.Tilde):
        return _sort_of(e.operand, env)
    if isinstance(e, ast.Ite):
        return _sort_of(e.then, env)
    if isinstance(e, ast.Select):
        inner = _sort_of(e.array, env)
        return {"aint": "int", "abool": "bool"}[inner]
    if isinstance(e, ast.StoreExpr):
        return _sort_of(e.array, env)
    if isinstance(e, ast.ConstArr):
        return {"int": "aint", "bool": "abool"}[_sort_of(e.elem, env)]
    raise EmitError(f"cannot sort {type(e).__name__}")


def _emit(e, env: dict) -> str:
    if isinstance(e, ast.Num):
        return f"(- {-e.value})" if e.value < 0 else str(e.value)
    if isinstance(e, ast.BoolLit):
        return "true" if e.value else "false"
    if isinstance(e, ast.Var):
        return _sym(e.name)
    if isinstance(e, ast.BinExpr):
        if e.op == "!=":
            return f"(not (= {_emit(e.left, env)} {_emit(e.right, env)}))"
        op = _OPS.get(e.op)
        if op is None:
            raise EmitError(f"operator {e.op} has no smt-lib rendering")
        return f"({op} {_emit(e.left, env)} {_emit(e.right, env)})"
    if isinstance(e, ast.Tilde):
        inner = _emit(e.operand, env)
        if _sort_of(e.operand, env) == "bool":
            return f"(not {inner})"
        return f"(- 0 {inner})"
    if isinstance(e, ast.Ite):
        return f"(ite {_emit(e.cond, env)} {_emit(e.then, env)} {_emit(e.els, env)})"
    if isinstance(e, ast.Select):
        return f"(select {_emit(e.array, env)} {_emit(e.index, env)})"
    if isinstance(e, ast.StoreExpr):
        return (f"(store {_emit(e.array, env)} {_emit(e.index, env)}"
                f" {_emit(e.value, env)})")
    if isinstance(e, ast.ConstArr):
        elem_sort = _sort_of(e.elem, env)
        arr_sort = _SORTS[{"int": "aint", "bool": "abool"}[elem_sort]]
        return f"((as const {arr_sort}) {_emit(e.elem, env)})"
    if isinstance(e, ast.PredApp):
        if not e.args:
            return _sym(e.name)
        return f"({_sym(e.name)} {' '.join(_emit(a, env) for a in e.args)})"
    raise EmitError(f"cannot emit {type(e).__name__}")


def _emit_clause(clause: GroundClause, goal: bool = False) -> str:
    env = dict(clause.variables)
    head = "false" if goal or clause.head is None else _emit(clause.head, env)
    body_parts = [_emit(p, env) for p in clause.premises]
    if not body_parts:
        body = "true"
    elif len(body_parts) == 1:
        body = body_parts[0]
    else:
        body = f"(and {' '.join(body_parts)})"
    imp = f"(=> {body} {head})"
    if clause.variables:
        binders = " ".join(f"({_sym(n)} {_SORTS[s]})" for n, s in clause.variables)
        return f"(assert (forall ({binders}) {imp}))"
    return f"(assert {imp})"


def emit_script(cs: ClauseSet, query: Query) -> str:
    """A complete check-sat script for one reachability goal."""
    if not cs.encoded:
        raise EmitError("clause set must be value-encoded first")
    lines = ["(set-logic HORN)", f"; goal: {query.name}"]
    for name in sorted(cs.preds):
        sig = " ".join(_SORTS[s] for s in cs.preds[name])
        lines.append(f"(declare-fun {_sym(name)} ({sig}) Bool)")
    for clause in cs.clauses:
        lines.append(f"; {clause.name}")
        lines.append(_emit_clause(clause))
    lines.append(f"; query {query.name}")
    lines.append(_emit_clause(query.clause, goal=True))
    lines.append("(check-sat)")
    return "\n".join(lines) + "\n"
