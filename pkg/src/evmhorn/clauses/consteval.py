"""Compile-time evaluation of ground specification expressions.

Values are Python ints and bools, tuples, constructor values, and arrays
modelled as a default plus finitely many exceptions.  Anything touching a
clause variable raises :class:`NotConst`.
"""
from __future__ import annotations

from dataclasses import dataclass

from ..hrt import ast


class NotConst(Exception):
    """The expression depends on a run-time value."""


class EvalError(ValueError):
    """The expression is constant but ill-formed (e.g. bad match)."""


@dataclass(frozen=True)
class ConsV:
    name: str
    args: tuple = ()


@dataclass(frozen=True)
class ArrV:
    default: object
    items: tuple = ()  # sorted ((index, value), ...), values != default

    def get(self, index):
        for k, v in self.items:
            if k == index:
                return v
        return self.default

    def set(self, index, value) -> "ArrV":
        entries = dict(self.items)
        if value == self.default:
            entries.pop(index, None)
        else:
            entries[index] = value
        return ArrV(self.default, tuple(sorted(entries.items())))


def _as_int(v) -> int:
    if isinstance(v, bool) or not isinstance(v, int):
        raise EvalError(f"expected an integer, got {v!r}")
    return v


def _as_bool(v) -> bool:
    if not isinstance(v, bool):
        raise EvalError(f"expected a boolean, got {v!r}")
    return v


_ARITH = {
    "+": lambda a, b: a + b,
    "-": lambda a, b: a - b,
    "*": lambda a, b: a * b,
    # Euclidean-style semantics matching the solver theory of integers:
    # the result of mod is non-negative for a positive divisor.
    "div": lambda a, b: a // b if b > 0 else -(a // -b),
    "mod": lambda a, b: a % b if b > 0 else a % -b,
    "<": lambda a, b: a < b,
    ">": lambda a, b: a > b,
    "<=": lambda a, b: a <= b,
    ">=": lambda a, b: a >= b,
}


def eval_const(e, env: dict):
    """Evaluate ``e`` with ``env`` mapping variable names to values."""
    if isinstance(e, ast.Num):
        return e.value
    if isinstance(e, ast.BoolLit):
        return e.value
    if isinstance(e, ast.Var):
        if e.name in env:
            return env[e.name]
        raise NotConst(e.name)
    if isinstance(e, ast.BinExpr):
        if e.op == "&&":
            return _as_bool(eval_const(e.left, env)) and _as_bool(eval_const(e.right, env))
        if e.op == "||":
            return _as_bool(eval_const(e.left, env)) or _as_bool(eval_const(e.right, env))
        left = eval_const(e.left, env)
        right = eval_const(e.right, env)
        if e.op == "=":
            return left == right
        if e.op == "!=":
            return left != right
        fn = _ARITH.get(e.op)
        if fn is None:
            raise EvalError(f"unknown operator {e.op}")
        if e.op in ("div", "mod") and _as_int(right) == 0:
            raise EvalError("division by zero in a constant expression")
        return fn(_as_int(left), _as_int(right))
    if isinstance(e, ast.Tilde):
        v = eval_const(e.operand, env)
        return -v if isinstance(v, int) and not isinstance(v, bool) else not _as_bool(v)
    if isinstance(e, ast.Ite):
        return eval_const(e.then if _as_bool(eval_const(e.cond, env)) else e.els, env)
    if isinstance(e, ast.Select):
        arr = eval_const(e.array, env)
        if not isinstance(arr, ArrV):
            raise EvalError(f"select on non-array {arr!r}")
        return arr.get(eval_const(e.index, env))
    if isinstance(e, ast.StoreExpr):
        arr = eval_const(e.array, env)
        if not isinstance(arr, ArrV):
            raise EvalError(f"store on non-array {arr!r}")
        return arr.set(eval_const(e.index, env), eval_const(e.value, env))
    if isinstance(e, ast.ConstArr):
        return ArrV(eval_const(e.elem, env))
    if isinstance(e, ast.Cons):
        return ConsV(e.name, tuple(eval_const(a, env) for a in e.args))
    if isinstance(e, ast.Tuple_):
        return tuple(eval_const(i, env) for i in e.items)
    if isinstance(e, ast.Match):
        scruts = [eval_const(s, env) for s in e.scrutinees]
        for arm in e.arms:
            bound = _match_arm(arm.patterns, scruts)
            if bound is not None:
                return eval_const(arm.body, {**env, **bound})
        raise EvalError("no match arm applies")
    raise NotConst(type(e).__name__)


def _match_arm(patterns, scruts):
    """Bindings if the arm matches the scrutinee values, else None."""
    if patterns is None:
        return {}
    bound: dict = {}
    for pat, value in zip(patterns, scruts):
        if isinstance(pat, ast.PAny):
            continue
        if isinstance(pat, ast.PLit):
            if value != pat.value:
                return None
            continue
        if not (isinstance(value, ConsV) and value.name == pat.name):
            return None
        for binder, payload in zip(pat.binders, value.args):
            if binder is not None:
                bound[binder] = payload
    return bound


def value_to_expr(v):
    """Re-quote a constant value as an expression."""
    if isinstance(v, bool):
        return ast.BoolLit(v)
    if isinstance(v, int):
        return ast.Num(v)
    if isinstance(v, ConsV):
        return ast.Cons(v.name, tuple(value_to_expr(a) for a in v.args))
    if isinstance(v, ArrV):
        out = ast.ConstArr(value_to_expr(v.default))
        for k, item in v.items:
            out = ast.StoreExpr(out, value_to_expr(k), value_to_expr(item))
        return out
    if isinstance(v, tuple):
        return ast.Tuple_(tuple(value_to_expr(i) for i in v))
    raise EvalError(f"cannot quote {v!r}")
