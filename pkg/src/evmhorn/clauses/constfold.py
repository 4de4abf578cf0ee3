"""Constant folding over ground clauses.

Evaluates closed subexpressions, simplifies trivial boolean/arithmetic
identities, resolves matches whose scrutinee shape is known, and drops
clauses with a premise that is constantly false.
"""
from __future__ import annotations

from ..hrt import ast
from .consteval import EvalError, NotConst, eval_const, value_to_expr
from .instantiate import _map_children
from .ir import ClauseSet, GroundClause, Query


def simplify(e):
    if isinstance(e, (ast.Num, ast.BoolLit, ast.Var)):
        return e
    if isinstance(e, ast.PredApp):
        return ast.PredApp(e.name, e.params, tuple(simplify(a) for a in e.args))
    if isinstance(e, ast.Match):
        return _simplify_match(e)
    e = _map_children(e, simplify)
    try:
        return value_to_expr(eval_const(e, {}))
    except (NotConst, EvalError):
        pass
    if isinstance(e, ast.BinExpr):
        return _simplify_binexpr(e)
    if isinstance(e, ast.Ite):
        if isinstance(e.cond, ast.BoolLit):
            return e.then if e.cond.value else e.els
        if e.then == e.els:
            return e.then
    if isinstance(e, ast.Tilde) and isinstance(e.operand, ast.Tilde):
        return e.operand.operand
    if isinstance(e, ast.Select):
        return _simplify_select(e)
    return e


def _simplify_binexpr(e: ast.BinExpr):
    left, right, op = e.left, e.right, e.op
    if op == "&&":
        for a, b in ((left, right), (right, left)):
            if isinstance(a, ast.BoolLit):
                return b if a.value else ast.BoolLit(False)
    if op == "||":
        for a, b in ((left, right), (right, left)):
            if isinstance(a, ast.BoolLit):
                return ast.BoolLit(True) if a.value else b
    if op == "+":
        if left == ast.Num(0):
            return right
        if right == ast.Num(0):
            return left
    if op == "-" and right == ast.Num(0):
        return left
    if op == "*":
        for a, b in ((left, right), (right, left)):
            if a == ast.Num(1):
                return b
            if a == ast.Num(0):
                return ast.Num(0)
    if op in ("=", "<=", ">=") and left == right:
        return ast.BoolLit(True)
    if op in ("!=", "<", ">") and left == right:
        return ast.BoolLit(False)
    return e


def _simplify_select(e: ast.Select):
    array, index = e.array, e.index
    while True:
        if isinstance(array, ast.ConstArr):
            return array.elem
        if not isinstance(array, ast.StoreExpr):
            return ast.Select(array, index)
        if array.index == index:
            return array.value
        # Distinct constant indices cannot alias; look through the store.
        if (isinstance(array.index, ast.Num) and isinstance(index, ast.Num)
                and array.index.value != index.value):
            array = array.array
            continue
        return ast.Select(array, index)


def _substitute(e, env: dict):
    if isinstance(e, ast.Var):
        return env.get(e.name, e)
    if isinstance(e, ast.Match):
        scruts = tuple(_substitute(s, env) for s in e.scrutinees)
        arms = []
        for arm in e.arms:
            inner = dict(env)
            if arm.patterns is not None:
                for pat in arm.patterns:
                    if isinstance(pat, ast.PCons):
                        for binder in pat.binders:
                            inner.pop(binder, None)
            arms.append(ast.Arm(arm.patterns, _substitute(arm.body, inner)))
        return ast.Match(scruts, tuple(arms))
    return _map_children(e, lambda c: _substitute(c, env))


def _simplify_match(e: ast.Match):
    scruts = tuple(simplify(s) for s in e.scrutinees)
    # Resolve arms whose outcome follows from the scrutinee's visible shape.
    arms = []
    for arm in e.arms:
        verdict, bound = _arm_outcome(arm.patterns, scruts)
        if verdict == "no":
            continue
        if verdict == "yes":
            body = simplify(_substitute(arm.body, bound))
            if not arms:
                return body
            # Earlier arms may still apply; this one becomes the default.
            arms.append(ast.Arm(None, body))
            break
        arms.append(ast.Arm(arm.patterns, simplify(arm.body)))
    if not arms:
        raise EvalError("no match arm can apply")
    return ast.Match(scruts, tuple(arms))


def _arm_outcome(patterns, scruts):
    """("yes", bindings) if the arm certainly matches, "no" if it cannot,
    or ("maybe", None) when the scrutinee shape is not yet known."""
    if patterns is None:
        return "yes", {}
    bound: dict = {}
    for pat, scrut in zip(patterns, scruts):
        if isinstance(pat, ast.PAny):
            continue
        if isinstance(pat, ast.PLit):
            want = ast.BoolLit(pat.value) if isinstance(pat.value, bool) else ast.Num(pat.value)
            if scrut == want:
                continue
            if isinstance(scrut, (ast.Num, ast.BoolLit)):
                return "no", None
            return "maybe", None
        if isinstance(scrut, ast.Cons):
            if scrut.name != pat.name:
                return "no", None
            for binder, payload in zip(pat.binders, scrut.args):
                if binder is not None:
                    bound[binder] = payload
            continue
        return "maybe", None
    return "yes", bound


def _conjuncts(e):
    if isinstance(e, ast.BinExpr) and e.op == "&&":
        yield from _conjuncts(e.left)
        yield from _conjuncts(e.right)
    else:
        yield e


def _fold_clause(clause: GroundClause) -> GroundClause | None:
    premises = []
    for p in clause.premises:
        for q in _conjuncts(simplify(p)):
            if isinstance(q, ast.BoolLit):
                if not q.value:
                    return None
                continue
            premises.append(q)
    head = simplify(clause.head) if clause.head is not None else None
    return GroundClause(clause.name, clause.variables, tuple(premises), head)


def fold_constants(cs: ClauseSet) -> ClauseSet:
    out = ClauseSet(preds=dict(cs.preds), datatypes=dict(cs.datatypes),
                    layouts=dict(cs.layouts), encoded=cs.encoded)
    for clause in cs.clauses:
        folded = _fold_clause(clause)
        if folded is not None:
            out.clauses.append(folded)
    for query in cs.queries:
        folded = _fold_clause(query.clause)
        if folded is None:
            # The goal body is constantly false: keep the query (it must
            # still be answered) but make its unreachability explicit.
            folded = GroundClause(query.clause.name, (), (ast.BoolLit(False),), None)
        out.queries.append(Query(query.name, folded, query.expect))
    return out
