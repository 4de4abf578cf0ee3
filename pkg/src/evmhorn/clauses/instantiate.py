"""Grounding a specification module against a selector provider.

Every rule is expanded over the cross product of its quantifiers, compile
time parameters are evaluated and baked into predicate names, op
applications are inlined, and selector comprehensions are unrolled.  The
result is a :class:`ClauseSet` of ground Horn clauses.
"""
from __future__ import annotations

from dataclasses import replace

from ..hrt import ast
from .consteval import EvalError, NotConst, eval_const, value_to_expr
from .ir import ClauseSet, GroundClause, Query, mangle
from .selectors import UNIT, SelectorTable


class InstantiationError(ValueError):
    pass


class _DeadClause(Exception):
    """A constant premise evaluated to false; skip the clause."""


class _Grounder:
    def __init__(self, module: ast.Module, selectors: SelectorTable):
        self.module = module
        self.selectors = selectors
        self.out = ClauseSet(preds={}, datatypes=dict(module.datatypes))

    # -- quantifiers -----------------------------------------------------

    def assignments(self, quants: tuple):
        """All binder environments for a quantifier prefix, in order."""
        envs = [{}]
        for quant in quants:
            decl = self.module.sels.get(quant.sel)
            if decl is None:
                raise InstantiationError(f"unknown selector {quant.sel}")
            new_envs = []
            for env in envs:
                args = tuple(self._const(a, env) for a in quant.args)
                for row in self.selectors.query(decl, args):
                    extended = dict(env)
                    for (name, _), value in zip(quant.binders, row):
                        extended[name] = value
                    new_envs.append(extended)
            envs = new_envs
        return envs

    def _const(self, e, env: dict):
        try:
            return eval_const(self.expand(e, env), {})
        except NotConst as exc:
            raise InstantiationError(
                f"expression must be compile-time constant: {exc}"
            ) from exc

    # -- expression expansion --------------------------------------------

    def expand(self, e, subst: dict):
        """Substitute, inline ops, and unroll selector comprehensions."""
        if isinstance(e, ast.Var):
            if e.name in subst:
                value = subst[e.name]
                return value if isinstance(value, tuple(_NODE_TYPES)) else value_to_expr(value)
            return e
        if isinstance(e, ast.Apply):
            if e.name in self.module.ops:
                return self._inline_op(e, subst)
            raise InstantiationError(f"unknown op {e.name}")
        if isinstance(e, ast.SumExpr):
            return self._unroll_sum(e, subst)
        if isinstance(e, ast.Match):
            scruts = tuple(self.expand(s, subst) for s in e.scrutinees)
            arms = []
            for arm in e.arms:
                inner = dict(subst)
                if arm.patterns is not None:
                    for pat in arm.patterns:
                        if isinstance(pat, ast.PCons):
                            for binder in pat.binders:
                                inner.pop(binder, None)
                arms.append(ast.Arm(arm.patterns, self.expand(arm.body, inner)))
            return ast.Match(scruts, tuple(arms))
        return _map_children(e, lambda c: self.expand(c, subst))

    def _inline_op(self, e: ast.Apply, subst: dict):
        op = self.module.ops[e.name]
        if len(e.cargs) != len(op.cparams) or len(e.args) != len(op.params):
            raise InstantiationError(f"op {e.name} applied with wrong arity")
        inner: dict = {}
        for (name, _), carg in zip(op.cparams, e.cargs):
            inner[name] = self._const(carg, subst)
        for (name, _), arg in zip(op.params, e.args):
            inner[name] = self.expand(arg, subst)
        return self.expand(op.body, inner)

    def _unroll_sum(self, e: ast.SumExpr, subst: dict):
        decl = self.module.sels.get(e.sel)
        if decl is None:
            raise InstantiationError(f"unknown selector {e.sel}")
        args = tuple(self._const(a, subst) for a in e.sel_args)
        rows = self.selectors.query(decl, args)
        binder_names = [name for name, _ in e.binders]
        if e.kind == "fold":
            accum_name, _ = e.accum
            acc = self.expand(e.seed, subst)
            for row in rows:
                inner = dict(subst)
                inner.update(zip(binder_names, row))
                inner[accum_name] = acc
                acc = self.expand(e.step, inner)
            return acc
        neutral = {"&&": ast.BoolLit(True), "||": ast.BoolLit(False),
                   "+": ast.Num(0), "*": ast.Num(1)}[e.kind]
        acc = None
        for row in rows:
            inner = dict(subst)
            inner.update(zip(binder_names, row))
            term = self.expand(e.step, inner)
            acc = term if acc is None else ast.BinExpr(e.kind, acc, term)
        return acc if acc is not None else neutral

    # -- clauses ----------------------------------------------------------

    def _pred_app(self, e: ast.Apply, env: dict) -> ast.PredApp:
        decl = self.module.preds[e.name]
        params = tuple(self._const(c, env) for c in e.cargs)
        for value, typ in zip(params, decl.params):
            want_bool = isinstance(typ, ast.TBool)
            if isinstance(value, bool) != want_bool:
                raise InstantiationError(
                    f"predicate {e.name}: parameter {value!r} is not a {typ}"
                )
        name = mangle(e.name, params)
        self.out.preds.setdefault(name, tuple(decl.args))
        return ast.PredApp(name, params, tuple(self.expand(a, env) for a in e.args))

    def _premises(self, premises: tuple, macros: dict, env: dict) -> list:
        out: list = []
        for p in premises:
            if isinstance(p, ast.MacroRef):
                if p.name not in macros:
                    raise InstantiationError(f"unknown macro {p.name}")
                out.extend(self._premises(macros[p.name], macros, env))
                continue
            if isinstance(p, ast.Apply) and p.name in self.module.preds:
                out.append(self._pred_app(p, env))
                continue
            expr = self.expand(p, env)
            try:
                value = eval_const(expr, {})
            except (NotConst, EvalError):
                out.append(expr)
                continue
            if value is False:
                raise _DeadClause()
            # constant-true premises carry no information; drop them
        return out

    def _ground_clause(self, name, variables, premises, macros, env, conclusion):
        body = self._premises(premises, macros, env)
        head = self._pred_app(conclusion, env) if conclusion is not None else None
        used = set()
        for item in [*body] + ([head] if head else []):
            _collect_vars(item, used)
        kept = tuple((n, t) for n, t in variables if n in used)
        return GroundClause(name, kept, tuple(body), head)

    def run(self) -> ClauseSet:
        for rule in self.module.rules:
            macros = dict(rule.macros)
            for env in self.assignments(rule.quants):
                suffix = _env_suffix(rule.quants, env)
                for idx, clause in enumerate(rule.clauses):
                    cname = f"{rule.name}{suffix}#{idx}"
                    try:
                        self.out.clauses.append(self._ground_clause(
                            cname, clause.variables, clause.premises,
                            macros, dict(env), clause.conclusion))
                    except _DeadClause:
                        continue
        for query in self.module.queries:
            self._ground_query(query, expect=None)
        for test in self.module.tests:
            self._ground_query(test, expect=test.expect)
        return self.out

    def _ground_query(self, q, expect: str | None):
        for env in self.assignments(q.quants):
            name = f"{q.name}{_env_suffix(q.quants, env)}"
            try:
                clause = self._ground_clause(
                    name, q.variables, q.premises, {}, dict(env), None)
            except _DeadClause:
                # A constant-false goal premise: the goal stays, provably
                # unreachable, so the query can still be answered.
                clause = GroundClause(name, (), (ast.BoolLit(False),), None)
            self.out.queries.append(Query(name, clause, expect))


_NODE_TYPES = (
    ast.Num, ast.BoolLit, ast.Var, ast.BinExpr, ast.Tilde, ast.Ite,
    ast.Select, ast.StoreExpr, ast.ConstArr, ast.Cons, ast.Tuple_,
    ast.Match, ast.Apply, ast.PredApp, ast.SumExpr,
)


def _map_children(e, fn):
    if isinstance(e, (ast.Num, ast.BoolLit, ast.Var)):
        return e
    if isinstance(e, ast.BinExpr):
        return ast.BinExpr(e.op, fn(e.left), fn(e.right))
    if isinstance(e, ast.Tilde):
        return ast.Tilde(fn(e.operand))
    if isinstance(e, ast.Ite):
        return ast.Ite(fn(e.cond), fn(e.then), fn(e.els))
    if isinstance(e, ast.Select):
        return ast.Select(fn(e.array), fn(e.index))
    if isinstance(e, ast.StoreExpr):
        return ast.StoreExpr(fn(e.array), fn(e.index), fn(e.value))
    if isinstance(e, ast.ConstArr):
        return ast.ConstArr(fn(e.elem))
    if isinstance(e, ast.Cons):
        return ast.Cons(e.name, tuple(fn(a) for a in e.args))
    if isinstance(e, ast.Tuple_):
        return ast.Tuple_(tuple(fn(i) for i in e.items))
    if isinstance(e, ast.PredApp):
        return ast.PredApp(e.name, e.params, tuple(fn(a) for a in e.args))
    raise InstantiationError(f"cannot rewrite {type(e).__name__}")


def _collect_vars(e, out: set) -> None:
    if isinstance(e, ast.Var):
        out.add(e.name)
        return
    if isinstance(e, ast.Match):
        for s in e.scrutinees:
            _collect_vars(s, out)
        for arm in e.arms:
            _collect_vars(arm.body, out)
        return
    if isinstance(e, (ast.Num, ast.BoolLit)):
        return
    if isinstance(e, ast.PredApp):
        for a in e.args:
            _collect_vars(a, out)
        return
    _map_children(e, lambda c: (_collect_vars(c, out), c)[1])


def _env_suffix(quants: tuple, env: dict) -> str:
    parts = []
    for quant in quants:
        for name, _ in quant.binders:
            value = env[name]
            if value == UNIT:
                continue
            parts.append(str(value).replace("-", "n"))
    return ("@" + "_".join(parts)) if parts else ""


def instantiate(module: ast.Module, selectors: SelectorTable) -> ClauseSet:
    """Ground every rule, query, and test declaration in ``module``."""
    return _Grounder(module, selectors).run()
