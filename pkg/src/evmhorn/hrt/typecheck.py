"""Type checker for specification modules."""
from __future__ import annotations

from . import ast


class HrtTypeError(TypeError):
    pass


_PRIMITIVE = (ast.TInt, ast.TBool)


def _is_primitive(t) -> bool:
    return isinstance(t, _PRIMITIVE)


class Checker:
    def __init__(self, mod: ast.Module):
        self.mod = mod
        # constructor name -> (datatype name, payload types)
        self.constructors: dict[str, tuple[str, tuple]] = {}
        for dt in mod.datatypes.values():
            for cname, payload in dt.constructors:
                if cname in self.constructors:
                    raise HrtTypeError(f"duplicate constructor {cname}")
                self.constructors[cname] = (dt.name, payload)

    # -- module -----------------------------------------------------------
    def check(self) -> None:
        for dt in self.mod.datatypes.values():
            for _, payload in dt.constructors:
                for t in payload:
                    self.check_type(t)
        for pd in self.mod.preds.values():
            for t in pd.params:
                if not _is_primitive(t):
                    raise HrtTypeError(f"pred {pd.name}: parameters must be primitive")
            for t in pd.args:
                self.check_type(t)
        for sd in self.mod.sels.values():
            for t in (*sd.dom, *sd.cod):
                if not (_is_primitive(t) or isinstance(t, ast.TUnit)):
                    raise HrtTypeError(f"sel {sd.name}: selector types must be primitive")
        self.check_ops()
        for rule in self.mod.rules:
            self.check_rule(rule)
        for query in self.mod.queries:
            self.check_clause_body(query.quants, query.variables, query.premises,
                                   None, f"query {query.name}")
        for test in self.mod.tests:
            self.check_clause_body(test.quants, test.variables, test.premises,
                                   None, f"test {test.name}")

    def check_type(self, t) -> None:
        if isinstance(t, ast.TArray):
            self.check_type(t.elem)
        elif isinstance(t, ast.TSum):
            if t.name not in self.mod.datatypes:
                raise HrtTypeError(f"unknown datatype {t.name}")
        elif not isinstance(t, (ast.TInt, ast.TBool, ast.TUnit)):
            raise HrtTypeError(f"bad type {t!r}")

    def check_ops(self) -> None:
        # Ops are macros and must not be (mutually) recursive.
        visiting: set[str] = set()
        done: set[str] = set()

        def visit(name: str) -> None:
            if name in done:
                return
            if name in visiting:
                raise HrtTypeError(f"recursive op {name}")
            visiting.add(name)
            for callee in self._op_callees(self.mod.ops[name].body):
                if callee in self.mod.ops:
                    visit(callee)
            visiting.discard(name)
            done.add(name)

        for name in self.mod.ops:
            visit(name)
        for op in self.mod.ops.values():
            env = {n: t for n, t in (*op.cparams, *op.params)}
            for _, t in (*op.cparams, *op.params):
                self.check_type(t)
            got = self.infer(op.body, env)
            if got != op.ret:
                raise HrtTypeError(f"op {op.name}: body has type {got}, declared {op.ret}")

    def _op_callees(self, expr) -> set[str]:
        out: set[str] = set()

        def walk(e) -> None:
            if isinstance(e, ast.Apply):
                out.add(e.name)
            for child in _children(e):
                walk(child)

        walk(expr)
        return out

    # -- rules --------------------------------------------------------------
    def quant_env(self, quants: tuple, where: str) -> dict:
        env: dict = {}
        for quant in quants:
            sd = self.mod.sels.get(quant.sel)
            if sd is None:
                raise HrtTypeError(f"{where}: unknown selector {quant.sel}")
            if len(quant.args) != len(sd.dom):
                raise HrtTypeError(f"{where}: selector {quant.sel} expects {len(sd.dom)} args")
            for arg, want in zip(quant.args, sd.dom):
                got = self.infer(arg, env)
                if got != want:
                    raise HrtTypeError(f"{where}: selector {quant.sel} arg has type {got}, wants {want}")
            if len(quant.binders) != len(sd.cod):
                raise HrtTypeError(f"{where}: selector {quant.sel} yields {len(sd.cod)}-tuples")
            for (bname, btype), want in zip(quant.binders, sd.cod):
                if btype != want:
                    raise HrtTypeError(f"{where}: binder {bname} declared {btype}, selector yields {want}")
                env[bname] = btype
        return env

    def check_rule(self, rule: ast.RuleDef) -> None:
        where = f"rule {rule.name}"
        qenv = self.quant_env(rule.quants, where)
        macros = dict(rule.macros)
        for clause in rule.clauses:
            premises = expand_macros(clause.premises, macros)
            self.check_clause_body(
                (), clause.variables, premises, clause.conclusion, where, base_env=qenv
            )

    def check_clause_body(self, quants, variables, premises, conclusion, where,
                          base_env=None) -> None:
        env = dict(base_env or {})
        env.update(self.quant_env(quants, where))
        for vname, vtype in variables:
            self.check_type(vtype)
            env[vname] = vtype
        for premise in premises:
            self.check_premise(premise, env, where)
        if conclusion is not None:
            if not (isinstance(conclusion, ast.Apply) and conclusion.name in self.mod.preds):
                raise HrtTypeError(f"{where}: conclusion must be a predicate application")
            self.check_pred_app(conclusion, env, where)

    def check_premise(self, premise, env, where) -> None:
        if isinstance(premise, ast.MacroRef):
            raise HrtTypeError(f"{where}: undefined macro {premise.name}")
        if isinstance(premise, ast.Apply) and premise.name in self.mod.preds:
            self.check_pred_app(premise, env, where)
            return
        got = self.infer(premise, env)
        if got != ast.BOOL:
            raise HrtTypeError(f"{where}: premise has type {got}, expected bool")

    def check_pred_app(self, app: ast.Apply, env, where) -> None:
        pd = self.mod.preds[app.name]
        if len(app.cargs) != len(pd.params):
            raise HrtTypeError(f"{where}: {app.name} takes {len(pd.params)} parameters")
        for param, want in zip(app.cargs, pd.params):
            got = self.infer(param, env)
            if got != want:
                raise HrtTypeError(f"{where}: {app.name} parameter has type {got}, wants {want}")
        if len(app.args) != len(pd.args):
            raise HrtTypeError(f"{where}: {app.name} takes {len(pd.args)} arguments")
        for arg, want in zip(app.args, pd.args):
            got = self.infer(arg, env)
            if got != want:
                raise HrtTypeError(f"{where}: {app.name} argument has type {got}, wants {want}")

    # -- expressions ----------------------------------------------------------
    def infer(self, e, env: dict):
        if isinstance(e, ast.Num):
            return ast.INT
        if isinstance(e, ast.BoolLit):
            return ast.BOOL
        if isinstance(e, ast.Var):
            if e.name not in env:
                raise HrtTypeError(f"unbound variable {e.name}")
            return env[e.name]
        if isinstance(e, ast.BinExpr):
            lt, rt = self.infer(e.left, env), self.infer(e.right, env)
            if e.op in ("+", "-", "*", "mod", "div"):
                if lt != ast.INT or rt != ast.INT:
                    raise HrtTypeError(f"arithmetic '{e.op}' needs int operands, got {lt}, {rt}")
                return ast.INT
            if e.op in ("<", ">", "<=", ">="):
                if lt != ast.INT or rt != ast.INT:
                    raise HrtTypeError(f"comparison '{e.op}' needs int operands, got {lt}, {rt}")
                return ast.BOOL
            if e.op in ("=", "!="):
                if lt != rt:
                    raise HrtTypeError(f"'{e.op}' operands differ: {lt} vs {rt}")
                return ast.BOOL
            if e.op in ("&&", "||"):
                if lt != ast.BOOL or rt != ast.BOOL:
                    raise HrtTypeError(f"'{e.op}' needs bool operands, got {lt}, {rt}")
                return ast.BOOL
            raise HrtTypeError(f"unknown operator {e.op}")
        if isinstance(e, ast.Tilde):
            t = self.infer(e.operand, env)
            if t not in (ast.INT, ast.BOOL):
                raise HrtTypeError(f"'~' needs int or bool, got {t}")
            return t
        if isinstance(e, ast.Ite):
            if self.infer(e.cond, env) != ast.BOOL:
                raise HrtTypeError("ternary condition must be bool")
            tt, et = self.infer(e.then, env), self.infer(e.els, env)
            if tt != et:
                raise HrtTypeError(f"ternary branches differ: {tt} vs {et}")
            return tt
        if isinstance(e, ast.Select):
            at = self.infer(e.array, env)
            if not isinstance(at, ast.TArray):
                raise HrtTypeError(f"select on non-array {at}")
            if self.infer(e.index, env) != ast.INT:
                raise HrtTypeError("select index must be int")
            return at.elem
        if isinstance(e, ast.StoreExpr):
            at = self.infer(e.array, env)
            if not isinstance(at, ast.TArray):
                raise HrtTypeError(f"store on non-array {at}")
            if self.infer(e.index, env) != ast.INT:
                raise HrtTypeError("store index must be int")
            vt = self.infer(e.value, env)
            if vt != at.elem:
                raise HrtTypeError(f"store value type {vt} does not match array of {at.elem}")
            return at
        if isinstance(e, ast.ConstArr):
            return ast.TArray(self.infer(e.elem, env))
        if isinstance(e, ast.Cons):
            if e.name not in self.constructors:
                raise HrtTypeError(f"unknown constructor {e.name}")
            owner, payload = self.constructors[e.name]
            if len(e.args) != len(payload):
                raise HrtTypeError(f"{e.name} takes {len(payload)} payload values")
            for arg, want in zip(e.args, payload):
                got = self.infer(arg, env)
                if got != want:
                    raise HrtTypeError(f"{e.name} payload has type {got}, wants {want}")
            return ast.TSum(owner)
        if isinstance(e, ast.Match):
            return self.infer_match(e, env)
        if isinstance(e, ast.Apply):
            if e.name in self.mod.preds:
                raise HrtTypeError(f"predicate {e.name} used in expression position")
            op = self.mod.ops.get(e.name)
            if op is None:
                raise HrtTypeError(f"unknown op {e.name}")
            if len(e.cargs) != len(op.cparams) or len(e.args) != len(op.params):
                raise HrtTypeError(f"op {e.name}: wrong arity")
            for arg, (_, want) in zip(e.cargs, op.cparams):
                got = self.infer(arg, env)
                if got != want:
                    raise HrtTypeError(f"op {e.name}: parameter has type {got}, wants {want}")
            for arg, (_, want) in zip(e.args, op.params):
                got = self.infer(arg, env)
                if got != want:
                    raise HrtTypeError(f"op {e.name}: argument has type {got}, wants {want}")
            return op.ret
        if isinstance(e, ast.SumExpr):
            return self.infer_sum(e, env)
        if isinstance(e, ast.Tuple_):
            raise HrtTypeError("tuples are only valid as match scrutinees")
        raise HrtTypeError(f"cannot type {e!r}")

    def infer_match(self, e: ast.Match, env: dict):
        scrut_types = [self.infer(s, env) for s in e.scrutinees]
        body_type = None
        covered: set[tuple] = set()
        has_catchall = False
        for arm in e.arms:
            arm_env = dict(env)
            if arm.patterns is None:
                has_catchall = True
            else:
                if len(arm.patterns) != len(scrut_types):
                    raise HrtTypeError("pattern arity does not match scrutinee")
                names: list[str] = []
                for pat, st in zip(arm.patterns, scrut_types):
                    if isinstance(pat, ast.PAny):
                        names.append("_")
                        continue
                    if isinstance(pat, ast.PLit):
                        want = ast.BOOL if isinstance(pat.value, bool) else ast.INT
                        if st != want:
                            raise HrtTypeError(f"literal pattern {pat.value} on {st}")
                        names.append("_")
                        continue
                    if not isinstance(st, ast.TSum):
                        raise HrtTypeError(f"constructor pattern on non-sum type {st}")
                    if pat.name not in self.constructors:
                        raise HrtTypeError(f"unknown constructor {pat.name}")
                    owner, payload = self.constructors[pat.name]
                    if owner != st.name:
                        raise HrtTypeError(f"pattern {pat.name} does not belong to {st.name}")
                    if len(pat.binders) != len(payload):
                        raise HrtTypeError(f"pattern {pat.name} binds {len(payload)} values")
                    for binder, btype in zip(pat.binders, payload):
                        if binder is not None:
                            arm_env[binder] = btype
                    names.append(pat.name)
                covered.add(tuple(names))
            bt = self.infer(arm.body, arm_env)
            if body_type is None:
                body_type = bt
            elif bt != body_type:
                raise HrtTypeError(f"match arms differ in type: {body_type} vs {bt}")
        if not has_catchall and not self._exhaustive(scrut_types, covered):
            raise HrtTypeError("non-exhaustive match (add a '_' arm)")
        return body_type

    def _exhaustive(self, scrut_types, covered: set) -> bool:
        if len(scrut_types) != 1 or not isinstance(scrut_types[0], ast.TSum):
            return False
        ctors = {c for c, _ in self.mod.datatypes[scrut_types[0].name].constructors}
        seen = {names[0] for names in covered}
        return "_" not in seen and seen >= ctors

    def infer_sum(self, e: ast.SumExpr, env: dict):
        sd = self.mod.sels.get(e.sel)
        if sd is None:
            raise HrtTypeError(f"unknown selector {e.sel}")
        if len(e.sel_args) != len(sd.dom):
            raise HrtTypeError(f"selector {e.sel} expects {len(sd.dom)} args")
        for arg, want in zip(e.sel_args, sd.dom):
            got = self.infer(arg, env)
            if got != want:
                raise HrtTypeError(f"selector {e.sel} arg has type {got}, wants {want}")
        if len(e.binders) != len(sd.cod):
            raise HrtTypeError(f"selector {e.sel} yields {len(sd.cod)}-tuples")
        inner = dict(env)
        for (bname, btype), want in zip(e.binders, sd.cod):
            if btype != want:
                raise HrtTypeError(f"binder {bname} declared {btype}, selector yields {want}")
            inner[bname] = btype
        if e.kind == "fold":
            accum_name, accum_type = e.accum
            seed_type = self.infer(e.seed, env)
            if seed_type != accum_type:
                raise HrtTypeError(f"fold seed has type {seed_type}, accumulator is {accum_type}")
            inner[accum_name] = accum_type
            step_type = self.infer(e.step, inner)
            if step_type != accum_type:
                raise HrtTypeError(f"fold step has type {step_type}, accumulator is {accum_type}")
            return accum_type
        want = ast.BOOL if e.kind in ("&&", "||") else ast.INT
        got = self.infer(e.step, inner)
        if got != want:
            raise HrtTypeError(f"'{e.kind}' reduction needs {want} steps, got {got}")
        return want


def _children(e) -> tuple:
    if isinstance(e, ast.BinExpr):
        return (e.left, e.right)
    if isinstance(e, ast.Tilde):
        return (e.operand,)
    if isinstance(e, ast.Ite):
        return (e.cond, e.then, e.els)
    if isinstance(e, ast.Select):
        return (e.array, e.index)
    if isinstance(e, ast.StoreExpr):
        return (e.array, e.index, e.value)
    if isinstance(e, ast.ConstArr):
        return (e.elem,)
    if isinstance(e, ast.Cons):
        return e.args
    if isinstance(e, ast.Match):
        return (*e.scrutinees, *(arm.body for arm in e.arms))
    if isinstance(e, ast.Apply):
        return (*e.cargs, *e.args)
    if isinstance(e, ast.SumExpr):
        extra = (e.seed,) if e.seed is not None else ()
        return (*e.sel_args, e.step, *extra)
    if isinstance(e, ast.Tuple_):
        return e.items
    return ()


def expand_macros(premises: tuple, macros: dict) -> tuple:
    out: list = []
    for premise in premises:
        if isinstance(premise, ast.MacroRef):
            if premise.name not in macros:
                raise HrtTypeError(f"undefined macro {premise.name}")
            out.extend(expand_macros(macros[premise.name], macros))
        else:
            out.append(premise)
    return tuple(out)


def typecheck_module(mod: ast.Module) -> None:
    Checker(mod).check()
