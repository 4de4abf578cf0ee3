"""Pretty-printer producing parseable specification text."""
from __future__ import annotations

from . import ast


def _atom(e) -> bool:
    return isinstance(e, (ast.Var, ast.Num, ast.BoolLit, ast.Cons, ast.Apply))


def p(e) -> str:
    text = pretty_expr(e)
    return text if _atom(e) else f"({text})"


def _operand(e) -> str:
    # select/store operands are juxtaposed, so anything beyond a bare
    # variable or literal needs parentheses to reparse unambiguously.
    text = pretty_expr(e)
    if isinstance(e, (ast.Var, ast.Num, ast.BoolLit)):
        return text
    return f"({text})"


def pretty_expr(e) -> str:
    if isinstance(e, ast.Num):
        return f"~{-e.value}" if e.value < 0 else str(e.value)
    if isinstance(e, ast.BoolLit):
        return "true" if e.value else "false"
    if isinstance(e, ast.Var):
        return e.name
    if isinstance(e, ast.BinExpr):
        return f"{p(e.left)} {e.op} {p(e.right)}"
    if isinstance(e, ast.Tilde):
        return f"~{p(e.operand)}"
    if isinstance(e, ast.Ite):
        return f"{p(e.cond)} ? {p(e.then)} : {p(e.els)}"
    if isinstance(e, ast.Select):
        return f"select {_operand(e.array)} {_operand(e.index)}"
    if isinstance(e, ast.StoreExpr):
        return f"store {_operand(e.array)} {_operand(e.index)} {_operand(e.value)}"
    if isinstance(e, ast.ConstArr):
        return f"[{pretty_expr(e.elem)}]"
    if isinstance(e, ast.Cons):
        if e.args:
            return f"{e.name}({', '.join(pretty_expr(a) for a in e.args)})"
        return e.name
    if isinstance(e, ast.Match):
        scrut = ", ".join(pretty_expr(s) for s in e.scrutinees)
        if len(e.scrutinees) > 1:
            scrut = f"({scrut})"
        arms = " ".join(pretty_arm(arm) for arm in e.arms)
        return f"match {scrut} with {arms}"
    if isinstance(e, ast.Apply):
        cargs = f"{{{', '.join(pretty_expr(a) for a in e.cargs)}}}" if e.cargs else ""
        return f"{e.name}{cargs}({', '.join(pretty_expr(a) for a in e.args)})"
    if isinstance(e, ast.SumExpr):
        binders = ", ".join(f"{n}: {t}" for n, t in e.binders)
        args = ", ".join(pretty_expr(a) for a in e.sel_args)
        head = f"for ({binders}) in {e.sel}({args}): "
        if e.kind == "fold":
            name, typ = e.accum
            return f"{head}{name}: {typ} -> {p(e.step)}, {p(e.seed)}"
        return f"{head}{e.kind} {p(e.step)}"
    if isinstance(e, ast.MacroRef):
        return e.name
    if isinstance(e, ast.Tuple_):
        return f"({', '.join(pretty_expr(i) for i in e.items)})"
    raise TypeError(f"cannot print {e!r}")


def pretty_arm(arm: ast.Arm) -> str:
    if arm.patterns is None:
        pat = "_"
    else:
        parts = [pretty_pattern(x) for x in arm.patterns]
        pat = f"({', '.join(parts)})" if len(parts) > 1 else parts[0]
    return f"| {pat} => {p(arm.body)}"


def pretty_pattern(pat) -> str:
    if isinstance(pat, ast.PAny):
        return "_"
    if isinstance(pat, ast.PLit):
        if isinstance(pat.value, bool):
            return "true" if pat.value else "false"
        return f"~{-pat.value}" if pat.value < 0 else str(pat.value)
    if pat.binders:
        return f"{pat.name}({', '.join(b if b is not None else '_' for b in pat.binders)})"
    return pat.name


def pretty_quants(quants: tuple) -> str:
    if not quants:
        return ""
    parts = []
    for quant in quants:
        binders = ", ".join(f"{n}: {t}" for n, t in quant.binders)
        args = ", ".join(pretty_expr(a) for a in quant.args)
        parts.append(f"({binders}) in {quant.sel}({args})")
    return "for " + ",\n    ".join(parts) + "\n"


def pretty_vars(variables: tuple) -> str:
    if not variables:
        return ""
    return "[" + ", ".join(f"{n}: {t}" for n, t in variables) + "]\n"


def pretty_premises(premises: tuple) -> str:
    return ",\n  ".join(pretty_expr(x) for x in premises)


def pretty_decl(decl) -> str:
    if isinstance(decl, ast.Datatype):
        ctors = []
        for cname, payload in decl.constructors:
            if payload:
                ctors.append(f"{cname}<{'*'.join(str(t) for t in payload)}>")
            else:
                ctors.append(cname)
        return f"datatype {decl.name} := {' | '.join(ctors)};"
    if isinstance(decl, ast.PredDecl):
        params = "*".join(str(t) for t in decl.params)
        args = " * ".join(str(t) for t in decl.args)
        return f"pred {decl.name}{{{params}}}: {args};"
    if isinstance(decl, ast.SelDecl):
        dom = " * ".join(str(t) for t in decl.dom) if decl.dom else "unit"
        cod = "*".join(str(t) for t in decl.cod)
        return f"sel {decl.name}: {dom} -> [{cod}];"
    if isinstance(decl, ast.OpDef):
        cparams = ""
        if decl.cparams:
            cparams = "{" + ", ".join(f"{n}: {t}" for n, t in decl.cparams) + "}"
        params = ", ".join(f"{n}: {t}" for n, t in decl.params)
        return f"op {decl.name}{cparams}({params}): {decl.ret} := {pretty_expr(decl.body)};"
    if isinstance(decl, ast.RuleDef):
        parts = [f"rule {decl.name} :=\n{pretty_quants(decl.quants)}"]
        if decl.macros:
            macro_text = " ".join(
                f"macro {name} := {pretty_premises(premises)}" for name, premises in decl.macros
            )
            parts.append(f"let {macro_text} in\n")
        clause_texts = []
        for clause in decl.clauses:
            concl = pretty_expr(clause.conclusion)
            clause_texts.append(
                f"clause {pretty_vars(clause.variables)}"
                f"  {pretty_premises(clause.premises)}\n  => {concl}"
            )
        parts.append(",\n".join(clause_texts) + ";")
        return "".join(parts)
    if isinstance(decl, ast.QueryDef):
        return (
            f"query {decl.name}\n{pretty_quants(decl.quants)}"
            f"{pretty_vars(decl.variables)}  {pretty_premises(decl.premises)};"
        )
    if isinstance(decl, ast.TestDef):
        return (
            f"test {decl.name} expect {decl.expect}\n{pretty_quants(decl.quants)}"
            f"{pretty_vars(decl.variables)}  {pretty_premises(decl.premises)};"
        )
    raise TypeError(f"cannot print {decl!r}")


def pretty_module(mod: ast.Module) -> str:
    return "\n".join(pretty_decl(d) for d in mod.declarations()) + "\n"
