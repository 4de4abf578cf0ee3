"""Lowering algebraic values to solver-friendly scalar slots.

Each sum-typed position becomes a discriminant slot plus one slot per
constructor payload field; arrays over sums become one array per slot.
Matches are compiled to nested conditionals over discriminants, and
(in)equalities on structured values become slot-wise conjunctions.

Constructors are numbered in declaration order.  Two-constructor types use
a boolean discriminant (first constructor = false), larger ones an integer.
Payload slots of the constructors that are *not* selected are pinned to a
canonical zero value, which keeps equal abstract values equal as tuples.
"""
from __future__ import annotations

from dataclasses import dataclass

from ..hrt import ast
from .ir import ClauseSet, GroundClause, Query, SlotGroup

INT = "int"
BOOL = "bool"
AINT = "aint"
ABOOL = "abool"

_ZERO = {INT: ast.Num(0), BOOL: ast.BoolLit(False),
         AINT: ast.ConstArr(ast.Num(0)), ABOOL: ast.ConstArr(ast.BoolLit(False))}


class EncodingError(ValueError):
    pass


@dataclass(frozen=True)
class SumLayout:
    """Slot layout of one sum type: an optional discriminant followed by
    every constructor's payload slots, concatenated in declaration order."""

    name: str
    disc: str | None  # BOOL, INT, or None for single-constructor types
    ctors: tuple  # ((ctor_name, payload_slot_count), ...)
    slots: tuple  # scalar sorts, including the discriminant
    payload_offsets: tuple  # ctor index -> offset of its payload in slots


class Encoder:
    def __init__(self, cs: ClauseSet):
        self.cs = cs
        self.sums: dict[str, SumLayout] = {}
        self._fresh = 0

    # -- layouts -----------------------------------------------------------

    def sum_layout(self, name: str) -> SumLayout:
        layout = self.sums.get(name)
        if layout is None:
            dt = self.cs.datatypes.get(name)
            if dt is None:
                raise EncodingError(f"unknown datatype {name}")
            n = len(dt.constructors)
            disc = None if n == 1 else (BOOL if n == 2 else INT)
            slots: list[str] = [disc] if disc else []
            offsets, ctors = [], []
            for cname, payload in dt.constructors:
                offsets.append(len(slots))
                pslots: list[str] = []
                for t in payload:
                    pslots.extend(self.slots_of(t))
                ctors.append((cname, len(pslots)))
                slots.extend(pslots)
            layout = SumLayout(name, disc, tuple(ctors), tuple(slots), tuple(offsets))
            self.sums[name] = layout
        return layout

    def slots_of(self, typ) -> list[str]:
        if isinstance(typ, ast.TInt):
            return [INT]
        if isinstance(typ, ast.TBool):
            return [BOOL]
        if isinstance(typ, ast.TSum):
            return list(self.sum_layout(typ.name).slots)
        if isinstance(typ, ast.TArray):
            inner = self.slots_of(typ.elem)
            out = []
            for s in inner:
                if s == INT:
                    out.append(AINT)
                elif s == BOOL:
                    out.append(ABOOL)
                else:
                    raise EncodingError("nested arrays are not encodable")
            return out
        raise EncodingError(f"cannot encode type {typ}")

    def disc_value(self, layout: SumLayout, index: int):
        if layout.disc == BOOL:
            return ast.BoolLit(index == 1)
        return ast.Num(index)

    def ctor_index(self, layout: SumLayout, cname: str) -> int:
        for i, (name, _) in enumerate(layout.ctors):
            if name == cname:
                return i
        raise EncodingError(f"{cname} is not a constructor of {layout.name}")

    # -- expressions --------------------------------------------------------

    def enc(self, e, env: dict, typ) -> list:
        """Encode ``e`` (of source type ``typ``) as a list of slot exprs.

        ``env`` maps variable names to their slot expression lists.
        """
        if isinstance(e, ast.Var):
            try:
                return env[e.name]
            except KeyError:
                raise EncodingError(f"unbound variable {e.name}") from None
        if isinstance(e, (ast.Num, ast.BoolLit)):
            return [e]
        if isinstance(e, ast.Cons):
            return self._enc_cons(e, env, typ)
        if isinstance(e, ast.Ite):
            cond = self._enc_scalar(e.cond, env, ast.BOOL)
            then = self.enc(e.then, env, typ)
            els = self.enc(e.els, env, typ)
            return [t if t == f else ast.Ite(cond, t, f) for t, f in zip(then, els)]
        if isinstance(e, ast.Select):
            arrays = self.enc(e.array, env, _array_of(typ))
            index = self._enc_scalar(e.index, env, ast.INT)
            return [ast.Select(a, index) for a in arrays]
        if isinstance(e, ast.StoreExpr):
            arrays = self.enc(e.array, env, typ)
            index = self._enc_scalar(e.index, env, ast.INT)
            values = self.enc(e.value, env, _elem_of(typ))
            return [ast.StoreExpr(a, index, v) for a, v in zip(arrays, values)]
        if isinstance(e, ast.ConstArr):
            elems = self.enc(e.elem, env, _elem_of(typ))
            return [ast.ConstArr(x) for x in elems]
        if isinstance(e, ast.BinExpr):
            return [self._enc_binexpr(e, env)]
        if isinstance(e, ast.Tilde):
            return [ast.Tilde(self._enc_scalar(e.operand, env, None))]
        if isinstance(e, ast.Match):
            return self._enc_match(e, env, typ)
        raise EncodingError(f"cannot encode {type(e).__name__}")

    def _enc_scalar(self, e, env: dict, typ):
        slots = self.enc(e, env, typ)
        if len(slots) != 1:
            raise EncodingError("expected a scalar expression")
        return slots[0]

    def _enc_cons(self, e: ast.Cons, env: dict, typ) -> list:
        name = _sum_name(e, typ, self.cs)
        layout = self.sum_layout(name)
        index = self.ctor_index(layout, e.name)
        dt = self.cs.datatypes[name]
        payload_types = dt.constructors[index][1]
        out: list = [self.disc_value(layout, index)] if layout.disc else []
        for i, (cname, width) in enumerate(layout.ctors):
            if i == index:
                for arg, at in zip(e.args, payload_types):
                    out.extend(self.enc(arg, env, at))
            else:
                base = len(out)
                out.extend(_ZERO[s] for s in layout.slots[base:base + width])
        return out

    def _enc_binexpr(self, e: ast.BinExpr, env: dict):
        if e.op in ("=", "!="):
            left = self.enc(e.left, env, None)
            right = self.enc(e.right, env, None)
            if len(left) != len(right):
                raise EncodingError("equality between differently-shaped values")
            eq = None
            for a, b in zip(left, right):
                part = a if b == ast.BoolLit(True) and e.op == "=" else ast.BinExpr("=", a, b)
                eq = part if eq is None else ast.BinExpr("&&", eq, part)
            if eq is None:
                eq = ast.BoolLit(True)
            return ast.Tilde(eq) if e.op == "!=" else eq
        return ast.BinExpr(e.op, self._enc_scalar(e.left, env, None),
                           self._enc_scalar(e.right, env, None))

    def _enc_match(self, e: ast.Match, env: dict, typ) -> list:
        scruts = [self.enc(s, env, None) for s in e.scrutinees]
        scrut_layouts = [self._infer_layout(s) for s in e.scrutinees]
        branches = []  # (condition-or-None, slot list)
        for arm in e.arms:
            cond, bound = self._arm_condition(arm.patterns, scruts, scrut_layouts, e, env)
            body = self.enc(arm.body, {**env, **bound}, typ)
            branches.append((cond, body))
        # Arms are tried in order; the final arm serves as the default.
        result = branches[-1][1]
        for cond, body in reversed(branches[:-1]):
            if cond is None:
                result = body
                continue
            result = [b if b == r else ast.Ite(cond, b, r) for b, r in zip(body, result)]
        return result

    def _infer_layout(self, scrut) -> SumLayout | None:
        """Layout of a match scrutinee, from the patterns' constructors."""
        return None  # resolved per-pattern in _arm_condition

    def _arm_condition(self, patterns, scruts, layouts, match_expr, env):
        if patterns is None:
            return None, {}
        cond = None
        bound: dict = {}
        for pat, slots in zip(patterns, scruts):
            test = None
            if isinstance(pat, ast.PAny):
                continue
            if isinstance(pat, ast.PLit):
                want = (ast.BoolLit(pat.value) if isinstance(pat.value, bool)
                        else ast.Num(pat.value))
                test = ast.BinExpr("=", slots[0], want)
            else:
                owner = self.cs.datatypes.get(_owner_of(pat.name, self.cs))
                if owner is None:
                    raise EncodingError(f"unknown constructor {pat.name}")
                layout = self.sum_layout(owner.name)
                index = self.ctor_index(layout, pat.name)
                offset = layout.payload_offsets[index]
                if layout.disc is not None:
                    test = ast.BinExpr("=", slots[0], self.disc_value(layout, index))
                # Bind payload binders to the constructor's payload slots.
                payload_types = owner.constructors[index][1]
                pos = offset
                for binder, ptype in zip(pat.binders, payload_types):
                    width = len(self.slots_of(ptype))
                    if binder is not None:
                        bound[binder] = slots[pos:pos + width]
                    pos += width
            if test is not None:
                cond = test if cond is None else ast.BinExpr("&&", cond, test)
        return cond, bound

    # -- clauses -------------------------------------------------------------

    def encode_pred_app(self, app: ast.PredApp, env: dict) -> ast.PredApp:
        sig = self.cs.preds[app.name]
        args: list = []
        for arg, typ in zip(app.args, sig):
            args.extend(self.enc(arg, env, typ))
        return ast.PredApp(app.name, app.params, tuple(args))

    def encode_clause(self, clause: GroundClause) -> GroundClause:
        env: dict = {}
        variables: list = []
        for name, typ in clause.variables:
            slots = self.slots_of(typ)
            if len(slots) == 1:
                names = [name]
            else:
                names = [f"{name}${i}" for i in range(len(slots))]
            env[name] = [ast.Var(n) for n in names]
            variables.extend(zip(names, slots))
        premises = []
        for p in clause.premises:
            if isinstance(p, ast.PredApp):
                premises.append(self.encode_pred_app(p, env))
            else:
                premises.append(self._enc_scalar(p, env, ast.BOOL))
        head = self.encode_pred_app(clause.head, env) if clause.head else None
        return GroundClause(clause.name, tuple(variables), tuple(premises), head)


def _array_of(typ):
    return ast.TArray(typ) if typ is not None else None


def _elem_of(typ):
    if isinstance(typ, ast.TArray):
        return typ.elem
    return None


def _sum_name(e: ast.Cons, typ, cs: ClauseSet) -> str:
    if isinstance(typ, ast.TSum):
        return typ.name
    name = _owner_of(e.name, cs)
    if name is None:
        raise EncodingError(f"unknown constructor {e.name}")
    return name


def _owner_of(cname: str, cs: ClauseSet) -> str | None:
    for dt in cs.datatypes.values():
        if any(name == cname for name, _ in dt.constructors):
            return dt.name
    return None


def encode_values(cs: ClauseSet) -> ClauseSet:
    """Rewrite a clause set so that only int/bool scalars and arrays remain."""
    if cs.encoded:
        return cs
    enc = Encoder(cs)
    out = ClauseSet(preds={}, datatypes=dict(cs.datatypes), encoded=True)
    for name, sig in cs.preds.items():
        slots: list = []
        groups: list = []
        for i, typ in enumerate(sig):
            part = enc.slots_of(typ)
            groups.append(SlotGroup(i, typ, tuple(range(len(slots), len(slots) + len(part)))))
            slots.extend(part)
        out.preds[name] = tuple(slots)
        out.layouts[name] = groups
    for clause in cs.clauses:
        out.clauses.append(enc.encode_clause(clause))
    for query in cs.queries:
        out.queries.append(Query(query.name, enc.encode_clause(query.clause), query.expect))
    return out
