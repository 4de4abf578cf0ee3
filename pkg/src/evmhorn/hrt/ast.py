"""Abstract syntax for the Horn-clause specification language.

The same expression nodes serve as the clause IR throughout the pipeline:
instantiation replaces parameters with literals and inlines op macros,
value encoding rewrites sum-typed nodes away, and the backend renders the
remaining primitive nodes to smt-lib or evaluates them directly.
"""
from __future__ import annotations

from dataclasses import dataclass, field


# --------------------------------------------------------------------------
# Types

@dataclass(frozen=True)
class TInt:
    def __str__(self) -> str:
        return "int"


@dataclass(frozen=True)
class TBool:
    def __str__(self) -> str:
        return "bool"


@dataclass(frozen=True)
class TUnit:
    def __str__(self) -> str:
        return "unit"


@dataclass(frozen=True)
class TArray:
    elem: "Type"

    def __str__(self) -> str:
        return f"array<{self.elem}>"


@dataclass(frozen=True)
class TSum:
    name: str

    def __str__(self) -> str:
        return self.name


Type = "TInt | TBool | TUnit | TArray | TSum"
INT = TInt()
BOOL = TBool()
UNIT = TUnit()


# --------------------------------------------------------------------------
# Expressions

@dataclass(frozen=True)
class Var:
    name: str  # keeps its sigil: "?x", "!p", or a bare binder name


@dataclass(frozen=True)
class Num:
    value: int


@dataclass(frozen=True)
class BoolLit:
    value: bool


@dataclass(frozen=True)
class BinExpr:
    op: str  # = != < > <= >= + - * mod div && ||
    left: "Expr"
    right: "Expr"


@dataclass(frozen=True)
class Tilde:
    """Logical negation on bool, numeric negation on int."""

    operand: "Expr"


@dataclass(frozen=True)
class Ite:
    cond: "Expr"
    then: "Expr"
    els: "Expr"


@dataclass(frozen=True)
class Select:
    array: "Expr"
    index: "Expr"


@dataclass(frozen=True)
class StoreExpr:
    array: "Expr"
    index: "Expr"
    value: "Expr"


@dataclass(frozen=True)
class ConstArr:
    elem: "Expr"


@dataclass(frozen=True)
class Tuple_:
    items: tuple  # only valid as a match scrutinee


@dataclass(frozen=True)
class Cons:
    name: str  # constructor name including '@'
    args: tuple = ()


@dataclass(frozen=True)
class PCons:
    name: str
    binders: tuple = ()  # binder names; None entries are wildcards


@dataclass(frozen=True)
class PAny:
    pass


@dataclass(frozen=True)
class PLit:
    value: object  # int or bool literal pattern


@dataclass(frozen=True)
class Arm:
    patterns: tuple | None  # None = the catch-all "_" arm
    body: "Expr"


@dataclass(frozen=True)
class Match:
    scrutinees: tuple
    arms: tuple


@dataclass(frozen=True)
class Apply:
    """Application ``name{cargs}(args)``.

    Covers op applications and predicate applications; the binder resolves
    predicate names after parsing.
    """

    name: str
    cargs: tuple = ()
    args: tuple = ()


@dataclass(frozen=True)
class PredApp:
    name: str
    params: tuple = ()
    args: tuple = ()


@dataclass(frozen=True)
class MacroRef:
    name: str  # includes '#'


@dataclass(frozen=True)
class SumExpr:
    """Reduction over a selector sequence.

    ``kind`` is one of ``&& || + *`` for builtin reductions, or ``fold``
    for the generalized form with an explicit accumulator and seed.
    """

    binders: tuple  # ((name, Type), ...)
    sel: str
    sel_args: tuple
    kind: str
    accum: tuple | None = None  # (name, Type) for folds
    step: "Expr" = None  # type: ignore[assignment]
    seed: "Expr | None" = None


Expr = (
    "Var | Num | BoolLit | BinExpr | Tilde | Ite | Select | StoreExpr | ConstArr"
    " | Tuple_ | Cons | Match | Apply | PredApp | SumExpr"
)


# --------------------------------------------------------------------------
# Declarations

@dataclass(frozen=True)
class Datatype:
    name: str
    constructors: tuple  # ((name-with-@, payload types), ...)


@dataclass(frozen=True)
class PredDecl:
    name: str
    params: tuple  # parameter types
    args: tuple  # argument types


@dataclass(frozen=True)
class OpDef:
    name: str
    cparams: tuple  # ((name-with-!, Type), ...) compile-time parameters
    params: tuple  # ((name, Type), ...)
    ret: "Type"
    body: "Expr"


@dataclass(frozen=True)
class SelDecl:
    name: str
    dom: tuple  # () for unit
    cod: tuple


@dataclass(frozen=True)
class Quant:
    binders: tuple  # ((name-with-!, Type), ...)
    sel: str
    args: tuple


@dataclass(frozen=True)
class ClauseDef:
    variables: tuple  # ((name-with-?, Type), ...)
    premises: tuple
    conclusion: "PredApp | Apply | None"


@dataclass(frozen=True)
class RuleDef:
    name: str
    quants: tuple
    macros: tuple  # ((name-with-#, premises), ...)
    clauses: tuple


@dataclass(frozen=True)
class QueryDef:
    name: str
    quants: tuple
    variables: tuple
    premises: tuple


@dataclass(frozen=True)
class TestDef:
    name: str
    expect: str  # "SAT" | "UNSAT"
    quants: tuple
    variables: tuple
    premises: tuple


@dataclass
class Module:
    datatypes: dict[str, Datatype] = field(default_factory=dict)
    preds: dict[str, PredDecl] = field(default_factory=dict)
    ops: dict[str, OpDef] = field(default_factory=dict)
    sels: dict[str, SelDecl] = field(default_factory=dict)
    rules: list[RuleDef] = field(default_factory=list)
    queries: list[QueryDef] = field(default_factory=list)
    tests: list[TestDef] = field(default_factory=list)

    def constructor_owner(self, cname: str) -> Datatype | None:
        for dt in self.datatypes.values():
            if any(c == cname for c, _ in dt.constructors):
                return dt
        return None

    def declarations(self) -> list:
        out: list = []
        out.extend(self.datatypes.values())
        out.extend(self.preds.values())
        out.extend(self.sels.values())
        out.extend(self.ops.values())
        out.extend(self.rules)
        out.extend(self.queries)
        out.extend(self.tests)
        return out
