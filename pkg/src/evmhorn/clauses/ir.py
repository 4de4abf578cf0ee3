"""Ground Horn-clause representation shared by the instantiator, the
optimization passes, and the backends.

Expressions reuse the specification-language AST nodes, but after
instantiation they are *ground*: no parameter variables, no macro
references, no op applications, and no selector comprehensions remain.
Only clause variables (``?x``), literals, arithmetic, arrays, constructor
values, and matches are left.
"""
from __future__ import annotations

from dataclasses import dataclass, field

from ..hrt import ast


@dataclass(frozen=True)
class GroundClause:
    """A single Horn clause: premises imply one predicate application.

    A ``None`` head marks a goal clause (head "false"); deriving its body
    answers the associated query.
    """

    name: str
    variables: tuple  # ((var_name, Type), ...)
    premises: tuple  # expressions of type bool, or ast.PredApp
    head: ast.PredApp | None

    def pred_premises(self) -> tuple[ast.PredApp, ...]:
        return tuple(p for p in self.premises if isinstance(p, ast.PredApp))

    def constraint_premises(self) -> tuple:
        return tuple(p for p in self.premises if not isinstance(p, ast.PredApp))


@dataclass(frozen=True)
class Query:
    """A reachability question: is the body of ``clause`` derivable?"""

    name: str
    clause: GroundClause
    expect: str | None = None  # "SAT"/"UNSAT" for self-checking test decls


@dataclass
class SlotGroup:
    """How a block of encoded predicate argument slots maps back to one
    argument of the declared predicate."""

    source_index: int
    source_type: object  # ast type of the original argument
    slots: tuple[int, ...]  # indices into the encoded argument vector


@dataclass
class ClauseSet:
    """A set of ground clauses plus everything needed to interpret them."""

    preds: dict[str, tuple]  # mangled name -> argument sort tuple
    clauses: list[GroundClause] = field(default_factory=list)
    queries: list[Query] = field(default_factory=list)
    datatypes: dict[str, object] = field(default_factory=dict)
    # Filled in by the value-encoding pass: mangled name -> [SlotGroup, ...]
    layouts: dict[str, list[SlotGroup]] = field(default_factory=dict)
    encoded: bool = False

    def clauses_for_head(self, pred: str) -> list[GroundClause]:
        return [c for c in self.clauses if c.head is not None and c.head.name == pred]

    def clauses_using(self, pred: str) -> list[GroundClause]:
        out = []
        for c in self.clauses:
            if any(p.name == pred for p in c.pred_premises()):
                out.append(c)
        return out


def mangle(base: str, params: tuple) -> str:
    """Predicate name for one concrete parameter tuple."""
    if not params:
        return base
    parts = []
    for p in params:
        if isinstance(p, bool):
            parts.append("t" if p else "f")
        elif p < 0:
            parts.append(f"n{-p}")
        else:
            parts.append(str(p))
    return base + "_" + "_".join(parts)
